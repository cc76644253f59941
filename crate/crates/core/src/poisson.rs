//! Direct solver for `∇·(x2⁻¹ ∇Ψ) = −ω` on the corner nodes of a window.
//!
//! The operator is discretised conservatively, multiplied through by
//! `x2 h²`:
//!
//! ```text
//! Ψ[i+1] − 2Ψ + Ψ[i−1] + x2/x2⁺ (Ψ[j+1] − Ψ) − x2/x2⁻ (Ψ − Ψ[j−1]) = −x2 h² ω
//! ```
//!
//! with `x2±` the radii of the half-way points. Dirichlet data on the outer
//! node ring. A sine transform in x1 decouples the system into one
//! tridiagonal solve per mode.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;
use crate::{Error, Result};

/// Accepted relative residual of the direct solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

pub struct PoissonSolver {
    nz: usize,
    nr: usize,
    spacing: f64,
    r_min: f64,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
    /// Second-difference eigenvalues, modes `1..nz`.
    eig: Vec<f64>,
    /// `x2/x2⁻` and `x2/x2⁺` for node rows `1..nr`.
    c_dn: Vec<f64>,
    c_up: Vec<f64>,
    work: Vec<f64>,
    cprime: Vec<f64>,
}

impl std::fmt::Debug for PoissonSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PoissonSolver").field("nz", &self.nz).field("nr", &self.nr).finish()
    }
}

impl PoissonSolver {
    pub fn new(grid: &Grid) -> Result<Self> {
        let (nz, nr) = (grid.nz, grid.nr);
        if nz < 2 || nr < 2 {
            return Err(Error::InvalidGrid("elliptic solve needs at least 2×2 cells".into()));
        }
        let fft = FftPlanner::new().plan_fft_forward(2 * nz);
        let scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
        let eig = (1..nz)
            .map(|k| {
                let s = (std::f64::consts::PI * k as f64 / (2.0 * nz as f64)).sin();
                -4.0 * s * s
            })
            .collect();
        let h = grid.spacing;
        let mut c_dn = Vec::with_capacity(nr - 1);
        let mut c_up = Vec::with_capacity(nr - 1);
        for j in 1..nr {
            let x2 = grid.node_x2(j);
            c_dn.push(x2 / (x2 - 0.5 * h));
            c_up.push(x2 / (x2 + 0.5 * h));
        }
        let n_int = (nz - 1) * (nr - 1);
        Ok(Self {
            nz,
            nr,
            spacing: h,
            r_min: grid.r_min,
            fft,
            buf: vec![Complex::default(); 2 * nz],
            scratch,
            eig,
            c_dn,
            c_up,
            work: vec![0.0; n_int],
            cprime: vec![0.0; n_int],
        })
    }

    /// True when `grid` has the geometry this solver was built for
    /// (translations along x1 do not matter).
    pub fn fits(&self, grid: &Grid) -> bool {
        grid.nz == self.nz && grid.nr == self.nr && grid.spacing == self.spacing && grid.r_min == self.r_min
    }

    #[inline]
    fn node(&self, i: usize, j: usize) -> usize {
        j * (self.nz + 1) + i
    }

    fn rhs(&self, omega_nodes: &[f64], i: usize, j: usize) -> f64 {
        let x2 = self.r_min + j as f64 * self.spacing;
        -x2 * self.spacing * self.spacing * omega_nodes[self.node(i, j)]
    }

    fn apply(&self, psi: &[f64], i: usize, j: usize) -> f64 {
        let k = self.node(i, j);
        let row = self.nz + 1;
        let (cd, cu) = (self.c_dn[j - 1], self.c_up[j - 1]);
        psi[k + 1] - 2.0 * psi[k] + psi[k - 1] + cu * (psi[k + row] - psi[k]) - cd * (psi[k] - psi[k - row])
    }

    /// In-place sine transform of `x` (length `nz − 1`), unnormalised.
    fn dst(&mut self, x: &mut [f64]) {
        let n = self.nz;
        self.buf[0] = Complex::default();
        self.buf[n] = Complex::default();
        for (m, &v) in x.iter().enumerate() {
            self.buf[m + 1] = Complex::new(v, 0.0);
            self.buf[2 * n - m - 1] = Complex::new(-v, 0.0);
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        for (k, v) in x.iter_mut().enumerate() {
            *v = -0.5 * self.buf[k + 1].im;
        }
    }

    /// Solves for the interior of `psi` (corner-node array, boundary entries
    /// already set) given the source `omega_nodes` sampled on the nodes.
    /// Returns the relative residual.
    pub fn solve(&mut self, omega_nodes: &[f64], psi: &mut [f64]) -> Result<f64> {
        let (nz, nr) = (self.nz, self.nr);
        let row = nz + 1;
        let n_nodes = row * (nr + 1);
        if omega_nodes.len() != n_nodes || psi.len() != n_nodes {
            return Err(Error::GridMismatch);
        }
        let n = nz - 1;
        let m = nr - 1;
        let mut work = std::mem::take(&mut self.work);
        for jj in 0..m {
            let j = jj + 1;
            let line = &mut work[jj * n..(jj + 1) * n];
            for (ii, v) in line.iter_mut().enumerate() {
                let i = ii + 1;
                let mut f = self.rhs(omega_nodes, i, j);
                if i == 1 {
                    f -= psi[self.node(0, j)];
                }
                if i == nz - 1 {
                    f -= psi[self.node(nz, j)];
                }
                if j == 1 {
                    f -= self.c_dn[0] * psi[self.node(i, 0)];
                }
                if j == nr - 1 {
                    f -= self.c_up[m - 1] * psi[self.node(i, nr)];
                }
                *v = f;
            }
            self.dst(line);
        }

        // Thomas sweep in j, all modes at once.
        let cp = &mut self.cprime;
        for jj in 0..m {
            let (cd, cu) = (self.c_dn[jj], self.c_up[jj]);
            for k in 0..n {
                let diag = self.eig[k] - cd - cu;
                let idx = jj * n + k;
                if jj == 0 {
                    cp[idx] = cu / diag;
                    work[idx] /= diag;
                } else {
                    let denom = diag - cd * cp[idx - n];
                    cp[idx] = cu / denom;
                    work[idx] = (work[idx] - cd * work[idx - n]) / denom;
                }
            }
        }
        for jj in (0..m.saturating_sub(1)).rev() {
            for k in 0..n {
                let idx = jj * n + k;
                work[idx] -= cp[idx] * work[idx + n];
            }
        }

        let norm = 2.0 / nz as f64;
        for jj in 0..m {
            let line = &mut work[jj * n..(jj + 1) * n];
            self.dst(line);
            for (ii, v) in line.iter().enumerate() {
                psi[self.node(ii + 1, jj + 1)] = v * norm;
            }
        }
        self.work = work;

        let mut res = 0.0f64;
        let mut scale = 0.0f64;
        for j in 1..nr {
            for i in 1..nz {
                let f = self.rhs(omega_nodes, i, j);
                res = res.max((self.apply(psi, i, j) - f).abs());
                scale = scale.max(f.abs()).max(4.0 * psi[self.node(i, j)].abs());
            }
        }
        let rel = if scale > 0.0 { res / scale } else { 0.0 };
        if !rel.is_finite() {
            return Err(Error::NonFinite("stream function"));
        }
        if rel > RESIDUAL_TOL {
            return Err(Error::Solver(format!("relative residual {rel:.3e} above {RESIDUAL_TOL:.0e}")));
        }
        Ok(rel)
    }
}

/// Averages cell values onto the corner nodes (cells outside the window
/// count as zero).
pub fn cells_to_nodes(grid: &Grid, cells: &[f64]) -> Vec<f64> {
    let (nz, nr) = (grid.nz, grid.nr);
    let row = nz + 1;
    let mut out = vec![0.0; row * (nr + 1)];
    for j in 0..nr {
        for i in 0..nz {
            let v = 0.25 * cells[j * nz + i];
            if v != 0.0 {
                let k = j * row + i;
                out[k] += v;
                out[k + 1] += v;
                out[k + row] += v;
                out[k + row + 1] += v;
            }
        }
    }
    out
}
