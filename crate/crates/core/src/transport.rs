//! Conservative transport of `η = ω/x2`.
//!
//! Cell `c` holds `η_c` with "volume" `V_c = x2_c h²`, so `Σ V η` is the
//! vorticity mass. Advective face fluxes are differences of the corner
//! stream function, which makes them exactly divergence free. Advection is
//! flux-corrected (donor cell / third-order upwind, Zalesak limiter) inside
//! three-stage SSP Runge–Kutta; diffusion with the `−2ν η e2` drift is an
//! explicit five-point scheme in flux form.

use crate::grid::Grid;

/// Face fluxes `∫ x2 u·n` for one window.
#[derive(Debug, Clone, PartialEq)]
pub struct Fluxes {
    pub nz: usize,
    pub nr: usize,
    /// Through x-faces, `(nz+1) × nr`, positive towards +x1.
    pub phix: Vec<f64>,
    /// Through y-faces, `nz × (nr+1)`, positive towards +x2.
    pub phiy: Vec<f64>,
}

impl Fluxes {
    pub fn from_stream(grid: &Grid, psi: &[f64]) -> Self {
        let (nz, nr) = (grid.nz, grid.nr);
        let row = nz + 1;
        let mut phix = vec![0.0; (nz + 1) * nr];
        let mut phiy = vec![0.0; nz * (nr + 1)];
        for j in 0..nr {
            for ix in 0..=nz {
                phix[j * (nz + 1) + ix] = psi[(j + 1) * row + ix] - psi[j * row + ix];
            }
        }
        for jy in 0..=nr {
            for i in 0..nz {
                phiy[jy * nz + i] = -(psi[jy * row + i + 1] - psi[jy * row + i]);
            }
        }
        Self { nz, nr, phix, phiy }
    }

    /// `max_c Σ_out Φ / V_c`: the donor-cell step is monotone for
    /// `dt` times this at most 1.
    pub fn outflow_rate(&self, grid: &Grid) -> f64 {
        let (nz, nr) = (self.nz, self.nr);
        let h2 = grid.cell_area();
        let mut worst = 0.0f64;
        for j in 0..nr {
            let inv_v = 1.0 / (grid.x2(j) * h2);
            for i in 0..nz {
                let l = self.phix[j * (nz + 1) + i];
                let r = self.phix[j * (nz + 1) + i + 1];
                let b = self.phiy[j * nz + i];
                let t = self.phiy[(j + 1) * nz + i];
                let out = (-l).max(0.0) + r.max(0.0) + (-b).max(0.0) + t.max(0.0);
                worst = worst.max(out * inv_v);
            }
        }
        worst
    }
}

/// Scratch buffers for the advection and diffusion updates.
#[derive(Debug, Clone, Default)]
pub struct Transport {
    s1: Vec<f64>,
    s2: Vec<f64>,
    s3: Vec<f64>,
    td: Vec<f64>,
    lo_x: Vec<f64>,
    lo_y: Vec<f64>,
    ax: Vec<f64>,
    ay: Vec<f64>,
    pp: Vec<f64>,
    pm: Vec<f64>,
    qmax: Vec<f64>,
    qmin: Vec<f64>,
}

#[inline]
fn third_order(far: f64, up: f64, down: f64) -> f64 {
    (-far + 5.0 * up + 2.0 * down) / 6.0
}

impl Transport {
    pub fn new() -> Self {
        Self::default()
    }

    fn ensure(&mut self, nz: usize, nr: usize) {
        let n = nz * nr;
        if self.s1.len() != n {
            for v in [&mut self.s1, &mut self.s2, &mut self.s3, &mut self.td, &mut self.pp, &mut self.pm, &mut self.qmax, &mut self.qmin] {
                *v = vec![0.0; n];
            }
            self.lo_x = vec![0.0; (nz + 1) * nr];
            self.ax = vec![0.0; (nz + 1) * nr];
            self.lo_y = vec![0.0; nz * (nr + 1)];
            self.ay = vec![0.0; nz * (nr + 1)];
        }
    }

    /// One SSP-RK3 advection step of `eta` over `dt` with frozen fluxes.
    /// Returns the mass carried out through the window boundary.
    pub fn advect(&mut self, grid: &Grid, fl: &Fluxes, dt: f64, eta: &mut [f64]) -> f64 {
        self.ensure(grid.nz, grid.nr);
        let mut s1 = std::mem::take(&mut self.s1);
        let mut s2 = std::mem::take(&mut self.s2);
        let mut out = 0.0;
        out += self.fct_stage(grid, fl, dt, eta, &mut s1);
        let mut st = std::mem::take(&mut self.s3);
        let w1 = self.fct_stage(grid, fl, dt, &s1, &mut st);
        for k in 0..eta.len() {
            s2[k] = 0.75 * eta[k] + 0.25 * st[k];
        }
        let w2 = self.fct_stage(grid, fl, dt, &s2, &mut st);
        for k in 0..eta.len() {
            eta[k] = eta[k] / 3.0 + 2.0 / 3.0 * st[k];
        }
        out = out / 6.0 + w1 / 6.0 + 2.0 / 3.0 * w2;
        self.s1 = s1;
        self.s2 = s2;
        self.s3 = st;
        out
    }

    /// Forward-Euler flux-corrected stage `out = eta − dt/V ∇·F`.
    /// Returns the mass leaving through the window boundary.
    fn fct_stage(&mut self, grid: &Grid, fl: &Fluxes, dt: f64, eta: &[f64], out: &mut [f64]) -> f64 {
        let (nz, nr) = (grid.nz, grid.nr);
        let get = |i: isize, j: usize| -> f64 {
            if i < 0 || i >= nz as isize {
                0.0
            } else {
                eta[j * nz + i as usize]
            }
        };
        let get_y = |i: usize, j: isize| -> f64 {
            if j < 0 || j >= nr as isize {
                0.0
            } else {
                eta[j as usize * nz + i]
            }
        };

        // Low-order fluxes and antidiffusive corrections.
        for j in 0..nr {
            for ix in 0..=nz {
                let k = j * (nz + 1) + ix;
                let phi = fl.phix[k];
                let (l, r) = (ix as isize - 1, ix as isize);
                let (lo, hi) = if phi >= 0.0 {
                    (get(l, j), third_order(get(l - 1, j), get(l, j), get(r, j)))
                } else {
                    (get(r, j), third_order(get(r + 1, j), get(r, j), get(l, j)))
                };
                self.lo_x[k] = phi * lo;
                self.ax[k] = if ix == 0 || ix == nz { 0.0 } else { phi * (hi - lo) };
            }
        }
        for jy in 0..=nr {
            for i in 0..nz {
                let k = jy * nz + i;
                let phi = fl.phiy[k];
                let (b, t) = (jy as isize - 1, jy as isize);
                let (lo, hi) = if phi >= 0.0 {
                    (get_y(i, b), third_order(get_y(i, b - 1), get_y(i, b), get_y(i, t)))
                } else {
                    (get_y(i, t), third_order(get_y(i, t + 1), get_y(i, t), get_y(i, b)))
                };
                self.lo_y[k] = phi * lo;
                self.ay[k] = if jy == 0 || jy == nr { 0.0 } else { phi * (hi - lo) };
            }
        }

        let h2 = grid.cell_area();
        let mut boundary = 0.0;
        for j in 0..nr {
            boundary += self.lo_x[j * (nz + 1) + nz] - self.lo_x[j * (nz + 1)];
        }
        for i in 0..nz {
            boundary += self.lo_y[nr * nz + i] - self.lo_y[i];
        }

        // Low-order update.
        for j in 0..nr {
            let c = dt / (grid.x2(j) * h2);
            for i in 0..nz {
                let k = j * nz + i;
                let div = self.lo_x[j * (nz + 1) + i + 1] - self.lo_x[j * (nz + 1) + i] + self.lo_y[(j + 1) * nz + i]
                    - self.lo_y[j * nz + i];
                self.td[k] = eta[k] - c * div;
            }
        }

        // Zalesak limiter.
        let td = &self.td;
        let both = |i: isize, j: isize| -> (f64, f64) {
            if i < 0 || j < 0 || i >= nz as isize || j >= nr as isize {
                (0.0, 0.0)
            } else {
                let k = j as usize * nz + i as usize;
                (eta[k].max(td[k]), eta[k].min(td[k]))
            }
        };
        for j in 0..nr {
            let vol = grid.x2(j) * h2;
            for i in 0..nz {
                let k = j * nz + i;
                let (ii, jj) = (i as isize, j as isize);
                let mut mx = f64::NEG_INFINITY;
                let mut mn = f64::INFINITY;
                for (di, dj) in [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)] {
                    let (a, b) = both(ii + di, jj + dj);
                    mx = mx.max(a);
                    mn = mn.min(b);
                }
                let axl = self.ax[j * (nz + 1) + i];
                let axr = self.ax[j * (nz + 1) + i + 1];
                let ayb = self.ay[j * nz + i];
                let ayt = self.ay[(j + 1) * nz + i];
                let inflow = axl.max(0.0) - axr.min(0.0) + ayb.max(0.0) - ayt.min(0.0);
                let outflow = axr.max(0.0) - axl.min(0.0) + ayt.max(0.0) - ayb.min(0.0);
                let qp = (mx - td[k]) * vol / dt;
                let qm = (td[k] - mn) * vol / dt;
                self.pp[k] = if inflow > 0.0 { (qp / inflow).min(1.0) } else { 0.0 };
                self.pm[k] = if outflow > 0.0 { (qm / outflow).min(1.0) } else { 0.0 };
            }
        }
        for j in 0..nr {
            for ix in 1..nz {
                let k = j * (nz + 1) + ix;
                let a = self.ax[k];
                let (l, r) = (j * nz + ix - 1, j * nz + ix);
                let coef = if a >= 0.0 { self.pp[r].min(self.pm[l]) } else { self.pp[l].min(self.pm[r]) };
                self.ax[k] = a * coef;
            }
        }
        for jy in 1..nr {
            for i in 0..nz {
                let k = jy * nz + i;
                let a = self.ay[k];
                let (b, t) = ((jy - 1) * nz + i, jy * nz + i);
                let coef = if a >= 0.0 { self.pp[t].min(self.pm[b]) } else { self.pp[b].min(self.pm[t]) };
                self.ay[k] = a * coef;
            }
        }

        for j in 0..nr {
            let c = dt / (grid.x2(j) * h2);
            for i in 0..nz {
                let k = j * nz + i;
                let div = self.ax[j * (nz + 1) + i + 1] - self.ax[j * (nz + 1) + i] + self.ay[(j + 1) * nz + i]
                    - self.ay[j * nz + i];
                out[k] = self.td[k] - c * div;
            }
        }
        boundary * dt
    }

    /// Explicit step of `∂t(x2 η) = ∇·(ν x2 ∇η + 2ν η e2)`.
    ///
    /// Returns `(axis, boundary)`: mass lost through an axis face and through
    /// the open window edges.
    pub fn diffuse(&mut self, grid: &Grid, nu: f64, dt: f64, eta: &mut [f64]) -> (f64, f64) {
        if nu == 0.0 {
            return (0.0, 0.0);
        }
        self.ensure(grid.nz, grid.nr);
        let (nz, nr) = (grid.nz, grid.nr);
        let h = grid.spacing;
        let h2 = grid.cell_area();
        // Upward flux through horizontal faces (reuses lo_y).
        let fy = &mut self.lo_y;
        for jy in 0..=nr {
            let xf = grid.node_x2(jy);
            for i in 0..nz {
                let below = if jy > 0 { eta[(jy - 1) * nz + i] } else { 0.0 };
                let above = if jy < nr { eta[jy * nz + i] } else { 0.0 };
                let face = if xf >= h { 0.5 * (below + above) } else { above };
                fy[jy * nz + i] = -nu * xf * (above - below) - 2.0 * nu * h * face;
            }
        }
        let fx = &mut self.lo_x;
        for j in 0..nr {
            let x2 = grid.x2(j);
            for ix in 0..=nz {
                let left = if ix > 0 { eta[j * nz + ix - 1] } else { 0.0 };
                let right = if ix < nz { eta[j * nz + ix] } else { 0.0 };
                fx[j * (nz + 1) + ix] = -nu * x2 * (right - left);
            }
        }
        let mut axis = 0.0;
        let mut boundary = 0.0;
        for i in 0..nz {
            let bottom = -self.lo_y[i];
            if grid.r_min == 0.0 {
                axis += bottom;
            } else {
                boundary += bottom;
            }
            boundary += self.lo_y[nr * nz + i];
        }
        for j in 0..nr {
            boundary += self.lo_x[j * (nz + 1) + nz] - self.lo_x[j * (nz + 1)];
        }
        for j in 0..nr {
            let c = dt / (grid.x2(j) * h2);
            for i in 0..nz {
                let k = j * nz + i;
                let div = self.lo_x[j * (nz + 1) + i + 1] - self.lo_x[j * (nz + 1) + i] + self.lo_y[(j + 1) * nz + i]
                    - self.lo_y[j * nz + i];
                eta[k] -= c * div;
            }
        }
        (axis * dt, boundary * dt)
    }
}

/// Largest `−dt · diag / V` of the diffusion update over all rows; the
/// scheme is monotone when this is at most 1.
pub fn diffusion_number(grid: &Grid, nu: f64, dt: f64) -> f64 {
    let h = grid.spacing;
    let h2 = grid.cell_area();
    let mut worst = 0.0f64;
    for j in 0..grid.nr {
        let x2 = grid.x2(j);
        let (up, dn) = (grid.node_x2(j + 1), grid.node_x2(j));
        let above = nu * (up - h);
        let below = if dn >= h { nu * (dn + h) } else { nu * (dn + 2.0 * h) };
        let diag = 2.0 * nu * x2 + above + below;
        worst = worst.max(dt * diag / (x2 * h2));
    }
    worst
}
