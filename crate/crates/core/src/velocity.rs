//! Velocity reconstruction from vorticity.
//!
//! Fast path: `Ψ` on the corner nodes with Dirichlet data from the Green
//! function summed against 8×8-cell aggregates, then `u = x2⁻¹ ∇⊥Ψ`.
//! Slow path: direct cell sums of the kernel `H`.

use crate::grid::Grid;
use crate::kernels::{h_elliptic_unchecked, s_elliptic_unchecked};
use crate::poisson::{cells_to_nodes, PoissonSolver};
use crate::rings::RingField;
use crate::{Error, Point, Result};

/// Side of the aggregation blocks used for boundary data, in cells.
pub const BLOCK: usize = 8;
/// Largest fraction of `∫|ω|` tolerated within one block of the open edges.
pub const BAND_FRACTION: f64 = 1e-3;
/// Blocks holding less than this fraction of `∫|ω|` are left out of the boundary data.
pub const BLOCK_SKIP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StreamFunction {
    pub grid: Grid,
    /// Corner-node values, `(nz+1) × (nr+1)`, row-major in `j`.
    pub psi: Vec<f64>,
    /// Values on the outer node ring, in node order.
    pub boundary_values: Vec<f64>,
    pub residual: f64,
}

impl StreamFunction {
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> f64 {
        self.psi[j * (self.grid.nz + 1) + i]
    }

    /// Mean of the four corners of cell `(i, j)`.
    #[inline]
    pub fn at_center(&self, i: usize, j: usize) -> f64 {
        0.25 * (self.node(i, j) + self.node(i + 1, j) + self.node(i, j + 1) + self.node(i + 1, j + 1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub grid: Grid,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

impl VelocityField {
    pub fn zeros(grid: &Grid) -> Self {
        Self { grid: grid.clone(), u1: vec![0.0; grid.len()], u2: vec![0.0; grid.len()] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Point {
        let k = self.grid.idx(i, j);
        [self.u1[k], self.u2[k]]
    }

    pub fn max_speed(&self) -> f64 {
        self.u1.iter().zip(&self.u2).fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }
}

/// Sum of the ring vorticities `ω = x2 η` per cell. All fields must share a grid.
pub fn total_omega(fields: &[RingField]) -> Result<(Grid, Vec<f64>)> {
    let first = fields.first().ok_or_else(|| Error::InvalidRing("no ring fields".into()))?;
    let g = first.grid.clone();
    if fields.iter().any(|f| f.grid != g || f.eta.len() != g.len()) {
        return Err(Error::GridMismatch);
    }
    let mut omega = vec![0.0; g.len()];
    for f in fields {
        add_omega(f, &mut omega);
    }
    Ok((g, omega))
}

fn add_omega(f: &RingField, omega: &mut [f64]) {
    let g = &f.grid;
    for j in 0..g.nr {
        let x2 = g.x2(j);
        let row = j * g.nz;
        for i in 0..g.nz {
            omega[row + i] += x2 * f.eta[row + i];
        }
    }
}

/// Block-aggregated sources `(mass, |ω|-weighted centroid)`.
fn aggregate(grid: &Grid, omega: &[f64]) -> Vec<(f64, Point)> {
    let h2 = grid.cell_area();
    let total_abs: f64 = omega.iter().map(|w| w.abs()).sum::<f64>() * h2;
    let mut out = Vec::new();
    if total_abs == 0.0 {
        return out;
    }
    for bj in (0..grid.nr).step_by(BLOCK) {
        for bi in (0..grid.nz).step_by(BLOCK) {
            let (mut m, mut w, mut c1, mut c2) = (0.0, 0.0, 0.0, 0.0);
            for j in bj..(bj + BLOCK).min(grid.nr) {
                let x2 = grid.x2(j);
                for i in bi..(bi + BLOCK).min(grid.nz) {
                    let v = omega[grid.idx(i, j)] * h2;
                    if v != 0.0 {
                        m += v;
                        w += v.abs();
                        c1 += v.abs() * grid.x1(i);
                        c2 += v.abs() * x2;
                    }
                }
            }
            if w > BLOCK_SKIP * total_abs {
                out.push((m, [c1 / w, c2 / w]));
            }
        }
    }
    out
}

/// Fraction of `∫|ω|` in the outer block of cells along the open edges
/// (the bottom edge counts only when it is not the axis).
pub fn boundary_band_fraction(grid: &Grid, omega: &[f64]) -> f64 {
    let (mut band, mut total) = (0.0, 0.0);
    for j in 0..grid.nr {
        for i in 0..grid.nz {
            let w = omega[grid.idx(i, j)].abs();
            if w == 0.0 {
                continue;
            }
            total += w;
            let near = i < BLOCK || i + BLOCK >= grid.nz || j + BLOCK >= grid.nr || (grid.r_min > 0.0 && j < BLOCK);
            if near {
                band += w;
            }
        }
    }
    if total > 0.0 {
        band / total
    } else {
        0.0
    }
}

/// Reusable stream-function solver bound to one window geometry.
#[derive(Debug)]
pub struct StreamSolver {
    poisson: PoissonSolver,
}

impl StreamSolver {
    pub fn new(grid: &Grid) -> Result<Self> {
        Ok(Self { poisson: PoissonSolver::new(grid)? })
    }

    /// Solves for the stream function of the cell vorticity `omega`.
    pub fn solve(&mut self, grid: &Grid, omega: &[f64]) -> Result<StreamFunction> {
        if !self.poisson.fits(grid) || omega.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("vorticity"));
        }
        let fraction = boundary_band_fraction(grid, omega);
        if fraction >= BAND_FRACTION {
            return Err(Error::BoundaryBand { fraction });
        }
        let (nz, nr) = (grid.nz, grid.nr);
        let row = nz + 1;
        let mut psi = vec![0.0; row * (nr + 1)];
        let sources = aggregate(grid, omega);
        let mut boundary_values = Vec::with_capacity(2 * (nz + nr));
        for j in 0..=nr {
            let x2 = grid.node_x2(j);
            for i in 0..=nz {
                if !(i == 0 || j == 0 || i == nz || j == nr) {
                    continue;
                }
                let v = if x2 > 0.0 {
                    let x = [grid.node_x1(i), x2];
                    sources.iter().map(|&(m, y)| m * s_elliptic_unchecked(x, y)).sum()
                } else {
                    0.0
                };
                psi[j * row + i] = v;
                boundary_values.push(v);
            }
        }
        let src = cells_to_nodes(grid, omega);
        let residual = self.poisson.solve(&src, &mut psi)?;
        Ok(StreamFunction { grid: grid.clone(), psi, boundary_values, residual })
    }
}

/// One-shot stream-function solve for the summed ring vorticity.
pub fn solve_streamfunction(fields: &[RingField], grid: &Grid) -> Result<StreamFunction> {
    let (g, omega) = total_omega(fields)?;
    if &g != grid {
        return Err(Error::GridMismatch);
    }
    StreamSolver::new(grid)?.solve(grid, &omega)
}

/// Cell-centred velocity: the mean of the two opposite face fluxes over the
/// cell width, so that `Ψ = x2²/2` gives `u = (1, 0)` exactly.
pub fn velocity_from_streamfunction(sf: &StreamFunction) -> VelocityField {
    let g = &sf.grid;
    let mut v = VelocityField::zeros(g);
    let h = g.spacing;
    for j in 0..g.nr {
        let inv = 1.0 / (2.0 * h * g.x2(j));
        for i in 0..g.nz {
            let (a, b, c, d) = (sf.node(i, j), sf.node(i + 1, j), sf.node(i, j + 1), sf.node(i + 1, j + 1));
            let k = g.idx(i, j);
            v.u1[k] = ((c - a) + (d - b)) * inv;
            v.u2[k] = -((b - a) + (d - c)) * inv;
        }
    }
    v
}

/// Largest centred-difference value of `∂1(x2 u1) + ∂2(x2 u2)` over interior cells.
pub fn divergence_residual(v: &VelocityField) -> f64 {
    let g = &v.grid;
    let h = g.spacing;
    let mut worst = 0.0f64;
    for j in 1..g.nr.saturating_sub(1) {
        for i in 1..g.nz.saturating_sub(1) {
            let f1 = |ii: usize| g.x2(j) * v.u1[g.idx(ii, j)];
            let f2 = |jj: usize| g.x2(jj) * v.u2[g.idx(i, jj)];
            let div = (f1(i + 1) - f1(i - 1) + f2(j + 1) - f2(j - 1)) / (2.0 * h);
            worst = worst.max(div.abs());
        }
    }
    worst
}

/// Nonzero cells as `(centre, ω h²)`.
fn point_masses(grid: &Grid, omega: &[f64]) -> Vec<(Point, f64)> {
    let h2 = grid.cell_area();
    grid.centers().filter_map(|(i, j, p)| {
        let w = omega[grid.idx(i, j)];
        (w != 0.0).then_some((p, w * h2))
    })
    .collect()
}

fn direct_sum(sources: &[(Point, f64)], points: &[Point], desingularize: bool) -> Result<Vec<Point>> {
    points
        .iter()
        .map(|&p| {
            if !(p[1] > 0.0) {
                return Err(Error::NonPositiveRadius(p[1]));
            }
            let mut u = [0.0, 0.0];
            for &(y, m) in sources {
                if y == p {
                    if desingularize {
                        continue;
                    }
                    return Err(Error::Singular);
                }
                let hv = h_elliptic_unchecked(p, y);
                u[0] += m * hv[0];
                u[1] += m * hv[1];
            }
            Ok(u)
        })
        .collect()
}

/// `u(p) = Σ_cells H(p, y) ω(y) h²`. With `desingularize`, a cell whose
/// centre coincides with `p` is left out of the sum.
pub fn velocity_direct(fields: &[RingField], points: &[Point], desingularize: bool) -> Result<Vec<Point>> {
    let (g, omega) = total_omega(fields)?;
    direct_sum(&point_masses(&g, &omega), points, desingularize)
}

fn others_omega(i: usize, fields: &[RingField]) -> Result<(Grid, Vec<f64>)> {
    if i >= fields.len() {
        return Err(Error::RingIndex { index: i, len: fields.len() });
    }
    let g = fields[0].grid.clone();
    if fields.iter().any(|f| f.grid != g) {
        return Err(Error::GridMismatch);
    }
    let mut omega = vec![0.0; g.len()];
    for (k, f) in fields.iter().enumerate() {
        if k != i {
            add_omega(f, &mut omega);
        }
    }
    Ok((g, omega))
}

/// Field induced on ring `i` by all other rings, by direct summation.
pub fn external_field_direct(i: usize, fields: &[RingField], points: &[Point]) -> Result<Vec<Point>> {
    let (g, omega) = others_omega(i, fields)?;
    direct_sum(&point_masses(&g, &omega), points, true)
}

/// Field induced on ring `i` by all other rings, by a stream-function solve.
pub fn external_field_grid(i: usize, fields: &[RingField], solver: &mut StreamSolver) -> Result<VelocityField> {
    let (g, omega) = others_omega(i, fields)?;
    if omega.iter().all(|&w| w == 0.0) {
        return Ok(VelocityField::zeros(&g));
    }
    Ok(velocity_from_streamfunction(&solver.solve(&g, &omega)?))
}

/// Pairwise-sum values of the two global identities of the kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalIdentities {
    /// `∫ω ũ dx` with `ũ` the planar point-vortex part of the velocity.
    pub planar_moment: Point,
    /// `∫ω u2 x2 dx`.
    pub radial_moment: f64,
    /// `∫ω |u| x2 dx`, the reference scale.
    pub scale: f64,
}

/// Evaluates the identities by direct double sums over nonzero cells.
/// Cells with `|ω| h²` below `cutoff` times the largest cell mass are skipped.
pub fn global_identities(fields: &[RingField], cutoff: f64) -> Result<GlobalIdentities> {
    let (g, omega) = total_omega(fields)?;
    let mut src = point_masses(&g, &omega);
    let peak = src.iter().fold(0.0f64, |m, s| m.max(s.1.abs()));
    src.retain(|s| s.1.abs() >= cutoff * peak);
    let inv2pi = 0.5 / std::f64::consts::PI;
    let (mut k1, mut k2, mut rad, mut scale) = (0.0, 0.0, 0.0, 0.0);
    for &(x, mx) in &src {
        let (mut u, mut kt) = ([0.0, 0.0], [0.0, 0.0]);
        for &(y, my) in &src {
            if x == y {
                continue;
            }
            let hv = h_elliptic_unchecked(x, y);
            u[0] += my * hv[0];
            u[1] += my * hv[1];
            let d = [x[0] - y[0], x[1] - y[1]];
            let c = my * inv2pi / (d[0] * d[0] + d[1] * d[1]);
            kt[0] -= c * d[1];
            kt[1] += c * d[0];
        }
        k1 += mx * kt[0];
        k2 += mx * kt[1];
        rad += mx * u[1] * x[1];
        scale += (mx * u[0].hypot(u[1]) * x[1]).abs();
    }
    Ok(GlobalIdentities { planar_moment: [k1, k2], radial_moment: rad, scale })
}
