//! Ring initial data and per-ring vorticity fields.

use serde::{Deserialize, Serialize};

use crate::grid::Grid;
use crate::params::SimParams;
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Constant vorticity on the disk of radius `ε`.
    #[default]
    UniformDisk,
    /// `(1 − s²)³` in `s = |x − ζ|/ε`, C² with compact support.
    SmoothBump,
}

impl Profile {
    /// Unnormalised shape at scaled distance squared `s2 = |x − ζ|²/ε²`.
    #[inline]
    pub fn shape(self, s2: f64) -> f64 {
        if s2 >= 1.0 {
            return 0.0;
        }
        match self {
            Profile::UniformDisk => 1.0,
            Profile::SmoothBump => (1.0 - s2).powi(3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    pub center: Point,
    /// `a = |log ε| ∫ω dx`.
    pub intensity: f64,
    #[serde(default)]
    pub profile: Profile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingField {
    pub grid: Grid,
    /// `η = ω / x2` at cell centres, row-major in `j`.
    pub eta: Vec<f64>,
    pub ring_index: usize,
}

impl RingField {
    pub fn zeros(grid: &Grid, ring_index: usize) -> Self {
        Self { grid: grid.clone(), eta: vec![0.0; grid.len()], ring_index }
    }

    #[inline]
    pub fn omega(&self, i: usize, j: usize) -> f64 {
        self.grid.x2(j) * self.eta[self.grid.idx(i, j)]
    }

    /// `∫ω dx` as `Σ x2 η h²` in row-major order.
    pub fn mass(&self) -> f64 {
        let g = &self.grid;
        let h2 = g.cell_area();
        let mut total = 0.0;
        for j in 0..g.nr {
            let x2 = g.x2(j);
            for &e in &self.eta[j * g.nz..(j + 1) * g.nz] {
                total += x2 * e * h2;
            }
        }
        total
    }

    pub fn max_eta(&self) -> f64 {
        self.eta.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_eta(&self) -> f64 {
        self.eta.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.eta.iter().all(|&e| e == 0.0)
    }

    /// Sign of the carried mass (+1 for an empty field).
    pub fn sign(&self) -> f64 {
        if self.mass() < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// Translates the stored values by `cells` columns, filling with zeros.
    /// The grid is moved along so physical positions are unchanged.
    pub fn shift_window(&mut self, cells: i64) {
        let g = &self.grid;
        let nz = g.nz as i64;
        let mut out = vec![0.0; self.eta.len()];
        for j in 0..g.nr {
            let row = j * g.nz;
            for i in 0..nz {
                let src = i + cells;
                if (0..nz).contains(&src) {
                    out[row + i as usize] = self.eta[row + src as usize];
                }
            }
        }
        self.eta = out;
        self.grid = self.grid.shifted(cells);
    }
}

const SUPERSAMPLE: usize = 4;

/// Deposits each ring on `grid` by 4×4 supersampling, then rescales so that
/// `|log ε| ∫ω dx = a` exactly.
pub fn deposit_rings(specs: &[RingSpec], grid: &Grid, eps: f64, separation: f64) -> Result<Vec<RingField>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter { name: "epsilon", reason: format!("ε ∉ (0,1): {eps}") });
    }
    if !(eps < separation) {
        return Err(Error::InvalidRing(format!("core radius {eps} must be below separation {separation}")));
    }
    let h = grid.spacing;
    if h > eps / 8.0 * (1.0 + 1e-9) {
        return Err(Error::InvalidGrid(format!("spacing {h} does not resolve the core (need ≤ ε/8 = {})", eps / 8.0)));
    }
    for (k, s) in specs.iter().enumerate() {
        let [z, r] = s.center;
        if !(r > 0.0) {
            return Err(Error::NonPositiveRadius(r));
        }
        if !s.intensity.is_finite() || !z.is_finite() {
            return Err(Error::InvalidRing(format!("ring {k}: non-finite data")));
        }
        if !(r > 2.0 * separation) {
            return Err(Error::InvalidRing(format!("ring {k}: radius {r} must exceed 2D = {}", 2.0 * separation)));
        }
        let margin = eps + h;
        if z - margin <= grid.z_lo() || z + margin >= grid.z_hi() || r - margin <= grid.r_min || r + margin >= grid.r_max() {
            return Err(Error::InvalidRing(format!("ring {k}: support touches the window boundary or the axis")));
        }
    }
    for a in 0..specs.len() {
        for b in a + 1..specs.len() {
            let (p, q) = (specs[a].center, specs[b].center);
            if ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt() < 2.0 * eps {
                return Err(Error::InvalidRing(format!("rings {a} and {b}: overlapping supports")));
            }
            if (p[1] - q[1]).abs() < 2.0 * separation {
                return Err(Error::InvalidRing(format!(
                    "rings {a} and {b}: radii differ by less than 2D = {}",
                    2.0 * separation
                )));
            }
        }
    }

    let log_eps = eps.ln().abs();
    let inv_eps2 = 1.0 / (eps * eps);
    let sub = SUPERSAMPLE as f64;
    specs
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut field = RingField::zeros(grid, k);
            if s.intensity == 0.0 {
                return Ok(field);
            }
            // Only cells overlapping the disk bounding box are visited.
            let lo_i = ((s.center[0] - eps - grid.z_lo()) / h).floor().max(0.0) as usize;
            let hi_i = (((s.center[0] + eps - grid.z_lo()) / h).ceil() as usize).min(grid.nz);
            let lo_j = ((s.center[1] - eps - grid.r_min) / h).floor().max(0.0) as usize;
            let hi_j = (((s.center[1] + eps - grid.r_min) / h).ceil() as usize).min(grid.nr);
            for j in lo_j..hi_j {
                let y0 = grid.node_x2(j);
                for i in lo_i..hi_i {
                    let x0 = grid.node_x1(i);
                    let mut acc = 0.0;
                    for a in 0..SUPERSAMPLE {
                        let dz = x0 + (a as f64 + 0.5) * h / sub - s.center[0];
                        for b in 0..SUPERSAMPLE {
                            let dr = y0 + (b as f64 + 0.5) * h / sub - s.center[1];
                            acc += s.profile.shape((dz * dz + dr * dr) * inv_eps2);
                        }
                    }
                    let omega = acc / (sub * sub);
                    field.eta[grid.idx(i, j)] = omega / grid.x2(j);
                }
            }
            let raw = field.mass();
            if raw <= 0.0 {
                return Err(Error::InvalidRing(format!("ring {k}: core not resolved by any cell")));
            }
            let scale = s.intensity / log_eps / raw;
            field.eta.iter_mut().for_each(|e| *e *= scale);
            Ok(field)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// `|log ε| ∫ω_i dx` as deposited.
    pub intensities: Vec<f64>,
    /// `M_i = ε² |log ε| sup|ω_i|`.
    pub sup_constants: Vec<f64>,
    /// `(i, j, |ζ_i − ζ_j| − 2ε)`: gap between the closed supports.
    pub support_gaps: Vec<(usize, usize, f64)>,
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Audits freshly deposited data against the initial-datum hypotheses.
pub fn check_initial_assumptions(fields: &[RingField], specs: &[RingSpec], params: &SimParams) -> AssumptionReport {
    let eps = params.epsilon;
    let log_eps = params.log_eps();
    let d = params.separation;
    let mut checks = Vec::new();
    let mut push = |name: String, passed: bool, detail: String| checks.push(AssumptionCheck { name, passed, detail });

    let mut intensities = Vec::new();
    let mut sup_constants = Vec::new();
    for (k, (f, s)) in fields.iter().zip(specs).enumerate() {
        let g = &f.grid;
        let a = log_eps * f.mass();
        intensities.push(a);
        let tol = 1e-8 * s.intensity.abs().max(f64::MIN_POSITIVE);
        push(format!("intensity[{k}]"), (a - s.intensity).abs() <= tol, format!("measured {a:.12e}, target {:.12e}", s.intensity));

        let mut sup = 0.0f64;
        let mut reach = 0.0f64;
        let (mut pos, mut neg) = (false, false);
        for (i, j, p) in g.centers() {
            let w = f.omega(i, j);
            if w == 0.0 {
                continue;
            }
            pos |= w > 0.0;
            neg |= w < 0.0;
            sup = sup.max(w.abs());
            reach = reach.max(((p[0] - s.center[0]).powi(2) + (p[1] - s.center[1]).powi(2)).sqrt());
        }
        let m = eps * eps * log_eps * sup;
        sup_constants.push(m);
        push(format!("sup_bound[{k}]"), m <= params.m_bound, format!("M = {m:.6e}, limit {}", params.m_bound));
        push(
            format!("support[{k}]"),
            reach <= eps + g.spacing,
            format!("farthest nonzero cell at {reach:.6e}, limit {:.6e}", eps + g.spacing),
        );
        push(format!("sign[{k}]"), !(pos && neg), String::new());
        let r = s.center[1];
        push(format!("radius[{k}]"), r > 2.0 * d, format!("r = {r}, 2D = {}", 2.0 * d));
    }

    let mut support_gaps = Vec::new();
    for a in 0..specs.len() {
        for b in a + 1..specs.len() {
            let (p, q) = (specs[a].center, specs[b].center);
            let gap = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt() - 2.0 * eps;
            support_gaps.push((a, b, gap));
            let dr = (p[1] - q[1]).abs();
            push(format!("separation[{a},{b}]"), dr >= 2.0 * d, format!("|r_a − r_b| = {dr}, 2D = {}", 2.0 * d));
        }
    }
    let disjoint = eps < d && support_gaps.iter().all(|&(_, _, g)| g >= 0.0);
    push("disjoint".into(), disjoint, format!("ε = {eps}, D = {d}"));

    AssumptionReport { intensities, sup_constants, support_gaps, checks }
}
