//! Limiting predictions and checks of the external-field hypotheses.

use serde::{Deserialize, Serialize};

pub use crate::params::viscosity_schedule;
use crate::rings::{RingField, RingSpec};
use crate::velocity::external_field_direct;
use crate::{Error, Point, Result};

/// `ζⁱ + a_i/(4π r_i) (1, 0) t` for every ring.
pub fn predicted_centers(specs: &[RingSpec], t: f64) -> Result<Vec<Point>> {
    specs
        .iter()
        .map(|s| {
            let r = s.center[1];
            if !(r > 0.0) {
                return Err(Error::NonPositiveRadius(r));
            }
            Ok([s.center[0] + s.intensity / (4.0 * std::f64::consts::PI * r) * t, r])
        })
        .collect()
}

/// Classical thin-ring speed of a uniform core, scaled to intensity `a/|log ε|`:
/// `U = (a/|log ε|) (1/(4π r0)) (log(8 r0/ε) − 1/4)`.
pub fn thin_ring_reference_speed(spec: &RingSpec, eps: f64) -> Result<f64> {
    let r0 = spec.center[1];
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter { name: "epsilon", reason: format!("ε ∉ (0,1): {eps}") });
    }
    if eps >= r0 {
        return Err(Error::InvalidParameter { name: "epsilon", reason: format!("ε = {eps} not below r0 = {r0}") });
    }
    let circulation = spec.intensity / eps.ln().abs();
    Ok(circulation / (4.0 * std::f64::consts::PI * r0) * ((8.0 * r0 / eps).ln() - 0.25))
}

/// Samples of the field `F` acting on one ring at a single `ε`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldSampleSet {
    pub eps: f64,
    /// Lattice of `(point, F)` on the strip `|x2 − r0| ≤ r̂`, row-major with
    /// `strip_cols` columns.
    pub strip: Vec<(Point, Point)>,
    pub strip_cols: usize,
    /// `(point, F)` on the complement of the strip.
    pub outside: Vec<(Point, Point)>,
    /// Largest magnitude over the strip lattice of the field induced by the
    /// other rings' vorticity outside their own strips.
    pub residual_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldAssumptionFit {
    pub r_hat: f64,
    pub eps: Vec<f64>,
    /// `ε |log ε| sup |F|` off the strip, per `ε`.
    pub c_hat: Vec<f64>,
    /// `|log ε| sup |F|` on the strip, per `ε`.
    pub c_tilde: Vec<f64>,
    /// `|log ε|` times the strip Lipschitz constant, per `ε`.
    pub c_tilde_lip: Vec<f64>,
    pub c_bar: f64,
    /// Fitted decay exponent of the residual; `None` when every residual is zero.
    pub beta: Option<f64>,
    pub stable: bool,
    pub passed: bool,
}

/// Largest ratio accepted between the per-`ε` constants of one kind.
pub const STABILITY_RATIO: f64 = 3.0;

fn norm(v: Point) -> f64 {
    v[0].hypot(v[1])
}

fn lipschitz(strip: &[(Point, Point)], cols: usize) -> f64 {
    if cols == 0 {
        return 0.0;
    }
    let rows = strip.len() / cols;
    let mut lip = 0.0f64;
    let mut pair = |a: &(Point, Point), b: &(Point, Point)| {
        let d = norm([a.0[0] - b.0[0], a.0[1] - b.0[1]]);
        if d > 0.0 {
            lip = lip.max(norm([a.1[0] - b.1[0], a.1[1] - b.1[1]]) / d);
        }
    };
    for r in 0..rows {
        for c in 0..cols {
            let k = r * cols + c;
            if c + 1 < cols {
                pair(&strip[k], &strip[k + 1]);
            }
            if r + 1 < rows {
                pair(&strip[k], &strip[k + cols]);
            }
        }
    }
    lip
}

fn stable(values: &[f64]) -> bool {
    let max = values.iter().fold(0.0f64, |m, &v| m.max(v));
    let min = values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    max == 0.0 || (min > 0.0 && max / min <= STABILITY_RATIO)
}

/// Fits the three bounds of the decomposition `F = F̂ + F̃ + F̄` over an
/// `ε` sweep. Passes iff the fitted residual exponent exceeds 1 (or the
/// residual vanishes) and the constants stay within [`STABILITY_RATIO`].
pub fn validate_field_assumptions(samples: &[FieldSampleSet], r_hat: f64) -> Result<FieldAssumptionFit> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples(format!("{} ε values, need at least 2", samples.len())));
    }
    if samples.iter().any(|s| s.strip.is_empty() || s.outside.is_empty()) {
        return Err(Error::InsufficientSamples("empty strip or complement sample".into()));
    }
    let mut fit = FieldAssumptionFit {
        r_hat,
        eps: vec![],
        c_hat: vec![],
        c_tilde: vec![],
        c_tilde_lip: vec![],
        c_bar: 0.0,
        beta: None,
        stable: false,
        passed: false,
    };
    for s in samples {
        let le = s.eps.ln().abs();
        let sup = |v: &[(Point, Point)]| v.iter().fold(0.0f64, |m, p| m.max(norm(p.1)));
        fit.eps.push(s.eps);
        fit.c_hat.push(s.eps * le * sup(&s.outside));
        fit.c_tilde.push(le * sup(&s.strip));
        fit.c_tilde_lip.push(le * lipschitz(&s.strip, s.strip_cols));
    }
    let pts: Vec<(f64, f64)> =
        samples.iter().filter(|s| s.residual_sup > 0.0).map(|s| (s.eps.ln(), s.residual_sup.ln())).collect();
    match pts.len() {
        0 => {}
        1 => return Err(Error::InsufficientSamples("residual positive at a single ε".into())),
        n => {
            let n = n as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            if sxx == 0.0 {
                return Err(Error::InsufficientSamples("residual samples share one ε".into()));
            }
            let beta = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
            fit.beta = Some(beta);
            fit.c_bar = (my - beta * mx).exp();
        }
    }
    let finite = fit.c_hat.iter().chain(&fit.c_tilde).chain(&fit.c_tilde_lip).all(|v| v.is_finite())
        && fit.beta.is_none_or(f64::is_finite);
    if !finite {
        return Err(Error::NonFinite("field assumption fit"));
    }
    fit.stable = stable(&fit.c_hat) && stable(&fit.c_tilde) && stable(&fit.c_tilde_lip);
    fit.passed = fit.stable && fit.beta.is_none_or(|b| b > 1.0);
    Ok(fit)
}

/// Samples `F^{ε,i}` on an `n × n` lattice over the strip of ring `i` and on
/// the rest of the window, and the residual field of the other rings'
/// vorticity lying outside their own strips.
pub fn sample_external_field(
    i: usize,
    fields: &[RingField],
    specs: &[RingSpec],
    eps: f64,
    r_hat: f64,
    n: usize,
) -> Result<FieldSampleSet> {
    if i >= fields.len() || specs.len() != fields.len() {
        return Err(Error::RingIndex { index: i, len: fields.len() });
    }
    if n < 2 {
        return Err(Error::InsufficientSamples(format!("lattice size {n}")));
    }
    let g = &fields[i].grid;
    let r0 = specs[i].center[1];
    let (z0, z1) = (g.z_lo(), g.z_hi());
    let lattice = |lo: f64, hi: f64| -> Vec<Point> {
        let mut pts = Vec::with_capacity(n * n);
        for r in 0..n {
            let x2 = lo + (hi - lo) * r as f64 / (n - 1) as f64;
            for c in 0..n {
                pts.push([z0 + (z1 - z0) * (c as f64 + 0.5) / n as f64, x2]);
            }
        }
        pts
    };
    let strip_pts = lattice((r0 - r_hat).max(g.r_min), (r0 + r_hat).min(g.r_max()));
    let outside_pts: Vec<Point> = lattice(g.r_min.max(1e-3 * g.spacing), g.r_max())
        .into_iter()
        .filter(|p| (p[1] - r0).abs() > r_hat)
        .collect();
    let f_strip = external_field_direct(i, fields, &strip_pts)?;
    let f_out = external_field_direct(i, fields, &outside_pts)?;

    let mut trimmed = fields.to_vec();
    for (k, f) in trimmed.iter_mut().enumerate() {
        if k == i {
            continue;
        }
        let rk = specs[k].center[1];
        let gk = f.grid.clone();
        for j in 0..gk.nr {
            if (gk.x2(j) - rk).abs() <= r_hat {
                f.eta[j * gk.nz..(j + 1) * gk.nz].iter_mut().for_each(|e| *e = 0.0);
            }
        }
    }
    let residual = external_field_direct(i, &trimmed, &strip_pts)?;
    Ok(FieldSampleSet {
        eps,
        strip: strip_pts.into_iter().zip(f_strip).collect(),
        strip_cols: n,
        outside: outside_pts.into_iter().zip(f_out).collect(),
        residual_sup: residual.iter().fold(0.0f64, |m, &v| m.max(norm(v))),
    })
}
