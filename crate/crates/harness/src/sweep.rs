//! `ε`-sweeps and the summary table.

use std::path::Path;

use axiring_core::dynamics::RunOutput;
use axiring_core::theory::{predicted_centers, thin_ring_reference_speed};
use axiring_core::RingSpec;
use serde::{Deserialize, Serialize};

use crate::config::SweepConfig;
use crate::io::{atomic_write, csv_bytes, write_json};
use crate::run::simulate;
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub status: String,
    pub error: Option<String>,
    /// `(B1(T) − B1(0)) / T` of the first ring.
    pub measured_speed: f64,
    /// Finite-`ε` thin-ring reference `U(ε)`.
    pub reference_speed: f64,
    /// `a / (4π r0)`.
    pub limit_speed: f64,
    /// `sup_t,i |C_i(t) − ζ_i(t)|` with `C_i` the normalised centroid.
    pub center_error: f64,
    /// Same with the concentration centre `q_i(t)`.
    pub concentration_center_error: f64,
    pub max_istar_scaled: f64,
    pub max_j_scaled: f64,
    pub final_fraction: f64,
    pub min_fraction: f64,
    pub t_eps_fired: bool,
    pub t_eps: Option<f64>,
    pub mass_loss: f64,
    pub m2_drift: f64,
    pub steps: usize,
}

impl SweepRow {
    pub fn speed_ratio_reference(&self) -> f64 {
        self.measured_speed / self.reference_speed
    }

    pub fn speed_ratio_limit(&self) -> f64 {
        self.measured_speed / self.limit_speed
    }

    fn failed(epsilon: f64, error: String) -> Self {
        Self {
            epsilon,
            status: "failed".into(),
            error: Some(error),
            measured_speed: f64::NAN,
            reference_speed: f64::NAN,
            limit_speed: f64::NAN,
            center_error: f64::NAN,
            concentration_center_error: f64::NAN,
            max_istar_scaled: f64::NAN,
            max_j_scaled: f64::NAN,
            final_fraction: f64::NAN,
            min_fraction: f64::NAN,
            t_eps_fired: false,
            t_eps: None,
            mass_loss: f64::NAN,
            m2_drift: f64::NAN,
            steps: 0,
        }
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Summary row of one finished run.
pub fn summarize(eps: f64, specs: &[RingSpec], out: &RunOutput) -> Result<SweepRow, HarnessError> {
    let le = eps.ln().abs();
    let (first, last) = match (out.records.first(), out.records.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(HarnessError::Format { path: "<run>".into(), message: "run produced no records".into() }),
    };
    let t_final = last.t - first.t;
    let measured_speed =
        if t_final > 0.0 { (last.rings[0].moments.b[0] - first.rings[0].moments.b[0]) / t_final } else { 0.0 };
    let (mut center_error, mut q_error, mut istar, mut j, mut min_fraction) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    for rec in &out.records {
        let zeta = predicted_centers(specs, rec.t)?;
        for (d, z) in rec.rings.iter().zip(&zeta) {
            center_error = center_error.max(dist(d.moments.centroid, *z));
            q_error = q_error.max(dist(d.concentration.q, *z));
            istar = istar.max(d.cutoff.i_star * le * le);
            j = j.max(d.moments.j * le);
            min_fraction = min_fraction.min(d.concentration.fraction);
        }
    }
    let m0 = |r: &axiring_core::DiagnosticsRecord| r.rings.iter().map(|d| d.moments.m0).sum::<f64>();
    let m2 = |r: &axiring_core::DiagnosticsRecord| r.rings.iter().map(|d| d.moments.m2).sum::<f64>();
    let spec = &specs[0];
    Ok(SweepRow {
        epsilon: eps,
        status: "ok".into(),
        error: None,
        measured_speed,
        reference_speed: thin_ring_reference_speed(spec, eps)?,
        limit_speed: spec.intensity / (4.0 * std::f64::consts::PI * spec.center[1]),
        center_error,
        concentration_center_error: q_error,
        max_istar_scaled: istar,
        max_j_scaled: j,
        final_fraction: last.rings.iter().map(|d| d.concentration.fraction).fold(f64::INFINITY, f64::min),
        min_fraction,
        t_eps_fired: out.t_eps.is_some(),
        t_eps: out.t_eps,
        mass_loss: (m0(first) - m0(last)) / m0(first).abs().max(f64::MIN_POSITIVE),
        m2_drift: (m2(last) - m2(first)) / m2(first).abs().max(f64::MIN_POSITIVE),
        steps: out.steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepVerdicts {
    /// Centre error non-increasing as `ε` decreases.
    pub center_error_decreasing: bool,
    /// `measured / (a/4πr0)` moves monotonically toward 1.
    pub speed_trend_toward_limit: bool,
    /// Every measured speed within 10% of `U(ε)`.
    pub speed_within_reference: bool,
    /// `max I*|log ε|²` and `max J|log ε|` grow by at most ×2 per sweep step.
    pub moments_bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub verdicts: SweepVerdicts,
}

pub fn verdicts(rows: &[SweepRow]) -> SweepVerdicts {
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.status == "ok").collect();
    let pairs = || ok.windows(2).map(|w| (w[0], w[1]));
    SweepVerdicts {
        center_error_decreasing: ok.len() == rows.len() && pairs().all(|(a, b)| b.center_error <= a.center_error),
        speed_trend_toward_limit: ok.len() == rows.len()
            && pairs().all(|(a, b)| {
                let (ra, rb) = (a.speed_ratio_limit(), b.speed_ratio_limit());
                rb < ra && rb >= 1.0
            }),
        speed_within_reference: ok.len() == rows.len() && ok.iter().all(|r| (r.speed_ratio_reference() - 1.0).abs() <= 0.1),
        moments_bounded: ok.len() == rows.len()
            && pairs().all(|(a, b)| b.max_istar_scaled <= 2.0 * a.max_istar_scaled && b.max_j_scaled <= 2.0 * a.max_j_scaled),
    }
}

const COLUMNS: [&str; 19] = [
    "epsilon",
    "status",
    "measured_speed",
    "reference_speed",
    "limit_speed",
    "ratio_reference",
    "ratio_limit",
    "center_error",
    "concentration_center_error",
    "max_istar_scaled",
    "max_j_scaled",
    "final_fraction",
    "min_fraction",
    "t_eps_fired",
    "t_eps",
    "mass_loss",
    "m2_drift",
    "steps",
    "error",
];

pub fn table_csv(table: &SweepTable) -> Result<Vec<u8>, HarnessError> {
    let f = |v: f64| format!("{v:e}");
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                f(r.epsilon),
                r.status.clone(),
                f(r.measured_speed),
                f(r.reference_speed),
                f(r.limit_speed),
                f(r.speed_ratio_reference()),
                f(r.speed_ratio_limit()),
                f(r.center_error),
                f(r.concentration_center_error),
                f(r.max_istar_scaled),
                f(r.max_j_scaled),
                f(r.final_fraction),
                f(r.min_fraction),
                u8::from(r.t_eps_fired).to_string(),
                r.t_eps.map(f).unwrap_or_default(),
                f(r.mass_loss),
                f(r.m2_drift),
                r.steps.to_string(),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    csv_bytes(&COLUMNS.map(String::from), &rows)
}

/// Runs every member of the sweep in order of decreasing `ε`; a failing
/// member is recorded and the sweep continues.
pub fn run_sweep(cfg: &SweepConfig, out: &Path) -> Result<(SweepTable, Vec<Option<RunOutput>>), HarnessError> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let mut rows = Vec::new();
    let mut outputs = Vec::new();
    for (k, &eps) in cfg.epsilons.iter().enumerate() {
        let member = cfg.member(k)?;
        let dir = out.join(format!("eps_{eps}"));
        match simulate(&member, &dir).and_then(|s| Ok((summarize(eps, &member.specs(), &s.output)?, s.output))) {
            Ok((row, output)) => {
                rows.push(row);
                outputs.push(Some(output));
            }
            Err(e) => {
                rows.push(SweepRow::failed(eps, e.to_string()));
                outputs.push(None);
            }
        }
    }
    let table = SweepTable { verdicts: verdicts(&rows), rows };
    atomic_write(&out.join("sweep_table.csv"), &table_csv(&table)?)?;
    write_json(&out.join("sweep_table.json"), &table)?;
    Ok((table, outputs))
}
