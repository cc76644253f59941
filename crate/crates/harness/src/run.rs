//! Single runs: `simulate`, `diagnose` and `predict`.

use std::fs;
use std::path::Path;
use std::time::Instant;

use axiring_core::diagnostics::{csv_header, csv_row, DiagnosticsConfig};
use axiring_core::dynamics::{record_fields, RunOutput, UniformFlow};
use axiring_core::theory::predicted_centers;
use axiring_core::velocity::StreamSolver;
use axiring_core::{DiagnosticsRecord, SimParams, Simulation};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::io::{atomic_write, csv_bytes, read_json, read_snapshot, write_json, write_snapshot, SNAPSHOT_DIR};
use crate::HarnessError;

pub const CSV_NAME: &str = "diagnostics.csv";
pub const MANIFEST_NAME: &str = "manifest.json";
pub const RECOMPUTED_NAME: &str = "diagnostics.recomputed.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTotals {
    pub steps: usize,
    pub t_eps: Option<f64>,
    pub axis_mass_flux: f64,
    pub boundary_outflow: f64,
    pub max_cfl: f64,
    pub max_diffusive_number: f64,
    pub total_shift: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub status: String,
    pub error: Option<String>,
    pub config: RunConfig,
    pub params: SimParams,
    /// Column order of the diagnostics CSV.
    pub columns: Vec<String>,
    pub sample_times: Vec<f64>,
    pub snapshots: usize,
    pub totals: Option<RunTotals>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub output: RunOutput,
}

fn csv_for(records: &[DiagnosticsRecord], n_rings: usize, n_tail: usize) -> Result<Vec<u8>, HarnessError> {
    let rows: Vec<Vec<String>> = records.iter().map(csv_row).collect();
    csv_bytes(&csv_header(n_rings, n_tail), &rows)
}

/// Runs `cfg`, writing the diagnostics CSV, snapshots and manifest under
/// `out`. The CSV appears only after a complete run.
pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<RunSummary, HarnessError> {
    let start = Instant::now();
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let snap_dir = out.join(SNAPSHOT_DIR);
    if cfg.snapshots {
        fs::create_dir_all(&snap_dir).map_err(|e| HarnessError::io(&snap_dir, e))?;
    }
    let mut manifest = Manifest {
        tool: "axiring".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: "simulate".into(),
        status: "running".into(),
        error: None,
        config: cfg.clone(),
        params: params.clone(),
        columns: csv_header(cfg.rings.len(), params.tail_h.len()),
        sample_times: vec![],
        snapshots: 0,
        totals: None,
        wall_seconds: 0.0,
    };
    let result = (|| {
        let mut sim = Simulation::new(params.clone(), cfg.specs(), grid)?;
        if let Some(p) = cfg.prescribed {
            sim = sim.with_prescribed(Box::new(UniformFlow { speed: p.uniform_speed }));
        }
        let mut index = 0;
        let mut snap_err = None;
        let output = sim.run(|state, rec| {
            if cfg.snapshots && snap_err.is_none() {
                if let Err(e) = write_snapshot(&snap_dir, index, state.time, &state.fields, rec.t_eps_fired) {
                    snap_err = Some(e);
                }
            }
            index += 1;
            Ok(())
        })?;
        if let Some(e) = snap_err {
            return Err(e);
        }
        Ok::<_, HarnessError>((output, index))
    })();
    manifest.wall_seconds = start.elapsed().as_secs_f64();
    match result {
        Ok((output, written)) => {
            atomic_write(&out.join(CSV_NAME), &csv_for(&output.records, cfg.rings.len(), params.tail_h.len())?)?;
            manifest.status = "ok".into();
            manifest.sample_times = output.records.iter().map(|r| r.t).collect();
            manifest.snapshots = if cfg.snapshots { written } else { 0 };
            manifest.totals = Some(RunTotals {
                steps: output.steps,
                t_eps: output.t_eps,
                axis_mass_flux: output.axis_mass_flux,
                boundary_outflow: output.boundary_outflow,
                max_cfl: output.max_cfl,
                max_diffusive_number: output.max_diffusive_number,
                total_shift: output.total_shift,
            });
            write_json(&out.join(MANIFEST_NAME), &manifest)?;
            Ok(RunSummary { manifest, output })
        }
        Err(e) => {
            manifest.status = "failed".into();
            manifest.error = Some(e.to_string());
            let _ = write_json(&out.join(MANIFEST_NAME), &manifest);
            Err(e)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnoseReport {
    pub rows: usize,
    pub identical: bool,
}

/// Recomputes every diagnostics row from the stored snapshots of a run and
/// compares the bytes with the stored CSV.
pub fn diagnose(run_dir: &Path) -> Result<DiagnoseReport, HarnessError> {
    let manifest: Manifest = read_json(&run_dir.join(MANIFEST_NAME))?;
    if manifest.snapshots == 0 {
        return Err(HarnessError::Format {
            path: run_dir.join(MANIFEST_NAME).display().to_string(),
            message: "run has no snapshots".into(),
        });
    }
    let specs = manifest.config.specs();
    let diag = DiagnosticsConfig::new(&manifest.params, &specs);
    let snap_dir = run_dir.join(SNAPSHOT_DIR);
    let mut solver: Option<StreamSolver> = None;
    let mut records = Vec::with_capacity(manifest.snapshots);
    for k in 0..manifest.snapshots {
        let (meta, fields) = read_snapshot(&snap_dir, k)?;
        if solver.is_none() {
            solver = Some(StreamSolver::new(&meta.grid)?);
        }
        records.push(record_fields(meta.t, &fields, &diag, meta.t_eps_fired, solver.as_mut().unwrap())?);
    }
    let bytes = csv_for(&records, specs.len(), manifest.params.tail_h.len())?;
    atomic_write(&run_dir.join(RECOMPUTED_NAME), &bytes)?;
    let stored_path = run_dir.join(CSV_NAME);
    let stored = fs::read(&stored_path).map_err(|e| HarnessError::io(&stored_path, e))?;
    Ok(DiagnoseReport { rows: records.len(), identical: stored == bytes })
}

/// Table of the limiting centres `ζⁱ(t)` at `times`.
pub fn predict(cfg: &RunConfig, times: &[f64]) -> Result<Vec<u8>, HarnessError> {
    let specs = cfg.specs();
    let mut header = vec!["t".to_string()];
    for k in 0..specs.len() {
        header.push(format!("ring{k}_z"));
        header.push(format!("ring{k}_r"));
    }
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        if !(t >= 0.0 && t <= cfg.t_final) {
            return Err(HarnessError::Schema { path: "times".into(), message: format!("t = {t} outside [0, T]") });
        }
        let mut row = vec![format!("{t:e}")];
        for p in predicted_centers(&specs, t)? {
            row.push(format!("{:e}", p[0]));
            row.push(format!("{:e}", p[1]));
        }
        rows.push(row);
    }
    csv_bytes(&header, &rows)
}

/// Sample times `0, Δ, 2Δ, …, T` used by a run.
pub fn sample_times(t_final: f64, interval: f64) -> Vec<f64> {
    let n = (t_final / interval - 1e-9).ceil().max(0.0) as usize;
    std::iter::once(0.0).chain((1..=n).map(|k| (k as f64 * interval).min(t_final))).collect()
}
