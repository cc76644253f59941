//! Time stepping of the ring fields.
//!
//! Every step solves one stream function for the summed vorticity, adds the
//! optional prescribed field, and transports each ring with the resulting
//! face fluxes followed by the viscous update.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{compute_record, outside_strip_mass, DiagnosticsConfig, DiagnosticsRecord};
use crate::grid::Grid;
use crate::params::SimParams;
use crate::rings::{check_initial_assumptions, deposit_rings, RingField, RingSpec};
use crate::transport::{diffusion_number, Fluxes, Transport};
use crate::velocity::{total_omega, velocity_from_streamfunction, StreamFunction, StreamSolver, VelocityField};
use crate::{Error, Point, Result};

/// Fraction of the window width the rings may drift before recentring.
pub const RECENTER_FRACTION: f64 = 0.25;
/// Advective Courant number targeted by the automatic time step.
pub const CFL_TARGET: f64 = 0.4;
/// Target for `ν dt / h²` of the automatic time step.
pub const DIFFUSIVE_TARGET: f64 = 0.2;
/// Largest accepted `ν dt / h²`.
pub const DIFFUSIVE_MAX: f64 = 0.25;

/// An external divergence-free field given by its stream function,
/// `F = (∂2 Ψ_F, −∂1 Ψ_F) / x2`.
pub trait PrescribedField {
    fn stream(&self, x: Point, t: f64) -> f64;
}

/// `F = (c, 0)`, i.e. `Ψ_F = c x2² / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformFlow {
    pub speed: f64,
}

impl PrescribedField for UniformFlow {
    fn stream(&self, x: Point, _t: f64) -> f64 {
        0.5 * self.speed * x[1] * x[1]
    }
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub time: f64,
    pub fields: Vec<RingField>,
    pub grid: Grid,
    /// Velocity of the most recent step, including any prescribed field.
    pub last_velocity: Option<VelocityField>,
    pub last_stream: Option<StreamFunction>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepReport {
    pub dt: f64,
    /// `dt max(|u1| + |u2|) / h` over cell centres.
    pub cfl: f64,
    /// `dt` times the largest cell outflow rate; the advection is monotone up to 1.
    pub outflow_number: f64,
    /// `ν dt / h²`.
    pub diffusive_number: f64,
    pub axis_mass_flux: f64,
    pub boundary_outflow: f64,
    /// Mass dropped by a window shift.
    pub shift_loss: f64,
    pub window_shift: i64,
}

/// Weak-form bookkeeping at one step: `ω[f]` and `ω[u·∇f]` for `f = x1`
/// and `f = x2²` over the summed field.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WeakFormSample {
    pub t: f64,
    /// Step taken from this state (0 for the final state).
    pub dt: f64,
    pub x1: f64,
    pub x1_rhs: f64,
    pub x2sq: f64,
    pub x2sq_rhs: f64,
}

/// Mean absolute residuals `|Δω[f]/dt − ½(rhs_n + rhs_{n+1})|` over a trace,
/// for `f = x1` and `f = x2²`.
pub fn weak_form_residual(trace: &[WeakFormSample]) -> Result<(f64, f64)> {
    if trace.len() < 2 {
        return Err(Error::InsufficientSamples(format!("{} trace entries", trace.len())));
    }
    let n = (trace.len() - 1) as f64;
    let (mut r1, mut r2) = (0.0, 0.0);
    for w in trace.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        r1 += ((b.x1 - a.x1) / a.dt - 0.5 * (a.x1_rhs + b.x1_rhs)).abs();
        r2 += ((b.x2sq - a.x2sq) / a.dt - 0.5 * (a.x2sq_rhs + b.x2sq_rhs)).abs();
    }
    Ok((r1 / n, r2 / n))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    /// First time the strip-mass monitor fired.
    pub t_eps: Option<f64>,
    pub steps: usize,
    pub axis_mass_flux: f64,
    pub boundary_outflow: f64,
    pub max_cfl: f64,
    pub max_diffusive_number: f64,
    pub total_shift: i64,
    pub trace: Vec<WeakFormSample>,
}

/// Diagnostics of `fields` at time `t`, with the energy taken from the
/// stream function of their sum.
pub fn record_fields(
    t: f64,
    fields: &[RingField],
    cfg: &DiagnosticsConfig,
    t_eps_fired: bool,
    solver: &mut StreamSolver,
) -> Result<DiagnosticsRecord> {
    let (g, omega) = total_omega(fields)?;
    let sf = if omega.iter().any(|&w| w != 0.0) {
        solver.solve(&g, &omega)?
    } else {
        StreamFunction { psi: vec![0.0; (g.nz + 1) * (g.nr + 1)], boundary_values: vec![], residual: 0.0, grid: g }
    };
    compute_record(t, fields, &sf, &omega, cfg, t_eps_fired)
}

pub struct Simulation {
    pub params: SimParams,
    pub specs: Vec<RingSpec>,
    pub state: SimState,
    diag: DiagnosticsConfig,
    prescribed: Option<Box<dyn PrescribedField>>,
    solver: StreamSolver,
    transport: Transport,
    t_eps: Option<f64>,
    trace: Option<Vec<WeakFormSample>>,
}

impl std::fmt::Debug for Simulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Simulation")
            .field("time", &self.state.time)
            .field("rings", &self.specs.len())
            .field("grid", &self.state.grid)
            .finish()
    }
}

impl Simulation {
    /// Deposits the rings on `grid` after validating the parameters and the
    /// initial-data assumptions.
    pub fn new(params: SimParams, specs: Vec<RingSpec>, grid: Grid) -> Result<Self> {
        params.validate(&specs)?;
        let fields = deposit_rings(&specs, &grid, params.epsilon, params.separation)?;
        let report = check_initial_assumptions(&fields, &specs, &params);
        if !report.all_passed() {
            let failed: Vec<String> = report.failed().map(|c| format!("{} ({})", c.name, c.detail)).collect();
            return Err(Error::InvalidRing(format!("initial assumptions failed: {}", failed.join(", "))));
        }
        Self::from_fields(params, specs, fields, 0.0)
    }

    /// Resumes from given fields without re-checking the initial assumptions.
    pub fn from_fields(params: SimParams, specs: Vec<RingSpec>, fields: Vec<RingField>, time: f64) -> Result<Self> {
        if fields.len() != specs.len() {
            return Err(Error::InvalidRing(format!("{} fields for {} rings", fields.len(), specs.len())));
        }
        let (grid, _) = total_omega(&fields)?;
        let solver = StreamSolver::new(&grid)?;
        let diag = DiagnosticsConfig::new(&params, &specs);
        Ok(Self {
            params,
            specs,
            state: SimState { time, fields, grid, last_velocity: None, last_stream: None },
            diag,
            prescribed: None,
            solver,
            transport: Transport::new(),
            t_eps: None,
            trace: None,
        })
    }

    pub fn with_prescribed(mut self, field: Box<dyn PrescribedField>) -> Self {
        self.prescribed = Some(field);
        self
    }

    /// Records weak-form samples at every step.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn diagnostics_config(&self) -> &DiagnosticsConfig {
        &self.diag
    }

    pub fn t_eps(&self) -> Option<f64> {
        self.t_eps
    }

    /// Stream function of the summed vorticity plus the prescribed field at `t`.
    fn advecting_stream(&mut self, t: f64) -> Result<StreamFunction> {
        let (g, omega) = total_omega(&self.state.fields)?;
        let mut sf = if self.params.self_induced && omega.iter().any(|&w| w != 0.0) {
            self.solver.solve(&g, &omega)?
        } else {
            StreamFunction { psi: vec![0.0; (g.nz + 1) * (g.nr + 1)], boundary_values: vec![], residual: 0.0, grid: g }
        };
        if let Some(f) = &self.prescribed {
            let g = &sf.grid;
            let row = g.nz + 1;
            for j in 0..=g.nr {
                let x2 = g.node_x2(j);
                for i in 0..=g.nz {
                    sf.psi[j * row + i] += f.stream([g.node_x1(i), x2], t);
                }
            }
        }
        Ok(sf)
    }

    fn weak_sample(&self, v: &VelocityField, dt: f64) -> WeakFormSample {
        let g = &self.state.grid;
        let h2 = g.cell_area();
        let mut s = WeakFormSample { t: self.state.time, dt, ..Default::default() };
        for j in 0..g.nr {
            let x2 = g.x2(j);
            for i in 0..g.nz {
                let k = g.idx(i, j);
                let w: f64 = self.state.fields.iter().map(|f| f.eta[k]).sum::<f64>() * x2 * h2;
                if w == 0.0 {
                    continue;
                }
                let x1 = g.x1(i);
                s.x1 += w * x1;
                s.x1_rhs += w * v.u1[k];
                s.x2sq += w * x2 * x2;
                s.x2sq_rhs += 2.0 * w * x2 * v.u2[k];
            }
        }
        s
    }

    /// Advances all rings by `dt`.
    pub fn step(&mut self, dt: f64) -> Result<StepReport> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter { name: "dt", reason: format!("step must be positive: {dt}") });
        }
        let t = self.state.time;
        let sf = self.advecting_stream(t + 0.5 * dt)?;
        let grid = sf.grid.clone();
        let h = grid.spacing;
        let vel = velocity_from_streamfunction(&sf);
        let umax = vel.u1.iter().zip(&vel.u2).fold(0.0f64, |m, (a, b)| m.max(a.abs() + b.abs()));
        let fluxes = Fluxes::from_stream(&grid, &sf.psi);
        let mut report = StepReport {
            dt,
            cfl: dt * umax / h,
            outflow_number: dt * fluxes.outflow_rate(&grid),
            diffusive_number: self.params.nu * dt / (h * h),
            ..Default::default()
        };
        if report.cfl > self.params.cfl_max || report.outflow_number > 1.0 {
            return Err(Error::Stability(format!(
                "CFL {:.3} (limit {}), outflow number {:.3} at t = {t}",
                report.cfl, self.params.cfl_max, report.outflow_number
            )));
        }
        if report.diffusive_number > DIFFUSIVE_MAX || diffusion_number(&grid, self.params.nu, dt) > 1.0 {
            return Err(Error::Stability(format!(
                "diffusive number {:.3} above {DIFFUSIVE_MAX} at t = {t}",
                report.diffusive_number
            )));
        }
        if let Some(trace) = self.trace.take() {
            let s = self.weak_sample(&vel, dt);
            self.trace = Some(trace);
            self.trace.as_mut().unwrap().push(s);
        }
        for f in &mut self.state.fields {
            report.boundary_outflow += self.transport.advect(&grid, &fluxes, dt, &mut f.eta);
            let (axis, edge) = self.transport.diffuse(&grid, self.params.nu, dt, &mut f.eta);
            report.axis_mass_flux += axis;
            report.boundary_outflow += edge;
            if f.eta.iter().any(|e| !e.is_finite()) {
                return Err(Error::NonFinite("vorticity"));
            }
        }
        self.state.time = t + dt;
        self.state.last_velocity = Some(vel);
        self.state.last_stream = Some(sf);
        self.monitor();
        if self.params.recenter {
            let (shift, loss) = self.recenter();
            report.window_shift = shift;
            report.shift_loss = loss;
        }
        Ok(report)
    }

    fn monitor(&mut self) {
        if self.t_eps.is_some() {
            return;
        }
        let threshold = self.params.epsilon.powf(self.params.chi);
        for (k, f) in self.state.fields.iter().enumerate() {
            let frame = self.diag.frame(k);
            let (r0, a) = self.diag.rings[k];
            if outside_strip_mass(f, frame, r0, self.params.r_hat) > a.abs() * threshold {
                self.t_eps = Some(self.state.time);
                return;
            }
        }
    }

    /// Shifts the window by whole cells once the `|ω|`-weighted axial centre
    /// leaves the middle of the window. Returns the shift and the mass dropped.
    fn recenter(&mut self) -> (i64, f64) {
        let g = &self.state.grid;
        let (mut w, mut wx) = (0.0, 0.0);
        for f in &self.state.fields {
            for (i, j, p) in g.centers() {
                let v = (p[1] * f.eta[g.idx(i, j)]).abs();
                w += v;
                wx += v * p[0];
            }
        }
        if w == 0.0 {
            return (0, 0.0);
        }
        let offset = wx / w - g.z_center();
        let width = g.nz as f64 * g.spacing;
        if offset.abs() <= RECENTER_FRACTION * width {
            return (0, 0.0);
        }
        let cells = (offset / g.spacing).round() as i64;
        let before: f64 = self.state.fields.iter().map(|f| f.mass()).sum();
        for f in &mut self.state.fields {
            f.shift_window(cells);
        }
        self.state.grid = self.state.fields[0].grid.clone();
        let after: f64 = self.state.fields.iter().map(|f| f.mass()).sum();
        (cells, before - after)
    }

    /// Largest stable step for the current velocity.
    pub fn auto_dt(&mut self) -> Result<f64> {
        let g = self.state.grid.clone();
        let h = g.spacing;
        let sf = self.advecting_stream(self.state.time)?;
        let v = velocity_from_streamfunction(&sf);
        let umax = v.u1.iter().zip(&v.u2).fold(0.0f64, |m, (a, b)| m.max(a.abs() + b.abs()));
        let fl = Fluxes::from_stream(&g, &sf.psi).outflow_rate(&g);
        let mut dt = f64::INFINITY;
        if umax > 0.0 {
            dt = dt.min(CFL_TARGET.min(self.params.cfl_max) * h / umax);
        }
        if fl > 0.0 {
            dt = dt.min(0.9 / fl);
        }
        let nu = self.params.nu;
        if nu > 0.0 {
            dt = dt.min(DIFFUSIVE_TARGET * h * h / nu);
            let d = diffusion_number(&g, nu, 1.0);
            dt = dt.min(0.9 / d);
        }
        if !dt.is_finite() {
            dt = self.params.sample_interval;
        }
        Ok(dt)
    }

    /// Diagnostics of the current state.
    pub fn record(&mut self) -> Result<DiagnosticsRecord> {
        record_fields(self.state.time, &self.state.fields, &self.diag, self.t_eps.is_some(), &mut self.solver)
    }

    /// Advances to `t_final`, sampling every `sample_interval` (and at
    /// `t_final`). `sink` sees the state and record at every sample time.
    pub fn run(&mut self, mut sink: impl FnMut(&SimState, &DiagnosticsRecord) -> Result<()>) -> Result<RunOutput> {
        let t_final = self.params.t_final;
        let interval = self.params.sample_interval;
        if !(t_final >= 0.0) || !(interval > 0.0) {
            return Err(Error::InvalidParameter {
                name: "t_final",
                reason: format!("need T ≥ 0 and a positive sample interval, got {t_final}, {interval}"),
            });
        }
        let mut out = RunOutput::default();
        self.monitor();
        let first = self.record()?;
        sink(&self.state, &first)?;
        out.records.push(first);
        let samples = (t_final / interval - 1e-9).ceil().max(0.0) as usize;
        for k in 1..=samples {
            let target = (k as f64 * interval).min(t_final);
            let span = target - self.state.time;
            if span <= 0.0 {
                continue;
            }
            let dt_max = match self.params.dt {
                Some(dt) => dt,
                None => self.auto_dt()?,
            };
            let n = (span / dt_max - 1e-9).ceil().max(1.0) as usize;
            let dt = span / n as f64;
            for s in 0..n {
                let r = self.step(dt)?;
                if s + 1 == n {
                    self.state.time = target;
                }
                out.steps += 1;
                out.axis_mass_flux += r.axis_mass_flux;
                out.boundary_outflow += r.boundary_outflow + r.shift_loss;
                out.max_cfl = out.max_cfl.max(r.cfl);
                out.max_diffusive_number = out.max_diffusive_number.max(r.diffusive_number);
                out.total_shift += r.window_shift;
            }
            let rec = self.record()?;
            sink(&self.state, &rec)?;
            out.records.push(rec);
        }
        if let Some(mut trace) = self.trace.take() {
            if !trace.is_empty() {
                let sf = self.advecting_stream(self.state.time)?;
                let v = velocity_from_streamfunction(&sf);
                trace.push(self.weak_sample(&v, 0.0));
            }
            out.trace = trace.clone();
            self.trace = Some(Vec::new());
        }
        out.t_eps = self.t_eps;
        Ok(out)
    }
}
