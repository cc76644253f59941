//! Release gate: kernel identities, a manufactured elliptic solve, tail-mass
//! consistency and conservation on a miniature run.

use axiring_core::diagnostics::{tail_masses_with, MollifierW, RingFrame};
use axiring_core::grid::make_grid;
use axiring_core::kernels::{eval_h, eval_s, KernelPath};
use axiring_core::poisson::PoissonSolver;
use axiring_core::rings::deposit_rings;
use axiring_core::{Point, Profile, RingSpec, SimParams, Simulation};
use serde::Serialize;

/// Deliberate defects used to check that the gate catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Mutation {
    #[default]
    None,
    /// Radial kernel component loses the sign of the axial offset.
    KernelSign,
    /// Tail mollifier with half the intended plateau.
    MollifierSupport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

fn failed(name: &'static str, e: impl std::fmt::Display) -> CheckResult {
    check(name, false, format!("error: {e}"))
}

/// Deterministic pairs with radii in `[0.5, 2]`.
fn pairs() -> Vec<(Point, Point)> {
    let mut out = Vec::new();
    for a in 0..8 {
        for b in 0..8 {
            let x = [0.1 * a as f64 - 0.35, 0.5 + 1.5 * a as f64 / 7.0];
            let y = [0.45 - 0.13 * b as f64, 0.5 + 1.5 * ((3 * b + a) % 8) as f64 / 7.0];
            if x != y {
                out.push((x, y));
            }
        }
    }
    out
}

fn two_path() -> CheckResult {
    let (mut h_worst, mut s_worst) = (0.0f64, 0.0f64);
    for (x, y) in pairs() {
        let r = (|| {
            let (he, hq) = (eval_h(x, y, KernelPath::Elliptic)?, eval_h(x, y, KernelPath::Quadrature)?);
            let (se, sq) = (eval_s(x, y, KernelPath::Elliptic)?, eval_s(x, y, KernelPath::Quadrature)?);
            Ok::<_, axiring_core::Error>((he, hq, se, sq))
        })();
        let (he, hq, se, sq) = match r {
            Ok(v) => v,
            Err(e) => return failed("kernel_two_path", e),
        };
        let scale = he[0].hypot(he[1]);
        h_worst = h_worst.max((he[0] - hq[0]).hypot(he[1] - hq[1]) / scale);
        s_worst = s_worst.max((se - sq).abs() / se.abs());
    }
    check(
        "kernel_two_path",
        h_worst <= 1e-8 && s_worst <= 1e-10,
        format!("max rel. difference H {h_worst:.2e} (≤ 1e-8), S {s_worst:.2e} (≤ 1e-10)"),
    )
}

fn swap_identity(m: Mutation) -> CheckResult {
    let h2 = |x: Point, y: Point| -> axiring_core::Result<f64> {
        let v = eval_h(x, y, KernelPath::Elliptic)?[1];
        Ok(if m == Mutation::KernelSign { v.abs() } else { v })
    };
    let mut worst = 0.0f64;
    for (x, y) in pairs() {
        match (h2(x, y), h2(y, x)) {
            (Ok(a), Ok(b)) => {
                let scale = (x[1] * a).abs().max((y[1] * b).abs()).max(f64::MIN_POSITIVE);
                worst = worst.max((x[1] * a + y[1] * b).abs() / scale);
            }
            (Err(e), _) | (_, Err(e)) => return failed("swap_identity", e),
        }
    }
    check("swap_identity", worst <= 1e-12, format!("max relative |x2 H2(x,y) + y2 H2(y,x)| = {worst:.2e} (≤ 1e-12)"))
}

/// `Ψ* = x2² exp(−|x − (0,1)|²)` and the matching source.
fn manufactured(x1: f64, x2: f64) -> (f64, f64) {
    let (a, b) = (x1, x2 - 1.0);
    let g = (-(a * a + b * b)).exp();
    let psi = x2 * x2 * g;
    let p11 = x2 * x2 * g * (4.0 * a * a - 2.0);
    let p2 = g * (2.0 * x2 - 2.0 * x2 * x2 * b);
    let p22 = -2.0 * b * p2 + g * (2.0 - 4.0 * x2 * b - 2.0 * x2 * x2);
    (psi, -(p11 + p22 - p2 / x2) / x2)
}

fn poisson_error(h: f64) -> axiring_core::Result<f64> {
    let g = make_grid([-2.0, 2.0, 0.0, 3.0], h)?;
    let mut solver = PoissonSolver::new(&g)?;
    let row = g.nz + 1;
    let n = row * (g.nr + 1);
    let (mut psi, mut src, mut exact) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for j in 0..=g.nr {
        for i in 0..=g.nz {
            let (p, w) = manufactured(g.node_x1(i), g.node_x2(j));
            let k = j * row + i;
            exact[k] = p;
            src[k] = w;
            if i == 0 || j == 0 || i == g.nz || j == g.nr {
                psi[k] = p;
            }
        }
    }
    solver.solve(&src, &mut psi)?;
    Ok(psi.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

fn manufactured_solve() -> CheckResult {
    match (poisson_error(0.05), poisson_error(0.025)) {
        (Ok(e1), Ok(e2)) => {
            let order = (e1 / e2).log2();
            check("manufactured_solve", order > 1.8 && e2 < 1e-3, format!("max error {e2:.2e}, observed order {order:.3}"))
        }
        (Err(e), _) | (_, Err(e)) => failed("manufactured_solve", e),
    }
}

fn tail_sandwich(m: Mutation) -> CheckResult {
    let eps = 0.1;
    let run = || -> axiring_core::Result<()> {
        let g = make_grid([-0.5, 0.5, 0.5, 1.5], eps / 8.0)?;
        let spec = RingSpec { center: [0.0, 1.0], intensity: 1.0, profile: Profile::SmoothBump };
        let f = deposit_rings(&[spec], &g, eps, 0.25)?.remove(0);
        let frame = RingFrame { log_eps: eps.ln().abs(), intensity: 1.0 };
        let scale = if m == Mutation::MollifierSupport { 0.5 } else { 1.0 };
        for (r, h) in [(0.02, 0.02), (0.04, 0.02), (0.06, 0.03)] {
            tail_masses_with(&f, frame, 1.0, &[r], MollifierW { radius: r, width: h }, |rr, hh, s| {
                MollifierW { radius: scale * rr, width: hh }.eval(s)
            })?;
        }
        Ok(())
    };
    match run() {
        Ok(()) => check("tail_sandwich", true, "μ(R,h) ≤ m(R) ≤ μ(R−h,h) at three radii".into()),
        Err(e) => failed("tail_sandwich", e),
    }
}

fn miniature_run() -> CheckResult {
    let run = || -> axiring_core::Result<String> {
        let eps = 0.1;
        let mut p = SimParams::new(eps, 0.5, 0.2)?;
        p.sample_interval = 0.05;
        let g = make_grid([-0.8, 0.8, 0.2, 1.8], eps / 8.0)?;
        let spec = RingSpec { center: [0.0, 1.0], intensity: 1.0, profile: Profile::UniformDisk };
        let mut sim = Simulation::new(p, vec![spec], g)?;
        let out = sim.run(|_, _| Ok(()))?;
        let m: Vec<f64> = out.records.iter().map(|r| r.rings[0].moments.m0).collect();
        let peak: Vec<f64> = out.records.iter().map(|r| r.rings[0].max_eta).collect();
        let (m2a, m2b) = (out.records[0].rings[0].moments.m2, out.records.last().unwrap().rings[0].moments.m2);
        let mass_ok = m.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-14));
        let loss = (m[0] - m[m.len() - 1]) / m[0];
        let peak_ok = peak.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
        let drift = ((m2b - m2a) / m2a).abs();
        let ok = mass_ok && loss <= 1e-6 && peak_ok && drift <= 1e-3;
        let detail = format!("mass loss {loss:.2e}, M2 drift {drift:.2e}, max η non-increasing: {peak_ok}");
        if ok {
            Ok(detail)
        } else {
            Err(axiring_core::Error::Stability(detail))
        }
    };
    match run() {
        Ok(d) => check("miniature_run", true, d),
        Err(e) => failed("miniature_run", e),
    }
}

pub fn run_selftest(m: Mutation) -> Vec<CheckResult> {
    vec![two_path(), swap_identity(m), manufactured_solve(), tail_sandwich(m), miniature_run()]
}

pub fn format_table(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    results
        .iter()
        .map(|r| format!("{:<width$}  {}  {}\n", r.name, if r.passed { "PASS" } else { "FAIL" }, r.detail))
        .collect()
}
