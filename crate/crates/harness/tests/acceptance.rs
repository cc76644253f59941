//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! `AXIRING_ONLY=3,6` restricts the run to the listed criteria.

use std::process::ExitCode;
use std::time::Instant;

use axiring::config::parse_sweep;
use axiring::sweep::{run_sweep, SweepTable};
use axiring_core::dynamics::weak_form_residual;
use axiring_core::grid::make_grid;
use axiring_core::kernels::{eval_h, eval_s, fit_remainder_bound, KernelPath};
use axiring_core::rings::deposit_rings;
use axiring_core::theory::predicted_centers;
use axiring_core::velocity::global_identities;
use axiring_core::{Point, Profile, RingSpec, SimParams, Simulation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn unit_ring(center: Point, intensity: f64, profile: Profile) -> RingSpec {
    RingSpec { center, intensity, profile }
}

fn random_pairs(seed: u64, n: usize) -> Vec<(Point, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| [rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0)];
    (0..n).map(|_| (point(&mut rng), point(&mut rng))).collect()
}

fn kernels() -> Outcome {
    let pairs = random_pairs(1, 10_000);
    let (mut h_worst, mut s_worst, mut swap_worst) = (0.0f64, 0.0f64, 0.0f64);
    for &(x, y) in &pairs {
        let e = |r: axiring_core::Error| r.to_string();
        let he = eval_h(x, y, KernelPath::Elliptic).map_err(e)?;
        let hq = eval_h(x, y, KernelPath::Quadrature).map_err(e)?;
        let se = eval_s(x, y, KernelPath::Elliptic).map_err(e)?;
        let sq = eval_s(x, y, KernelPath::Quadrature).map_err(e)?;
        h_worst = h_worst.max((he[0] - hq[0]).hypot(he[1] - hq[1]) / he[0].hypot(he[1]));
        s_worst = s_worst.max((se - sq).abs() / se.abs());
        let back = eval_h(y, x, KernelPath::Elliptic).map_err(e)?[1];
        let scale = (x[1] * he[1]).abs().max((y[1] * back).abs());
        swap_worst = swap_worst.max((x[1] * he[1] + y[1] * back).abs() / scale);
    }
    let full = fit_remainder_bound(&pairs, KernelPath::Elliptic).map_err(|e| e.to_string())?.c0_fit;
    let mut spread = 0.0f64;
    for seed in 2..7 {
        let c = fit_remainder_bound(&random_pairs(seed, 10_000), KernelPath::Elliptic).map_err(|e| e.to_string())?.c0_fit;
        spread = spread.max((c / full - 1.0).abs());
    }
    verdict(
        h_worst <= 1e-8 && s_worst <= 1e-10 && swap_worst <= 1e-12 && spread <= 0.2,
        format!(
            "H {h_worst:.1e} (≤1e-8), S {s_worst:.1e} (≤1e-10), swap {swap_worst:.1e} (≤1e-12), C0 = {full:.4} spread {:.1}% (≤20%)",
            100.0 * spread
        ),
    )
}

fn identities() -> Outcome {
    let eps = 0.05;
    let g = make_grid([-0.25, 0.25, 0.75, 1.25], eps / 8.0).map_err(|e| e.to_string())?;
    let f = deposit_rings(&[unit_ring([0.0, 1.0], 1.0, Profile::UniformDisk)], &g, eps, 0.2).map_err(|e| e.to_string())?;
    let id = global_identities(&f, 0.0).map_err(|e| e.to_string())?;
    let planar = id.planar_moment[0].hypot(id.planar_moment[1]) / id.scale;
    let radial = id.radial_moment.abs() / id.scale;
    verdict(planar <= 1e-6 && radial <= 1e-6, format!("|∫ω ũ| {planar:.1e}, |∫ω u2 x2| {radial:.1e} relative (≤1e-6)"))
}

fn conservation() -> Outcome {
    let eps = 0.1;
    let p = SimParams::new(eps, 0.5, 1.0).map_err(|e| e.to_string())?;
    let g = make_grid([-1.0, 1.0, 0.0, 2.1], eps / 8.0).map_err(|e| e.to_string())?;
    let mut sim = Simulation::new(p, vec![unit_ring([0.0, 1.0], 1.0, Profile::UniformDisk)], g).map_err(|e| e.to_string())?;
    let run = |sim: &mut Simulation| -> axiring_core::Result<(f64, bool, f64, f64)> {
        let (m0, peak0, m2_0) = (sim.state.fields[0].mass(), sim.state.fields[0].max_eta(), sim.record()?.rings[0].moments.m2);
        let (mut mass, mut peak) = (m0, peak0);
        let mut peak_mono = true;
        let mut rise = 0.0f64;
        let mut m2_drift = 0.0f64;
        for k in 1..=10 {
            let target = 0.1 * k as f64;
            while sim.state.time < target - 1e-12 {
                let dt = sim.auto_dt()?.min(target - sim.state.time);
                sim.step(dt)?;
                let (m, e) = (sim.state.fields[0].mass(), sim.state.fields[0].max_eta());
                rise = rise.max((m - mass) / m0);
                peak_mono &= e <= peak * (1.0 + 1e-12);
                mass = m;
                peak = e;
            }
            let m2 = sim.record()?.rings[0].moments.m2;
            m2_drift = m2_drift.max(((m2 - m2_0) / m2_0).abs());
        }
        Ok((rise, peak_mono, (m0 - mass) / m0, m2_drift))
    };
    let (rise, peak_mono, loss, drift) = run(&mut sim).map_err(|e| e.to_string())?;
    // Summation round-off only.
    let mass_mono = rise <= 1e-12;
    verdict(
        mass_mono && peak_mono && loss <= 1e-6 && drift <= 1e-3,
        format!(
            "largest per-step mass rise {rise:.1e} (≤1e-12), loss {loss:.1e} (≤1e-6); M2 drift {drift:.1e} (≤1e-3); max η non-increasing {peak_mono}"
        ),
    )
}

fn energy() -> Outcome {
    // Weak ring with a fat, well-resolved core in a window holding its far field.
    let eps = 0.2;
    let mut p = SimParams::new(eps, 0.5, 0.05).map_err(|e| e.to_string())?;
    p.sample_interval = 0.01;
    let g = make_grid([-3.0, 3.0, 0.0, 3.0], eps / 24.0).map_err(|e| e.to_string())?;
    let mut sim = Simulation::new(p, vec![unit_ring([0.0, 1.0], 0.1, Profile::SmoothBump)], g).map_err(|e| e.to_string())?;
    let out = sim.run(|_, _| Ok(())).map_err(|e| e.to_string())?;
    let (mut balance, mut quad) = (0.0f64, 0.0f64);
    for w in out.records.windows(2) {
        let (a, b) = (&w[0].energy, &w[1].energy);
        let de = (b.e - a.e) / (w[1].t - w[0].t);
        let d = 0.5 * (a.dissipation + b.dissipation);
        balance = balance.max((de + d).abs() / d);
    }
    for r in &out.records {
        quad = quad.max((r.energy.e - r.energy.e_kinetic).abs() / r.energy.e.abs());
    }
    verdict(
        balance <= 0.01 && quad <= 0.01,
        format!("|dE/dt + D| / D ≤ {:.2}% (≤1%); quadratures differ ≤ {:.2}% (≤1%)", 100.0 * balance, 100.0 * quad),
    )
}

fn sweep() -> Result<SweepTable, String> {
    let cfg = parse_sweep(include_str!("../../../configs/sweep.toml")).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (table, _) = run_sweep(&cfg, dir.path()).map_err(|e| e.to_string())?;
    if let Some(r) = table.rows.iter().find(|r| r.status != "ok") {
        return Err(format!("ε = {} failed: {}", r.epsilon, r.error.clone().unwrap_or_default()));
    }
    Ok(table)
}

fn speed(table: &Result<SweepTable, String>) -> Outcome {
    let table = table.as_ref().map_err(Clone::clone)?;
    let rows: Vec<String> = table
        .rows
        .iter()
        .map(|r| {
            format!(
                "ε={}: {:.5} vs U {:.5} ({:+.1}%), ×{:.3} limit",
                r.epsilon,
                r.measured_speed,
                r.reference_speed,
                100.0 * (r.speed_ratio_reference() - 1.0),
                r.speed_ratio_limit()
            )
        })
        .collect();
    let v = &table.verdicts;
    verdict(
        v.speed_within_reference && v.speed_trend_toward_limit,
        format!(
            "{}; within 10% of U: {}; ratio to limit decreasing toward 1: {}",
            rows.join("; "),
            v.speed_within_reference,
            v.speed_trend_toward_limit
        ),
    )
}

fn two_rings() -> Outcome {
    let eps = 0.05;
    let mut p = SimParams::new(eps, 0.5, 1.0).map_err(|e| e.to_string())?;
    p.separation = 0.7;
    p.r_hat = 0.35;
    p.chi = 2.5;
    let g = make_grid([-0.5, 0.5, 1.0, 3.4], eps / 8.0).map_err(|e| e.to_string())?;
    let specs = vec![unit_ring([0.0, 1.5], 1.0, Profile::UniformDisk), unit_ring([0.0, 2.9], 1.0, Profile::UniformDisk)];
    let mut sim = Simulation::new(p, specs.clone(), g.clone()).map_err(|e| e.to_string())?;
    let out = sim.run(|_, _| Ok(())).map_err(|e| e.to_string())?;
    let mut worst = [0.0f64; 2];
    for r in &out.records {
        let zeta = predicted_centers(&specs, r.t).map_err(|e| e.to_string())?;
        for k in 0..2 {
            let c = r.rings[k].moments.centroid;
            worst[k] = worst[k].max((c[0] - zeta[k][0]).hypot(c[1] - zeta[k][1]));
        }
    }
    let bound = (5.0 * g.spacing).max(0.5 / eps.ln().abs());
    verdict(
        worst[0] <= bound && worst[1] <= bound && out.t_eps.is_none(),
        format!(
            "centre errors {:.2e}, {:.2e} (≤{bound:.3}); T_ε {}",
            worst[0],
            worst[1],
            out.t_eps.map_or("never fired".into(), |t| format!("fired at t = {t}"))
        ),
    )
}

fn concentration(table: &Result<SweepTable, String>) -> Outcome {
    let table = table.as_ref().map_err(Clone::clone)?;
    let rows: Vec<String> = table
        .rows
        .iter()
        .map(|r| format!("ε={}: I*|logε|² {:.3e}, J|logε| {:.3e}", r.epsilon, r.max_istar_scaled, r.max_j_scaled))
        .collect();
    let finest = table.rows.iter().find(|r| r.epsilon == 0.025).ok_or("no ε = 0.025 row")?;
    verdict(
        table.verdicts.moments_bounded && finest.min_fraction >= 0.95,
        format!("{}; growth ≤ ×2: {}; min fraction at ε=0.025 {:.4} (≥0.95)", rows.join("; "), table.verdicts.moments_bounded, finest.min_fraction),
    )
}

fn weak_form() -> Outcome {
    let eps = 0.1;
    let mut res = Vec::new();
    for level in 0..3 {
        let scale = f64::from(1u32 << level);
        let mut p = SimParams::new(eps, 0.5, 0.1).map_err(|e| e.to_string())?;
        p.dt = Some(6e-4 / scale);
        p.sample_interval = 0.1;
        let g = make_grid([-0.5, 0.5, 0.4, 1.6], eps / (8.0 * scale)).map_err(|e| e.to_string())?;
        let mut sim = Simulation::new(p, vec![unit_ring([0.0, 1.0], 1.0, Profile::UniformDisk)], g)
            .map_err(|e| e.to_string())?
            .with_trace();
        let out = sim.run(|_, _| Ok(())).map_err(|e| e.to_string())?;
        res.push(weak_form_residual(&out.trace).map_err(|e| e.to_string())?);
    }
    let orders = |f: fn(&(f64, f64)) -> f64| [(f(&res[0]) / f(&res[1])).log2(), (f(&res[1]) / f(&res[2])).log2()];
    let (o1, o2) = (orders(|r| r.0), orders(|r| r.1));
    let ok = o1.iter().chain(&o2).all(|&o| o >= 1.0);
    verdict(
        ok,
        format!(
            "f=x1 residuals {:.2e} {:.2e} {:.2e} orders {:.2} {:.2}; f=x2² residuals {:.2e} {:.2e} {:.2e} orders {:.2} {:.2} (≥1)",
            res[0].0, res[1].0, res[2].0, o1[0], o1[1], res[0].1, res[1].1, res[2].1, o2[0], o2[1]
        ),
    )
}

fn main() -> ExitCode {
    let only: Option<Vec<u32>> =
        std::env::var("AXIRING_ONLY").ok().map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let wanted = |k: u32| only.as_ref().is_none_or(|o| o.contains(&k));
    let table = if wanted(5) || wanted(7) { Some(sweep()) } else { None };
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "kernel suite", Box::new(kernels)),
        (2, "discrete global identities", Box::new(identities)),
        (3, "conservation and monotonicity", Box::new(conservation)),
        (4, "energy balance", Box::new(energy)),
        (5, "speed convergence", Box::new(|| speed(table.as_ref().unwrap()))),
        (6, "two-ring non-interaction", Box::new(two_rings)),
        (7, "concentration trends", Box::new(|| concentration(table.as_ref().unwrap()))),
        (8, "weak-form residual refinement", Box::new(weak_form)),
    ];
    let mut failed = 0;
    for (k, name, f) in criteria {
        if !wanted(k) {
            continue;
        }
        let start = Instant::now();
        let r = f();
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("criterion {k} PASS {name} [{secs:.1}s]: {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {k} FAIL {name} [{secs:.1}s]: {d}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
