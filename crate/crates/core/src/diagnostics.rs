//! Functionals of the ring fields: masses, moments, cut-off moments, tail
//! masses, concentration and energy.
//!
//! All integrals are midpoint sums over cells in row-major order. Quantities
//! that locate a ring (`J`, `I*`, tails, concentration) use the ring's
//! vorticity oriented by the sign of its intensity, and centres scaled by
//! `1/|a|`, which reduces to the plain definitions for `a = 1`.

use serde::{Deserialize, Serialize};

use crate::grid::Grid;
use crate::params::SimParams;
use crate::rings::{RingField, RingSpec};
use crate::velocity::{velocity_from_streamfunction, StreamFunction};
use crate::{Error, Point, Result};

/// `6t⁵ − 15t⁴ + 10t³` clamped to `[0, 1]`.
#[inline]
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// Radial cut-off: 0 below `inner`, 1 above `outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffG {
    pub inner: f64,
    pub outer: f64,
}

impl CutoffG {
    pub fn for_ring(r0: f64, r_hat: f64) -> Self {
        Self { inner: 0.5 * (r0 - r_hat), outer: r0 - r_hat }
    }

    #[inline]
    pub fn eval(&self, x2: f64) -> f64 {
        smoothstep((x2 - self.inner) / (self.outer - self.inner))
    }
}

/// `W_{R,h}(s)`: 1 for `|s| ≤ R`, 0 for `|s| ≥ R + h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifierW {
    pub radius: f64,
    pub width: f64,
}

impl MollifierW {
    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        1.0 - smoothstep((s.abs() - self.radius) / self.width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Moments {
    pub m0: f64,
    pub m2: f64,
    /// `|log ε| ∫ω x dx`.
    pub b: Point,
    /// `∫ω x / ∫ω`.
    pub centroid: Point,
    pub j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CutoffMoments {
    /// `|log ε| ∫ω G x dx`.
    pub b_star: Point,
    pub i_star: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TailMasses {
    pub m: Vec<f64>,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Concentration {
    pub q: Point,
    pub fraction: f64,
}

/// Orientation and normalisation of one ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingFrame {
    pub log_eps: f64,
    pub intensity: f64,
}

impl RingFrame {
    fn orient(&self) -> f64 {
        if self.intensity < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// `1/|a|`, or 0 for an empty ring.
    fn inv_a(&self) -> f64 {
        if self.intensity == 0.0 {
            0.0
        } else {
            1.0 / self.intensity.abs()
        }
    }
}

fn for_cells(f: &RingField, mut visit: impl FnMut(usize, usize, Point, f64)) {
    let g = &f.grid;
    let h2 = g.cell_area();
    for j in 0..g.nr {
        let x2 = g.x2(j);
        for i in 0..g.nz {
            let e = f.eta[j * g.nz + i];
            if e != 0.0 {
                visit(i, j, [g.x1(i), x2], x2 * e * h2);
            }
        }
    }
}

pub fn moments(f: &RingField, frame: RingFrame) -> Moments {
    let (mut m0, mut m2, mut s1, mut s2, mut w, mut w1, mut w2) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let o = frame.orient();
    for_cells(f, |_, _, p, m| {
        m0 += m;
        m2 += m * p[1] * p[1];
        s1 += m * p[0];
        s2 += m * p[1];
        w += o * m;
        w1 += o * m * p[0];
        w2 += o * m * p[1];
    });
    let b = [frame.log_eps * s1, frame.log_eps * s2];
    let centroid = if w != 0.0 { [w1 / w, w2 / w] } else { [0.0, 0.0] };
    let c1 = if frame.intensity != 0.0 { frame.log_eps * w1 * frame.inv_a() } else { centroid[0] };
    let mut j = 0.0;
    for_cells(f, |_, _, p, m| j += o * m * (p[0] - c1).powi(2));
    Moments { m0, m2, b, centroid, j }
}

/// Radial reference `|log ε| ∫ω̃ G x2 / |a|` used by `I*` and the tails.
fn cutoff_center(f: &RingField, frame: RingFrame, g: &CutoffG) -> f64 {
    let o = frame.orient();
    let mut s = 0.0;
    for_cells(f, |_, _, p, m| s += o * m * g.eval(p[1]) * p[1]);
    frame.log_eps * s * frame.inv_a()
}

pub fn cutoff_moments(f: &RingField, frame: RingFrame, g: &CutoffG) -> CutoffMoments {
    let (mut b1, mut b2) = (0.0, 0.0);
    for_cells(f, |_, _, p, m| {
        let gm = g.eval(p[1]) * m;
        b1 += gm * p[0];
        b2 += gm * p[1];
    });
    let c2 = cutoff_center(f, frame, g);
    let o = frame.orient();
    let mut i_star = 0.0;
    for_cells(f, |_, _, p, m| i_star += o * m * (p[1] - c2).powi(2) * g.eval(p[1]));
    CutoffMoments { b_star: [frame.log_eps * b1, frame.log_eps * b2], i_star }
}

/// Tail masses about the radial centre `center2`, with an arbitrary
/// mollifier profile `w(R, h, s)`; the sandwich `μ(R,h) ≤ m(R) ≤ μ(R−h,h)`
/// is verified on every call.
pub fn tail_masses_with(
    f: &RingField,
    frame: RingFrame,
    center2: f64,
    h_list: &[f64],
    mollifier: MollifierW,
    w: impl Fn(f64, f64, f64) -> f64,
) -> Result<TailMasses> {
    let o = frame.orient();
    let (rr, hh) = (mollifier.radius, mollifier.width);
    let mut m = vec![0.0; h_list.len()];
    let (mut mu, mut m_r, mut mu_lo, mut total) = (0.0, 0.0, 0.0, 0.0);
    for_cells(f, |_, _, p, cell| {
        let v = o * cell;
        let s = p[1] - center2;
        for (acc, &h) in m.iter_mut().zip(h_list) {
            if s.abs() > h {
                *acc += v;
            }
        }
        mu += (1.0 - w(rr, hh, s)) * v;
        if s.abs() > rr {
            m_r += v;
        }
        mu_lo += (1.0 - w(rr - hh, hh, s)) * v;
        total += v.abs();
    });
    let tol = 1e-14 * total;
    if mu > m_r + tol || m_r > mu_lo + tol {
        return Err(Error::Sandwich(format!("μ(R,h) = {mu:e}, m(R) = {m_r:e}, μ(R−h,h) = {mu_lo:e}")));
    }
    Ok(TailMasses { m, mu })
}

pub fn tail_masses(f: &RingField, frame: RingFrame, center2: f64, h_list: &[f64], mollifier: MollifierW) -> Result<TailMasses> {
    tail_masses_with(f, frame, center2, h_list, mollifier, |r, h, s| MollifierW { radius: r, width: h }.eval(s))
}

/// Oriented mass with `|x2 − r0| > r̂`.
pub fn outside_strip_mass(f: &RingField, frame: RingFrame, r0: f64, r_hat: f64) -> f64 {
    let o = frame.orient();
    let mut s = 0.0;
    for_cells(f, |_, _, p, m| {
        if (p[1] - r0).abs() > r_hat {
            s += o * m;
        }
    });
    s
}

/// Row prefix sums of oriented cell masses, `(nz+1)` entries per row.
struct Prefix<'a> {
    grid: &'a Grid,
    sums: Vec<f64>,
}

impl<'a> Prefix<'a> {
    fn new(f: &'a RingField, o: f64) -> Self {
        let g = &f.grid;
        let h2 = g.cell_area();
        let mut sums = vec![0.0; (g.nz + 1) * g.nr];
        for j in 0..g.nr {
            let x2 = g.x2(j);
            let base = j * (g.nz + 1);
            for i in 0..g.nz {
                sums[base + i + 1] = sums[base + i] + o * x2 * f.eta[j * g.nz + i] * h2;
            }
        }
        Self { grid: g, sums }
    }

    /// Mass of cells whose centres lie in the open disk `Σ(p|ϱ)`.
    fn disk(&self, p: Point, rho: f64) -> f64 {
        let g = self.grid;
        let h = g.spacing;
        let j_lo = (((p[1] - rho - g.r_min) / h - 0.5).floor().max(0.0)) as usize;
        let j_hi = ((((p[1] + rho - g.r_min) / h - 0.5).ceil()).max(-1.0) + 1.0) as usize;
        let mut total = 0.0;
        for j in j_lo..j_hi.min(g.nr) {
            let dy = g.x2(j) - p[1];
            let half2 = rho * rho - dy * dy;
            if half2 <= 0.0 {
                continue;
            }
            let half = half2.sqrt();
            let z0 = g.z_lo();
            // cells i with |x1(i) − p1| < half
            let mut lo = ((p[0] - half - z0) / h - 0.5).ceil().max(0.0) as usize;
            let mut hi = (((p[0] + half - z0) / h - 0.5).floor() + 1.0).max(0.0) as usize;
            hi = hi.min(g.nz);
            while lo < hi && (g.x1(lo) - p[0]).abs() >= half {
                lo += 1;
            }
            while hi > lo && (g.x1(hi - 1) - p[0]).abs() >= half {
                hi -= 1;
            }
            if lo < hi {
                let base = j * (g.nz + 1);
                total += self.sums[base + hi] - self.sums[base + lo];
            }
        }
        total
    }
}

/// Mass-maximising disk centre over cell centres: strided scan of the
/// window, then an exhaustive pass around the best coarse candidate.
/// Ties go to the smallest x1, then the smallest x2.
pub fn concentration(f: &RingField, frame: RingFrame, rho: f64) -> Concentration {
    let g = &f.grid;
    let prefix = Prefix::new(f, frame.orient());
    let stride = ((rho / (4.0 * g.spacing)).floor() as usize).max(1);
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    let consider = |i: usize, j: usize, best: &mut (f64, usize, usize)| {
        let v = prefix.disk(g.center(i, j), rho);
        let better = v > best.0 || (v == best.0 && (i, j) < (best.1, best.2));
        if better {
            *best = (v, i, j);
        }
    };
    for i in (0..g.nz).step_by(stride) {
        for j in (0..g.nr).step_by(stride) {
            consider(i, j, &mut best);
        }
    }
    let (ci, cj) = (best.1, best.2);
    for i in ci.saturating_sub(stride)..(ci + stride + 1).min(g.nz) {
        for j in cj.saturating_sub(stride)..(cj + stride + 1).min(g.nr) {
            consider(i, j, &mut best);
        }
    }
    let q = g.center(best.1, best.2);
    Concentration { q, fraction: frame.log_eps * best.0 * frame.inv_a() }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Energy {
    /// `π ∫Ψω dx`.
    pub e: f64,
    /// `½ ∫ 2π x2 |u|² dx` over the window.
    pub e_kinetic: f64,
    /// `2πν ∫ω² x2 dx`.
    pub dissipation: f64,
}

/// Energy of the summed vorticity `omega` whose stream function is `sf`.
pub fn energy(sf: &StreamFunction, omega: &[f64], nu: f64) -> Energy {
    let g = &sf.grid;
    let h2 = g.cell_area();
    let v = velocity_from_streamfunction(sf);
    let pi = std::f64::consts::PI;
    let (mut e, mut ek, mut d) = (0.0, 0.0, 0.0);
    for j in 0..g.nr {
        let x2 = g.x2(j);
        for i in 0..g.nz {
            let k = g.idx(i, j);
            let w = omega[k];
            if w != 0.0 {
                e += sf.at_center(i, j) * w;
                d += w * w * x2;
            }
            ek += x2 * (v.u1[k] * v.u1[k] + v.u2[k] * v.u2[k]);
        }
    }
    Energy { e: pi * e * h2, e_kinetic: pi * ek * h2, dissipation: 2.0 * pi * nu * d * h2 }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RingDiagnostics {
    pub moments: Moments,
    pub cutoff: CutoffMoments,
    pub tails: TailMasses,
    pub concentration: Concentration,
    /// Oriented mass outside the strip `|x2 − r0| ≤ r̂`.
    pub outside: f64,
    pub max_eta: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub rings: Vec<RingDiagnostics>,
    pub energy: Energy,
    pub t_eps_fired: bool,
}

/// Everything the per-sample diagnostics need beyond the fields.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsConfig {
    pub log_eps: f64,
    pub nu: f64,
    pub r_hat: f64,
    pub conc_radius: f64,
    pub tail_h: Vec<f64>,
    pub mollifier: MollifierW,
    /// `(r0, a)` per ring.
    pub rings: Vec<(f64, f64)>,
}

impl DiagnosticsConfig {
    pub fn new(params: &SimParams, specs: &[RingSpec]) -> Self {
        Self {
            log_eps: params.log_eps(),
            nu: params.nu,
            r_hat: params.r_hat,
            conc_radius: params.conc_radius(),
            tail_h: params.tail_h.clone(),
            mollifier: MollifierW { radius: params.mollifier.0, width: params.mollifier.1 },
            rings: specs.iter().map(|s| (s.center[1], s.intensity)).collect(),
        }
    }

    pub fn frame(&self, k: usize) -> RingFrame {
        RingFrame { log_eps: self.log_eps, intensity: self.rings[k].1 }
    }
}

pub fn ring_diagnostics(f: &RingField, k: usize, cfg: &DiagnosticsConfig) -> Result<RingDiagnostics> {
    let frame = cfg.frame(k);
    let r0 = cfg.rings[k].0;
    let g = CutoffG::for_ring(r0, cfg.r_hat);
    let center2 = if frame.intensity != 0.0 { cutoff_center(f, frame, &g) } else { r0 };
    Ok(RingDiagnostics {
        moments: moments(f, frame),
        cutoff: cutoff_moments(f, frame, &g),
        tails: tail_masses(f, frame, center2, &cfg.tail_h, cfg.mollifier)?,
        concentration: concentration(f, frame, cfg.conc_radius),
        outside: outside_strip_mass(f, frame, r0, cfg.r_hat),
        max_eta: f.max_abs_eta(),
    })
}

/// Full record at time `t`; `sf` must be the stream function of the summed
/// vorticity `omega` of `fields`.
pub fn compute_record(
    t: f64,
    fields: &[RingField],
    sf: &StreamFunction,
    omega: &[f64],
    cfg: &DiagnosticsConfig,
    t_eps_fired: bool,
) -> Result<DiagnosticsRecord> {
    let rings = fields.iter().enumerate().map(|(k, f)| ring_diagnostics(f, k, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(DiagnosticsRecord { t, rings, energy: energy(sf, omega, cfg.nu), t_eps_fired })
}

/// Column names of `diagnostics.csv` for `n_rings` rings and `n_tail` tail radii.
pub fn csv_header(n_rings: usize, n_tail: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for k in 0..n_rings {
        let mut per = vec!["M0", "M2", "B1", "B2", "C1", "C2", "J", "Bstar1", "Bstar2", "Istar"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        per.extend((0..n_tail).map(|h| format!("m_h{h}")));
        per.extend(["mu", "q1", "q2", "fraction", "outside", "max_eta"].into_iter().map(String::from));
        cols.extend(per.into_iter().map(|c| format!("ring{k}_{c}")));
    }
    cols.extend(["E", "E_kinetic", "dissipation", "t_eps_fired"].into_iter().map(String::from));
    cols
}

/// One CSV row; floats use the shortest round-trip exponent form.
pub fn csv_row(r: &DiagnosticsRecord) -> Vec<String> {
    let fmt = |v: f64| format!("{v:e}");
    let mut out = vec![fmt(r.t)];
    for d in &r.rings {
        let m = &d.moments;
        out.extend([m.m0, m.m2, m.b[0], m.b[1], m.centroid[0], m.centroid[1], m.j].map(fmt));
        out.extend([d.cutoff.b_star[0], d.cutoff.b_star[1], d.cutoff.i_star].map(fmt));
        out.extend(d.tails.m.iter().map(|&v| fmt(v)));
        out.extend(
            [d.tails.mu, d.concentration.q[0], d.concentration.q[1], d.concentration.fraction, d.outside, d.max_eta]
                .map(fmt),
        );
    }
    out.extend([r.energy.e, r.energy.e_kinetic, r.energy.dissipation].map(fmt));
    out.push(if r.t_eps_fired { "1" } else { "0" }.to_string());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::rings::{deposit_rings, Profile};
    use crate::velocity::solve_streamfunction;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const EPS: f64 = 0.1;

    fn frame(a: f64) -> RingFrame {
        RingFrame { log_eps: EPS.ln().abs(), intensity: a }
    }

    fn disk_field() -> RingField {
        let g = make_grid([-0.5, 0.5, 0.5, 1.5], EPS / 8.0).unwrap();
        let spec = RingSpec { center: [0.0, 1.0], intensity: 1.0, profile: Profile::UniformDisk };
        deposit_rings(&[spec], &g, EPS, 0.2).unwrap().remove(0)
    }

    #[test]
    fn disk_moments() {
        let f = disk_field();
        let m = moments(&f, frame(1.0));
        assert_relative_eq!(m.m0, 1.0 / 10f64.ln(), max_relative = 1e-10);
        assert_relative_eq!(m.m2, 1.0025 / 10f64.ln(), max_relative = 2e-4);
        assert!(m.b[0].abs() < 1e-12);
        assert!((m.b[1] - 1.0).abs() < EPS * EPS);
    }

    #[test]
    fn translation_shifts_b1_and_keeps_j() {
        let f = disk_field();
        let mut s = f.clone();
        s.grid.offset_cells += 3;
        let delta = 3.0 * f.grid.spacing;
        let (a, b) = (moments(&f, frame(1.0)), moments(&s, frame(1.0)));
        assert_relative_eq!(b.b[0] - a.b[0], EPS.ln().abs() * a.m0 * delta, max_relative = 1e-9);
        assert_relative_eq!(a.j, b.j, max_relative = 1e-9);
    }

    #[test]
    fn zero_field_moments_vanish() {
        let g = make_grid([0.0, 1.0, 0.5, 1.5], 0.1).unwrap();
        let m = moments(&RingField::zeros(&g, 0), frame(1.0));
        assert_eq!(m, Moments::default());
    }

    #[test]
    fn cutoff_limits() {
        let f = disk_field();
        let full = CutoffG { inner: 0.1, outer: 0.2 };
        let c = cutoff_moments(&f, frame(1.0), &full);
        let m = moments(&f, frame(1.0));
        assert_relative_eq!(c.b_star[1], m.b[1], max_relative = 1e-14);
        assert!(c.i_star <= 4.0 * EPS * EPS * m.m0);
        let none = CutoffG { inner: 2.0, outer: 3.0 };
        let z = cutoff_moments(&f, frame(1.0), &none);
        assert_eq!(z.b_star, [0.0, 0.0]);
        assert_eq!(z.i_star, 0.0);
    }

    #[test]
    fn cutoff_g_shape() {
        let g = CutoffG::for_ring(1.0, 0.2);
        assert_eq!((g.inner, g.outer), (0.4, 0.8));
        assert_eq!(g.eval(0.3), 0.0);
        assert_eq!(g.eval(0.9), 1.0);
        let mut last = 0.0;
        for k in 0..=100 {
            let v = g.eval(0.4 + 0.004 * k as f64);
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn tails_at_time_zero() {
        let f = disk_field();
        let t = tail_masses(&f, frame(1.0), 1.0, &[0.0, 2.0 * EPS], MollifierW { radius: 0.3, width: 0.1 }).unwrap();
        assert_relative_eq!(t.m[0], f.mass(), max_relative = 1e-12);
        assert_eq!(t.m[1], 0.0);
    }

    #[test]
    fn wrong_support_breaks_sandwich() {
        let f = disk_field();
        let bad = |r: f64, h: f64, s: f64| MollifierW { radius: 0.5 * r, width: h }.eval(s);
        let e = tail_masses_with(&f, frame(1.0), 1.0, &[], MollifierW { radius: 0.08, width: 0.04 }, bad);
        assert!(matches!(e, Err(Error::Sandwich(_))));
    }

    #[test]
    fn concentration_on_disk() {
        let f = disk_field();
        let c = concentration(&f, frame(1.0), 2.0 * EPS);
        // every centre within ϱ − ε of the core captures the whole disk
        let d = (c.q[0].powi(2) + (c.q[1] - 1.0).powi(2)).sqrt();
        assert!(d <= EPS + f.grid.spacing, "{:?}", c.q);
        assert!(c.q[0] < -0.5 * EPS, "tie rule should pick the smallest x1: {:?}", c.q);
        assert_relative_eq!(c.fraction, 1.0, max_relative = 1e-12);
        let wide = concentration(&f, frame(1.0), 10.0);
        assert!(wide.fraction <= 1.0 + 1e-12);
    }

    #[test]
    fn concentration_picks_heavier_bump() {
        let g = make_grid([-1.0, 1.0, 0.5, 1.5], 0.02).unwrap();
        let mut f = RingField::zeros(&g, 0);
        for (i, j, p) in g.centers() {
            let a = ((p[0] + 0.5f64).powi(2) + (p[1] - 1.0f64).powi(2)).sqrt();
            let b = ((p[0] - 0.5f64).powi(2) + (p[1] - 1.0f64).powi(2)).sqrt();
            let k = g.idx(i, j);
            if a < 0.1 {
                f.eta[k] = 0.6 / p[1];
            }
            if b < 0.1 {
                f.eta[k] = 0.4 / p[1];
            }
        }
        let rho = 0.15;
        let c = concentration(&f, frame(1.0), rho);
        // brute-force oracle over all centres
        let mut best = (f64::NEG_INFINITY, [0.0, 0.0]);
        for (_, _, p) in g.centers() {
            let mut s = 0.0;
            for (i, j, y) in g.centers() {
                if ((y[0] - p[0]).powi(2) + (y[1] - p[1]).powi(2)).sqrt() < rho {
                    s += f.omega(i, j) * g.cell_area();
                }
            }
            if s > best.0 {
                best = (s, p);
            }
        }
        assert!(c.q[0] < 0.0);
        assert_relative_eq!(c.fraction, EPS.ln().abs() * best.0, max_relative = 1e-12);
    }

    #[test]
    fn energy_two_paths_agree_on_large_window() {
        let g = make_grid([-3.0, 3.0, 0.0, 3.0], EPS / 8.0).unwrap();
        let spec = RingSpec { center: [0.0, 1.0], intensity: 1.0, profile: Profile::UniformDisk };
        let fields = deposit_rings(&[spec], &g, EPS, 0.2).unwrap();
        let sf = solve_streamfunction(&fields, &g).unwrap();
        let (_, omega) = crate::velocity::total_omega(&fields).unwrap();
        let e = energy(&sf, &omega, 1e-3);
        assert!(((e.e - e.e_kinetic) / e.e).abs() < 0.01, "{e:?}");
        let zero = energy(&StreamFunction { psi: vec![0.0; sf.psi.len()], ..sf }, &vec![0.0; omega.len()], 1e-3);
        assert_eq!(zero.e, 0.0);
        assert_eq!(zero.e_kinetic, 0.0);
    }

    proptest! {
        #[test]
        fn tails_monotone_and_scaling(lambda in 0.1f64..10.0, h1 in 0.0f64..0.2, dh in 0.0f64..0.2) {
            let f = disk_field();
            let mut s = f.clone();
            s.eta.iter_mut().for_each(|e| *e *= lambda);
            let w = MollifierW { radius: 0.05, width: 0.02 };
            let t = tail_masses(&f, frame(1.0), 1.02, &[h1, h1 + dh], w).unwrap();
            prop_assert!(t.m[1] <= t.m[0]);
            let w2 = MollifierW { radius: 0.07, width: 0.02 };
            let t2 = tail_masses(&f, frame(1.0), 1.02, &[], w2).unwrap();
            prop_assert!(t2.mu <= t.mu);
            let (a, b) = (moments(&f, frame(1.0)), moments(&s, frame(1.0)));
            prop_assert!((b.m0 - lambda * a.m0).abs() <= 1e-12 * b.m0.abs());
            prop_assert!((b.m2 - lambda * a.m2).abs() <= 1e-12 * b.m2.abs());
            let (qa, qb) = (concentration(&f, frame(1.0), 0.15), concentration(&s, frame(1.0), 0.15));
            prop_assert_eq!(qa.q, qb.q);
        }
    }
}
