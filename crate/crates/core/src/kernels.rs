//! Axisymmetric Biot–Savart kernel `H`, its split `H = K + L + R`, and the
//! stream-function Green function `S`.
//!
//! `H` and `S` are available along two independent routes: adaptive
//! θ-quadrature of their defining integrals, and closed forms in complete
//! elliptic integrals. The closed forms are what the solvers use; the
//! quadrature route exists to cross-check them.

use std::f64::consts::PI;

use crate::elliptic::ring_combination;
use crate::quadrature::{integrate, QuadOptions};
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelPath {
    Quadrature,
    #[default]
    Elliptic,
}

fn check_pair(x: Point, y: Point) -> Result<()> {
    if x[1] <= 0.0 {
        return Err(Error::NonPositiveRadius(x[1]));
    }
    if y[1] <= 0.0 {
        return Err(Error::NonPositiveRadius(y[1]));
    }
    if x == y {
        return Err(Error::Singular);
    }
    Ok(())
}

/// `|x − y|² + 2 x2 y2 (1 − cos θ)`, written with `sin²(θ/2)` to avoid
/// cancellation near θ = 0.
#[inline]
fn theta_denominator(d2: f64, ab: f64, theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    d2 + 4.0 * ab * s * s
}

pub fn eval_h(x: Point, y: Point, path: KernelPath) -> Result<Point> {
    match path {
        KernelPath::Quadrature => h_quadrature(x, y, QuadOptions::default()),
        KernelPath::Elliptic => h_elliptic(x, y),
    }
}

pub fn eval_s(x: Point, y: Point, path: KernelPath) -> Result<f64> {
    match path {
        KernelPath::Quadrature => s_quadrature(x, y, QuadOptions::default()),
        KernelPath::Elliptic => s_elliptic(x, y),
    }
}

/// `H` by adaptive quadrature over θ ∈ [0, π].
///
/// Each component is refined against an absolute tolerance scaled by the
/// integral of a common positive majorant, so a component that nearly
/// cancels does not stall the refinement.
pub fn h_quadrature(x: Point, y: Point, opts: QuadOptions) -> Result<Point> {
    check_pair(x, y)?;
    let (a, b) = (x[1], y[1]);
    let dz = x[0] - y[0];
    let d2 = dz * dz + (a - b) * (a - b);
    let ab = a * b;
    let scale = integrate(
        |t| b * (a + b + dz.abs()) / theta_denominator(d2, ab, t).powf(1.5),
        0.0,
        PI,
        opts,
    )
    .value;
    let comp_opts = QuadOptions { abs_tol: opts.rel_tol * scale, ..opts };
    let h1 = integrate(
        |t| b * (b - a * t.cos()) / theta_denominator(d2, ab, t).powf(1.5),
        0.0,
        PI,
        comp_opts,
    );
    let h2 = integrate(|t| b * dz * t.cos() / theta_denominator(d2, ab, t).powf(1.5), 0.0, PI, comp_opts);
    Ok([h1.value / (2.0 * PI), h2.value / (2.0 * PI)])
}

/// `S` by adaptive quadrature over θ ∈ [0, π].
pub fn s_quadrature(x: Point, y: Point, opts: QuadOptions) -> Result<f64> {
    check_pair(x, y)?;
    let (a, b) = (x[1], y[1]);
    let dz = x[0] - y[0];
    let d2 = dz * dz + (a - b) * (a - b);
    let ab = a * b;
    let scale = integrate(|t| 1.0 / theta_denominator(d2, ab, t).sqrt(), 0.0, PI, opts).value;
    let r = integrate(
        |t| t.cos() / theta_denominator(d2, ab, t).sqrt(),
        0.0,
        PI,
        QuadOptions { abs_tol: opts.rel_tol * scale * 1e-2, ..opts },
    );
    Ok(ab / (2.0 * PI) * r.value)
}

/// Geometry shared by the closed forms: `ρ² = dz² + (a + b)²`, `m = 4ab / ρ²`.
#[inline]
fn ring_geometry(x: Point, y: Point) -> (f64, f64, f64, f64, f64) {
    let (a, b) = (x[1], y[1]);
    let dz = x[0] - y[0];
    let rho2 = dz * dz + (a + b) * (a + b);
    let m = (4.0 * a * b / rho2).min(1.0 - f64::EPSILON);
    (a, b, dz, rho2, m)
}

/// `S(x, y) = a b P(m) / (π ρ)`.
pub fn s_elliptic(x: Point, y: Point) -> Result<f64> {
    check_pair(x, y)?;
    Ok(s_elliptic_unchecked(x, y))
}

#[inline]
pub(crate) fn s_elliptic_unchecked(x: Point, y: Point) -> f64 {
    let (a, b, _dz, rho2, m) = ring_geometry(x, y);
    let (p, _) = ring_combination(m);
    a * b * p / (PI * rho2.sqrt())
}

/// `H = x2⁻¹ ∇⊥ₓ S` in closed form.
pub fn h_elliptic(x: Point, y: Point) -> Result<Point> {
    check_pair(x, y)?;
    Ok(h_elliptic_unchecked(x, y))
}

#[inline]
pub(crate) fn h_elliptic_unchecked(x: Point, y: Point) -> Point {
    let (a, b, dz, rho2, m) = ring_geometry(x, y);
    let (p, dp) = ring_combination(m);
    let rho3 = rho2 * rho2.sqrt();
    let pre = b / (PI * rho3);
    let h1 = pre / a * (p * (dz * dz + b * (a + b)) + dp * m * (dz * dz + (b - a) * (b + a)));
    let h2 = pre * dz * (p + 2.0 * m * dp);
    [h1, h2]
}

/// Planar point-vortex kernel `K(d) = (−d2, d1) / (2π |d|²)`.
pub fn eval_k(d: Point) -> Result<Point> {
    let n2 = d[0] * d[0] + d[1] * d[1];
    if n2 == 0.0 {
        return Err(Error::Singular);
    }
    Ok([-d[1] / (2.0 * PI * n2), d[0] / (2.0 * PI * n2)])
}

/// Logarithmic axial part `L(x, y) = log((1 + |x − y|) / |x − y|) / (4π x2) · (1, 0)`.
pub fn eval_l(x: Point, y: Point) -> Result<Point> {
    if x[1] <= 0.0 {
        return Err(Error::NonPositiveRadius(x[1]));
    }
    let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
    if d == 0.0 {
        return Err(Error::Singular);
    }
    Ok([(1.0 / d).ln_1p() / (4.0 * PI * x[1]), 0.0])
}

/// Remainder `R = H − K − L`.
pub fn eval_r(x: Point, y: Point, path: KernelPath) -> Result<Point> {
    let h = eval_h(x, y, path)?;
    let k = eval_k([x[0] - y[0], x[1] - y[1]])?;
    let l = eval_l(x, y)?;
    Ok([h[0] - k[0] - l[0], h[1] - k[1] - l[1]])
}

/// Shape of the remainder bounds: `(|R1| bound, |R2| bound)` without the constant.
pub fn remainder_bound_shape(x: Point, y: Point) -> (f64, f64) {
    let (a, b) = (x[1], y[1]);
    let ab = a * b;
    let r1 = (1.0 + a + ab.sqrt() * (1.0 + ab.ln().abs())) / (a * a);
    (r1, 1.0 / a)
}

/// Empirical constant for the remainder bounds over a sample of pairs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RemainderBoundFit {
    /// Smallest constant for which both bounds hold on every sample.
    pub c0_fit: f64,
    pub sample_count: usize,
    /// Largest `|R_k| / shape_k` over samples and components.
    pub worst_ratio: f64,
    pub worst_ratio_r1: f64,
    pub worst_ratio_r2: f64,
}

impl Default for RemainderBoundFit {
    fn default() -> Self {
        Self { c0_fit: 0.0, sample_count: 0, worst_ratio: 0.0, worst_ratio_r1: 0.0, worst_ratio_r2: 0.0 }
    }
}

impl RemainderBoundFit {
    pub fn accumulate(&mut self, x: Point, y: Point, r: Point) {
        let (s1, s2) = remainder_bound_shape(x, y);
        self.worst_ratio_r1 = self.worst_ratio_r1.max(r[0].abs() / s1);
        self.worst_ratio_r2 = self.worst_ratio_r2.max(r[1].abs() / s2);
        self.worst_ratio = self.worst_ratio_r1.max(self.worst_ratio_r2);
        self.c0_fit = self.worst_ratio;
        self.sample_count += 1;
    }
}

/// Fits the remainder constant over `pairs`, evaluating `R` along `path`.
pub fn fit_remainder_bound(pairs: &[(Point, Point)], path: KernelPath) -> Result<RemainderBoundFit> {
    let mut fit = RemainderBoundFit::default();
    for &(x, y) in pairs {
        let r = eval_r(x, y, path)?;
        fit.accumulate(x, y, r);
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn k_examples() {
        let k = eval_k([1.0, 0.0]).unwrap();
        assert_eq!(k[0], 0.0);
        assert_relative_eq!(k[1], 0.159_154_943_091_895_35, max_relative = 1e-15);
        let k = eval_k([0.0, 2.0]).unwrap();
        assert_relative_eq!(k[0], -1.0 / (4.0 * PI), max_relative = 1e-15);
        assert_eq!(k[1], 0.0);
        assert_eq!(eval_k([0.0, 0.0]), Err(Error::Singular));
    }

    #[test]
    fn l_examples() {
        let l = eval_l([0.0, 1.0], [1.0, 1.0]).unwrap();
        assert_relative_eq!(l[0], 2f64.ln() / (4.0 * PI), max_relative = 1e-15);
        assert_relative_eq!(l[0], 0.055_159, epsilon = 1e-6);
        let l = eval_l([0.0, 1.0], [0.0, 1.5]).unwrap();
        assert_relative_eq!(l[0], 3f64.ln() / (4.0 * PI), max_relative = 1e-15);
        assert_relative_eq!(l[0], 0.087_424, epsilon = 1e-6);
        assert_eq!(l[1], 0.0);
        assert!(eval_l([0.0, 1.0], [0.0, 1.0]).is_err());
        assert!(eval_l([0.0, 0.0], [0.0, 1.0]).is_err());
    }

    #[test]
    fn h_swap_identity_example() {
        let x = [0.0, 1.0];
        let y = [0.3, 1.2];
        for path in [KernelPath::Elliptic, KernelPath::Quadrature] {
            let hxy = eval_h(x, y, path).unwrap();
            let hyx = eval_h(y, x, path).unwrap();
            let lhs = x[1] * hxy[1] + y[1] * hyx[1];
            assert!(lhs.abs() <= 1e-12 * (x[1] * hxy[1]).abs(), "{path:?}: {lhs}");
        }
    }

    #[test]
    fn h_two_paths_agree() {
        let pairs = [
            ([0.0, 1.0], [0.3, 1.2]),
            ([0.0, 1.0], [5.0, 1.0]),
            ([-1.0, 0.5], [1.0, 2.0]),
            ([0.0, 1.0], [0.001, 1.0005]),
            ([0.2, 0.7], [0.2, 1.9]),
        ];
        for (x, y) in pairs {
            let q = eval_h(x, y, KernelPath::Quadrature).unwrap();
            let e = eval_h(x, y, KernelPath::Elliptic).unwrap();
            let norm = e[0].hypot(e[1]);
            let err = (q[0] - e[0]).hypot(q[1] - e[1]);
            assert!(err <= 1e-8 * norm, "{x:?} {y:?}: {q:?} vs {e:?}");
        }
    }

    #[test]
    fn s_two_paths_agree_example() {
        let x = [0.0, 1.0];
        let y = [1.0, 2.0];
        let q = eval_s(x, y, KernelPath::Quadrature).unwrap();
        let e = eval_s(x, y, KernelPath::Elliptic).unwrap();
        assert_relative_eq!(q, e, max_relative = 1e-10);
        assert!(e > 0.0);
    }

    #[test]
    fn h_is_perp_gradient_of_s() {
        let x = [0.1, 0.9];
        let y = [0.4, 1.3];
        let step = 1e-5;
        let ds1 = (s_elliptic([x[0] + step, x[1]], y).unwrap() - s_elliptic([x[0] - step, x[1]], y).unwrap())
            / (2.0 * step);
        let ds2 = (s_elliptic([x[0], x[1] + step], y).unwrap() - s_elliptic([x[0], x[1] - step], y).unwrap())
            / (2.0 * step);
        let h = h_elliptic(x, y).unwrap();
        assert_relative_eq!(h[0], ds2 / x[1], max_relative = 1e-8);
        assert_relative_eq!(h[1], -ds1 / x[1], max_relative = 1e-8);
    }

    #[test]
    fn singular_and_invalid_inputs() {
        let x = [0.0, 1.0];
        for path in [KernelPath::Elliptic, KernelPath::Quadrature] {
            assert_eq!(eval_h(x, x, path), Err(Error::Singular));
            assert_eq!(eval_s(x, x, path), Err(Error::Singular));
            assert_eq!(eval_r(x, x, path), Err(Error::Singular));
            assert!(matches!(eval_h([0.0, -1.0], x, path), Err(Error::NonPositiveRadius(_))));
        }
    }

    #[test]
    fn remainder_bounded_far_away() {
        let x = [0.0, 1.0];
        let mut prev = None;
        for &dz in &[10.0, 100.0, 1000.0] {
            let y = [dz, 1.0];
            let r = eval_r(x, y, KernelPath::Elliptic).unwrap();
            let k = eval_k([x[0] - y[0], x[1] - y[1]]).unwrap();
            let l = eval_l(x, y).unwrap();
            assert!(k[1].abs() < 1.0 / dz && l[0] < 1.0 / dz);
            // R → −K − L → 0 as well, so it stays bounded
            assert!(r[0].abs() < 1.0 && r[1].abs() < 1.0);
            if let Some(p) = prev {
                let p: Point = p;
                assert!(r[0].hypot(r[1]) <= p[0].hypot(p[1]));
            }
            prev = Some(r);
        }
    }

    #[test]
    fn remainder_example_obeys_bound_shape() {
        let x = [0.0, 1.0];
        let y = [5.0, 1.0];
        let r = eval_r(x, y, KernelPath::Quadrature).unwrap();
        let (s1, s2) = remainder_bound_shape(x, y);
        assert!(r[0].abs() <= s1 && r[1].abs() <= s2);
    }
}
