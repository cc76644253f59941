//! Complete elliptic integrals by the arithmetic-geometric mean, plus the
//! combination that appears in the ring stream function.
//!
//! Parameter convention: `m = k²`.

use std::f64::consts::PI;

const MAX_ITER: usize = 40;

/// Below this parameter the ring combination is summed from its power
/// series; the closed form loses ~`eps / m²` to cancellation.
const SERIES_CUTOFF: f64 = 0.05;

/// Returns `(K(m), E(m))` for `m ∈ [0, 1)`.
pub fn complete_ke(m: f64) -> (f64, f64) {
    debug_assert!((0.0..1.0).contains(&m), "elliptic parameter out of range: {m}");
    let mut a = 1.0_f64;
    let mut g = (1.0 - m).sqrt();
    let mut c2_sum = 0.5 * m; // 2^{-1} c_0², c_0 = √m
    let mut pow2 = 0.5;
    for _ in 0..MAX_ITER {
        let c = 0.5 * (a - g);
        pow2 *= 2.0;
        c2_sum += pow2 * c * c;
        let a_next = 0.5 * (a + g);
        g = (a * g).sqrt();
        a = a_next;
        if c.abs() <= 1e-17 * a {
            break;
        }
    }
    let k = PI / (2.0 * a);
    (k, k * (1.0 - c2_sum))
}

pub fn ellip_k(m: f64) -> f64 {
    complete_ke(m).0
}

pub fn ellip_e(m: f64) -> f64 {
    complete_ke(m).1
}

/// `P(m) = (2/m − 1) K(m) − (2/m) E(m)` and its derivative `P'(m)`.
///
/// `P` vanishes like `π m / 16` at the origin and diverges logarithmically
/// as `m → 1`.
pub fn ring_combination(m: f64) -> (f64, f64) {
    if m < SERIES_CUTOFF {
        return ring_combination_series(m);
    }
    let (k, e) = complete_ke(m);
    let p = (2.0 / m - 1.0) * k - (2.0 / m) * e;
    let dp = ((4.0 - 3.0 * m) * e - (1.0 - m) * (4.0 - m) * k) / (2.0 * m * m * (1.0 - m));
    (p, dp)
}

/// Power series of `P` about `m = 0`, built from the hypergeometric series
/// of `K` and `E`.
fn ring_combination_series(m: f64) -> (f64, f64) {
    // a_n: coefficients of 2K/π, b_n: coefficients of 2E/π.
    let mut a = 1.0;
    let mut b = 1.0;
    let mut a_next;
    let mut b_next;
    let mut p = 0.0;
    let mut dp = 0.0;
    let mut m_pow = 1.0; // m^{j-1}
    for j in 1..40 {
        let n = j as f64;
        // advance (a, b) from index j-1 to j, keeping the j-th values too
        let a_j = a * ((2.0 * n - 1.0) / (2.0 * n)).powi(2);
        let b_j = b * (2.0 * n - 3.0) * (2.0 * n - 1.0) / (4.0 * n * n);
        let n1 = n + 1.0;
        a_next = a_j * ((2.0 * n1 - 1.0) / (2.0 * n1)).powi(2);
        b_next = b_j * (2.0 * n1 - 3.0) * (2.0 * n1 - 1.0) / (4.0 * n1 * n1);
        // coefficient of m^j in P
        let d = PI * ((a_next - b_next) - 0.5 * a_j);
        let term = d * m_pow * m;
        p += term;
        dp += n * d * m_pow;
        a = a_j;
        b = b_j;
        if term.abs() < 1e-18 * p.abs() && j > 2 {
            break;
        }
        m_pow *= m;
    }
    (p, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Composite Simpson; the integrands are smooth for m ≤ 0.9.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn known_values() {
        assert_relative_eq!(ellip_k(0.0), PI / 2.0, max_relative = 1e-15);
        assert_relative_eq!(ellip_e(0.0), PI / 2.0, max_relative = 1e-15);
        // K(1/2), E(1/2) reference values
        assert_relative_eq!(ellip_k(0.5), 1.854_074_677_301_372, max_relative = 1e-14);
        assert_relative_eq!(ellip_e(0.5), 1.350_643_881_047_675_5, max_relative = 1e-14);
    }

    #[test]
    fn agm_matches_quadrature() {
        for &m in &[0.01, 0.2, 0.5, 0.8, 0.9] {
            let k = simpson(|t| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, PI / 2.0, 2000);
            let e = simpson(|t| (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, PI / 2.0, 2000);
            let (ka, ea) = complete_ke(m);
            assert_relative_eq!(ka, k, max_relative = 1e-12);
            assert_relative_eq!(ea, e, max_relative = 1e-12);
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_cutoff() {
        for &m in &[0.03, 0.049, 0.06, 0.1] {
            let (k, e) = complete_ke(m);
            let p = (2.0 / m - 1.0) * k - (2.0 / m) * e;
            let (ps, dps) = ring_combination_series(m);
            assert_relative_eq!(ps, p, max_relative = 1e-11);
            let h = 1e-6;
            let fd = (ring_combination(m + h).0 - ring_combination(m - h).0) / (2.0 * h);
            assert_relative_eq!(dps, fd, max_relative = 1e-7);
        }
        let (p, dp) = ring_combination(1e-8);
        assert_relative_eq!(p, PI * 1e-8 / 16.0, max_relative = 1e-7);
        assert_relative_eq!(dp, PI / 16.0, max_relative = 1e-7);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for &m in &[0.1, 0.4, 0.7, 0.95, 0.999] {
            let h = 1e-6 * (1.0 - m);
            let fd = (ring_combination(m + h).0 - ring_combination(m - h).0) / (2.0 * h);
            assert_relative_eq!(ring_combination(m).1, fd, max_relative = 1e-6);
        }
    }
}
