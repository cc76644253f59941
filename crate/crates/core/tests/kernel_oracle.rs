use approx::assert_relative_eq;
use axiring_core::kernels::{eval_h, eval_s, KernelPath};
use axiring_core::Point;
use proptest::prelude::*;

/// `(x, y, S, H)` from 30-digit θ-quadrature of `S`, with `H = (∂2 S, −∂1 S) / x2`
/// by numerical differentiation of that quadrature.
const FROZEN: [(Point, Point, f64, Point); 5] = [
    ([0.0, 1.0], [1.0, 1.0], 0.062575768364293918, [0.076778921850171231, -0.090982075336048544]),
    ([0.0, 1.0], [0.0, 1.5], 0.2060564203446963, [0.52639692914685276, 0.0]),
    ([0.3, 0.7], [-0.4, 1.9], 0.054145753699343476, [0.22417097581936041, 0.045856455014855873]),
    ([0.05, 1.0], [0.0, 1.02], 0.48436301748848238, [1.4257996792042994, 2.7590167143591127]),
    ([1.2, 2.0], [-0.8, 0.5], 0.01085252298797107, [0.0014846565619971689, 0.0040989180320251267]),
];

#[test]
fn both_paths_match_frozen_values() {
    for (x, y, s, h) in FROZEN {
        for path in [KernelPath::Elliptic, KernelPath::Quadrature] {
            assert_relative_eq!(eval_s(x, y, path).unwrap(), s, max_relative = 1e-11);
            let got = eval_h(x, y, path).unwrap();
            let scale = h[0].hypot(h[1]);
            assert!((got[0] - h[0]).hypot(got[1] - h[1]) <= 1e-10 * scale, "{path:?} {x:?} {y:?}: {got:?} vs {h:?}");
        }
    }
}

fn point() -> impl Strategy<Value = Point> {
    (-1.0..1.0f64, 0.5..2.0f64).prop_map(|(a, b)| [a, b])
}

proptest! {
    #[test]
    fn s_is_symmetric_and_axially_invariant((x, y) in (point(), point()), shift in -2.0..2.0f64) {
        prop_assume!((x[0] - y[0]).hypot(x[1] - y[1]) > 1e-3);
        let s = eval_s(x, y, KernelPath::Elliptic).unwrap();
        prop_assert!((eval_s(y, x, KernelPath::Elliptic).unwrap() - s).abs() <= 1e-13 * s.abs());
        let moved = eval_s([x[0] + shift, x[1]], [y[0] + shift, y[1]], KernelPath::Elliptic).unwrap();
        prop_assert!((moved - s).abs() <= 1e-12 * s.abs());
    }

    #[test]
    fn h_is_the_scaled_rotated_gradient_of_s((x, y) in (point(), point())) {
        prop_assume!((x[0] - y[0]).hypot(x[1] - y[1]) > 0.05);
        let d = 1e-5;
        let s = |p: Point| eval_s(p, y, KernelPath::Elliptic).unwrap();
        let d1 = (s([x[0] + d, x[1]]) - s([x[0] - d, x[1]])) / (2.0 * d);
        let d2 = (s([x[0], x[1] + d]) - s([x[0], x[1] - d])) / (2.0 * d);
        let h = eval_h(x, y, KernelPath::Elliptic).unwrap();
        let scale = h[0].hypot(h[1]);
        prop_assert!((h[0] - d2 / x[1]).hypot(h[1] + d1 / x[1]) <= 1e-6 * scale);
    }
}
