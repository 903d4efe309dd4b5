use geg_core::{
    deformed_exp, deformed_exp_numeric, deformed_exp_series, deformed_log, DeformKind, DeformParams,
};
use proptest::prelude::*;

/// Valid `(a, b)`: opposite signs (or a zero) inside `(-1, 1)`.
fn params() -> impl Strategy<Value = DeformParams> {
    (0.0..0.95f64, 0.0..0.95f64, any::<bool>(), 0..4u8).prop_map(|(u, v, flip, zero)| {
        let (mut a, mut b) = if flip { (-u, v) } else { (u, -v) };
        match zero {
            0 => a = 0.0,
            1 => b = 0.0,
            _ => {}
        }
        DeformParams::new(a, b).unwrap()
    })
}

fn log_x() -> impl Strategy<Value = f64> {
    (-3.0..3.0f64).prop_map(|e| 10f64.powf(e))
}

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn exp_inverts_log(p in params(), x in log_x()) {
        let back = deformed_exp(p, deformed_log(p, x).unwrap()).unwrap();
        prop_assert!(((back - x) / x).abs() <= 1e-8, "{p} x={x} back={back}");
    }

    #[test]
    fn log_inverts_exp_inside_range(p in params(), t in 0.02..0.98f64) {
        // map t onto the interior of the range, restricted to the image of
        // [1e-100, 1e100] so exp stays representable (tiny a grows very slowly)
        let (inf, sup) = p.log_range();
        let lo = inf.max(deformed_log(p, 1e-100).unwrap());
        let hi = sup.min(deformed_log(p, 1e100).unwrap());
        let y = lo + t * (hi - lo);
        let x = deformed_exp(p, y).unwrap();
        prop_assert!(x > 0.0 && x.is_finite());
        let back = deformed_log(p, x).unwrap();
        prop_assert!((back - y).abs() <= 1e-8 * (1.0 + y.abs()), "{p} y={y} back={back}");
    }

    #[test]
    fn symmetric_in_a_and_b(p in params(), x in log_x()) {
        let swapped = DeformParams::new(p.b(), p.a()).unwrap();
        prop_assert_eq!(deformed_log(p, x).unwrap(), deformed_log(swapped, x).unwrap());
    }

    #[test]
    fn self_dual(p in params(), x in (-2.0..2.0f64).prop_map(|e| 10f64.powf(e))) {
        let dual = DeformParams::new(-p.b(), -p.a()).unwrap();
        let lhs = deformed_log(p, 1.0 / x).unwrap();
        let rhs = -deformed_log(dual, x).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12), "{lhs} vs {rhs}");
    }

    #[test]
    fn power_identity(p in params(), x in (-2.0..2.0f64).prop_map(|e| 10f64.powf(e)), s in 0.05..1.0f64) {
        // λ chosen so that (aλ, bλ) stays valid
        let bound = p.a().abs().max(p.b().abs()).max(1e-3);
        let lambda = s * (0.99 / bound).min(3.0);
        let scaled = DeformParams::new(p.a() * lambda, p.b() * lambda).unwrap();
        let lhs = deformed_log(p, x.powf(lambda)).unwrap();
        let rhs = lambda * deformed_log(scaled, x).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12), "{p} λ={lambda}: {lhs} vs {rhs}");
    }

    #[test]
    fn log_increasing_and_concave(p in params(), x in (-2.0..2.0f64).prop_map(|e| 10f64.powf(e))) {
        let h = 1e-3 * x;
        let (l0, l1, l2) = (
            deformed_log(p, x - h).unwrap(),
            deformed_log(p, x).unwrap(),
            deformed_log(p, x + h).unwrap(),
        );
        prop_assert!(l0 < l1 && l1 < l2);
        prop_assert!(l2 - 2.0 * l1 + l0 <= 1e-12 * (1.0 + l1.abs()));
    }

    #[test]
    fn exp_increasing_and_convex(p in params(), t in 0.05..0.95f64) {
        let (inf, sup) = p.log_range();
        let (lo, hi) = (inf.max(-5.0), sup.min(5.0));
        let y = lo + t * (hi - lo);
        let h = 1e-3 * (hi - lo);
        let (e0, e1, e2) = (
            deformed_exp(p, y - h).unwrap(),
            deformed_exp(p, y).unwrap(),
            deformed_exp(p, y + h).unwrap(),
        );
        prop_assert!(e0 < e1 && e1 < e2, "{p} y={y}: {e0} {e1} {e2}");
        prop_assert!(e2 - 2.0 * e1 + e0 >= -1e-12 * (1.0 + e1));
    }

    #[test]
    fn unit_slope_at_one(p in params()) {
        let h = 1e-6;
        let slope = (deformed_log(p, 1.0 + h).unwrap() - deformed_log(p, 1.0 - h).unwrap()) / (2.0 * h);
        prop_assert!((slope - 1.0).abs() < 1e-8, "{p}: {slope}");
    }

    #[test]
    fn numeric_inversion_agrees_with_dispatch(p in params(), t in 0.05..0.95f64) {
        let (inf, sup) = p.log_range();
        let y = inf.max(-2.0) + t * (sup.min(2.0) - inf.max(-2.0));
        let direct = deformed_exp(p, y).unwrap();
        let numeric = deformed_exp_numeric(p, y).unwrap();
        prop_assert!((direct - numeric).abs() <= 1e-10 * (1.0 + direct), "{p} y={y}");
    }

    #[test]
    fn series_error_is_fourth_order(p in params(), y in -0.25..0.25f64) {
        let exact = deformed_exp(p, y).unwrap();
        let series = deformed_exp_series(p, y).unwrap();
        prop_assert!((exact - series).abs() <= 10.0 * y.powi(4) + 1e-15, "{p} y={y}");
    }
}

#[test]
fn closed_forms_match_numeric_inversion() {
    let kinds = [
        DeformKind::Tsallis(0.3),
        DeformKind::Tsallis(1.4),
        DeformKind::Kaniadakis(0.2),
        DeformKind::Kaniadakis(0.9),
        DeformKind::Amari(0.45),
        DeformKind::Amari(-0.7),
        DeformKind::Gamma(0.2),
        DeformKind::Gamma(-0.45),
    ];
    for kind in kinds {
        let p = DeformParams::from_kind(kind).unwrap();
        for k in 0..=400 {
            let y = -2.0 + 0.01 * k as f64;
            let closed = deformed_exp(p, y).unwrap();
            let numeric = deformed_exp_numeric(p, y).unwrap();
            if closed.is_finite() {
                assert!((closed - numeric).abs() <= 1e-10, "{kind:?} y={y}: {closed} vs {numeric}");
            } else {
                assert_eq!(closed, numeric, "{kind:?} y={y}");
            }
        }
    }
}

/// Adaptive Simpson on `[lo, hi]`.
fn simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    fn rule(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn go(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (left, right) = (rule(f, a, m), rule(f, m, b));
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            go(f, a, m, left, 0.5 * tol, depth - 1) + go(f, m, b, right, 0.5 * tol, depth - 1)
        }
    }
    go(f, lo, hi, rule(f, lo, hi), tol, 40)
}

/// `∫₀¹ log(1/x) dx` via `x = e^{-t}`: `∫₀^∞ log(e^t) e^{-t} dt`.
fn inverse_log_integral(p: DeformParams) -> f64 {
    let f = |t: f64| deformed_log(p, t.exp()).unwrap() * (-t).exp();
    // the integrand decays like e^{-(1 - max(a, b)) t}
    let rate = 1.0 - p.a().max(p.b());
    let end = 60.0 / rate;
    simpson(&f, 0.0, end, 1e-10)
}

#[test]
fn inverse_log_integral_exact_form() {
    for (a, b) in [(0.0, 0.0), (0.5, 0.0), (0.0, -0.6), (0.4, -0.2), (-0.3, 0.6), (0.7, -0.7), (0.2, -0.8)] {
        let p = DeformParams::new(a, b).unwrap();
        let expected = 1.0 / ((1.0 - a) * (1.0 - b));
        let got = inverse_log_integral(p);
        assert!((got - expected).abs() < 1e-6, "({a}, {b}): {got} vs {expected}");
    }
}

#[test]
fn inverse_log_integral_quadratic_form_on_symmetric_pairs() {
    // 1/(1 - (a + b + a²/2 + b²/2)) coincides with the exact value when a = -b
    for kappa in [0.1, 0.3, 0.5, 0.8] {
        let p = DeformParams::from_kind(DeformKind::Kaniadakis(kappa)).unwrap();
        let (a, b) = (p.a(), p.b());
        let quadratic = 1.0 / (1.0 - (a + b + 0.5 * a * a + 0.5 * b * b));
        let got = inverse_log_integral(p);
        assert!((got - quadratic).abs() < 1e-4, "κ={kappa}: {got} vs {quadratic}");
    }
}
