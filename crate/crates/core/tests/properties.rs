use std::sync::Arc;

use proptest::prelude::*;

use oscspec::asympt::{classify, critical_coupling, fit_slope, slope_m, Branch, Verdict};
use oscspec::gsrep::{Gauge, GroundStateData};
use oscspec::hardy::{
    hardy_form, kats_krein_compact, kats_krein_sides, log_tent, robin_hardy_sigma, FormKind, Side,
    TestFunction, Weighting,
};
use oscspec::model::{
    angular_channels, effective_channel, eval_potential, harmonic_multiplicity, AngularChannel,
    BoundaryCondition, Oscillation, PotentialSpec,
};
use oscspec::oracle::{inertia_count, TridiagonalOperator};

fn binomial(n: u64, k: u64) -> u64 {
    // Pascal's rule, independent of the closed form used by the library
    let mut row = vec![1u64; 1];
    for i in 1..=n as usize {
        let mut next = vec![1u64; i + 1];
        for j in 1..i {
            next[j] = row[j - 1] + row[j];
        }
        row = next;
    }
    row.get(k as usize).copied().unwrap_or(0)
}

/// `(1 − x)² p(x)` on `[a, a + len]`, with `x = (r − a)/len`.
fn polynomial_tail(a: f64, len: f64, c: [f64; 4]) -> TestFunction<f64> {
    let value = move |r: f64| {
        let x = ((r - a) / len).clamp(0.0, 1.0);
        (1.0 - x).powi(2) * (c[0] + x * (c[1] + x * (c[2] + x * c[3])))
    };
    let derivative = move |r: f64| {
        let x = (r - a) / len;
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let p = c[0] + x * (c[1] + x * (c[2] + x * c[3]));
        let dp = c[1] + x * (2.0 * c[2] + 3.0 * x * c[3]);
        ((1.0 - x).powi(2) * dp - 2.0 * (1.0 - x) * p) / len
    };
    TestFunction {
        support: (a, a + len),
        breakpoints: Vec::new(),
        value: Arc::new(value),
        derivative: Arc::new(derivative),
    }
}

/// Nonnegative `(x(1−x))²` bump on `[a, b]`, scaled by `h`.
fn bump(a: f64, b: f64, h: f64) -> TestFunction<f64> {
    let len = b - a;
    TestFunction {
        support: (a, b),
        breakpoints: Vec::new(),
        value: Arc::new(move |r| {
            let x = (r - a) / len;
            if (0.0..=1.0).contains(&x) {
                h * (x * (1.0 - x)).powi(2)
            } else {
                0.0
            }
        }),
        derivative: Arc::new(move |r| {
            let x = (r - a) / len;
            if (0.0..=1.0).contains(&x) {
                h * 2.0 * x * (1.0 - x) * (1.0 - 2.0 * x) / len
            } else {
                0.0
            }
        }),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplicities_fill_polynomial_space(d in 2u32..9, l_max in 0u32..25) {
        let sum: u64 = angular_channels::<f64>(d, l_max).unwrap().iter().map(|c| c.multiplicity).sum();
        let (n, k) = (l_max as u64, d as u64 - 1);
        let expected = binomial(n + k, k) + if n >= 1 { binomial(n - 1 + k, k) } else { 0 };
        prop_assert_eq!(sum, expected);
        for l in 0..=l_max {
            prop_assert_eq!(harmonic_multiplicity(d, l), AngularChannel::<f64>::new(d, l).unwrap().multiplicity);
        }
    }

    #[test]
    fn s_wave_in_three_dimensions_is_minus_v(
        lambda in -10.0f64..10.0, mu in 0.2f64..3.0, alpha in 0.5f64..3.0, beta in -2.0f64..1.0, r in 0.01f64..500.0,
    ) {
        let spec = PotentialSpec::new(lambda, mu, alpha, beta).unwrap();
        let ch = AngularChannel::new(3, 0).unwrap();
        let op = effective_channel(&spec, &ch, 1e-3, BoundaryCondition::Dirichlet).unwrap();
        let v = eval_potential(&spec, r);
        prop_assert!((op.q(r) + v).abs() <= 1e-12 * (1.0 + v.abs()));
    }

    #[test]
    fn potential_is_odd_in_lambda(
        lambda in -10.0f64..10.0, mu in 0.2f64..3.0, alpha in 0.5f64..3.0, beta in -2.0f64..1.0, r in 0.01f64..500.0,
    ) {
        let p = PotentialSpec::new(lambda, mu, alpha, beta).unwrap();
        let m = PotentialSpec::new(-lambda, mu, alpha, beta).unwrap();
        prop_assert_eq!(eval_potential(&p, r), -eval_potential(&m, r));
    }

    #[test]
    fn w_is_continuous_across_crossover(
        lambda in 0.1f64..10.0, mu in 0.3f64..3.0, alpha in 0.8f64..3.0, gap in 1.2f64..3.5,
    ) {
        let osc = Oscillation { lambda, mu, alpha, beta: alpha - gap, inner_cap: 1e-9 };
        let g = GroundStateData::oscillating(osc, Gauge::TailZero).unwrap();
        let rc = g.crossover_radius;
        let below = g.w(rc * (1.0 - 1e-13));
        let above = g.w(rc * (1.0 + 1e-13));
        let bound = g.remainder_c * rc.powf(osc.beta + 1.0 - 2.0 * alpha);
        prop_assert!((below - above).abs() <= bound, "{} {} {}", below, above, bound);
    }

    #[test]
    fn w_differentiates_to_minus_v(
        lambda in 0.1f64..10.0, alpha in 0.8f64..3.0, gap in 1.2f64..3.5, r in 0.2f64..60.0,
    ) {
        let osc = Oscillation { lambda, mu: 1.0, alpha, beta: alpha - gap, inner_cap: 1e-9 };
        let g = GroundStateData::oscillating(osc, Gauge::TailZero).unwrap();
        let h = (1e-5 * r).min(1e-4 * osc.period(r));
        let dw = (g.w(r + h) - g.w(r - h)) / (2.0 * h);
        let v = osc.eval(r);
        let scale = 1.0 + v.abs() + (lambda * r.powf(osc.beta + alpha - 1.0)).abs();
        prop_assert!((dw + v).abs() <= 1e-5 * scale, "{} {}", dw, v);
    }

    #[test]
    fn inertia_is_monotone(
        diag in prop::collection::vec(-5.0f64..5.0, 2..40),
        off in prop::collection::vec(-2.0f64..2.0, 40),
        a in -10.0f64..10.0, b in -10.0f64..10.0,
    ) {
        let n = diag.len();
        let t = TridiagonalOperator::standard(diag, off[..n - 1].to_vec());
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (cl, ch) = (inertia_count(&t, lo), inertia_count(&t, hi));
        prop_assert!(cl <= ch && ch <= n);
    }

    #[test]
    fn witness_scaling_law(kappa in 0.5f64..8.0, ln_l in 2.0f64..8.0, eps in 0.05f64..2.0) {
        let form = |f: &TestFunction<f64>| {
            hardy_form(f, FormKind::Plain, 0.0, eps, Side::Kinetic).unwrap()
                - hardy_form(f, FormKind::Plain, 0.0, eps, Side::Potential).unwrap()
        };
        let v = log_tent(ln_l);
        let f0 = form(&v);
        let fk = form(&v.scaled(kappa));
        prop_assert!((fk * kappa * kappa - f0).abs() <= 1e-8 * f0.abs());
    }

    #[test]
    fn robin_log_hardy_at_computed_sigma(
        rho_i in 0usize..4, r_i in 0usize..2, len in 0.3f64..60.0, c in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let rho = [0.0, 0.5, 1.0, 2.0][rho_i];
        let big_r = [std::f64::consts::E, 10.0][r_i];
        let u = polynomial_tail(big_r, len, c);
        let kind = FormKind::Weighted { rho };
        let kin = hardy_form(&u, kind, big_r, 0.0, Side::Kinetic).unwrap();
        let pot = hardy_form(&u, kind, big_r, 0.0, Side::Potential).unwrap();
        let u0 = (u.value)(big_r);
        let sigma = robin_hardy_sigma(rho, big_r);
        prop_assert!(kin + sigma * u0 * u0 - pot >= -1e-12 * (kin + pot));
    }

    #[test]
    fn kats_krein_bound_for_positive_potentials(
        va in 0.2f64..5.0, vl in 0.5f64..10.0, vh in 0.1f64..5.0,
        ua in 0.01f64..5.0, ul in 0.5f64..20.0, uh in 0.1f64..3.0,
    ) {
        let vb = bump(va, va + vl, vh);
        let val = Arc::clone(&vb.value);
        let c = kats_krein_compact(val, va + vl, &[], Gauge::TailZero, Weighting::TimesT).unwrap();
        prop_assert!(c.constant.is_finite());
        let u = bump(ua, ua + ul, uh);
        let v = |r: f64| (vb.value)(r);
        let (lhs, rhs) = kats_krein_sides(&v, &u).unwrap();
        prop_assert!(lhs <= c.constant * rhs * (1.0 + 1e-9), "{} {} {}", lhs, c.constant, rhs);
    }

    #[test]
    fn slope_is_even_and_scales_with_mu(lambda in -20.0f64..20.0, mu in 0.1f64..5.0, alpha in 0.3f64..4.0, d in 1u32..7) {
        let m = slope_m(lambda, mu, alpha, d);
        prop_assert_eq!(m, slope_m(-lambda, mu, alpha, d));
        let s = slope_m(lambda / mu, 1.0, alpha, d);
        prop_assert!((m - s).abs() <= 1e-12 * (1.0 + m));
    }

    #[test]
    fn slope_is_nondecreasing(mu in 0.1f64..5.0, alpha in 0.3f64..4.0, d in 1u32..7, a in 0.0f64..30.0, b in 0.0f64..30.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(slope_m(lo, mu, alpha, d) <= slope_m(hi, mu, alpha, d) * (1.0 + 1e-14));
    }

    #[test]
    fn slope_vanishes_exactly_up_to_threshold(mu in 0.1f64..5.0, alpha in 0.3f64..4.0, d in 1u32..9, k in -100i32..100) {
        prop_assume!(d != 2);
        let lc = critical_coupling(mu, alpha, d);
        let lambda = lc + k as f64 * 1e-6;
        prop_assume!(lambda >= 0.0);
        prop_assert_eq!(slope_m(lambda, mu, alpha, d) == 0.0, k <= 0);
    }

    #[test]
    fn branch_matches_verdict(lambda in -10.0f64..10.0, mu in 0.1f64..3.0, alpha in 0.1f64..4.0, beta in -3.0f64..3.0, d in 1u32..7) {
        match classify(lambda, mu, alpha, beta, d) {
            Ok(c) => {
                let finite = matches!(c.branch, Branch::FastDecay | Branch::Subcritical | Branch::ZeroCoupling);
                prop_assert_eq!(finite, c.verdict == Verdict::Finite);
                prop_assert_eq!(c.critical_coupling.is_some(), matches!(c.branch, Branch::Subcritical | Branch::Supercritical));
            }
            Err(_) => prop_assert!(!(alpha - beta > 1.0 && 2.0 * alpha - beta > 2.0)),
        }
    }

    #[test]
    fn fit_solves_normal_equations(pts in prop::collection::vec((0.0f64..50.0, -100.0f64..100.0), 3..30)) {
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        prop_assume!(xs.iter().any(|&x| (x - xs[0]).abs() > 1e-3));
        let f = fit_slope(&pts).unwrap();
        prop_assert!(f.residual_rms >= 0.0);
        // residuals are orthogonal to 1 and x
        let r: Vec<f64> = pts.iter().map(|p| p.1 - f.intercept - f.slope * p.0).collect();
        let s0: f64 = r.iter().sum();
        let s1: f64 = r.iter().zip(&xs).map(|(a, x)| a * x).sum();
        let scale: f64 = pts.iter().map(|p| p.1.abs() * (1.0 + p.0)).sum::<f64>() + 1.0;
        prop_assert!(s0.abs() <= 1e-9 * scale && s1.abs() <= 1e-9 * scale * 50.0);
    }
}
