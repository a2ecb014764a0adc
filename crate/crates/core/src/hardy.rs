//! Hardy-type inequalities: Robin log-Hardy constants, negative-form
//! witnesses and the Kats–Krein constant.

use std::sync::Arc;

use crate::error::Result;
use crate::gsrep::{golden_max, Gauge, GroundStateData};
use crate::model::{Oscillation, RadialFn};
use crate::quad::{adaptive_pieces, Tolerance};
use crate::scalar::Scalar;

/// Smallest `σ` for which
/// `∫_R^∞ ((ρ−1)²/4 + 1/(4 ln²r)) r^{ρ−2} |u|² ≤ ∫_R^∞ |u'|² r^ρ + σ|u(R)|²`.
pub fn robin_hardy_sigma<T: Scalar>(rho: T, big_r: T) -> T {
    big_r.powf(rho - T::one()) * (T::one() / big_r.ln() + T::one() - rho) / T::lit(2.0)
}

/// A compactly supported function with its derivative.
#[derive(Clone)]
pub struct TestFunction<T> {
    pub support: (T, T),
    /// Points where the function is not smooth.
    pub breakpoints: Vec<T>,
    pub value: RadialFn<T>,
    pub derivative: RadialFn<T>,
}

impl<T: Scalar> TestFunction<T> {
    pub fn zero() -> Self {
        TestFunction {
            support: (T::one(), T::lit(2.0)),
            breakpoints: Vec::new(),
            value: Arc::new(|_| T::zero()),
            derivative: Arc::new(|_| T::zero()),
        }
    }

    /// `κ^{−1/2} f(t/κ)`.
    pub fn scaled(&self, kappa: T) -> Self {
        let v = Arc::clone(&self.value);
        let dv = Arc::clone(&self.derivative);
        let s = kappa.sqrt();
        TestFunction {
            support: (self.support.0 * kappa, self.support.1 * kappa),
            breakpoints: self.breakpoints.iter().map(|&b| b * kappa).collect(),
            value: Arc::new(move |t| v(t / kappa) / s),
            derivative: Arc::new(move |t| dv(t / kappa) / (s * kappa)),
        }
    }
}

/// `√t (1 − |ln t| / ln L)_+`, supported on `[1/L, L]`.
pub fn log_tent<T: Scalar>(ln_l: T) -> TestFunction<T> {
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    TestFunction {
        support: ((-ln_l).exp(), ln_l.exp()),
        breakpoints: vec![T::one()],
        value: Arc::new(move |t: T| {
            let f = (T::one() - t.ln().abs() / ln_l).positive_part();
            t.sqrt() * f
        }),
        derivative: Arc::new(move |t: T| {
            let lt = t.ln();
            if lt.abs() >= ln_l {
                return T::zero();
            }
            let f = T::one() - lt.abs() / ln_l;
            let slope = if lt < T::zero() {
                two / ln_l
            } else {
                -two / ln_l
            };
            half / t.sqrt() * (f + slope)
        }),
    }
}

/// Which quadratic form is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FormKind<T> {
    /// Measure `r^ρ dr`, potential `((ρ−1)²/4 + (1+ε)/(4 ln²r)) / r²`.
    Weighted { rho: T },
    /// Measure `dt`, potential `(1+ε)/(4t²)`.
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Kinetic,
    Potential,
}

/// One side of a Hardy inequality for `u`, integrated over
/// `supp u ∩ [lower, ∞)`.
pub fn hardy_form<T: Scalar>(
    u: &TestFunction<T>,
    kind: FormKind<T>,
    lower: T,
    epsilon: T,
    side: Side,
) -> Result<T> {
    let a = u.support.0.max(lower);
    let b = u.support.1;
    if a >= b {
        return Ok(T::zero());
    }
    let tol = Tolerance {
        abs: T::zero(),
        rel: T::lit(1e-13),
        max_depth: 60,
    };
    let four = T::lit(4.0);
    let one_eps = T::one() + epsilon;
    let integrand = |r: T| -> T {
        match (kind, side) {
            (FormKind::Weighted { rho }, Side::Kinetic) => {
                let d = (u.derivative)(r);
                d * d * r.powf(rho)
            }
            (FormKind::Weighted { rho }, Side::Potential) => {
                let v = (u.value)(r);
                let lr = r.ln();
                let c = (rho - T::one()).powi(2) / four + one_eps / (four * lr * lr);
                c * v * v * r.powf(rho - T::lit(2.0))
            }
            (FormKind::Plain, Side::Kinetic) => {
                let d = (u.derivative)(r);
                d * d
            }
            (FormKind::Plain, Side::Potential) => {
                let v = (u.value)(r);
                one_eps * v * v / (four * r * r)
            }
        }
    };
    adaptive_pieces(a, b, &u.breakpoints, tol, integrand)
}

/// A function with negative reverse-Hardy form.
#[derive(Clone)]
pub struct HardyWitness<T> {
    pub ln_l: T,
    pub epsilon: T,
    pub kappa: T,
    pub support: (T, T),
    /// `∫|v'|² − (1+ε)∫|v|²/(4t²)` by quadrature.
    pub form_value: T,
    /// `κ^{−2}(2/ln L − ε ln L / 6)`.
    pub closed_form: T,
    pub function: TestFunction<T>,
}

/// Safety factor on `ln L` over the marginal `√(12/ε)`.
pub const WITNESS_SAFETY: f64 = 1.2;

/// Closed form of `∫|v_L'|² − (1+ε)∫|v_L|²/(4t²)`.
pub fn log_tent_form<T: Scalar>(ln_l: T, epsilon: T) -> T {
    T::lit(2.0) / ln_l - epsilon * ln_l / T::lit(6.0)
}

/// The `index`-th (from 1) witness: a scaled log tent whose support lies to
/// the right of `target_left` and of all earlier witnesses.
pub fn reverse_hardy_witness<T: Scalar>(
    epsilon: T,
    target_left: T,
    index: u32,
) -> Result<HardyWitness<T>> {
    if !(epsilon > T::zero()) {
        return Err(crate::Error::InvalidParameter(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    let ln_l = T::lit(WITNESS_SAFETY) * (T::lit(12.0) / epsilon).sqrt();
    let l = ln_l.exp();
    let mut kappa = if target_left > T::zero() {
        T::lit(2.0) * target_left * l
    } else {
        T::one()
    };
    for _ in 1..index.max(1) {
        kappa = T::lit(2.0) * kappa * l * l;
    }
    let f = log_tent(ln_l).scaled(kappa);
    let kin = hardy_form(&f, FormKind::Plain, T::zero(), epsilon, Side::Kinetic)?;
    let pot = hardy_form(&f, FormKind::Plain, T::zero(), epsilon, Side::Potential)?;
    Ok(HardyWitness {
        ln_l,
        epsilon,
        kappa,
        support: f.support,
        form_value: kin - pot,
        closed_form: log_tent_form(ln_l, epsilon) / (kappa * kappa),
        function: f,
    })
}

/// Result of the Kats–Krein scan `4 sup_t |W(t)|/t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KatsKrein<T> {
    /// `+∞` when the scan diverges at either end.
    pub constant: T,
    pub argmax: T,
    pub diverges_at_zero: bool,
    pub diverges_at_infinity: bool,
}

const SCAN_LO: f64 = 1e-6;
const SCAN_HI: f64 = 1e6;
const PER_DECADE: usize = 400;

/// How `|W(t)|` enters the supremum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// `|W(t)|/t`.
    #[default]
    OverT,
    /// `t |W(t)|`, invariant under dilations `r ↦ s r`.
    TimesT,
}

/// `4 sup_{t>0} |W(t)|/t` for the antiderivative `w`, scanned on
/// `[10⁻⁶, 10⁶]` and refined by golden section around the best cell.
pub fn kats_krein_scan<T: Scalar, F: Fn(T) -> T>(w: F) -> KatsKrein<T> {
    kats_krein_scan_weighted(w, Weighting::OverT)
}

/// [`kats_krein_scan`] with an explicit weighting.
pub fn kats_krein_scan_weighted<T: Scalar, F: Fn(T) -> T>(
    w: F,
    weighting: Weighting,
) -> KatsKrein<T> {
    let decades = (SCAN_HI / SCAN_LO).log10().round() as usize;
    let n = decades * PER_DECADE;
    let step = T::lit(10f64.ln() / PER_DECADE as f64);
    let lo = T::lit(SCAN_LO);
    let ts: Vec<T> = (0..=n)
        .map(|k| lo * (step * T::from_usize_lossy(k)).exp())
        .collect();
    let g = |t: T| match weighting {
        Weighting::OverT => w(t).abs() / t,
        Weighting::TimesT => w(t).abs() * t,
    };
    let vals: Vec<T> = ts.iter().map(|&t| g(t)).collect();
    let mut best = 0usize;
    for (i, v) in vals.iter().enumerate() {
        if *v > vals[best] {
            best = i;
        }
    }
    let a = ts[best.saturating_sub(1)];
    let b = ts[(best + 1).min(n)];
    let top = golden_max(&g, a, b).max(vals[best]);
    let window = 2 * PER_DECADE;
    let grows = |seq: &[T]| -> bool {
        let monotone = seq.windows(2).all(|p| p[1] >= p[0]);
        let first = seq[0];
        let last = seq[seq.len() - 1];
        monotone && last > T::zero() && last >= T::lit(1.5) * first
    };
    // toward t → 0 the sequence is read right to left
    let head: Vec<T> = vals[..=window].iter().rev().copied().collect();
    let tail = &vals[n - window..];
    let diverges_at_zero = grows(&head);
    let diverges_at_infinity = grows(tail);
    let constant = if diverges_at_zero || diverges_at_infinity {
        T::infinity()
    } else {
        T::lit(4.0) * top
    };
    KatsKrein {
        constant,
        argmax: ts[best],
        diverges_at_zero,
        diverges_at_infinity,
    }
}

/// Kats–Krein constant of an oscillating potential in the given gauge.
pub fn kats_krein_constant<T: Scalar>(
    osc: &Oscillation<T>,
    gauge: Gauge<T>,
) -> Result<KatsKrein<T>> {
    let g = GroundStateData::oscillating(*osc, gauge)?;
    Ok(kats_krein_scan(|t| g.w(t)))
}

/// Kats–Krein constant of a potential vanishing outside `[0, end]`, with
/// `W` obtained by quadrature.
pub fn kats_krein_compact<T: Scalar>(
    v: RadialFn<T>,
    end: T,
    breakpoints: &[T],
    gauge: Gauge<T>,
    weighting: Weighting,
) -> Result<KatsKrein<T>> {
    let tol = Tolerance::default();
    let total = adaptive_pieces(T::zero(), end, breakpoints, tol, |s| v(s))?;
    let bps = breakpoints.to_vec();
    let w = move |t: T| -> T {
        let t = t.min(end);
        // ∫_t^end V
        let tail = adaptive_pieces(t, end, &bps, tol, |s| v(s)).unwrap_or(T::nan());
        match gauge {
            Gauge::ZeroAtOrigin => tail - total,
            _ => tail,
        }
    };
    Ok(kats_krein_scan_weighted(w, weighting))
}

/// `∫ V|u|²` and `∫|u'|²` for a test function.
pub fn kats_krein_sides<T: Scalar>(v: &dyn Fn(T) -> T, u: &TestFunction<T>) -> Result<(T, T)> {
    let tol = Tolerance::default();
    let mut pts = u.breakpoints.clone();
    pts.retain(|&p| p > u.support.0 && p < u.support.1);
    let lhs = adaptive_pieces(u.support.0, u.support.1, &pts, tol, |r| {
        let x = (u.value)(r);
        v(r) * x * x
    })?;
    let rhs = adaptive_pieces(u.support.0, u.support.1, &pts, tol, |r| {
        let d = (u.derivative)(r);
        d * d
    })?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    #[test]
    fn sigma_examples() {
        assert_relative_eq!(robin_hardy_sigma(1.0, E), 0.5, max_relative = 1e-15);
        assert_relative_eq!(robin_hardy_sigma(0.0, E), 1.0 / E, max_relative = 1e-15);
    }

    #[test]
    fn zero_function_has_zero_form() {
        let z = TestFunction::<f64>::zero();
        for side in [Side::Kinetic, Side::Potential] {
            assert_eq!(
                hardy_form(&z, FormKind::Plain, 0.0, 1.0, side).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn log_tent_sides() {
        let ln_l = 4.0;
        let v = log_tent(ln_l);
        let eps = 0.5;
        let pot = hardy_form(&v, FormKind::Plain, 0.0, eps, Side::Potential).unwrap();
        let kin = hardy_form(&v, FormKind::Plain, 0.0, eps, Side::Kinetic).unwrap();
        assert_relative_eq!(pot, (1.0 + eps) * ln_l / 6.0, max_relative = 1e-10);
        assert_relative_eq!(kin, ln_l / 6.0 + 2.0 / ln_l, max_relative = 1e-10);
    }

    #[test]
    fn witness_closed_forms() {
        assert_relative_eq!(log_tent_form(4.0, 1.0), -1.0 / 6.0, max_relative = 1e-15);
        assert_relative_eq!(log_tent_form(3.0, 1.0), 1.0 / 6.0, max_relative = 1e-15);
        let v = log_tent(4.0f64).scaled(2.0);
        let h = hardy_form(&v, FormKind::Plain, 0.0, 1.0, Side::Kinetic).unwrap()
            - hardy_form(&v, FormKind::Plain, 0.0, 1.0, Side::Potential).unwrap();
        assert_relative_eq!(h, -1.0 / 24.0, max_relative = 1e-9);
    }

    #[test]
    fn witnesses_are_negative_and_disjoint() {
        let mut prev_right = 0.0;
        for k in 1..=5 {
            let w = reverse_hardy_witness(1.0f64, 3.0, k).unwrap();
            assert!(w.form_value < 0.0);
            assert!(w.support.0 > 3.0 && w.support.0 > prev_right);
            assert!(((w.form_value - w.closed_form) / w.closed_form).abs() < 1e-6);
            prev_right = w.support.1;
        }
    }

    #[test]
    fn kats_krein_zero() {
        let k = kats_krein_scan(|_: f64| 0.0);
        assert_eq!(k.constant, 0.0);
    }

    #[test]
    fn kats_krein_inverse_square_outside_unit() {
        // W(t) = 1/max(t, 1) in the tail gauge: |W|/t blows up as t → 0
        let k = kats_krein_scan(|t: f64| 1.0 / t.max(1.0));
        assert!(k.diverges_at_zero && k.constant.is_infinite());
    }

    #[test]
    fn kats_krein_oscillating() {
        for alpha in [1.0f64, 2.0] {
            let osc = Oscillation {
                lambda: 1.0,
                mu: 1.0,
                alpha,
                beta: alpha - 2.0,
                inner_cap: 1e-9,
            };
            let k = kats_krein_constant(&osc, Gauge::ZeroAtOrigin).unwrap();
            assert!(!k.diverges_at_zero && !k.diverges_at_infinity);
            assert!(
                (k.constant / (4.0 / alpha) - 1.0).abs() < 0.1,
                "alpha={alpha} {}",
                k.constant
            );
        }
    }
}
