//! Oscillatory tail integrals `∫_r^∞ s^γ e^{iκ s^α} ds`.
//!
//! The substitution `u = κ s^α` turns every such integral into the phase
//! integral `J(ν, x) = ∫_x^∞ u^ν e^{iu} du` with `ν = (γ + 1)/α − 1`.
//! `J` is evaluated as
//!
//! * a power series of `e^{iu}` on `[x, 1]` when `x < 1`,
//! * 20-point Gauss–Legendre panels between precomputed anchors up to the
//!   crossover abscissa,
//! * the integration-by-parts expansion
//!   `J(ν, x) = e^{ix} x^ν Σ_k i^{k+1} ν(ν−1)…(ν−k+1) x^{−k}` beyond it.
//!
//! For `ν ≥ 0` the integral diverges classically; the expansion then yields
//! the Abel-regularized value, which is still an exact antiderivative in `x`.

use num_complex::Complex;

use crate::quad::GaussLegendre;
use crate::scalar::Scalar;

const PANEL: f64 = 1.5;

/// `J(ν, x) = ∫_x^∞ u^ν e^{iu} du` for fixed `ν`.
#[derive(Debug, Clone)]
pub struct PhaseIntegral<T> {
    nu: T,
    x_cross: T,
    anchors: Vec<(T, Complex<T>)>,
    gl: GaussLegendre<T>,
}

impl<T: Scalar> PhaseIntegral<T> {
    pub fn new(nu: T) -> Self {
        let x_cross = T::lit(45.0) + T::lit(2.0) * nu.abs();
        let gl = GaussLegendre::new(20);
        let mut pi = PhaseIntegral {
            nu,
            x_cross,
            anchors: Vec::new(),
            gl,
        };
        // anchors at 1, 1 + PANEL, ..., walking down from the crossover
        let n_panels = ((x_cross - T::one()) / T::lit(PANEL))
            .ceil()
            .to_usize()
            .unwrap_or(0);
        let mut anchors = Vec::with_capacity(n_panels + 1);
        let mut right = x_cross;
        let mut acc = pi.asymptotic(x_cross);
        anchors.push((right, acc));
        for k in (0..n_panels).rev() {
            let left = T::one() + T::lit(PANEL) * T::from_usize_lossy(k);
            acc = acc + pi.panel(left, right);
            anchors.push((left, acc));
            right = left;
        }
        anchors.reverse();
        pi.anchors = anchors;
        pi
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    /// Abscissa beyond which the asymptotic expansion is used.
    pub fn crossover(&self) -> T {
        self.x_cross
    }

    /// `J(ν, x)` for `x > 0`.
    pub fn eval(&self, x: T) -> Complex<T> {
        if x >= self.x_cross {
            return self.asymptotic(x);
        }
        if x < T::one() {
            return self.near_origin(x) + self.anchors[0].1;
        }
        // anchors are sorted ascending; find the first anchor >= x
        let idx = self.anchors.partition_point(|(a, _)| *a < x);
        let (a, ja) = self.anchors[idx.min(self.anchors.len() - 1)];
        self.panel(x, a) + ja
    }

    /// The asymptotic series factor `S(x)` with `J = e^{ix} x^ν S(x)`.
    pub fn series(&self, x: T) -> Complex<T> {
        let eps = T::epsilon();
        let i = Complex::new(T::zero(), T::one());
        let mut term = i; // i^{1} * (ν)_0 / x^0
        let mut sum = term;
        let mut prev = term.norm();
        for k in 0..400usize {
            let factor = self.nu - T::from_usize_lossy(k);
            if factor == T::zero() {
                break;
            }
            term = term * i * (factor / x);
            let size = term.norm();
            if size > prev {
                break;
            }
            sum = sum + term;
            if size <= eps * sum.norm() {
                break;
            }
            prev = size;
        }
        sum
    }

    fn asymptotic(&self, x: T) -> Complex<T> {
        let phase = Complex::new(x.cos(), x.sin());
        phase * self.series(x) * x.powf(self.nu)
    }

    fn panel(&self, a: T, b: T) -> Complex<T> {
        let re = self.gl.integrate(a, b, |u| u.powf(self.nu) * u.cos());
        let im = self.gl.integrate(a, b, |u| u.powf(self.nu) * u.sin());
        Complex::new(re, im)
    }

    /// `∫_x^1 u^ν e^{iu} du` via the exponential series.
    fn near_origin(&self, x: T) -> Complex<T> {
        let mut re = T::zero();
        let mut im = T::zero();
        let mut inv_fact = T::one();
        for n in 0..30usize {
            if n > 0 {
                inv_fact = inv_fact / T::from_usize_lossy(n);
            }
            let p = self.nu + T::from_usize_lossy(n + 1);
            let moment = if p.abs() < T::lit(1e-12) {
                -x.ln()
            } else {
                (T::one() - x.powf(p)) / p
            };
            let c = inv_fact * moment;
            match n % 4 {
                0 => re = re + c,
                1 => im = im + c,
                2 => re = re - c,
                _ => im = im - c,
            }
            if inv_fact < T::epsilon() * T::lit(1e-3) {
                break;
            }
        }
        Complex::new(re, im)
    }
}

/// `F(r) = ∫_r^∞ s^γ e^{iκ s^α} ds` as a function of `r > 0`.
#[derive(Debug, Clone)]
pub struct PowerPhaseTail<T> {
    gamma: T,
    kappa: T,
    alpha: T,
    prefactor: T,
    j: PhaseIntegral<T>,
}

impl<T: Scalar> PowerPhaseTail<T> {
    pub fn new(gamma: T, kappa: T, alpha: T) -> Self {
        assert!(kappa > T::zero() && alpha > T::zero());
        let p = (gamma + T::one()) / alpha;
        let nu = p - T::one();
        PowerPhaseTail {
            gamma,
            kappa,
            alpha,
            prefactor: T::one() / (alpha * kappa.powf(p)),
            j: PhaseIntegral::new(nu),
        }
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn nu(&self) -> T {
        self.j.nu()
    }

    /// Phase `κ r^α`.
    #[inline]
    pub fn phase(&self, r: T) -> T {
        self.kappa * r.powf(self.alpha)
    }

    /// Complex tail integral; imaginary part is the sine tail, real part the cosine tail.
    pub fn eval(&self, r: T) -> Complex<T> {
        self.j.eval(self.phase(r)) * self.prefactor
    }

    /// Radius where the asymptotic expansion takes over.
    pub fn crossover_radius(&self) -> T {
        (self.j.crossover() / self.kappa).powf(T::one() / self.alpha)
    }

    /// Modulus of the complex tail in the asymptotic region. Both the sine and
    /// the cosine tail are bounded by it.
    pub fn envelope(&self, r: T) -> T {
        let x = self.phase(r).max(self.j.crossover());
        self.prefactor * x.powf(self.j.nu()) * self.j.series(x).norm()
    }

    /// Leading term only: `r^{γ+1−α} e^{iκr^α} · i/(κα)`.
    pub fn leading(&self, r: T) -> Complex<T> {
        let x = self.phase(r);
        let i = Complex::new(T::zero(), T::one());
        Complex::new(x.cos(), x.sin()) * i * (self.prefactor * x.powf(self.j.nu()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    /// Reference by brute force: dense Simpson on [x, X] plus expansion at X.
    fn brute(nu: f64, x: f64) -> (f64, f64) {
        let big = 400.0;
        let n = 2_000_000;
        let h = (big - x) / n as f64;
        let f = |u: f64| (u.powf(nu) * u.cos(), u.powf(nu) * u.sin());
        let (mut re, mut im) = (0.0, 0.0);
        for k in 0..=n {
            let u = x + k as f64 * h;
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let (a, b) = f(u);
            re += w * a;
            im += w * b;
        }
        let tail = PhaseIntegral::new(nu).asymptotic(big);
        (re * h / 3.0 + tail.re, im * h / 3.0 + tail.im)
    }

    #[test]
    fn dirichlet_integral() {
        // ∫_0^∞ sin u / u du = π/2
        let j = PhaseIntegral::<f64>::new(-1.0);
        assert_relative_eq!(j.eval(1e-12).im, PI / 2.0, max_relative = 1e-10);
    }

    #[test]
    fn fresnel_sine_tail() {
        // ∫_0^∞ sin(s²) ds = √(π/8)
        let t = PowerPhaseTail::<f64>::new(0.0, 1.0, 2.0);
        assert_relative_eq!(t.eval(1e-9).im, (PI / 8.0).sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn matches_brute_force() {
        for &(nu, x) in &[(-0.5, 2.0), (-0.25, 17.0), (0.5, 3.0), (-1.5, 0.7)] {
            let j = PhaseIntegral::<f64>::new(nu).eval(x);
            let (re, im) = brute(nu, x);
            assert!((j.re - re).abs() < 1e-9 * (1.0 + re.abs()), "nu={nu} x={x}");
            assert!((j.im - im).abs() < 1e-9 * (1.0 + im.abs()), "nu={nu} x={x}");
        }
    }

    #[test]
    fn integer_nu_is_closed_form() {
        // ν = 0: regularized ∫_x^∞ e^{iu} du = i e^{ix}
        let j = PhaseIntegral::<f64>::new(0.0);
        for &x in &[0.3, 5.0, 80.0] {
            let v = j.eval(x);
            assert_relative_eq!(v.re, -x.sin(), epsilon = 1e-12);
            assert_relative_eq!(v.im, x.cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn branches_agree_at_crossover() {
        let j = PhaseIntegral::<f64>::new(-0.5);
        let x = j.crossover() * (1.0 - 1e-9);
        let a = j.eval(x);
        let b = j.asymptotic(x);
        assert!((a - b).norm() < 1e-13, "{}", (a - b).norm());
    }
}
