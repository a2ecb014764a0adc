//! Potentials, angular channels and the half-line operators they produce.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Shared radial function.
pub type RadialFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Default radius below which the oscillating part is frozen.
pub const DEFAULT_INNER_CAP: f64 = 1e-6;

/// The oscillating part `λ r^β sin(μ r^α)`, frozen below `inner_cap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillation<T> {
    pub lambda: T,
    pub mu: T,
    pub alpha: T,
    pub beta: T,
    pub inner_cap: T,
}

impl<T: Scalar> Oscillation<T> {
    #[inline]
    pub fn eval(&self, r: T) -> T {
        let s = r.max(self.inner_cap);
        self.lambda * s.powf(self.beta) * (self.mu * s.powf(self.alpha)).sin()
    }

    /// `λ r^β` at `max(r, inner_cap)`.
    #[inline]
    pub fn amplitude(&self, r: T) -> T {
        self.lambda.abs() * r.max(self.inner_cap).powf(self.beta)
    }

    /// Local period of `sin(μ r^α)` in `r`.
    #[inline]
    pub fn period(&self, r: T) -> T {
        let s = r.max(self.inner_cap);
        T::TAU() / (self.mu * self.alpha * s.powf(self.alpha - T::one()))
    }

    pub fn is_zero(&self) -> bool {
        self.lambda == T::zero()
    }
}

/// `V(r) = λ r^β sin(μ r^α) + perturbation(r)`.
#[derive(Clone)]
pub struct PotentialSpec<T> {
    pub lambda: T,
    pub mu: T,
    pub alpha: T,
    pub beta: T,
    pub perturbation: Option<RadialFn<T>>,
    pub inner_cap: T,
}

impl<T: Scalar> fmt::Debug for PotentialSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("lambda", &self.lambda)
            .field("mu", &self.mu)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("perturbation", &self.perturbation.is_some())
            .field("inner_cap", &self.inner_cap)
            .finish()
    }
}

impl<T: Scalar> PotentialSpec<T> {
    pub fn new(lambda: T, mu: T, alpha: T, beta: T) -> Result<Self> {
        let spec = PotentialSpec {
            lambda,
            mu,
            alpha,
            beta,
            perturbation: None,
            inner_cap: T::lit(DEFAULT_INNER_CAP),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `V ≡ 0`.
    pub fn zero() -> Self {
        PotentialSpec {
            lambda: T::zero(),
            mu: T::one(),
            alpha: T::one(),
            beta: T::zero(),
            perturbation: None,
            inner_cap: T::lit(DEFAULT_INNER_CAP),
        }
    }

    /// Attractive Coulomb potential `V = z/r` with no oscillating part.
    pub fn coulomb(z: T) -> Self {
        PotentialSpec::zero().with_perturbation(Arc::new(move |r: T| z / r))
    }

    pub fn with_perturbation(mut self, p: RadialFn<T>) -> Self {
        self.perturbation = Some(p);
        self
    }

    pub fn with_inner_cap(mut self, cap: T) -> Self {
        self.inner_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if !(self.mu > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "mu must be > 0, got {}",
                self.mu
            )));
        }
        if !(self.inner_cap >= T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "inner_cap must be >= 0, got {}",
                self.inner_cap
            )));
        }
        Ok(())
    }

    pub fn oscillation(&self) -> Oscillation<T> {
        Oscillation {
            lambda: self.lambda,
            mu: self.mu,
            alpha: self.alpha,
            beta: self.beta,
            inner_cap: self.inner_cap,
        }
    }
}

/// `V(r)`; the oscillating part is evaluated at `max(r, inner_cap)`.
pub fn eval_potential<T: Scalar>(spec: &PotentialSpec<T>, r: T) -> T {
    let p = spec.perturbation.as_ref().map_or(T::zero(), |p| p(r));
    spec.oscillation().eval(r) + p
}

/// One spherical-harmonic sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularChannel<T> {
    pub d: u32,
    pub l: u32,
    pub lambda: T,
    pub multiplicity: u64,
    pub centrifugal: T,
}

fn binomial(n: i64, k: i64) -> u64 {
    if k < 0 || n < k {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Dimension of degree-`l` spherical harmonics on `S^{d−1}`.
pub fn harmonic_multiplicity(d: u32, l: u32) -> u64 {
    if d == 1 {
        return if l <= 1 { 1 } else { 0 };
    }
    let (d, l) = (d as i64, l as i64);
    let lower = if l < 2 { 0 } else { binomial(l + d - 3, d - 1) };
    binomial(l + d - 1, d - 1) - lower
}

impl<T: Scalar> AngularChannel<T> {
    pub fn new(d: u32, l: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if d == 1 && l > 1 {
            return Err(Error::InvalidParameter(
                "d = 1 has only the even (l = 0) and odd (l = 1) channels".into(),
            ));
        }
        let big_lambda = if d == 1 {
            T::zero()
        } else {
            T::from_usize_lossy(l as usize * (l as usize + d as usize - 2))
        };
        let dm1 = T::lit(d as f64 - 1.0);
        let dm3 = T::lit(d as f64 - 3.0);
        let centrifugal = (T::lit(4.0) * big_lambda + dm1 * dm3) / T::lit(4.0);
        Ok(AngularChannel {
            d,
            l,
            lambda: big_lambda,
            multiplicity: harmonic_multiplicity(d, l),
            centrifugal,
        })
    }

    /// Boundary condition at the origin side for `d = 1`: even channel is
    /// Neumann, odd is Dirichlet. Higher dimensions use the regular solution.
    pub fn is_odd_line_channel(&self) -> bool {
        self.d == 1 && self.l == 1
    }
}

/// Channels `l = 0..=l_max` (for `d = 1`, the even and odd half-line problems).
pub fn angular_channels<T: Scalar>(d: u32, l_max: u32) -> Result<Vec<AngularChannel<T>>> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    let top = if d == 1 { 1 } else { l_max };
    (0..=top).map(|l| AngularChannel::new(d, l)).collect()
}

/// `u'(R) = σ u(R)` or `u(R) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition<T> {
    Dirichlet,
    Robin { sigma: T },
}

/// `−u″ + q(r) u` on `(r_start, ∞)` with
/// `q(r) = centrifugal/r² + retained(r) − oscillation(r)`.
#[derive(Clone)]
pub struct ChannelOperator<T> {
    pub r_start: T,
    pub bc: BoundaryCondition<T>,
    pub centrifugal: T,
    pub retained: Option<RadialFn<T>>,
    pub oscillation: Option<Oscillation<T>>,
    /// Oscillation hidden inside `retained` that step sizes must still resolve.
    pub resolution: Option<Oscillation<T>>,
    pub weight_exponent: T,
    pub label: String,
}

impl<T: Scalar> fmt::Debug for ChannelOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChannelOperator")
            .field("r_start", &self.r_start)
            .field("bc", &self.bc)
            .field("centrifugal", &self.centrifugal)
            .field("retained", &self.retained.is_some())
            .field("oscillation", &self.oscillation)
            .field("resolution", &self.resolution)
            .field("weight_exponent", &self.weight_exponent)
            .field("label", &self.label)
            .finish()
    }
}

impl<T: Scalar> ChannelOperator<T> {
    /// Operator with an arbitrary effective potential `q`.
    pub fn from_fn(
        r_start: T,
        bc: BoundaryCondition<T>,
        q: RadialFn<T>,
        label: impl Into<String>,
    ) -> Self {
        ChannelOperator {
            r_start,
            bc,
            centrifugal: T::zero(),
            retained: Some(q),
            oscillation: None,
            resolution: None,
            weight_exponent: T::zero(),
            label: label.into(),
        }
    }

    /// Everything in `q` except the oscillating part.
    #[inline]
    pub fn q_retained(&self, r: T) -> T {
        let mut q = self.centrifugal / (r * r);
        if let Some(f) = &self.retained {
            q = q + f(r);
        }
        q
    }

    #[inline]
    pub fn q(&self, r: T) -> T {
        let mut q = self.q_retained(r);
        if let Some(o) = &self.oscillation {
            q = q - o.eval(r);
        }
        q
    }

    pub fn is_standard_form(&self) -> bool {
        self.weight_exponent == T::zero()
    }

    /// Same operator with a different boundary condition.
    pub fn with_bc(&self, bc: BoundaryCondition<T>) -> Self {
        ChannelOperator { bc, ..self.clone() }
    }

    /// The oscillation that sets the finest length scale of `q`, if any.
    pub fn fastest_oscillation(&self) -> Option<Oscillation<T>> {
        self.oscillation
            .filter(|o| !o.is_zero())
            .or(self.resolution)
    }
}

/// Radial operator of channel `ch` for the potential `spec`.
pub fn effective_channel<T: Scalar>(
    spec: &PotentialSpec<T>,
    ch: &AngularChannel<T>,
    r_start: T,
    bc: BoundaryCondition<T>,
) -> Result<ChannelOperator<T>> {
    if !(r_start > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "r_start must be > 0, got {r_start}"
        )));
    }
    let retained = spec.perturbation.as_ref().map(|p| {
        let p = Arc::clone(p);
        Arc::new(move |r: T| -p(r)) as RadialFn<T>
    });
    let oscillation = if spec.lambda == T::zero() {
        None
    } else {
        Some(spec.oscillation())
    };
    Ok(ChannelOperator {
        r_start,
        bc,
        centrifugal: ch.centrifugal,
        retained,
        oscillation,
        resolution: None,
        weight_exponent: T::zero(),
        label: format!("d={} l={}", ch.d, ch.l),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn potential_examples() {
        let s = PotentialSpec::new(1.0, 1.0, 1.0, -1.0).unwrap();
        assert_relative_eq!(eval_potential(&s, PI / 2.0), 2.0 / PI, max_relative = 1e-15);
        let z = PotentialSpec::<f64>::zero();
        assert_eq!(eval_potential(&z, 3.7), 0.0);
        let s = PotentialSpec::new(5.0, 1.0, 2.0, 0.0).unwrap();
        assert_relative_eq!(
            eval_potential(&s, 3.0),
            2.060_592_426_208_783,
            max_relative = 1e-12
        );
    }

    #[test]
    fn inner_cap_clamps_only_the_oscillation() {
        let s = PotentialSpec::new(1.0, 1.0, 1.0, -1.0)
            .unwrap()
            .with_inner_cap(0.5)
            .with_perturbation(Arc::new(|r: f64| r));
        let v = eval_potential(&s, 0.1);
        assert_relative_eq!(v, 2.0 * 0.5f64.sin() + 0.1, max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PotentialSpec::new(1.0, 0.0, 1.0, 0.0).is_err());
        assert!(PotentialSpec::new(1.0, 1.0, -1.0, 0.0).is_err());
        assert!(angular_channels::<f64>(0, 3).is_err());
    }

    #[test]
    fn channel_tables() {
        let c3: Vec<_> = angular_channels::<f64>(3, 2).unwrap();
        let got: Vec<_> = c3.iter().map(|c| (c.lambda, c.multiplicity)).collect();
        assert_eq!(got, vec![(0.0, 1), (2.0, 3), (6.0, 5)]);
        let c2: Vec<_> = angular_channels::<f64>(2, 1).unwrap();
        let got: Vec<_> = c2.iter().map(|c| (c.lambda, c.multiplicity)).collect();
        assert_eq!(got, vec![(0.0, 1), (1.0, 2)]);
        let c5: Vec<_> = angular_channels::<f64>(5, 1).unwrap();
        let got: Vec<_> = c5.iter().map(|c| (c.lambda, c.multiplicity)).collect();
        assert_eq!(got, vec![(0.0, 1), (4.0, 5)]);
        let c1: Vec<_> = angular_channels::<f64>(1, 7).unwrap();
        assert_eq!(c1.len(), 2);
        assert!(c1.iter().all(|c| c.lambda == 0.0 && c.multiplicity == 1));
    }

    #[test]
    fn effective_channel_examples() {
        let zero = PotentialSpec::<f64>::zero();
        let op = |d, l| {
            let ch = AngularChannel::new(d, l).unwrap();
            effective_channel(&zero, &ch, 0.1, BoundaryCondition::Dirichlet).unwrap()
        };
        assert_eq!(op(3, 0).q(2.0), 0.0);
        assert_eq!(op(2, 0).q(1.0), -0.25);
        assert_eq!(op(5, 1).q(1.0), 6.0);
    }
}
