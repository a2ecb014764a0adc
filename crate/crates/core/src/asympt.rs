//! Closed-form asymptotics: the counting slope `M`, the critical coupling,
//! the finite/infinite classification and least-squares fits.

use crate::error::{Error, Result};
use crate::model::harmonic_multiplicity;
use crate::scalar::Scalar;

/// `μ α |d − 2| / √2`.
pub fn critical_coupling<T: Scalar>(mu: T, alpha: T, d: u32) -> T {
    mu * alpha * T::lit((d as f64 - 2.0).abs()) / T::SQRT_2()
}

/// Coupling above which the channel with eigenvalue `Λ` contributes:
/// `μ α √((d−2)²/2 + 2Λ)`. For `Λ = 0` this is exactly [`critical_coupling`].
fn channel_threshold<T: Scalar>(mu: T, alpha: T, d: u32, big_lambda: T) -> T {
    if big_lambda == T::zero() {
        return critical_coupling(mu, alpha, d);
    }
    let dd = T::lit((d as f64 - 2.0).powi(2));
    mu * alpha * (dd / T::lit(2.0) + T::lit(2.0) * big_lambda).sqrt()
}

/// `|λ| ≤ threshold` up to a few ulps, so exact boundary values like
/// `λ = √2` land on the finite side regardless of rounding.
fn at_or_below<T: Scalar>(lambda: T, threshold: T) -> bool {
    lambda.abs() <= threshold * (T::one() + T::lit(8.0) * T::epsilon())
}

/// `√(((λ/μ)²/(2α²) − (d−2)²/4 − Λ)_+)`, zero unless `|λ|` exceeds the
/// channel threshold.
fn channel_excess<T: Scalar>(lambda: T, mu: T, alpha: T, d: u32, big_lambda: T) -> T {
    if at_or_below(lambda, channel_threshold(mu, alpha, d, big_lambda)) {
        return T::zero();
    }
    let c = lambda / mu;
    let dd = T::lit((d as f64 - 2.0).powi(2));
    let x = c * c / (T::lit(2.0) * alpha * alpha) - dd / T::lit(4.0) - big_lambda;
    x.positive_part().sqrt()
}

/// Coefficient of `|ln E|` in the eigenvalue count, summed over channels with
/// multiplicity.
pub fn slope_m<T: Scalar>(lambda: T, mu: T, alpha: T, d: u32) -> T {
    let mut sum = T::zero();
    let top = if d == 1 { 1 } else { u32::MAX };
    let mut l = 0u32;
    while l <= top {
        let big_lambda = if d == 1 {
            T::zero()
        } else {
            T::from_usize_lossy(l as usize * (l as usize + d as usize - 2))
        };
        let x = channel_excess(lambda, mu, alpha, d, big_lambda);
        if x == T::zero() {
            break;
        }
        sum = sum + T::from_u64(harmonic_multiplicity(d, l)).expect("multiplicity") * x;
        l += 1;
    }
    sum / T::TAU()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Finite,
    Infinite,
}

/// Which case of the classification applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `α − β > 2`: finite for every coupling.
    FastDecay,
    /// `α − β = 2` and `|λ| ≤ λ_c`.
    Subcritical,
    /// `α − β < 2` and `λ ≠ 0`.
    SlowDecay,
    /// `α − β = 2` and `|λ| > λ_c`.
    Supercritical,
    /// `λ = 0` with `α − β < 2`: the free operator.
    ZeroCoupling,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification<T> {
    pub verdict: Verdict,
    pub branch: Branch,
    /// Present on the line `α − β = 2`.
    pub critical_coupling: Option<T>,
}

/// Finite or infinite negative spectrum for `λ r^β sin(μ r^α)` in dimension
/// `d`. Requires `α > 0`, `α − β > 1`, `2α − β > 2`.
pub fn classify<T: Scalar>(
    lambda: T,
    mu: T,
    alpha: T,
    beta: T,
    d: u32,
) -> Result<Classification<T>> {
    let two = T::lit(2.0);
    if !(mu > T::zero()) {
        return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
    }
    if !(alpha > T::zero()) || !(alpha - beta > T::one()) || !(two * alpha - beta > two) {
        return Err(Error::OutOfTheoremRange(format!(
            "need alpha > 0, alpha - beta > 1, 2 alpha - beta > 2 (alpha = {alpha}, beta = {beta})"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    let gap = alpha - beta;
    let on_line = (gap - two).abs() <= T::lit(1e-12) * two;
    let (verdict, branch, crit) = if on_line {
        let lc = critical_coupling(mu, alpha, d);
        if at_or_below(lambda, lc) {
            (Verdict::Finite, Branch::Subcritical, Some(lc))
        } else {
            (Verdict::Infinite, Branch::Supercritical, Some(lc))
        }
    } else if gap > two {
        (Verdict::Finite, Branch::FastDecay, None)
    } else if lambda == T::zero() {
        (Verdict::Finite, Branch::ZeroCoupling, None)
    } else {
        (Verdict::Infinite, Branch::SlowDecay, None)
    };
    Ok(Classification {
        verdict,
        branch,
        critical_coupling: crit,
    })
}

/// Least-squares line through `(|ln E|, N)` points.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit<T> {
    pub slope: T,
    pub intercept: T,
    pub residual_rms: T,
    pub points: Vec<(T, T)>,
}

fn least_squares<T: Scalar>(points: &[(T, T)]) -> Result<(T, T, T, T)> {
    let n = T::from_usize_lossy(points.len());
    let mx = points.iter().map(|p| p.0).sum::<T>() / n;
    let my = points.iter().map(|p| p.1).sum::<T>() / n;
    let sxx = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
    let sxy = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    if !(sxx > T::zero()) {
        return Err(Error::DegenerateAbscissae);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = points
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum::<T>();
    Ok((slope, intercept, ssr, sxx))
}

/// Ordinary least squares; needs at least three points.
pub fn fit_slope<T: Scalar>(points: &[(T, T)]) -> Result<SlopeFit<T>> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            got: points.len(),
        });
    }
    let (slope, intercept, ssr, _) = least_squares(points)?;
    Ok(SlopeFit {
        slope,
        intercept,
        residual_rms: (ssr / T::from_usize_lossy(points.len())).sqrt(),
        points: points.to_vec(),
    })
}

/// Exponential decay fit `|λ_k| ≈ c e^{−k/M}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit<T> {
    pub m: T,
    /// Standard error of `m` from the residuals.
    pub m_stderr: T,
    /// Envelope constants: `c e^{−k/M} ≤ |λ_k| ≤ C e^{−k/M}` over the window.
    pub c_lower: T,
    pub c_upper: T,
}

/// Fits `ln|λ_k|` against `k` (1-based) over `k_min..=k_max`.
pub fn decay_fit<T: Scalar>(eigs: &[T], k_min: usize, k_max: usize) -> Result<DecayFit<T>> {
    let k_min = k_min.max(1);
    if k_max > eigs.len() || k_max < k_min + 2 {
        return Err(Error::InsufficientPoints {
            needed: k_max.max(k_min + 2),
            got: eigs.len(),
        });
    }
    if eigs.iter().any(|&e| !(e < T::zero())) {
        return Err(Error::InvalidParameter(
            "eigenvalues must be strictly negative".into(),
        ));
    }
    let pts: Vec<(T, T)> = (k_min..=k_max)
        .map(|k| (T::from_usize_lossy(k), eigs[k - 1].abs().ln()))
        .collect();
    let (slope, _, ssr, sxx) = least_squares(&pts)?;
    let n = T::from_usize_lossy(pts.len());
    let slope_se = (ssr / (n - T::lit(2.0)) / sxx).sqrt();
    let m = -T::one() / slope;
    let scaled: Vec<T> = pts.iter().map(|&(k, y)| (y + k / m).exp()).collect();
    let c_lower = scaled.iter().copied().fold(T::infinity(), T::min);
    let c_upper = scaled.iter().copied().fold(T::zero(), T::max);
    Ok(DecayFit {
        m,
        m_stderr: slope_se / (slope * slope),
        c_lower,
        c_upper,
    })
}
