//! Eigenvalue counting by the Prüfer angle.
//!
//! For `−u″ + q u = −E u` write `u = A sin θ`, `u' = ωA cos θ`:
//!
//! ```text
//! θ'      = ω cos²θ − (q + E)/ω · sin²θ
//! (ln A)' = sin θ cos θ · (ω + (q + E)/ω)
//! ```
//!
//! Every zero of `u` advances `θ` through a multiple of `π`, so the number of
//! eigenvalues below `−E` is `⌊θ(∞)/π⌋`. Integration runs to a margin past the
//! turning radius and then continues until the transformed solution
//! `v = e^{−U} u` satisfies `v v' > 0`; past the turning radius that rules out
//! further zeros. When the oscillation of `V` gets too fast to follow, the
//! solution is carried on with the phase-averaged potential in `t = ln r`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gsrep::{Gauge, GroundStateData};
use crate::model::{
    angular_channels, effective_channel, AngularChannel, BoundaryCondition, ChannelOperator,
    PotentialSpec,
};
use crate::ode::{Control, Dopri};
use crate::scalar::Scalar;

/// Knobs for the Prüfer counter.
#[derive(Debug, Clone, Copy)]
pub struct CountPolicy<T> {
    /// `r_max = margin · turning_radius`.
    pub margin: T,
    /// Inner radius used by [`count_total`].
    pub r_start: T,
    /// Outermost radius searched for the turning point.
    pub horizon: T,
    /// Continuation stops at `continuation · r_max` at the latest.
    pub continuation: T,
    pub tol: T,
    /// Fixed conditioning constant; chosen from `q` when absent.
    pub omega: Option<T>,
    /// Absolute step ceiling for operators without a known oscillation.
    pub step_ceiling: Option<T>,
    /// Oscillations of `V` followed exactly before averaging takes over.
    pub phase_budget: T,
    /// Decay of `ln A` past the turning radius that marks a threshold resonance.
    pub resonance_drop: T,
    pub max_steps: usize,
    pub l_max: u32,
    pub parallel: bool,
}

impl<T: Scalar> Default for CountPolicy<T> {
    fn default() -> Self {
        CountPolicy {
            margin: T::lit(1.5),
            r_start: T::lit(1e-4),
            horizon: T::lit(1e10),
            continuation: T::lit(10.0),
            tol: T::lit(1e-9),
            omega: None,
            step_ceiling: None,
            phase_budget: T::lit(5e4),
            resonance_drop: T::lit(1e4).ln(),
            max_steps: 50_000_000,
            l_max: 10_000,
            parallel: true,
        }
    }
}

/// Record of one Prüfer integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrueferTrace<T> {
    pub theta_start: T,
    pub theta_end: T,
    pub turning_radius: T,
    pub r_max: T,
    /// Where integration actually stopped.
    pub r_end: T,
    pub steps: usize,
    pub omega: T,
    /// Zeros certainly present.
    pub count: u64,
    pub count_lo: u64,
    pub count_hi: u64,
    /// Radius where the phase-averaged tail took over.
    pub averaged_from: Option<T>,
    /// The solution decayed past the turning radius (eigenvalue at `−E`).
    pub resonance: bool,
}

/// Last radius where the effective potential plus `E` is non-positive.
///
/// With an oscillating part, `q_retained − W² + E` is used (with the envelope
/// of `W` past its crossover); otherwise `q + E`.
pub fn turning_radius<T: Scalar>(
    op: &ChannelOperator<T>,
    gsd: Option<&GroundStateData<T>>,
    e: T,
    horizon: T,
) -> Result<T> {
    let (rc, osc) = match (gsd, op.oscillation.as_ref()) {
        (Some(g), Some(o)) => (g.crossover_radius, Some(*o)),
        _ => (T::infinity(), None),
    };
    let f = |r: T| -> T {
        match gsd {
            Some(g) if osc.is_some() => {
                let w = if r >= rc {
                    g.envelope_w(r)
                } else {
                    g.w(r).abs()
                };
                op.q_retained(r) + e - w * w
            }
            _ => op.q(r) + e,
        }
    };
    if f(horizon) <= T::zero() {
        return Err(Error::TurningRadiusNotFound {
            horizon: horizon.as_f64(),
        });
    }
    let fine = T::lit(1.001);
    let coarse = T::lit(1.01);
    let mut hi = horizon;
    loop {
        let mut lo = if hi >= rc { hi / coarse } else { hi / fine };
        if let (Some(o), true) = (osc, hi < rc) {
            let ph = o.mu * hi.powf(o.alpha) - T::PI() / T::lit(16.0);
            if ph > T::zero() {
                lo = lo.max((ph / o.mu).powf(T::one() / o.alpha));
            }
        }
        if lo <= op.r_start {
            if f(op.r_start) <= T::zero() {
                lo = op.r_start;
            } else {
                return Ok(op.r_start);
            }
        }
        if f(lo) <= T::zero() {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..80 {
                let m = (a + b) / T::lit(2.0);
                if f(m) <= T::zero() {
                    a = m;
                } else {
                    b = m;
                }
                if b - a <= T::epsilon() * b {
                    break;
                }
            }
            return Ok(b);
        }
        hi = lo;
    }
}

fn initial_angle<T: Scalar>(bc: BoundaryCondition<T>, omega: T) -> T {
    match bc {
        BoundaryCondition::Dirichlet => T::zero(),
        BoundaryCondition::Robin { sigma } => {
            // u = sin θ, u' = ω cos θ with u'/u = σ, θ in [0, π)
            let t = omega.atan2(sigma);
            if t < T::zero() {
                t + T::PI()
            } else {
                t
            }
        }
    }
}

fn choose_omega<T: Scalar>(op: &ChannelOperator<T>, e: T, r_t: T) -> T {
    let mut lo = op.r_start.max(T::one());
    if lo >= r_t {
        lo = op.r_start;
    }
    let hi = r_t.max(lo * T::lit(1.0001));
    let n = 400usize;
    let ratio = (hi / lo).ln() / T::from_usize_lossy(n);
    let mut best = e;
    for k in 0..=n {
        let r = lo * (ratio * T::from_usize_lossy(k)).exp();
        best = best.max(-op.q(r) - e);
    }
    best.sqrt()
}

/// Bookkeeping shared by the exact and averaged stages.
struct ZeroLedger<T> {
    r_t: T,
    /// Highest band `⌊θ/π⌋` seen.
    band: i64,
    /// Band when the resonance flag was raised.
    band_at_resonance: Option<i64>,
    /// Band when the turning radius was passed.
    band_at_turn: Option<i64>,
    ln_a_max: T,
    drop: T,
}

impl<T: Scalar> ZeroLedger<T> {
    fn observe(&mut self, r: T, theta: T, ln_a: T) {
        let b = (theta / T::PI()).floor().to_i64().unwrap_or(self.band);
        if b > self.band {
            self.band = b;
        }
        if r >= self.r_t {
            if self.band_at_turn.is_none() {
                self.band_at_turn = Some(self.band);
                self.ln_a_max = ln_a;
            }
            if ln_a > self.ln_a_max {
                self.ln_a_max = ln_a;
            }
            if self.band_at_resonance.is_none() && ln_a < self.ln_a_max - self.drop {
                self.band_at_resonance = Some(self.band);
            }
        }
    }

    fn rebase_amplitude(&mut self, ln_a: T) {
        if self.band_at_turn.is_some() {
            self.ln_a_max = ln_a;
        }
    }
}

/// Counts eigenvalues of `op` below `−E` (strictly).
pub fn count_channel<T: Scalar>(
    op: &ChannelOperator<T>,
    e: T,
    policy: &CountPolicy<T>,
) -> Result<PrueferTrace<T>> {
    let gsd = match &op.oscillation {
        Some(o) if !o.is_zero() => Some(GroundStateData::oscillating(*o, Gauge::TailZero)?),
        _ => None,
    };
    count_channel_with(op, gsd.as_ref(), e, policy)
}

/// [`count_channel`] with a prebuilt tail-gauge ground state for the
/// oscillating part of `op`.
pub fn count_channel_with<T: Scalar>(
    op: &ChannelOperator<T>,
    gsd: Option<&GroundStateData<T>>,
    e: T,
    policy: &CountPolicy<T>,
) -> Result<PrueferTrace<T>> {
    if !(e > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "energy must be > 0, got {e}"
        )));
    }
    if !op.is_standard_form() {
        return Err(Error::WeightedOperator {
            rho: op.weight_exponent.as_f64(),
        });
    }
    let osc = op.oscillation.filter(|o| !o.is_zero());
    let gsd = if osc.is_some() { gsd } else { None };
    if osc.is_some() && gsd.is_none() {
        return Err(Error::MismatchedGroundState);
    }
    let r_t = turning_radius(op, gsd, e, policy.horizon)?;
    let r_max = (policy.margin * r_t).max(op.r_start * T::lit(1.5));
    let r_stop = policy.continuation * r_max;
    let omega = policy.omega.unwrap_or_else(|| choose_omega(op, e, r_t));
    let theta0 = initial_angle(op.bc, omega);

    let r_sw = match osc {
        Some(o) => (T::TAU() * policy.phase_budget / o.mu).powf(T::one() / o.alpha),
        None => T::infinity(),
    };
    let r_sw = r_sw.max(op.r_start);

    let dopri = Dopri {
        atol: policy.tol,
        rtol: policy.tol,
        max_steps: policy.max_steps,
        controlled: [true, false],
    };
    let rhs = |r: T, y: &[T; 2]| -> [T; 2] {
        let k = op.q(r) + e;
        let (s, c) = y[0].sin_cos();
        [
            omega * c * c - k / omega * s * s,
            s * c * (omega + k / omega),
        ]
    };
    let resolve = op.fastest_oscillation();
    let ceiling = policy.step_ceiling.unwrap_or(T::infinity());
    let max_step = |r: T| -> T {
        let mut h = (T::lit(0.02) * r).min(ceiling);
        if let Some(o) = &resolve {
            h = h.min(o.period(r) / T::lit(20.0));
        }
        h
    };
    let mut ledger = ZeroLedger {
        r_t,
        band: (theta0 / T::PI()).floor().to_i64().unwrap_or(0),
        band_at_resonance: None,
        band_at_turn: None,
        ln_a_max: T::zero(),
        drop: policy.resonance_drop,
    };

    // exact stage
    let no_more_zeros = |r: T, y: &[T; 2]| -> bool {
        if r < r_max {
            return false;
        }
        let (s, c) = y[0].sin_cos();
        let w = gsd.map_or(T::zero(), |g| g.w(r));
        s * (omega * c - w * s) > T::zero()
    };
    let end_exact = r_stop.min(r_sw);
    let out = dopri.integrate(
        rhs,
        op.r_start,
        [theta0, T::zero()],
        end_exact,
        max_step,
        |r, y| {
            ledger.observe(r, y[0], y[1]);
            if no_more_zeros(r, y) {
                Control::Stop
            } else {
                Control::Continue
            }
        },
    )?;
    let mut steps = out.steps;
    let mut stopped = out.stopped;
    let mut theta_end = out.y[0];
    let mut r_end = out.r;
    let mut averaged_from = None;

    if !stopped && r_sw < r_stop {
        // averaged stage in t = ln r for y = r^{-1/2}-scaled v
        let g = gsd.expect("averaging needs an oscillation");
        let r0 = out.r;
        let (s, c) = out.y[0].sin_cos();
        let w0 = g.w(r0);
        let z = s;
        let zt = r0 * (omega * c - w0 * s) - s / T::lit(2.0);
        let coef = |r: T| r * r * (op.q_retained(r) - g.mean_square_w(r) + e) + T::lit(0.25);
        let omega_t = coef(r0).abs().sqrt().max(T::lit(0.1));
        let band = (out.y[0] / T::PI()).floor();
        let mut frac = (omega_t * z).atan2(zt);
        if frac < T::zero() {
            frac = frac + T::PI();
        }
        let phi0 = band * T::PI() + frac;
        ledger.rebase_amplitude(T::zero());
        let rhs_t = |t: T, y: &[T; 2]| -> [T; 2] {
            let k = coef(t.exp());
            let (s, c) = y[0].sin_cos();
            [
                omega_t * c * c - k / omega_t * s * s,
                s * c * (omega_t + k / omega_t),
            ]
        };
        let t_max = r_max.ln();
        let step_t = |_t: T| T::lit(0.02);
        let out_t = dopri.integrate(
            rhs_t,
            r0.ln(),
            [phi0, T::zero()],
            r_stop.ln(),
            step_t,
            |t, y| {
                let r = t.exp();
                ledger.observe(r, y[0], y[1]);
                if t >= t_max {
                    let (s, c) = y[0].sin_cos();
                    if s * (omega_t * c + s / T::lit(2.0)) > T::zero() {
                        return Control::Stop;
                    }
                }
                Control::Continue
            },
        )?;
        steps += out_t.steps;
        stopped = out_t.stopped;
        theta_end = out_t.y[0];
        r_end = out_t.r.exp();
        averaged_from = Some(r0);
    }

    let band0 = (theta0 / T::PI()).floor().to_i64().unwrap_or(0);
    let total = (ledger.band - band0).max(0) as u64;
    let before_turn = ledger
        .band_at_turn
        .map_or(total as i64, |b| b - band0)
        .max(0) as u64;
    let lo = match ledger.band_at_resonance {
        Some(b) => (b - band0).max(0) as u64,
        None => total,
    };
    let zero_past_turn = total > before_turn;
    let hi = if stopped || zero_past_turn {
        total
    } else {
        total + 1
    };
    Ok(PrueferTrace {
        theta_start: theta0,
        theta_end,
        turning_radius: r_t,
        r_max,
        r_end,
        steps,
        omega,
        count: lo,
        count_lo: lo,
        count_hi: hi,
        averaged_from,
        resonance: ledger.band_at_resonance.is_some(),
    })
}

/// Counting method that produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Pruefer,
    Oracle,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Pruefer => "pruefer",
            Method::Oracle => "oracle",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pruefer" | "prufer" => Ok(Method::Pruefer),
            "oracle" => Ok(Method::Oracle),
            _ => Err(Error::InvalidParameter(format!("unknown method {s:?}"))),
        }
    }
}

/// Count of one angular channel (before multiplicity weighting).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelCount<T> {
    pub l: u32,
    pub lambda: T,
    pub multiplicity: u64,
    pub count: u64,
    pub count_lo: u64,
    pub count_hi: u64,
}

/// Total count over channels at one energy.
#[derive(Debug, Clone, PartialEq)]
pub struct CountResult<T> {
    pub energy: T,
    pub d: u32,
    pub method: Method,
    pub channels: Vec<ChannelCount<T>>,
    pub total: u64,
    pub total_lo: u64,
    pub total_hi: u64,
}

impl<T: Scalar> CountResult<T> {
    pub(crate) fn from_channels(
        energy: T,
        d: u32,
        method: Method,
        channels: Vec<ChannelCount<T>>,
    ) -> Self {
        let sum = |f: fn(&ChannelCount<T>) -> u64| {
            channels.iter().map(|c| c.multiplicity * f(c)).sum::<u64>()
        };
        let total = sum(|c| c.count);
        let total_lo = sum(|c| c.count_lo);
        let total_hi = sum(|c| c.count_hi);
        CountResult {
            energy,
            d,
            method,
            channels,
            total,
            total_lo,
            total_hi,
        }
    }
}

/// Boundary condition at `r_start` that selects the solution regular at the
/// origin: `u ~ r^s` with `s = 1/2 + √(c + 1/4)`. For `d = 1` the even channel
/// is Neumann and the odd one Dirichlet.
pub fn regular_start<T: Scalar>(ch: &AngularChannel<T>, r_start: T) -> BoundaryCondition<T> {
    if ch.d == 1 {
        let sigma = if ch.l == 0 {
            T::zero()
        } else {
            T::one() / r_start
        };
        return BoundaryCondition::Robin { sigma };
    }
    let quarter = T::lit(0.25);
    let s = T::lit(0.5) + (ch.centrifugal + quarter).max(T::zero()).sqrt();
    BoundaryCondition::Robin { sigma: s / r_start }
}

/// Runs `per_channel` for `l = 0, 1, …` until the first channel whose upper
/// count is zero. Counts do not increase with `l`, so later channels vanish.
pub(crate) fn sweep_channels<T, F>(
    d: u32,
    l_max: u32,
    parallel: bool,
    per_channel: F,
) -> Result<Vec<ChannelCount<T>>>
where
    T: Scalar,
    F: Fn(&AngularChannel<T>) -> Result<(u64, u64, u64)> + Sync,
{
    let top = if d == 1 { 1 } else { l_max };
    let batch = if parallel {
        rayon::current_num_threads().clamp(1, 16) as u32
    } else {
        1
    };
    let mut out = Vec::new();
    let mut l0 = 0u32;
    while l0 <= top {
        let ls: Vec<u32> = (l0..=(l0 + batch - 1).min(top)).collect();
        let run = |l: &u32| -> Result<ChannelCount<T>> {
            let ch = AngularChannel::new(d, *l)?;
            let (count, lo, hi) = per_channel(&ch).map_err(|e| e.in_channel(*l))?;
            Ok(ChannelCount {
                l: *l,
                lambda: ch.lambda,
                multiplicity: ch.multiplicity,
                count,
                count_lo: lo,
                count_hi: hi,
            })
        };
        let results: Vec<Result<ChannelCount<T>>> = if parallel {
            ls.par_iter().map(run).collect()
        } else {
            ls.iter().map(run).collect()
        };
        for r in results {
            let c = r?;
            let done = c.count_hi == 0;
            out.push(c);
            if done {
                return Ok(out);
            }
        }
        l0 += batch;
    }
    if d == 1 {
        return Ok(out);
    }
    Err(Error::ChannelCutoff { l_max })
}

/// `N_E` for `−Δ − V` in dimension `d`, summed over channels with multiplicity.
pub fn count_total<T: Scalar>(
    spec: &PotentialSpec<T>,
    d: u32,
    e: T,
    policy: &CountPolicy<T>,
) -> Result<CountResult<T>> {
    spec.validate()?;
    angular_channels::<T>(d, 0)?;
    let gsd = if spec.lambda == T::zero() {
        None
    } else {
        Some(Arc::new(GroundStateData::oscillating(
            spec.oscillation(),
            Gauge::TailZero,
        )?))
    };
    let channels = sweep_channels(d, policy.l_max, policy.parallel, |ch| {
        let bc = regular_start(ch, policy.r_start);
        let op = effective_channel(spec, ch, policy.r_start, bc)?;
        let tr = count_channel_with(&op, gsd.as_deref(), e, policy)?;
        Ok((tr.count, tr.count_lo, tr.count_hi))
    })?;
    Ok(CountResult::from_channels(e, d, Method::Pruefer, channels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RadialFn;
    use std::f64::consts::PI;

    fn generic(q: RadialFn<f64>, r0: f64, bc: BoundaryCondition<f64>) -> ChannelOperator<f64> {
        ChannelOperator::from_fn(r0, bc, q, "test")
    }

    #[test]
    fn free_operator_has_no_eigenvalues() {
        let op = generic(Arc::new(|_| 0.0), 1e-3, BoundaryCondition::Dirichlet);
        for e in [1e-1, 1e-4, 1e-8] {
            let tr = count_channel(&op, e, &CountPolicy::default()).unwrap();
            assert_eq!((tr.count, tr.count_hi), (0, 0));
        }
    }

    #[test]
    fn square_well() {
        let op = generic(
            Arc::new(|r| if r < PI { -4.0 } else { 0.0 }),
            1e-9,
            BoundaryCondition::Dirichlet,
        );
        let policy = CountPolicy {
            step_ceiling: Some(0.05),
            ..Default::default()
        };
        let tr = count_channel(&op, 1e-6, &policy).unwrap();
        assert_eq!(tr.count, 2);
    }

    #[test]
    fn coulomb_channel() {
        let op = generic(Arc::new(|r| -1.0 / r), 1e-6, BoundaryCondition::Dirichlet);
        let tr = count_channel(&op, 0.01, &CountPolicy::default()).unwrap();
        assert_eq!(tr.count, 4);
        // between levels −1/64 and −1/100 the bracket is tight
        let tr = count_channel(&op, 0.012, &CountPolicy::default()).unwrap();
        assert_eq!((tr.count, tr.count_hi), (4, 4));
        let tr = count_channel(&op, 0.008, &CountPolicy::default()).unwrap();
        assert_eq!((tr.count, tr.count_hi), (5, 5));
    }

    #[test]
    fn hydrogen_total() {
        let spec = PotentialSpec::coulomb(1.0);
        let res = count_total(&spec, 3, 0.01, &CountPolicy::default()).unwrap();
        let per: Vec<u64> = res.channels.iter().map(|c| c.count).collect();
        assert_eq!(&per[..4], &[4, 3, 2, 1]);
        assert_eq!(res.total, 30);
    }

    #[test]
    fn zero_potential_total() {
        for d in 1..5 {
            let r = count_total(
                &PotentialSpec::<f64>::zero(),
                d,
                1e-3,
                &CountPolicy::default(),
            )
            .unwrap();
            assert_eq!(r.total, 0, "d={d}");
        }
    }

    #[test]
    fn omega_invariance() {
        let op = generic(Arc::new(|r| -1.0 / r), 1e-6, BoundaryCondition::Dirichlet);
        for w in [0.1, 1.0, 10.0] {
            let p = CountPolicy {
                omega: Some(w),
                ..Default::default()
            };
            assert_eq!(count_channel(&op, 0.012, &p).unwrap().count, 4);
        }
    }

    #[test]
    fn turning_radius_not_found() {
        let op = generic(Arc::new(|_| -1.0), 1.0, BoundaryCondition::Dirichlet);
        assert!(matches!(
            count_channel(&op, 0.5, &CountPolicy::default()),
            Err(Error::TurningRadiusNotFound { .. })
        ));
    }

    #[test]
    fn robin_angle_in_range() {
        for s in [-3.0, -0.1, 0.0, 0.2, 7.0] {
            let t = initial_angle(BoundaryCondition::Robin { sigma: s }, 1.3);
            assert!((0.0..PI).contains(&t));
            assert!((1.3 * t.cos() / t.sin() - s).abs() < 1e-12);
        }
    }
}
