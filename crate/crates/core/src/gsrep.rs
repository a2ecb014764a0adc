//! Ground-state representation: antiderivatives `W' = −V`, `U' = W`, the
//! weighted operators they induce and the reduction back to standard form.
//!
//! A weighted operator acts as `−w⁻¹(w φ')' + P φ` in `L²(w dr)` with
//! `w = e^{2g}`; a Robin condition is stored in flux form
//! `w(R) φ'(R) = σ̃ φ(R)`. With `v = e^{g} φ` it becomes
//! `−v″ + (P + g'² + g″) v` with `v'(R) = (σ̃ e^{−2g(R)} + g'(R)) v(R)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{BoundaryCondition, ChannelOperator, Oscillation, PotentialSpec, RadialFn};
use crate::oscint::PowerPhaseTail;
use crate::scalar::Scalar;

/// Normalization of the antiderivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gauge<T> {
    /// `W(∞) = 0`, `U(∞) = 0` (Abel-regularized when `U` diverges).
    TailZero,
    /// `W(0) = 0`, `U(0) = 0`.
    ZeroAtOrigin,
    /// `W(∞) = 0`, `U(R) = 0`.
    ZeroAt(T),
}

#[derive(Debug, Clone)]
enum Source<T> {
    Zero,
    Oscillating {
        osc: Oscillation<T>,
        cap: T,
        w_tail: PowerPhaseTail<T>,
        s_tail: PowerPhaseTail<T>,
        // values of the tail antiderivatives at the cap
        w_cap: T,
        u_cap: T,
        v_cap: T,
    },
    PowerLaw {
        a: T,
        gamma: T,
    },
}

/// The pair `(W, U)` for one potential and gauge.
#[derive(Debug, Clone)]
pub struct GroundStateData<T> {
    source: Source<T>,
    pub gauge: Gauge<T>,
    w_shift: T,
    u_shift: T,
    u_slope: T,
    /// Beyond this radius `W` comes from the asymptotic expansion.
    pub crossover_radius: T,
    /// `|W − leading_W| ≤ remainder_c · r^{1+β−2α}` beyond the crossover.
    pub remainder_c: T,
}

impl<T: Scalar> GroundStateData<T> {
    pub fn zero(gauge: Gauge<T>) -> Self {
        GroundStateData {
            source: Source::Zero,
            gauge,
            w_shift: T::zero(),
            u_shift: T::zero(),
            u_slope: T::zero(),
            crossover_radius: T::zero(),
            remainder_c: T::zero(),
        }
    }

    /// `V(r) = a r^γ` with `γ < −1`.
    pub fn power_law(a: T, gamma: T, gauge: Gauge<T>) -> Result<Self> {
        if !(gamma < -T::one()) {
            return Err(Error::NonConvergentTail {
                gap: (-gamma).as_f64(),
            });
        }
        if gauge == Gauge::ZeroAtOrigin {
            return Err(Error::InvalidParameter(
                "power-law potential is not integrable at the origin".into(),
            ));
        }
        let mut g = GroundStateData {
            source: Source::PowerLaw { a, gamma },
            gauge,
            w_shift: T::zero(),
            u_shift: T::zero(),
            u_slope: T::zero(),
            crossover_radius: T::zero(),
            remainder_c: T::zero(),
        };
        if let Gauge::ZeroAt(r) = gauge {
            g.u_shift = g.u_raw(r);
        }
        Ok(g)
    }

    /// Antiderivatives of the oscillating part `λ r^β sin(μ r^α)`.
    pub fn oscillating(osc: Oscillation<T>, gauge: Gauge<T>) -> Result<Self> {
        if osc.is_zero() {
            return Ok(Self::zero(gauge));
        }
        let gap = osc.alpha - osc.beta;
        if gauge == Gauge::TailZero && gap <= T::one() {
            return Err(Error::NonConvergentTail { gap: gap.as_f64() });
        }
        let cap = osc.inner_cap.max(T::lit(1e-12));
        let w_tail = PowerPhaseTail::new(osc.beta, osc.mu, osc.alpha);
        let s_tail = PowerPhaseTail::new(osc.beta + T::one(), osc.mu, osc.alpha);
        let w_cap = osc.lambda * w_tail.eval(cap).im;
        let u_cap = cap * w_cap - osc.lambda * s_tail.eval(cap).im;
        let v_cap = osc.eval(cap);
        let nu = w_tail.nu();
        let mut g = GroundStateData {
            source: Source::Oscillating {
                osc,
                cap,
                w_tail: w_tail.clone(),
                s_tail,
                w_cap,
                u_cap,
                v_cap,
            },
            gauge,
            w_shift: T::zero(),
            u_shift: T::zero(),
            u_slope: T::zero(),
            crossover_radius: w_tail.crossover_radius(),
            remainder_c: T::lit(1.5) * osc.lambda.abs() * nu.abs().max(T::lit(1e-3))
                / (osc.alpha * osc.mu * osc.mu),
        };
        match gauge {
            Gauge::TailZero => {}
            Gauge::ZeroAtOrigin => {
                // W_tail(0) and U_tail(0) from the frozen inner piece
                let w0 = w_cap + cap * v_cap;
                g.w_shift = w0;
                g.u_shift = u_cap - w_cap * cap - v_cap * cap * cap / T::lit(2.0);
                g.u_slope = w0;
            }
            Gauge::ZeroAt(r) => {
                g.u_shift = g.u_raw(r);
            }
        }
        Ok(g)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.source, Source::Zero)
    }

    pub fn oscillation(&self) -> Option<&Oscillation<T>> {
        match &self.source {
            Source::Oscillating { osc, .. } => Some(osc),
            _ => None,
        }
    }

    /// The potential this data represents.
    pub fn v(&self, r: T) -> T {
        match &self.source {
            Source::Zero => T::zero(),
            Source::Oscillating { osc, .. } => osc.eval(r),
            Source::PowerLaw { a, gamma } => *a * r.powf(*gamma),
        }
    }

    fn w_raw(&self, r: T) -> T {
        match &self.source {
            Source::Zero => T::zero(),
            Source::Oscillating {
                osc,
                cap,
                w_tail,
                w_cap,
                v_cap,
                ..
            } => {
                if r >= *cap {
                    osc.lambda * w_tail.eval(r).im
                } else {
                    *w_cap + (*cap - r) * *v_cap
                }
            }
            Source::PowerLaw { a, gamma } => -*a * r.powf(*gamma + T::one()) / (*gamma + T::one()),
        }
    }

    fn u_raw(&self, r: T) -> T {
        match &self.source {
            Source::Zero => T::zero(),
            Source::Oscillating {
                osc,
                cap,
                s_tail,
                w_cap,
                u_cap,
                v_cap,
                ..
            } => {
                if r >= *cap {
                    r * self.w_raw(r) - osc.lambda * s_tail.eval(r).im
                } else {
                    let h = *cap - r;
                    *u_cap - *w_cap * h - *v_cap * h * h / T::lit(2.0)
                }
            }
            Source::PowerLaw { a, gamma } => {
                let g1 = *gamma + T::one();
                let g2 = *gamma + T::lit(2.0);
                if g2.abs() < T::lit(1e-12) {
                    -*a / g1 * r.ln()
                } else {
                    -*a * r.powf(g2) / (g1 * g2)
                }
            }
        }
    }

    /// `W(r)`, with `W' = −V`.
    pub fn w(&self, r: T) -> T {
        self.w_raw(r) - self.w_shift
    }

    /// `U(r)`, with `U' = W`.
    pub fn u(&self, r: T) -> T {
        self.u_raw(r) - self.u_shift - self.u_slope * r
    }

    /// `λ cos(μr^α) / (μα r^{α−β−1})`.
    pub fn leading_w(&self, r: T) -> T {
        match &self.source {
            Source::Oscillating { osc, .. } => {
                osc.lambda * (osc.mu * r.powf(osc.alpha)).cos()
                    / (osc.mu * osc.alpha * r.powf(osc.alpha - osc.beta - T::one()))
            }
            _ => self.w(r),
        }
    }

    /// `λ sin(μr^α) / (μ²α² r^{2α−β−2})`.
    pub fn leading_u(&self, r: T) -> T {
        match &self.source {
            Source::Oscillating { osc, .. } => {
                let two = T::lit(2.0);
                osc.lambda * (osc.mu * r.powf(osc.alpha)).sin()
                    / (osc.mu
                        * osc.mu
                        * osc.alpha
                        * osc.alpha
                        * r.powf(two * osc.alpha - osc.beta - two))
            }
            _ => self.u(r),
        }
    }

    /// Bound on `|W − gauge constant|` valid for `r` beyond the crossover.
    pub fn envelope_w(&self, r: T) -> T {
        match &self.source {
            Source::Zero => T::zero(),
            Source::Oscillating { osc, w_tail, .. } => osc.lambda.abs() * w_tail.envelope(r),
            Source::PowerLaw { .. } => self.w_raw(r).abs(),
        }
    }

    /// Phase average of `W²` (tail gauge part only).
    pub fn mean_square_w(&self, r: T) -> T {
        match &self.source {
            Source::Oscillating { .. } => {
                let e = self.envelope_w(r);
                e * e / T::lit(2.0) + self.w_shift * self.w_shift
            }
            _ => {
                let w = self.w(r);
                w * w
            }
        }
    }
}

/// `(W, U)` for the oscillating part of `spec` (the perturbation is left to
/// the caller, who keeps it in the retained potential).
pub fn tail_antiderivatives<T: Scalar>(
    spec: &PotentialSpec<T>,
    gauge: Gauge<T>,
) -> Result<GroundStateData<T>> {
    spec.validate()?;
    GroundStateData::oscillating(spec.oscillation(), gauge)
}

/// `sup_{r > R} |W(r)|`: a cell-wise maximized scan up to the crossover and
/// the asymptotic envelope beyond it.
pub fn tail_sup<T: Scalar>(gsd: &GroundStateData<T>, big_r: T) -> T {
    match &gsd.source {
        Source::Zero => T::zero(),
        Source::PowerLaw { gamma, .. } => {
            if *gamma + T::one() < T::zero() {
                gsd.w(big_r).abs()
            } else {
                T::infinity()
            }
        }
        Source::Oscillating { osc, .. } => {
            if osc.alpha - osc.beta <= T::one() {
                return T::infinity();
            }
            let rc = gsd.crossover_radius;
            let shift = gsd.w_shift.abs();
            let tail = gsd.envelope_w(big_r.max(rc)) + shift;
            if big_r >= rc {
                return tail;
            }
            // cells of phase π/32 on a grid that does not depend on R
            let step = T::PI() / T::lit(32.0);
            let phase = |r: T| osc.mu * r.powf(osc.alpha);
            let radius = |x: T| (x / osc.mu).powf(T::one() / osc.alpha);
            let k0 = (phase(big_r) / step).floor().to_usize().unwrap_or(0);
            let k1 = (phase(rc) / step).ceil().to_usize().unwrap_or(0);
            let f = |r: T| gsd.w(r).abs();
            let mut best = f(big_r).max(tail);
            for k in k0..k1 {
                let a = radius(T::from_usize_lossy(k) * step).max(big_r);
                let b = radius(T::from_usize_lossy(k + 1) * step).min(rc);
                if a >= b {
                    continue;
                }
                best = best.max(golden_max(&f, a, b));
            }
            best
        }
    }
}

/// Maximum of a unimodal-ish function on `[a, b]`, endpoints included.
pub(crate) fn golden_max<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> T {
    let g = T::lit(0.618_033_988_749_894_8);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..40 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2).max(f(a)).max(f(b))
}

/// Which transform produced a weighted operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Single,
    Double,
    /// Pure power weight `r^ρ`.
    Power,
}

/// Half-log weight `g` (so `w = e^{2g}`) with its first two derivatives.
#[derive(Clone)]
pub struct LogWeight<T> {
    pub g: RadialFn<T>,
    pub dg: RadialFn<T>,
    pub d2g: RadialFn<T>,
}

impl<T: Scalar> LogWeight<T> {
    pub fn power(rho: T) -> Self {
        let half = rho / T::lit(2.0);
        LogWeight {
            g: Arc::new(move |r: T| half * r.ln()),
            dg: Arc::new(move |r: T| half / r),
            d2g: Arc::new(move |r: T| -half / (r * r)),
        }
    }

    pub fn unit() -> Self {
        LogWeight {
            g: Arc::new(|_| T::zero()),
            dg: Arc::new(|_| T::zero()),
            d2g: Arc::new(|_| T::zero()),
        }
    }

    /// `w(r) = e^{2g(r)}`.
    #[inline]
    pub fn weight(&self, r: T) -> T {
        (T::lit(2.0) * (self.g)(r)).exp()
    }
}

/// `−w⁻¹(w φ')' + P φ` on `(r_start, ∞)`.
#[derive(Clone)]
pub struct WeightedOperator<T> {
    pub r_start: T,
    /// Robin coefficient in flux form, or Dirichlet.
    pub bc: BoundaryCondition<T>,
    pub log_weight: LogWeight<T>,
    pub potential: RadialFn<T>,
    pub stage: Stage,
    /// Exponent `ρ` of the leading power behaviour of the weight, if any.
    pub weight_exponent: Option<T>,
    /// Oscillation that grids must resolve.
    pub resolution: Option<Oscillation<T>>,
    pub label: String,
}

impl<T: Scalar> fmt::Debug for WeightedOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightedOperator")
            .field("r_start", &self.r_start)
            .field("bc", &self.bc)
            .field("stage", &self.stage)
            .field("weight_exponent", &self.weight_exponent)
            .field("label", &self.label)
            .finish()
    }
}

impl<T: Scalar> WeightedOperator<T> {
    /// `2U(r)`.
    pub fn weight_log(&self, r: T) -> T {
        T::lit(2.0) * (self.log_weight.g)(r)
    }

    pub fn weight(&self, r: T) -> T {
        self.log_weight.weight(r)
    }

    pub fn potential(&self, r: T) -> T {
        (self.potential)(r)
    }
}

fn map_bc_to_weighted<T: Scalar>(
    bc: BoundaryCondition<T>,
    lw: &LogWeight<T>,
    r: T,
) -> BoundaryCondition<T> {
    match bc {
        BoundaryCondition::Dirichlet => BoundaryCondition::Dirichlet,
        BoundaryCondition::Robin { sigma } => BoundaryCondition::Robin {
            sigma: lw.weight(r) * (sigma - (lw.dg)(r)),
        },
    }
}

fn check_standard<T: Scalar>(op: &ChannelOperator<T>) -> Result<()> {
    if !op.is_standard_form() {
        return Err(Error::WeightedOperator {
            rho: op.weight_exponent.as_f64(),
        });
    }
    Ok(())
}

/// Single ground-state transform with respect to the oscillating part of `op`.
pub fn transform<T: Scalar>(
    op: &ChannelOperator<T>,
    gsd: &GroundStateData<T>,
) -> Result<WeightedOperator<T>> {
    check_standard(op)?;
    match (op.oscillation.as_ref(), gsd.oscillation()) {
        (None, None) if gsd.is_zero() => {}
        (Some(a), Some(b)) if a == b => {}
        _ => return Err(Error::MismatchedGroundState),
    }
    let gsd = Arc::new(gsd.clone());
    let (g1, g2, g3) = (Arc::clone(&gsd), Arc::clone(&gsd), Arc::clone(&gsd));
    let log_weight = LogWeight {
        g: Arc::new(move |r| g1.u(r)),
        dg: Arc::new(move |r| g2.w(r)),
        d2g: Arc::new(move |r| -g3.v(r)),
    };
    let op_c = op.clone();
    let gp = Arc::clone(&gsd);
    let potential: RadialFn<T> = Arc::new(move |r| {
        let w = gp.w(r);
        op_c.q_retained(r) - w * w
    });
    Ok(WeightedOperator {
        r_start: op.r_start,
        bc: map_bc_to_weighted(op.bc, &log_weight, op.r_start),
        log_weight,
        potential,
        stage: Stage::Single,
        weight_exponent: None,
        resolution: op.fastest_oscillation(),
        label: format!("{} [single]", op.label),
    })
}

/// Pieces of the iterated transform in the critical case `α − β = 2`.
#[derive(Debug, Clone)]
pub struct IteratedPair<T> {
    /// `ρ = (λ/μ)² / α²`.
    pub rho: T,
    pub big_r: T,
    coeff: T,
    mu: T,
    alpha: T,
    cos_tail_2: PowerPhaseTail<T>,
    cos_tail_1: PowerPhaseTail<T>,
    base_t: T,
}

impl<T: Scalar> IteratedPair<T> {
    pub fn new(osc: &Oscillation<T>, big_r: T) -> Result<Self> {
        let gap = osc.alpha - osc.beta;
        if (gap - T::lit(2.0)).abs() > T::lit(1e-12) {
            return Err(Error::NotCritical { gap: gap.as_f64() });
        }
        let c = osc.lambda / (osc.mu * osc.alpha);
        let two_mu = T::lit(2.0) * osc.mu;
        let cos_tail_2 = PowerPhaseTail::new(T::lit(-2.0), two_mu, osc.alpha);
        let cos_tail_1 = PowerPhaseTail::new(-T::one(), two_mu, osc.alpha);
        let mut p = IteratedPair {
            rho: c * c,
            big_r,
            coeff: c,
            mu: osc.mu,
            alpha: osc.alpha,
            cos_tail_2,
            cos_tail_1,
            base_t: T::zero(),
        };
        p.base_t = big_r * p.cos_tail_2.eval(big_r).re - p.cos_tail_1.eval(big_r).re;
        Ok(p)
    }

    /// `W_lead(r) = (λ/μα) cos(μ r^α) / r`.
    pub fn w_lead(&self, r: T) -> T {
        self.coeff * (self.mu * r.powf(self.alpha)).cos() / r
    }

    /// `W̃(r) = ∫_r^∞ W_lead²`.
    pub fn w_tilde(&self, r: T) -> T {
        self.rho / T::lit(2.0) * (T::one() / r + self.cos_tail_2.eval(r).re)
    }

    /// `Ũ(r) = ∫_R^r W̃`.
    pub fn u_tilde(&self, r: T) -> T {
        let t = r * self.cos_tail_2.eval(r).re - self.cos_tail_1.eval(r).re;
        self.rho / T::lit(2.0) * ((r / self.big_r).ln() + t - self.base_t)
    }
}

/// Iterated transform for `α − β = 2`. The weight is `e^{2(U + Ũ)}` with
/// `U(R) = Ũ(R) = 0`; all remainder terms are kept, so the operator is
/// unitarily equivalent to `op`.
pub fn double_transform<T: Scalar>(
    op: &ChannelOperator<T>,
    spec: &PotentialSpec<T>,
) -> Result<WeightedOperator<T>> {
    check_standard(op)?;
    let osc = spec.oscillation();
    let pair = Arc::new(IteratedPair::new(&osc, op.r_start)?);
    if op.oscillation.as_ref() != Some(&osc) {
        return Err(Error::MismatchedGroundState);
    }
    let gsd = Arc::new(GroundStateData::oscillating(
        osc,
        Gauge::ZeroAt(op.r_start),
    )?);
    let (ga, pa) = (Arc::clone(&gsd), Arc::clone(&pair));
    let (gb, pb) = (Arc::clone(&gsd), Arc::clone(&pair));
    let (gc, pc) = (Arc::clone(&gsd), Arc::clone(&pair));
    let log_weight = LogWeight {
        g: Arc::new(move |r| ga.u(r) + pa.u_tilde(r)),
        dg: Arc::new(move |r| gb.w(r) + pb.w_tilde(r)),
        d2g: Arc::new(move |r| {
            let l = pc.w_lead(r);
            -gc.v(r) - l * l
        }),
    };
    let op_c = op.clone();
    let potential: RadialFn<T> = Arc::new(move |r| {
        let w = gsd.w(r);
        let wt = pair.w_tilde(r);
        let wl = pair.w_lead(r);
        op_c.q_retained(r) - wt * wt - T::lit(2.0) * w * wt - (w * w - wl * wl)
    });
    let rho = IteratedPair::new(&osc, op.r_start)?.rho;
    Ok(WeightedOperator {
        r_start: op.r_start,
        bc: map_bc_to_weighted(op.bc, &log_weight, op.r_start),
        log_weight,
        potential,
        stage: Stage::Double,
        weight_exponent: Some(rho),
        resolution: op.fastest_oscillation(),
        label: format!("{} [double]", op.label),
    })
}

/// Leading-order model of the iterated transform: weight `r^ρ`, potential
/// `q_retained − ρ²/(4r²)`.
pub fn double_transform_leading<T: Scalar>(
    op: &ChannelOperator<T>,
    spec: &PotentialSpec<T>,
) -> Result<WeightedOperator<T>> {
    check_standard(op)?;
    let pair = IteratedPair::new(&spec.oscillation(), op.r_start)?;
    let rho = pair.rho;
    let log_weight = LogWeight::power(rho);
    let op_c = op.clone();
    let a = rho * rho / T::lit(4.0);
    let potential: RadialFn<T> = Arc::new(move |r| op_c.q_retained(r) - a / (r * r));
    Ok(WeightedOperator {
        r_start: op.r_start,
        bc: map_bc_to_weighted(op.bc, &log_weight, op.r_start),
        log_weight,
        potential,
        stage: Stage::Power,
        weight_exponent: Some(rho),
        resolution: None,
        label: format!("{} [leading]", op.label),
    })
}

/// Operator with weight `r^ρ` and potential `p`.
pub fn power_weighted<T: Scalar>(
    r_start: T,
    bc: BoundaryCondition<T>,
    rho: T,
    p: RadialFn<T>,
    label: impl Into<String>,
) -> WeightedOperator<T> {
    WeightedOperator {
        r_start,
        bc,
        log_weight: LogWeight::power(rho),
        potential: p,
        stage: Stage::Power,
        weight_exponent: Some(rho),
        resolution: None,
        label: label.into(),
    }
}

/// Unitary reduction `v = e^{g} φ` to an unweighted operator.
pub fn standard_form<T: Scalar>(wop: &WeightedOperator<T>) -> ChannelOperator<T> {
    let lw = wop.log_weight.clone();
    let p = Arc::clone(&wop.potential);
    let lw2 = lw.clone();
    let q: RadialFn<T> = Arc::new(move |r| {
        let dg = (lw2.dg)(r);
        p(r) + dg * dg + (lw2.d2g)(r)
    });
    let r0 = wop.r_start;
    let bc = match wop.bc {
        BoundaryCondition::Dirichlet => BoundaryCondition::Dirichlet,
        BoundaryCondition::Robin { sigma } => BoundaryCondition::Robin {
            sigma: sigma / lw.weight(r0) + (lw.dg)(r0),
        },
    };
    let mut op = ChannelOperator::from_fn(r0, bc, q, format!("{} [standard]", wop.label));
    op.resolution = wop.resolution;
    op
}
