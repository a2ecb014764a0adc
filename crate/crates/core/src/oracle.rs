//! Finite-element ground truth for half-line channel operators.
//!
//! An operator `−w⁻¹(w u')' + P u` on `[a, b]` is discretized on a node set
//! into a symmetric tridiagonal pencil `(K, M)`. The default scheme is linear
//! Galerkin with consistent mass and 3-point Gauss quadrature per element; its
//! eigenvalues are Rayleigh–Ritz upper bounds, so the count below a threshold
//! never exceeds the exact one on the truncated interval. The lumped
//! conservative 3-point stencil is available as [`Scheme::Lumped`].
//!
//! Left Robin conditions enter as the flux term `+σ_flux φ(a)²`, right ones as
//! `−w(b) σ φ(b)²`; Dirichlet rows are dropped. Counting uses the inertia of
//! `K − τM` from an `LDLᵀ` sweep.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gsrep::{Gauge, GroundStateData, WeightedOperator};
use crate::model::{
    angular_channels, effective_channel, BoundaryCondition, ChannelOperator, Oscillation,
    PotentialSpec,
};
use crate::pruefer::{regular_start, sweep_channels, turning_radius, CountResult, Method};
use crate::scalar::Scalar;

/// Anything of the form `−w⁻¹(w u')' + P u` with a left boundary condition.
pub trait SturmLiouville<T: Scalar> {
    fn r_start(&self) -> T;
    /// `None` for Dirichlet, otherwise the coefficient of `φ(a)²` in the form.
    fn left_flux(&self) -> Option<T>;
    fn weight(&self, r: T) -> T;
    fn potential(&self, r: T) -> T;
    fn resolution(&self) -> Option<Oscillation<T>>;
}

impl<T: Scalar> SturmLiouville<T> for ChannelOperator<T> {
    fn r_start(&self) -> T {
        self.r_start
    }
    fn left_flux(&self) -> Option<T> {
        match self.bc {
            BoundaryCondition::Dirichlet => None,
            BoundaryCondition::Robin { sigma } => Some(sigma * self.weight(self.r_start)),
        }
    }
    fn weight(&self, r: T) -> T {
        if self.weight_exponent == T::zero() {
            T::one()
        } else {
            r.powf(self.weight_exponent)
        }
    }
    fn potential(&self, r: T) -> T {
        self.q(r)
    }
    fn resolution(&self) -> Option<Oscillation<T>> {
        self.fastest_oscillation()
    }
}

impl<T: Scalar> SturmLiouville<T> for WeightedOperator<T> {
    fn r_start(&self) -> T {
        self.r_start
    }
    fn left_flux(&self) -> Option<T> {
        match self.bc {
            BoundaryCondition::Dirichlet => None,
            BoundaryCondition::Robin { sigma } => Some(sigma),
        }
    }
    fn weight(&self, r: T) -> T {
        WeightedOperator::weight(self, r)
    }
    fn potential(&self, r: T) -> T {
        WeightedOperator::potential(self, r)
    }
    fn resolution(&self) -> Option<Oscillation<T>> {
        self.resolution
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grid<T> {
    Uniform,
    Geometric { ratio: T },
}

/// Node set on `[r_min, r_max]` plus the condition at `r_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization<T> {
    pub nodes: Vec<T>,
    pub grid: Grid<T>,
    pub right_bc: BoundaryCondition<T>,
}

impl<T: Scalar> Discretization<T> {
    pub fn uniform(r_min: T, r_max: T, intervals: usize) -> Result<Self> {
        if !(r_min < r_max) || intervals < 2 {
            return Err(Error::InvalidParameter(
                "uniform grid needs r_min < r_max and >= 2 intervals".into(),
            ));
        }
        let h = (r_max - r_min) / T::from_usize_lossy(intervals);
        let mut nodes: Vec<T> = (0..intervals)
            .map(|i| r_min + h * T::from_usize_lossy(i))
            .collect();
        nodes.push(r_max);
        Ok(Discretization {
            nodes,
            grid: Grid::Uniform,
            right_bc: BoundaryCondition::Dirichlet,
        })
    }

    /// Spacing `min((ratio − 1) r, h_max, period(r)/per_period)`.
    pub fn geometric(
        r_min: T,
        r_max: T,
        ratio: T,
        h_max: T,
        resolve: Option<&Oscillation<T>>,
        per_period: T,
        max_nodes: usize,
    ) -> Result<Self> {
        if !(r_min > T::zero() && r_min < r_max && ratio > T::one()) {
            return Err(Error::InvalidParameter(
                "geometric grid needs 0 < r_min < r_max, ratio > 1".into(),
            ));
        }
        let mut nodes = vec![r_min];
        let mut r = r_min;
        while r < r_max {
            let mut h = ((ratio - T::one()) * r).min(h_max);
            if let Some(o) = resolve {
                h = h.min(o.period(r) / per_period);
            }
            r = r + h;
            if r_max - r < T::lit(0.3) * h {
                r = r_max;
            }
            nodes.push(r.min(r_max));
            if nodes.len() > max_nodes {
                return Err(Error::InvalidParameter(format!(
                    "grid on [{r_min}, {r_max}] needs more than {max_nodes} nodes"
                )));
            }
        }
        Ok(Discretization {
            nodes,
            grid: Grid::Geometric { ratio },
            right_bc: BoundaryCondition::Dirichlet,
        })
    }

    pub fn with_right_bc(mut self, bc: BoundaryCondition<T>) -> Self {
        self.right_bc = bc;
        self
    }

    pub fn r_min(&self) -> T {
        self.nodes[0]
    }

    pub fn r_max(&self) -> T {
        *self.nodes.last().expect("non-empty grid")
    }

    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Spacing of interval `i` (between nodes `i` and `i + 1`).
    pub fn h(&self, i: usize) -> T {
        self.nodes[i + 1] - self.nodes[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Galerkin,
    Lumped,
}

/// Symmetric tridiagonal pencil `(K, M)`, both divided by a reference spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator<T> {
    pub diag: Vec<T>,
    pub offdiag: Vec<T>,
    pub mass: Vec<T>,
    pub mass_off: Vec<T>,
    /// Some spacing exceeded a tenth of the local oscillation period.
    pub coarse: bool,
}

impl<T: Scalar> TridiagonalOperator<T> {
    /// Standard eigenproblem (`M = I`).
    pub fn standard(diag: Vec<T>, offdiag: Vec<T>) -> Self {
        let n = diag.len();
        TridiagonalOperator {
            diag,
            offdiag,
            mass: vec![T::one(); n],
            mass_off: vec![T::zero(); n.saturating_sub(1)],
            coarse: false,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }
}

const GAUSS3_X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GAUSS3_W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Assembles `(K, M)` for `op` on `disc`.
pub fn discretize<T: Scalar, S: SturmLiouville<T> + ?Sized>(
    op: &S,
    disc: &Discretization<T>,
    scheme: Scheme,
) -> TridiagonalOperator<T> {
    let x = &disc.nodes;
    let n = x.len();
    let mut k_d = vec![T::zero(); n];
    let mut k_o = vec![T::zero(); n - 1];
    let mut m_d = vec![T::zero(); n];
    let mut m_o = vec![T::zero(); n - 1];
    let resolve = op.resolution();
    let mut coarse = false;
    let half = T::lit(0.5);
    for e in 0..n - 1 {
        let (a, b) = (x[e], x[e + 1]);
        let h = b - a;
        if let Some(o) = &resolve {
            if h > o.period(a) / T::lit(10.0) {
                coarse = true;
            }
        }
        match scheme {
            Scheme::Galerkin => {
                let (mut kaa, mut kab, mut kbb) = (T::zero(), T::zero(), T::zero());
                let (mut maa, mut mab, mut mbb) = (T::zero(), T::zero(), T::zero());
                for g in 0..3 {
                    let s = T::lit(GAUSS3_X[g]);
                    let wq = T::lit(GAUSS3_W[g]) * h * half;
                    let r = a + (s + T::one()) * half * h;
                    let pa = (b - r) / h;
                    let pb = (r - a) / h;
                    let w = op.weight(r);
                    let p = op.potential(r);
                    let stiff = w / (h * h);
                    kaa = kaa + wq * (stiff + w * p * pa * pa);
                    kab = kab + wq * (-stiff + w * p * pa * pb);
                    kbb = kbb + wq * (stiff + w * p * pb * pb);
                    maa = maa + wq * w * pa * pa;
                    mab = mab + wq * w * pa * pb;
                    mbb = mbb + wq * w * pb * pb;
                }
                k_d[e] = k_d[e] + kaa;
                k_d[e + 1] = k_d[e + 1] + kbb;
                k_o[e] = kab;
                m_d[e] = m_d[e] + maa;
                m_d[e + 1] = m_d[e + 1] + mbb;
                m_o[e] = mab;
            }
            Scheme::Lumped => {
                let wm = op.weight(a + half * h);
                let flux = wm / h;
                k_d[e] = k_d[e] + flux;
                k_d[e + 1] = k_d[e + 1] + flux;
                k_o[e] = -flux;
                let (wa, wb) = (op.weight(a), op.weight(b));
                m_d[e] = m_d[e] + wa * half * h;
                m_d[e + 1] = m_d[e + 1] + wb * half * h;
            }
        }
    }
    if scheme == Scheme::Lumped {
        for i in 0..n {
            k_d[i] = k_d[i] + op.potential(x[i]) * m_d[i];
        }
    }
    if coarse {
        log::warn!("grid spacing exceeds a tenth of the local oscillation period");
    }
    // boundary rows
    let left = op.left_flux();
    if let Some(f) = left {
        k_d[0] = k_d[0] + f;
    }
    if let BoundaryCondition::Robin { sigma } = disc.right_bc {
        let b = x[n - 1];
        k_d[n - 1] = k_d[n - 1] - sigma * op.weight(b);
    }
    let lo = if left.is_some() { 0 } else { 1 };
    let hi = if matches!(disc.right_bc, BoundaryCondition::Dirichlet) {
        n - 1
    } else {
        n
    };
    let scale = x[1] - x[0];
    let norm = |v: &[T]| v.iter().map(|&z| z / scale).collect::<Vec<T>>();
    TridiagonalOperator {
        diag: norm(&k_d[lo..hi]),
        offdiag: norm(&k_o[lo..hi - 1]),
        mass: norm(&m_d[lo..hi]),
        mass_off: norm(&m_o[lo..hi - 1]),
        coarse,
    }
}

/// Inertia count with a flag for zero pivots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub below: usize,
    pub perturbed: bool,
}

/// Number of generalized eigenvalues strictly below `tau`, from the `LDLᵀ`
/// pivots of `K − τM`.
pub fn inertia<T: Scalar>(t: &TridiagonalOperator<T>, tau: T) -> Inertia {
    let n = t.len();
    let mut below = 0usize;
    let mut perturbed = false;
    let mut prev = T::one();
    let tiny = T::min_positive_value().sqrt();
    for i in 0..n {
        let a = t.diag[i] - tau * t.mass[i];
        let mut d = if i == 0 {
            a
        } else {
            let b = t.offdiag[i - 1] - tau * t.mass_off[i - 1];
            a - b * b / prev
        };
        if d == T::zero() {
            d = tiny * (T::one() + a.abs());
            perturbed = true;
        }
        if d < T::zero() {
            below += 1;
        }
        prev = d;
    }
    Inertia { below, perturbed }
}

pub fn inertia_count<T: Scalar>(t: &TridiagonalOperator<T>, tau: T) -> usize {
    inertia(t, tau).below
}

/// The `k` smallest eigenvalues below zero, ascending with multiplicity.
/// The flag is set when fewer than `k` exist.
pub fn eigenvalues_bottom<T: Scalar>(t: &TridiagonalOperator<T>, k: usize) -> (Vec<T>, bool) {
    eigenvalues_below(t, k, T::zero())
}

/// The `k` smallest eigenvalues below `ceiling`, relative accuracy `1e-10`.
pub fn eigenvalues_below<T: Scalar>(
    t: &TridiagonalOperator<T>,
    k: usize,
    ceiling: T,
) -> (Vec<T>, bool) {
    let c_top = inertia_count(t, ceiling);
    let want = k.min(c_top);
    let mut out = Vec::with_capacity(want);
    if want == 0 {
        return (out, k > 0);
    }
    let mut lo = -T::one();
    while inertia_count(t, lo) > 0 {
        lo = lo * T::lit(4.0);
    }
    let tol = T::lit(1e-10);
    // recursive bisection on [a, b) with known counts
    let mut stack = vec![(lo, ceiling, 0usize, c_top)];
    while let Some((a, b, ca, cb)) = stack.pop() {
        if cb <= ca || ca >= want {
            continue;
        }
        let width = b - a;
        if width <= tol * a.abs().max(b.abs()) || width <= T::min_positive_value() {
            let mid = a + width / T::lit(2.0);
            for _ in ca..cb.min(want) {
                out.push(mid);
            }
            continue;
        }
        let m = a + width / T::lit(2.0);
        let cm = inertia_count(t, m);
        // upper half first so the lower half is processed next
        stack.push((m, b, cm, cb));
        stack.push((a, m, ca, cm));
    }
    out.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    out.truncate(want);
    (out, want < k)
}

/// Grid and truncation settings for the oracle.
#[derive(Debug, Clone, Copy)]
pub struct OraclePolicy<T> {
    pub scheme: Scheme,
    pub r_start: T,
    pub ratio: T,
    pub h_max: T,
    pub per_period: T,
    pub margin: T,
    /// Decay lengths `∫√(q_eff + E)` kept past `margin · r_t`.
    pub decay_lengths: T,
    pub horizon: T,
    pub max_nodes: usize,
    pub l_max: u32,
    pub parallel: bool,
}

impl<T: Scalar> Default for OraclePolicy<T> {
    fn default() -> Self {
        OraclePolicy {
            scheme: Scheme::Galerkin,
            r_start: T::lit(1e-4),
            ratio: T::lit(1.01),
            h_max: T::lit(0.5),
            per_period: T::lit(30.0),
            margin: T::lit(1.5),
            decay_lengths: T::lit(8.0),
            horizon: T::lit(1e10),
            max_nodes: 20_000_000,
            l_max: 10_000,
            parallel: false,
        }
    }
}

/// Truncation radius: `margin · r_t` plus enough room for the decay integral.
pub fn truncation_radius<T: Scalar>(
    op: &ChannelOperator<T>,
    gsd: Option<&GroundStateData<T>>,
    e: T,
    policy: &OraclePolicy<T>,
) -> Result<T> {
    let r_t = turning_radius(op, gsd, e, policy.horizon)?;
    let mut r = (policy.margin * r_t).max(op.r_start * T::lit(2.0));
    let f = |r: T| -> T {
        let w = match (gsd, op.oscillation.as_ref()) {
            (Some(g), Some(_)) => {
                if r >= g.crossover_radius {
                    g.envelope_w(r)
                } else {
                    g.w(r).abs()
                }
            }
            _ => T::zero(),
        };
        let base = if gsd.is_some() && op.oscillation.is_some() {
            op.q_retained(r)
        } else {
            op.q(r)
        };
        (base + e - w * w).max(e)
    };
    let mut acc = T::zero();
    while acc < policy.decay_lengths {
        let k = f(r).sqrt();
        let h = (T::lit(0.05) * r).min(T::lit(0.25) / k);
        acc = acc + k * h;
        r = r + h;
    }
    Ok(r)
}

/// Oracle count for one channel operator below `−E`.
pub fn count_channel_oracle<T: Scalar>(
    op: &ChannelOperator<T>,
    gsd: Option<&GroundStateData<T>>,
    e: T,
    policy: &OraclePolicy<T>,
) -> Result<usize> {
    let r_end = truncation_radius(op, gsd, e, policy)?;
    let resolve = op.fastest_oscillation();
    let disc = Discretization::geometric(
        op.r_start,
        r_end,
        policy.ratio,
        policy.h_max,
        resolve.as_ref(),
        policy.per_period,
        policy.max_nodes,
    )?;
    let t = discretize(op, &disc, policy.scheme);
    Ok(inertia_count(&t, -e))
}

fn oscillation_gsd<T: Scalar>(spec: &PotentialSpec<T>) -> Result<Option<Arc<GroundStateData<T>>>> {
    if spec.lambda == T::zero() {
        return Ok(None);
    }
    Ok(Some(Arc::new(GroundStateData::oscillating(
        spec.oscillation(),
        Gauge::TailZero,
    )?)))
}

/// Oracle analogue of `pruefer::count_total`.
pub fn count_total_oracle<T: Scalar>(
    spec: &PotentialSpec<T>,
    d: u32,
    e: T,
    policy: &OraclePolicy<T>,
) -> Result<CountResult<T>> {
    spec.validate()?;
    angular_channels::<T>(d, 0)?;
    let gsd = oscillation_gsd(spec)?;
    let channels = sweep_channels(d, policy.l_max, policy.parallel, |ch| {
        let bc = regular_start(ch, policy.r_start);
        let op = effective_channel(spec, ch, policy.r_start, bc)?;
        let c = count_channel_oracle(&op, gsd.as_deref(), e, policy)? as u64;
        Ok((c, c, c))
    })?;
    Ok(CountResult::from_channels(e, d, Method::Oracle, channels))
}

/// The `k` lowest eigenvalues of `−Δ − V` in dimension `d`, assembled over
/// channels with multiplicity. Lowers the floor `−E` by decades until at least
/// `k` eigenvalues lie below it.
pub fn assembled_eigenvalues<T: Scalar>(
    spec: &PotentialSpec<T>,
    d: u32,
    k: usize,
    e_start: T,
    policy: &OraclePolicy<T>,
) -> Result<Vec<T>> {
    let gsd = oscillation_gsd(spec)?;
    let mut e = e_start;
    for _ in 0..12 {
        let mut eigs: Vec<T> = Vec::new();
        let mut l = 0u32;
        loop {
            let ch = crate::model::AngularChannel::new(d, l)?;
            let bc = regular_start(&ch, policy.r_start);
            let op = effective_channel(spec, &ch, policy.r_start, bc)?;
            let r_end =
                truncation_radius(&op, gsd.as_deref(), e, policy).map_err(|x| x.in_channel(l))?;
            let disc = Discretization::geometric(
                op.r_start,
                r_end,
                policy.ratio,
                policy.h_max,
                op.fastest_oscillation().as_ref(),
                policy.per_period,
                policy.max_nodes,
            )?;
            let t = discretize(&op, &disc, policy.scheme);
            let c = inertia_count(&t, -e);
            if c == 0 {
                break;
            }
            let (vals, _) = eigenvalues_below(&t, c, -e);
            for v in vals {
                for _ in 0..ch.multiplicity {
                    eigs.push(v);
                }
            }
            l += 1;
            if d == 1 && l > 1 {
                break;
            }
            if l > policy.l_max {
                return Err(Error::ChannelCutoff {
                    l_max: policy.l_max,
                });
            }
        }
        if eigs.len() >= k {
            eigs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            eigs.truncate(k);
            return Ok(eigs);
        }
        e = e / T::lit(10.0);
    }
    Err(Error::InsufficientPoints { needed: k, got: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn coulomb_op(r0: f64) -> ChannelOperator<f64> {
        ChannelOperator::from_fn(
            r0,
            BoundaryCondition::Dirichlet,
            Arc::new(|r| -1.0 / r),
            "coulomb",
        )
    }

    #[test]
    fn free_stencil_entries() {
        let free =
            ChannelOperator::from_fn(0.0, BoundaryCondition::Dirichlet, Arc::new(|_| 0.0), "free");
        let disc = Discretization::uniform(0.0, 1.0, 10).unwrap();
        let h = 0.1;
        for scheme in [Scheme::Galerkin, Scheme::Lumped] {
            let t = discretize(&free, &disc, scheme);
            assert_eq!(t.len(), 9);
            for &d in &t.diag {
                assert_relative_eq!(d, 2.0 / (h * h), max_relative = 1e-12);
            }
            for &o in &t.offdiag {
                assert_relative_eq!(o, -1.0 / (h * h), max_relative = 1e-12);
            }
            assert_eq!(inertia_count(&t, 0.0), 0);
            let (v, short) = eigenvalues_bottom(&t, 3);
            assert!(v.is_empty() && short);
        }
    }

    #[test]
    fn weighted_rows_annihilate_constants() {
        let w = crate::gsrep::power_weighted(
            1.0f64,
            BoundaryCondition::Dirichlet,
            1.7,
            Arc::new(|_| 0.0),
            "w",
        );
        let disc = Discretization::geometric(1.0, 10.0, 1.05, 1.0, None, 30.0, 10_000).unwrap();
        for scheme in [Scheme::Galerkin, Scheme::Lumped] {
            let t = discretize(&w, &disc, scheme);
            for i in 1..t.len() - 1 {
                let s: f64 = t.offdiag[i - 1] + t.diag[i] + t.offdiag[i];
                assert!(s.abs() < 1e-9 * t.diag[i].abs());
            }
        }
    }

    #[test]
    fn three_by_three() {
        let t = TridiagonalOperator::standard(vec![2.0; 3], vec![-1.0; 2]);
        assert_eq!(inertia_count(&t, 1.0), 1);
        let (v, short) = eigenvalues_below(&t, 3, 10.0);
        assert!(!short);
        let exact = [2.0 - 2f64.sqrt(), 2.0, 2.0 + 2f64.sqrt()];
        for (a, b) in v.iter().zip(exact) {
            assert_relative_eq!(*a, b, max_relative = 1e-9);
        }
        // counts between thresholds equal eigenvalues found in between
        assert_eq!(inertia_count(&t, 2.5) - inertia_count(&t, 0.5), 2);
    }

    #[test]
    fn zero_pivot_is_flagged() {
        let t = TridiagonalOperator::standard(vec![1.0, 1.0], vec![0.0]);
        let i = inertia(&t, 1.0);
        assert!(i.perturbed);
        assert_eq!(i.below, 0);
    }

    #[test]
    fn coulomb_bottom() {
        let op = coulomb_op(0.0);
        let disc = Discretization::uniform(0.0, 80.0, 8000).unwrap();
        let t = discretize(&op, &disc, Scheme::Galerkin);
        let (v, _) = eigenvalues_bottom(&t, 2);
        assert_relative_eq!(v[0], -0.25, max_relative = 1e-3);
        assert_relative_eq!(v[1], -0.0625, max_relative = 1e-3);
        assert!(v[0] <= v[1]);
    }

    #[test]
    fn hydrogen_oracle_total() {
        let spec = PotentialSpec::coulomb(1.0);
        let r = count_total_oracle(&spec, 3, 0.01, &OraclePolicy::default()).unwrap();
        let per: Vec<u64> = r.channels.iter().map(|c| c.count).collect();
        assert_eq!(&per[..4], &[4, 3, 2, 1]);
        assert_eq!(r.total, 30);
    }

    #[test]
    fn zero_potential_oracle() {
        let r = count_total_oracle(
            &PotentialSpec::<f64>::zero(),
            3,
            1e-3,
            &OraclePolicy::default(),
        )
        .unwrap();
        assert_eq!(r.total, 0);
    }
}
