//! Gauss–Legendre and adaptive Gauss–Kronrod quadrature.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Fixed-order Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    /// Builds the `n`-point rule by Newton iteration on `P_n` (computed in f64).
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let nf = n as f64;
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            nodes.push(T::lit(x));
            weights.push(T::lit(2.0 / ((1.0 - x * x) * dp * dp)));
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) * T::lit(0.5);
        let mid = (b + a) * T::lit(0.5);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + *w * f(mid + half * *x);
        }
        acc * half
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: Scalar, F: FnMut(T) -> T>(a: T, b: T, f: &mut F) -> (T, T) {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(mid - dx) + f(mid + dx);
        kron = kron + s * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + s * T::lit(WG[j / 2]);
        }
    }
    let val = kron * half;
    let err = ((kron - gauss) * half).abs();
    (val, err)
}

/// Tolerances for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
    pub max_depth: u32,
}

impl<T: Scalar> Default for Tolerance<T> {
    fn default() -> Self {
        Tolerance {
            abs: T::lit(1e-13),
            rel: T::lit(1e-12),
            max_depth: 48,
        }
    }
}

/// Adaptive Gauss–Kronrod (7/15) on a finite interval with global error
/// budget split by bisection.
pub fn adaptive<T: Scalar, F: FnMut(T) -> T>(a: T, b: T, tol: Tolerance<T>, mut f: F) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let (whole, _) = gk15(a, b, &mut f);
    let budget = tol.abs.max(tol.rel * whole.abs());
    let mut stack = vec![(a, b, 0u32)];
    let mut total = T::zero();
    let width = (b - a).abs();
    let mut unresolved = false;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = gk15(lo, hi, &mut f);
        let share = budget * ((hi - lo).abs() / width).max(T::lit(1e-3));
        if err <= share || (hi - lo).abs() <= width * T::epsilon() * T::lit(16.0) {
            total = total + val;
        } else if depth >= tol.max_depth {
            total = total + val;
            unresolved = true;
        } else {
            let m = (lo + hi) * T::lit(0.5);
            stack.push((lo, m, depth + 1));
            stack.push((m, hi, depth + 1));
        }
    }
    if unresolved || !total.is_finite() {
        return Err(Error::UnresolvedIntegrand {
            a: a.as_f64(),
            b: b.as_f64(),
        });
    }
    Ok(total)
}

/// Adaptive quadrature over `[a, b]` split at the given interior breakpoints.
pub fn adaptive_pieces<T: Scalar, F: FnMut(T) -> T>(
    a: T,
    b: T,
    breakpoints: &[T],
    tol: Tolerance<T>,
    mut f: F,
) -> Result<T> {
    let mut cuts: Vec<T> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    let mut left = a;
    let mut acc = T::zero();
    for c in cuts.into_iter().chain(std::iter::once(b)) {
        acc = acc + adaptive(left, c, tol, &mut f)?;
        left = c;
    }
    Ok(acc)
}

/// `∫_a^∞ f` through the map `s = a + (1 - u)/u`, `u ∈ (0, 1]`.
pub fn adaptive_to_infinity<T: Scalar, F: FnMut(T) -> T>(
    a: T,
    tol: Tolerance<T>,
    mut f: F,
) -> Result<T> {
    adaptive(T::zero(), T::one(), tol, |u: T| {
        let s = a + (T::one() - u) / u;
        let v = f(s) / (u * u);
        if v.is_finite() {
            v
        } else {
            T::zero()
        }
    })
}
