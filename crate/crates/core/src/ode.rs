//! Dormand–Prince 5(4) integrator for small fixed-size systems.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Step controller settings. Error is measured on the components flagged in
/// `controlled`.
#[derive(Debug, Clone, Copy)]
pub struct Dopri<T> {
    pub atol: T,
    pub rtol: T,
    pub max_steps: usize,
    pub controlled: [bool; 2],
}

impl<T: Scalar> Default for Dopri<T> {
    fn default() -> Self {
        Dopri {
            atol: T::lit(1e-9),
            rtol: T::lit(1e-9),
            max_steps: 50_000_000,
            controlled: [true, false],
        }
    }
}

/// What the observer wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy)]
pub struct Outcome<T> {
    pub r: T,
    pub y: [T; 2],
    pub steps: usize,
    pub stopped: bool,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<T: Scalar>(y: &[T; 2], terms: &[(f64, &[T; 2])], h: T) -> [T; 2] {
    let mut out = *y;
    for (c, k) in terms {
        let c = T::lit(*c) * h;
        out[0] = out[0] + c * k[0];
        out[1] = out[1] + c * k[1];
    }
    out
}

impl<T: Scalar> Dopri<T> {
    /// Integrates `y' = f(r, y)` from `r0` to `r1 > r0`. `max_step(r)` caps the
    /// step taken from `r`; `observe` sees every accepted point.
    pub fn integrate<F, H, O>(
        &self,
        mut f: F,
        r0: T,
        y0: [T; 2],
        r1: T,
        mut max_step: H,
        mut observe: O,
    ) -> Result<Outcome<T>>
    where
        F: FnMut(T, &[T; 2]) -> [T; 2],
        H: FnMut(T) -> T,
        O: FnMut(T, &[T; 2]) -> Control,
    {
        let mut r = r0;
        let mut y = y0;
        let mut k1 = f(r, &y);
        let mut h = max_step(r)
            .min((r1 - r0) * T::lit(0.01))
            .max(T::epsilon() * r.abs());
        let mut steps = 0usize;
        let safety = T::lit(0.9);
        let fifth = T::lit(0.2);
        while r < r1 {
            if steps >= self.max_steps {
                return Err(Error::StepBudget {
                    r: r.as_f64(),
                    budget: self.max_steps,
                });
            }
            let cap = max_step(r);
            if h > cap {
                h = cap;
            }
            let last = r + h >= r1;
            if last {
                h = r1 - r;
            }
            let h_floor = T::lit(64.0) * T::epsilon() * r.abs().max(T::one());
            if h < h_floor && !last {
                return Err(Error::StepCollapse { r: r.as_f64() });
            }
            let k2 = f(r + T::lit(C2) * h, &axpy(&y, &[(A21, &k1)], h));
            let k3 = f(r + T::lit(C3) * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
            let k4 = f(
                r + T::lit(C4) * h,
                &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h),
            );
            let k5 = f(
                r + T::lit(C5) * h,
                &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
            );
            let k6 = f(
                r + h,
                &axpy(
                    &y,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    h,
                ),
            );
            let y_new = axpy(
                &y,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
                h,
            );
            let k7 = f(r + h, &y_new);
            let mut err = T::zero();
            for i in 0..2 {
                if !self.controlled[i] {
                    continue;
                }
                let e = h
                    * (T::lit(E1) * k1[i]
                        + T::lit(E3) * k3[i]
                        + T::lit(E4) * k4[i]
                        + T::lit(E5) * k5[i]
                        + T::lit(E6) * k6[i]
                        + T::lit(E7) * k7[i]);
                let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / scale).abs());
            }
            if !err.is_finite() {
                h = h * T::lit(0.1);
                continue;
            }
            if err <= T::one() {
                r = if last { r1 } else { r + h };
                y = y_new;
                k1 = k7;
                steps += 1;
                if observe(r, &y) == Control::Stop {
                    return Ok(Outcome {
                        r,
                        y,
                        steps,
                        stopped: true,
                    });
                }
                let grow = if err == T::zero() {
                    T::lit(5.0)
                } else {
                    (safety * err.powf(-fifth)).min(T::lit(5.0))
                };
                h = h * grow;
            } else {
                h = h * (safety * err.powf(-fifth)).max(T::lit(0.1));
            }
        }
        Ok(Outcome {
            r,
            y,
            steps,
            stopped: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_phase() {
        // y0' = 1 is exact; y1' = cos(r) integrates to sin
        let d = Dopri::<f64> {
            controlled: [true, true],
            ..Default::default()
        };
        let out = d
            .integrate(
                |r, _| [1.0, r.cos()],
                0.0,
                [0.0, 0.0],
                10.0,
                |_| 0.5,
                |_, _| Control::Continue,
            )
            .unwrap();
        assert!((out.y[0] - 10.0).abs() < 1e-12);
        assert!((out.y[1] - 10f64.sin()).abs() < 1e-8);
        assert_eq!(out.r, 10.0);
    }

    #[test]
    fn exponential_growth() {
        let d = Dopri::<f64> {
            controlled: [true, true],
            ..Default::default()
        };
        let out = d
            .integrate(
                |_, y| [y[0], -y[1]],
                0.0,
                [1.0, 1.0],
                3.0,
                |_| 1.0,
                |_, _| Control::Continue,
            )
            .unwrap();
        assert!((out.y[0] / 3f64.exp() - 1.0).abs() < 1e-8);
        assert!((out.y[1] / (-3f64).exp() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn observer_stops() {
        let d = Dopri::<f64>::default();
        let out = d
            .integrate(
                |_, _| [1.0, 0.0],
                0.0,
                [0.0, 0.0],
                10.0,
                |_| 0.1,
                |_, y| {
                    if y[0] > 2.0 {
                        Control::Stop
                    } else {
                        Control::Continue
                    }
                },
            )
            .unwrap();
        assert!(out.stopped && out.r < 2.5);
    }

    #[test]
    fn budget_is_enforced() {
        let d = Dopri::<f64> {
            max_steps: 10,
            ..Default::default()
        };
        let err = d
            .integrate(
                |_, _| [1.0, 0.0],
                0.0,
                [0.0, 0.0],
                10.0,
                |_| 0.01,
                |_, _| Control::Continue,
            )
            .unwrap_err();
        assert!(matches!(err, Error::StepBudget { .. }));
    }
}
