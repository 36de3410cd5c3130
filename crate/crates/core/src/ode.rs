//! Embedded Dormand-Prince 5(4) integrator with adaptive step control.
//!
//! Small, allocation-free, and generic over the scalar and the state
//! dimension; enough for the three-variable kinetic system without pulling
//! in a solver framework. FSAL is used, error control is the usual mixed
//! absolute/relative RMS norm with a 0.9 safety factor and step-change
//! limits of [0.2, 5].

use crate::error::{Error, Result};
use crate::real::Real;

/// Step-size and tolerance settings.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    /// Hard cap on the step; keeps the controller honest on oscillatory
    /// systems when the solution is momentarily tiny.
    pub max_step: T,
}

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
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
// b - b_hat, including the FSAL stage
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<T: Real, const N: usize>(y: &[T; N], h: T, coeffs: &[(T, [T; N])]) -> [T; N] {
    let mut out = *y;
    for (c, k) in coeffs {
        for i in 0..N {
            out[i] += h * *c * k[i];
        }
    }
    out
}

/// Integrate `y' = f(t, y)` from `t0` to `t1` (`t1 > t0`); calls `on_step`
/// after every accepted step with `(t, y)`.
pub fn integrate_dp45<T: Real, const N: usize>(
    mut f: impl FnMut(T, &[T; N]) -> [T; N],
    t0: T,
    t1: T,
    y0: [T; N],
    opts: &OdeOptions<T>,
    mut on_step: impl FnMut(T, &[T; N]),
) -> Result<[T; N]> {
    debug_assert!(t1 > t0);
    let of = T::of;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = opts.max_step.min((t1 - t0) * of(1e-4));
    let h_floor = (t1 - t0) * T::epsilon() * of(32.0);

    while t < t1 {
        if h < h_floor {
            return Err(Error::StepUnderflow {
                t: t.to_f64_lossy(),
            });
        }
        if t + h > t1 {
            h = t1 - t;
        }

        let y2 = axpy(&y, h, &[(of(A21), k1)]);
        let k2 = f(t + of(C2) * h, &y2);
        let y3 = axpy(&y, h, &[(of(A31), k1), (of(A32), k2)]);
        let k3 = f(t + of(C3) * h, &y3);
        let y4 = axpy(&y, h, &[(of(A41), k1), (of(A42), k2), (of(A43), k3)]);
        let k4 = f(t + of(C4) * h, &y4);
        let y5 = axpy(
            &y,
            h,
            &[(of(A51), k1), (of(A52), k2), (of(A53), k3), (of(A54), k4)],
        );
        let k5 = f(t + of(C5) * h, &y5);
        let y6 = axpy(
            &y,
            h,
            &[
                (of(A61), k1),
                (of(A62), k2),
                (of(A63), k3),
                (of(A64), k4),
                (of(A65), k5),
            ],
        );
        let k6 = f(t + h, &y6);
        let y_new = axpy(
            &y,
            h,
            &[
                (of(B1), k1),
                (of(B3), k3),
                (of(B4), k4),
                (of(B5), k5),
                (of(B6), k6),
            ],
        );
        let k7 = f(t + h, &y_new);

        // scaled RMS error over the embedded 4th-order difference
        let mut err_sq = T::zero();
        for i in 0..N {
            let e = of(E1) * k1[i]
                + of(E3) * k3[i]
                + of(E4) * k4[i]
                + of(E5) * k5[i]
                + of(E6) * k6[i]
                + of(E7) * k7[i];
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let r = h * e / scale;
            err_sq += r * r;
        }
        let err = (err_sq / of(N as f64)).sqrt();

        if err <= T::one() {
            t = t + h;
            y = y_new;
            k1 = k7; // FSAL
            on_step(t, &y);
        }

        let factor = if err == T::zero() {
            of(5.0)
        } else {
            (of(0.9) * err.powf(of(-0.2))).max(of(0.2)).min(of(5.0))
        };
        h = (h * factor).min(opts.max_step);
    }
    Ok(y)
}
