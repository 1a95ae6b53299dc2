use super::Vector;
use crate::error::{Error, Result};

/// Dormand-Prince 5(4) integration of `du/ds = rhs(u)` from `s = 0` to
/// `s = span` (either sign), with absolute error control.
pub fn integrate<F>(mut rhs: F, u0: &Vector, span: f64, abs_tol: f64) -> Result<Vector>
where
    F: FnMut(&Vector) -> Result<Vector>,
{
    if span == 0.0 {
        return Ok(u0.clone());
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
    // error coefficients: b - b*
    const E1: f64 = 71.0 / 57600.0;
    const E3: f64 = -71.0 / 16695.0;
    const E4: f64 = 71.0 / 1920.0;
    const E5: f64 = -17253.0 / 339200.0;
    const E6: f64 = 22.0 / 525.0;
    const E7: f64 = -1.0 / 40.0;

    let dir = span.signum();
    let total = span.abs();
    let mut s = 0.0;
    let mut u = u0.clone();
    let mut h = total.min(0.05);
    let mut k1 = rhs(&u)?;
    let mut steps = 0usize;
    while s < total {
        steps += 1;
        if steps > 100_000 {
            return Err(Error::CurveIntegrationFailure("step budget exhausted".into()));
        }
        if s + h > total {
            h = total - s;
        }
        let hs = h * dir;
        let k2 = rhs(&(&u + &k1 * (hs * A21)))?;
        let k3 = rhs(&(&u + &k1 * (hs * A31) + &k2 * (hs * A32)))?;
        let k4 = rhs(&(&u + &k1 * (hs * A41) + &k2 * (hs * A42) + &k3 * (hs * A43)))?;
        let k5 = rhs(&(&u + &k1 * (hs * A51) + &k2 * (hs * A52) + &k3 * (hs * A53) + &k4 * (hs * A54)))?;
        let k6 = rhs(
            &(&u + &k1 * (hs * A61)
                + &k2 * (hs * A62)
                + &k3 * (hs * A63)
                + &k4 * (hs * A64)
                + &k5 * (hs * A65)),
        )?;
        let next = &u + (&k1 * B1 + &k3 * B3 + &k4 * B4 + &k5 * B5 + &k6 * B6) * hs;
        let k7 = rhs(&next)?;
        let err_vec = (&k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * hs;
        let err = err_vec.amax();
        if !err.is_finite() {
            return Err(Error::CurveIntegrationFailure("non-finite error estimate".into()));
        }
        if err <= abs_tol {
            s += h;
            u = next;
            k1 = k7;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (abs_tol / err).powf(0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < 1e-14 * total.max(1e-300) {
            return Err(Error::CurveIntegrationFailure("step size underflow".into()));
        }
    }
    Ok(u)
}
