//! Elementary wave curves through a state: integral curves of `r_i`,
//! Hugoniot loci and the Lax curves that glue them.
//!
//! Both curves share one parametrisation. The rarefaction parameter is the
//! arclength-like variable with `∇λ_i · r_i = 1`; a Hugoniot point with
//! parameter `q` is the point of the locus whose coordinate `l_i(u)·(w − u)`
//! equals that of the integral curve up to second order,
//! `q + ½ c q²` with `c = l_i · (Dr_i r_i)`. The two curves then agree to
//! third order at `u`.

use super::{FieldKind, FluxModel};
use crate::error::{Error, Result};
use crate::numerics::newton::{newton, NewtonOptions};
use crate::numerics::ode::integrate;
use crate::numerics::{Matrix, Vector};

/// Absolute tolerance of the adaptive integration of `du/ds = r_i(z, u)`.
pub const RAREFACTION_TOL: f64 = 1e-12;
/// Residual tolerance for Hugoniot Newton solves.
pub const HUGONIOT_TOL: f64 = 1e-11;

/// Follows the `i`-th integral curve from `u` for parameter `s`.
pub fn rarefaction_curve(model: &dyn FluxModel, z: &Vector, i: usize, s: f64, u: &Vector) -> Result<Vector> {
    if s == 0.0 {
        return Ok(u.clone());
    }
    integrate(|w| Ok(model.eigen(z, w)?.r(i)), u, s, RAREFACTION_TOL).map_err(|e| match e {
        Error::CurveIntegrationFailure(_) | Error::OutOfDomain(_) => e,
        other => Error::CurveIntegrationFailure(other.to_string()),
    })
}

/// A point on the Rankine–Hugoniot locus together with its shock speed.
#[derive(Debug, Clone)]
pub struct HugoniotPoint {
    pub state: Vector,
    pub speed: f64,
}

/// `l_i · (Dr_i r_i)` at `u`, by central differences along `r_i`.
fn curvature_coefficient(model: &dyn FluxModel, z: &Vector, i: usize, u: &Vector) -> Result<f64> {
    let eig = model.eigen(z, u)?;
    let r = eig.r(i);
    let h = 1e-4 / r.norm().max(1e-300);
    let rp = model.eigen(z, &(u + &r * h))?.r(i);
    let rm = model.eigen(z, &(u - &r * h))?.r(i);
    let dr = (rp - rm) / (2.0 * h);
    Ok(eig.l(i).dot(&dr))
}

/// Hugoniot locus of family `i` through `u`, admissibility not enforced.
pub fn hugoniot(model: &dyn FluxModel, z: &Vector, i: usize, q: f64, u: &Vector) -> Result<HugoniotPoint> {
    let eig = model.eigen(z, u)?;
    if q == 0.0 {
        return Ok(HugoniotPoint {
            state: u.clone(),
            speed: eig.values[i],
        });
    }
    if model.field_kind(i) == FieldKind::LinearlyDegenerate {
        // contact discontinuities travel along the integral curve
        let state = rarefaction_curve(model, z, i, q, u)?;
        return Ok(HugoniotPoint {
            state,
            speed: eig.values[i],
        });
    }
    let n = model.n();
    let r = eig.r(i);
    let l = eig.l(i);
    let c = curvature_coefficient(model, z, i, u)?;
    let target = q + 0.5 * c * q * q;
    let f_u = model.flux(z, u)?;

    // second-order guess along the integral curve
    let h = 1e-4 / r.norm().max(1e-300);
    let dr = (model.eigen(z, &(u + &r * h))?.r(i) - model.eigen(z, &(u - &r * h))?.r(i)) / (2.0 * h);
    let w0 = u + &r * q + dr * (0.5 * q * q);
    let mut x0 = Vector::zeros(n + 1);
    x0.rows_mut(0, n).copy_from(&w0);
    x0[n] = eig.values[i] + 0.5 * q;

    let residual = |x: &Vector| -> Result<(Vector, Matrix)> {
        let w = x.rows(0, n).into_owned();
        let s = x[n];
        let dw = &w - u;
        let fw = model.flux(z, &w)?;
        let mut res = Vector::zeros(n + 1);
        res.rows_mut(0, n).copy_from(&(&fw - &f_u - &dw * s));
        res[n] = l.dot(&dw) - target;
        let mut jac = Matrix::zeros(n + 1, n + 1);
        let mut block = model.jacobian_u(z, &w)?;
        for k in 0..n {
            block[(k, k)] -= s;
        }
        jac.view_mut((0, 0), (n, n)).copy_from(&block);
        jac.view_mut((0, n), (n, 1)).copy_from(&(-&dw));
        jac.view_mut((n, 0), (1, n)).copy_from(&l.transpose());
        Ok((res, jac))
    };
    let opts = NewtonOptions {
        tol: HUGONIOT_TOL,
        max_iter: 30,
        ..NewtonOptions::default()
    };
    let x = newton(residual, x0, opts, "hugoniot locus")
        .map_err(|e| Error::CurveIntegrationFailure(e.to_string()))?;
    Ok(HugoniotPoint {
        state: x.rows(0, n).into_owned(),
        speed: x[n],
    })
}

/// `S_i(z, q)(u)`: the Hugoniot locus parametrised consistently with the
/// rarefaction curve.
pub fn shock_curve(model: &dyn FluxModel, z: &Vector, i: usize, q: f64, u: &Vector) -> Result<Vector> {
    Ok(hugoniot(model, z, i, q, u)?.state)
}

/// `H_i(z, σ)(u)`: rarefaction branch for `σ > 0`, admissible shocks for
/// `σ < 0` on genuinely nonlinear fields; the contact curve otherwise.
pub fn lax_curve(model: &dyn FluxModel, z: &Vector, i: usize, sigma: f64, u: &Vector) -> Result<Vector> {
    match model.field_kind(i) {
        FieldKind::GenuinelyNonlinear if sigma < 0.0 => shock_curve(model, z, i, sigma, u),
        _ => rarefaction_curve(model, z, i, sigma, u),
    }
}

const TINY_JUMP: f64 = 1e-7;

/// Rankine–Hugoniot speed between two states joined by a single `i`-shock
/// (least-squares fit of `Δf = s Δu`); the characteristic speed when the
/// states coincide.

pub fn shock_speed(model: &dyn FluxModel, z: &Vector, i: usize, left: &Vector, right: &Vector) -> Result<f64> {
    let du = right - left;
    let norm2 = du.norm_squared();
    if norm2 < 1e-300 {
        return Ok(model.eigen(z, left)?.values[i]);
    }
    // For tiny jumps the quotient is dominated by solver residuals across
    // families; the mean eigenvalue agrees with it to O(|du|²).
    if norm2.sqrt() < TINY_JUMP * (1.0 + left.norm()) {
        return Ok(0.5 * (model.eigen(z, left)?.values[i] + model.eigen(z, right)?.values[i]));
    }
    let df = model.flux(z, right)? - model.flux(z, left)?;
    Ok(du.dot(&df) / norm2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{vector, CanalModel, LinearSystemModel};

    #[test]
    fn zero_parameter_is_identity() {
        let m = CanalModel::new(9.81);
        let z = vector(&[1.0, 0.0]);
        let u = vector(&[1.0, 0.1]);
        for i in 0..2 {
            assert_eq!(lax_curve(&m, &z, i, 0.0, &u).unwrap(), u);
            assert_eq!(shock_curve(&m, &z, i, 0.0, &u).unwrap(), u);
        }
    }

    #[test]
    fn linear_curves_are_straight() {
        let m = LinearSystemModel::default_2x2();
        let z = vector(&[0.0]);
        let u = vector(&[0.3, -0.2]);
        let eig = m.eigen(&z, &u).unwrap();
        for i in 0..2 {
            let w = lax_curve(&m, &z, i, -0.7, &u).unwrap();
            assert!((w - (&u + eig.r(i) * -0.7)).amax() < 1e-13);
        }
    }

    #[test]
    fn rarefaction_raises_eigenvalue_by_parameter() {
        let m = CanalModel::new(9.81);
        let z = vector(&[1.0, 0.0]);
        let u = vector(&[1.0, 0.0]);
        for i in 0..2 {
            let w = rarefaction_curve(&m, &z, i, 0.05, &u).unwrap();
            let dl = m.eigen(&z, &w).unwrap().values[i] - m.eigen(&z, &u).unwrap().values[i];
            assert!((dl - 0.05).abs() < 1e-10, "family {i}: {dl}");
        }
    }

    #[test]
    fn hugoniot_speed_matches_least_squares() {
        let m = CanalModel::new(9.81);
        let z = vector(&[1.0, 0.0]);
        let u = vector(&[1.0, 0.1]);
        let hp = hugoniot(&m, &z, 1, -0.1, &u).unwrap();
        let s = shock_speed(&m, &z, 1, &u, &hp.state).unwrap();
        assert!((s - hp.speed).abs() < 1e-9);
    }
}
