use super::linalg::solve;
use super::{Matrix, Vector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Convergence threshold on the max-norm of the residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative step for central-difference Jacobians.
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iter: 40,
            fd_step: 1e-6,
        }
    }
}

/// Central-difference Jacobian of `f` at `x`.
pub fn fd_jacobian<F>(f: &mut F, x: &Vector, rel_step: f64) -> Result<Matrix>
where
    F: FnMut(&Vector) -> Result<Vector>,
{
    let n = x.len();
    let mut jac: Option<Matrix> = None;
    let mut xp = x.clone();
    for j in 0..n {
        let h = rel_step * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        let fp = f(&xp)?;
        xp[j] = x[j] - h;
        let fm = f(&xp)?;
        xp[j] = x[j];
        let col = (fp - fm) / (2.0 * h);
        let m = jac.get_or_insert_with(|| Matrix::zeros(col.len(), n));
        m.set_column(j, &col);
    }
    Ok(jac.unwrap_or_else(|| Matrix::zeros(0, 0)))
}

/// Damped Newton iteration where the caller supplies both the residual and
/// its Jacobian.
pub fn newton<F>(mut f: F, x0: Vector, opts: NewtonOptions, what: &'static str) -> Result<Vector>
where
    F: FnMut(&Vector) -> Result<(Vector, Matrix)>,
{
    let mut x = x0;
    let (mut r, mut jac) = f(&x)?;
    let mut res = r.amax();
    for _ in 0..opts.max_iter {
        if res <= opts.tol {
            return Ok(x);
        }
        let dx = solve(&jac, &(-&r))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let trial = &x + &dx * lambda;
            if let Ok((rt, jt)) = f(&trial) {
                let rt_norm = rt.amax();
                if rt_norm.is_finite() && (rt_norm < res || rt_norm <= opts.tol) {
                    x = trial;
                    r = rt;
                    jac = jt;
                    res = rt_norm;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res <= opts.tol {
        Ok(x)
    } else {
        Err(Error::NoConvergence { what, residual: res })
    }
}

/// Damped Newton iteration with a central-difference Jacobian.
pub fn newton_fd<F>(mut f: F, x0: Vector, opts: NewtonOptions, what: &'static str) -> Result<Vector>
where
    F: FnMut(&Vector) -> Result<Vector>,
{
    let mut x = x0;
    let mut r = f(&x)?;
    let mut res = r.amax();
    for _ in 0..opts.max_iter {
        if res <= opts.tol {
            return Ok(x);
        }
        let jac = fd_jacobian(&mut f, &x, opts.fd_step)?;
        let dx = solve(&jac, &(-&r))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let trial = &x + &dx * lambda;
            if let Ok(rt) = f(&trial) {
                let rt_norm = rt.amax();
                if rt_norm.is_finite() && (rt_norm < res || rt_norm <= opts.tol) {
                    x = trial;
                    r = rt;
                    res = rt_norm;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res <= opts.tol {
        Ok(x)
    } else {
        Err(Error::NoConvergence { what, residual: res })
    }
}
