//! Flux models `f(z, u)` with their characteristic structure, the coupling
//! map `Ξ(z⁺, z⁻, u⁻)` prescribing the flux defect at coefficient jumps, and
//! the elementary wave curves built on top of them.

mod canal;
pub mod curves;
mod linear;

use std::fmt::Debug;
use std::sync::Arc;

pub use canal::{CanalCoupling, CanalModel};
pub use curves::{lax_curve, rarefaction_curve, shock_curve, shock_speed, HugoniotPoint};
pub use linear::{LinearCoupling, LinearSystemModel};

use crate::error::{Error, Result};
use crate::numerics::linalg::dense_eigen;
use crate::numerics::newton::fd_jacobian;
use crate::numerics::{Matrix, Vector};

/// Relative eigenvalue gap below which a Jacobian is rejected as not strictly
/// hyperbolic.
pub const EIGEN_GAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    GenuinelyNonlinear,
    LinearlyDegenerate,
}

/// Axis-aligned admissible region.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl AdmissibleBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        Self { lower, upper }
    }

    pub fn unbounded(dim: usize) -> Self {
        Self::new(vec![f64::NEG_INFINITY; dim], vec![f64::INFINITY; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, v: &Vector) -> bool {
        v.len() == self.dim()
            && v
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| x.is_finite() && *x >= *lo && *x <= *hi)
    }
}

/// Eigenvalues in increasing order with right eigenvectors (columns of
/// `right`) and dual left eigenvectors (rows of `left`).
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub right: Matrix,
    pub left: Matrix,
}

impl Eigen {
    pub fn r(&self, i: usize) -> Vector {
        self.right.column(i).into_owned()
    }

    pub fn l(&self, i: usize) -> Vector {
        self.left.row(i).transpose()
    }
}

/// A strictly hyperbolic flux `u ↦ f(z, u)` parametrised by a coefficient
/// `z`. Family indices are zero-based; families `0..i_o()` travel left and
/// `i_o()..n()` travel right.
pub trait FluxModel: Send + Sync + Debug {
    fn name(&self) -> &str;
    fn n(&self) -> usize;
    fn p(&self) -> usize;
    /// Number of families with negative speed.
    fn i_o(&self) -> usize;
    /// Strict upper bound on all characteristic speeds over the boxes.
    fn lambda_hat(&self) -> f64;
    fn field_kind(&self, i: usize) -> FieldKind;
    fn state_box(&self) -> &AdmissibleBox;
    fn zeta_box(&self) -> &AdmissibleBox;

    fn check(&self, z: &Vector, u: &Vector) -> Result<()> {
        if !self.zeta_box().contains(z) {
            return Err(Error::OutOfDomain(format!("coefficient {:?}", z.as_slice())));
        }
        if !self.state_box().contains(u) {
            return Err(Error::OutOfDomain(format!("state {:?}", u.as_slice())));
        }
        Ok(())
    }

    fn flux(&self, z: &Vector, u: &Vector) -> Result<Vector>;

    fn jacobian_u(&self, z: &Vector, u: &Vector) -> Result<Matrix> {
        let mut f = |v: &Vector| self.flux(z, v);
        fd_jacobian(&mut f, u, 1e-6)
    }

    fn jacobian_z(&self, z: &Vector, u: &Vector) -> Result<Matrix> {
        let mut f = |w: &Vector| self.flux(w, u);
        fd_jacobian(&mut f, z, 1e-6)
    }

    /// Characteristic structure at `(z, u)`. Genuinely nonlinear right
    /// eigenvectors are scaled so that `∇λ_i · r_i = 1`; linearly
    /// degenerate ones have unit length.
    fn eigen(&self, z: &Vector, u: &Vector) -> Result<Eigen> {
        generic_eigen(self, z, u)
    }

    /// Index of a component that is conserved across every wave, if any.
    /// Rarefaction fronts then move at the speed that conserves it exactly.
    fn conserved_component(&self) -> Option<usize> {
        None
    }
}

/// Dense-solver route to the characteristic structure, used by models that do
/// not provide a closed form.
pub fn generic_eigen<M: FluxModel + ?Sized>(model: &M, z: &Vector, u: &Vector) -> Result<Eigen> {
    model.check(z, u)?;
    let jac = model.jacobian_u(z, u)?;
    let (values, mut right, mut left) = dense_eigen(&jac, EIGEN_GAP_TOL)?;
    for i in 0..model.n() {
        if model.field_kind(i) != FieldKind::GenuinelyNonlinear {
            continue;
        }
        let r = right.column(i).into_owned();
        let h = 1e-5;
        let lam = |v: &Vector| -> Result<f64> {
            let j = model.jacobian_u(z, v)?;
            Ok(dense_eigen(&j, EIGEN_GAP_TOL)?.0[i])
        };
        let d = (lam(&(u + &r * h))? - lam(&(u - &r * h))?) / (2.0 * h);
        if d.abs() < 1e-10 {
            return Err(Error::OutOfDomain(format!(
                "family {i} is not genuinely nonlinear at {:?}",
                u.as_slice()
            )));
        }
        right.set_column(i, &(r / d));
        let l = left.row(i).into_owned() * d;
        left.set_row(i, &l);
    }
    Ok(Eigen { values, right, left })
}

/// Prescribed flux defect at a coefficient jump.
pub trait Coupling: Send + Sync + Debug {
    fn xi(&self, z_plus: &Vector, z_minus: &Vector, u_minus: &Vector) -> Result<Vector>;

    /// One-sided directional derivative `lim_{t→0+} Ξ(z + t v, z, u) / t`.
    fn dini(&self, z: &Vector, v: &Vector, u: &Vector) -> Result<Vector> {
        let t = 1e-7;
        let base = self.xi(z, z, u)?;
        Ok((self.xi(&(z + v * t), z, u)? - base) / t)
    }
}

/// A flux model paired with its coupling.
#[derive(Debug, Clone)]
pub struct BalanceLaw {
    pub flux: Arc<dyn FluxModel>,
    pub coupling: Arc<dyn Coupling>,
}

impl BalanceLaw {
    pub fn new(flux: Arc<dyn FluxModel>, coupling: Arc<dyn Coupling>) -> Self {
        Self { flux, coupling }
    }

    pub fn canal(model: CanalModel) -> Self {
        let coupling = CanalCoupling { g: model.g };
        Self::new(Arc::new(model), Arc::new(coupling))
    }

    pub fn linear(model: LinearSystemModel, coupling: LinearCoupling) -> Self {
        Self::new(Arc::new(model), Arc::new(coupling))
    }

    pub fn model(&self) -> &dyn FluxModel {
        self.flux.as_ref()
    }
}

/// `f(z, u)`.
pub fn eval_flux(model: &dyn FluxModel, z: &Vector, u: &Vector) -> Result<Vector> {
    model.flux(z, u)
}

/// Characteristic structure at `(z, u)`.
pub fn eigen(model: &dyn FluxModel, z: &Vector, u: &Vector) -> Result<Eigen> {
    model.eigen(z, u)
}

pub fn xi_eval(coupling: &dyn Coupling, z_plus: &Vector, z_minus: &Vector, u_minus: &Vector) -> Result<Vector> {
    coupling.xi(z_plus, z_minus, u_minus)
}

pub fn xi_dini(coupling: &dyn Coupling, z: &Vector, v: &Vector, u: &Vector) -> Result<Vector> {
    if v.norm() > 1.0 + 1e-12 {
        return Err(Error::OutOfDomain(format!("direction norm {} exceeds 1", v.norm())));
    }
    coupling.dini(z, v, u)
}

/// Checks the non-resonance split `λ_{i_o} < 0 < λ_{i_o+1}`.
pub fn check_non_resonant(model: &dyn FluxModel, eig: &Eigen) -> Result<()> {
    let io = model.i_o();
    let lam_hat = model.lambda_hat();
    if io > 0 && eig.values[io - 1] >= 0.0 {
        return Err(Error::ResonanceGuard { speed: eig.values[io - 1] });
    }
    if io < model.n() && eig.values[io] <= 0.0 {
        return Err(Error::ResonanceGuard { speed: eig.values[io] });
    }
    if eig.values.iter().any(|l| l.abs() >= lam_hat) {
        return Err(Error::OutOfDomain(format!(
            "characteristic speed exceeds lambda_hat = {lam_hat}"
        )));
    }
    Ok(())
}

pub fn vector(values: &[f64]) -> Vector {
    Vector::from_column_slice(values)
}
