use super::{AdmissibleBox, Coupling, Eigen, FieldKind, FluxModel, EIGEN_GAP_TOL};
use crate::error::{Error, Result};
use crate::numerics::linalg::dense_eigen;
use crate::numerics::{Matrix, Vector};

/// `f(z, u) = A u + B z` with constant, strictly hyperbolic `A`. Every field
/// is linearly degenerate, so all wave curves are straight lines and the
/// solvers can be checked against closed forms.
#[derive(Debug, Clone)]
pub struct LinearSystemModel {
    a: Matrix,
    b: Matrix,
    eigen: Eigen,
    i_o: usize,
    lambda_hat: f64,
    state_box: AdmissibleBox,
    zeta_box: AdmissibleBox,
}

impl LinearSystemModel {
    pub fn new(a: Matrix, b: Matrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.nrows() != n {
            return Err(Error::Config("linear model: inconsistent matrix shapes".into()));
        }
        let (values, right, left) = dense_eigen(&a, EIGEN_GAP_TOL)?;
        let i_o = values.iter().filter(|l| **l < 0.0).count();
        if values.iter().any(|l| *l == 0.0) || i_o == 0 || i_o == n {
            return Err(Error::ResonanceGuard {
                speed: values.iter().copied().fold(f64::INFINITY, |m, l| m.min(l.abs())),
            });
        }
        let lambda_hat = 1.01 * values.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let p = b.ncols();
        Ok(Self {
            a,
            b,
            eigen: Eigen { values, right, left },
            i_o,
            lambda_hat,
            state_box: AdmissibleBox::unbounded(n),
            zeta_box: AdmissibleBox::unbounded(p),
        })
    }

    /// The 2×2 default: `A = [[1, 2], [2, 1]]` (speeds −1 and 3), `B = (0, 1)ᵀ`.
    pub fn default_2x2() -> Self {
        Self::new(
            Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]),
            Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
        )
        .expect("default linear system is hyperbolic")
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn coefficient_matrix(&self) -> &Matrix {
        &self.b
    }
}

impl FluxModel for LinearSystemModel {
    fn name(&self) -> &str {
        "linear"
    }
    fn n(&self) -> usize {
        self.a.nrows()
    }
    fn p(&self) -> usize {
        self.b.ncols()
    }
    fn i_o(&self) -> usize {
        self.i_o
    }
    fn lambda_hat(&self) -> f64 {
        self.lambda_hat
    }
    fn field_kind(&self, _i: usize) -> FieldKind {
        FieldKind::LinearlyDegenerate
    }
    fn state_box(&self) -> &AdmissibleBox {
        &self.state_box
    }
    fn zeta_box(&self) -> &AdmissibleBox {
        &self.zeta_box
    }

    fn flux(&self, z: &Vector, u: &Vector) -> Result<Vector> {
        self.check(z, u)?;
        Ok(&self.a * u + &self.b * z)
    }

    fn jacobian_u(&self, _z: &Vector, _u: &Vector) -> Result<Matrix> {
        Ok(self.a.clone())
    }

    fn jacobian_z(&self, _z: &Vector, _u: &Vector) -> Result<Matrix> {
        Ok(self.b.clone())
    }

    fn eigen(&self, z: &Vector, u: &Vector) -> Result<Eigen> {
        self.check(z, u)?;
        Ok(self.eigen.clone())
    }
}

/// `Ξ(z⁺, z⁻, u) = K (z⁺ − z⁻)`.
#[derive(Debug, Clone)]
pub struct LinearCoupling {
    pub k: Matrix,
}

impl LinearCoupling {
    pub fn default_2x2() -> Self {
        Self {
            k: Matrix::from_row_slice(2, 1, &[0.0, 0.5]),
        }
    }
}

impl Coupling for LinearCoupling {
    fn xi(&self, z_plus: &Vector, z_minus: &Vector, _u: &Vector) -> Result<Vector> {
        Ok(&self.k * (z_plus - z_minus))
    }

    fn dini(&self, _z: &Vector, v: &Vector, _u: &Vector) -> Result<Vector> {
        Ok(&self.k * v)
    }
}
