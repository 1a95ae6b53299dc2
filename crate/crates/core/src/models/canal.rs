use super::{AdmissibleBox, Coupling, Eigen, FieldKind, FluxModel, EIGEN_GAP_TOL};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};

/// Shallow water in a canal of varying width and bed. State `u = (a, q)`
/// (wetted area, discharge); coefficient `z = (1/width, bed height)`.
///
/// `f(z, u) = (q, q²/a + ½ g z₁ a²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanalModel {
    pub g: f64,
    /// Vacuum exclusion: states with `a <= a_min` are rejected.
    pub a_min: f64,
    state_box: AdmissibleBox,
    zeta_box: AdmissibleBox,
    lambda_hat: f64,
}

impl CanalModel {
    pub const DEFAULT_A_MIN: f64 = 1e-6;

    /// Canal model with the default admissible boxes
    /// `a ∈ [0.5, 2]`, `q ∈ [-0.5, 0.5]`, `z₁ ∈ [0.5, 2]`, `z₂ ∈ [-1, 1]`.
    pub fn new(g: f64) -> Self {
        Self::with_boxes(
            g,
            Self::DEFAULT_A_MIN,
            AdmissibleBox::new(vec![0.5, -0.5], vec![2.0, 0.5]),
            AdmissibleBox::new(vec![0.5, -1.0], vec![2.0, 1.0]),
            None,
        )
    }

    /// `lambda_hat = None` derives the speed bound from the boxes.
    pub fn with_boxes(
        g: f64,
        a_min: f64,
        state_box: AdmissibleBox,
        zeta_box: AdmissibleBox,
        lambda_hat: Option<f64>,
    ) -> Self {
        let lambda_hat = lambda_hat.unwrap_or_else(|| {
            let a_lo = state_box.lower[0].max(a_min);
            let a_hi = state_box.upper[0];
            let q_max = state_box.lower[1].abs().max(state_box.upper[1].abs());
            let z1_hi = zeta_box.upper[0];
            1.01 * (q_max / a_lo + (g * z1_hi * a_hi).sqrt())
        });
        Self {
            g,
            a_min,
            state_box,
            zeta_box,
            lambda_hat,
        }
    }

    fn sound_speed(&self, z: &Vector, a: f64) -> f64 {
        (self.g * z[0] * a).sqrt()
    }
}

impl FluxModel for CanalModel {
    fn name(&self) -> &str {
        "canal"
    }
    fn n(&self) -> usize {
        2
    }
    fn p(&self) -> usize {
        2
    }
    fn i_o(&self) -> usize {
        1
    }
    fn lambda_hat(&self) -> f64 {
        self.lambda_hat
    }
    fn field_kind(&self, _i: usize) -> FieldKind {
        FieldKind::GenuinelyNonlinear
    }
    fn state_box(&self) -> &AdmissibleBox {
        &self.state_box
    }
    fn zeta_box(&self) -> &AdmissibleBox {
        &self.zeta_box
    }

    fn check(&self, z: &Vector, u: &Vector) -> Result<()> {
        if u.len() != 2 || !(u[0] > self.a_min) {
            return Err(Error::OutOfDomain(format!("wetted area {:?} below a_min", u.as_slice())));
        }
        if z.len() != 2 || !(z[0] > 0.0) {
            return Err(Error::OutOfDomain(format!("inverse width {:?} not positive", z.as_slice())));
        }
        if !self.zeta_box.contains(z) {
            return Err(Error::OutOfDomain(format!("coefficient {:?}", z.as_slice())));
        }
        if !self.state_box.contains(u) {
            return Err(Error::OutOfDomain(format!("state {:?}", u.as_slice())));
        }
        Ok(())
    }

    fn flux(&self, z: &Vector, u: &Vector) -> Result<Vector> {
        self.check(z, u)?;
        let (a, q) = (u[0], u[1]);
        Ok(Vector::from_vec(vec![q, q * q / a + 0.5 * self.g * z[0] * a * a]))
    }

    fn jacobian_u(&self, z: &Vector, u: &Vector) -> Result<Matrix> {
        self.check(z, u)?;
        let (a, q) = (u[0], u[1]);
        Ok(Matrix::from_row_slice(
            2,
            2,
            &[0.0, 1.0, -q * q / (a * a) + self.g * z[0] * a, 2.0 * q / a],
        ))
    }

    fn jacobian_z(&self, z: &Vector, u: &Vector) -> Result<Matrix> {
        self.check(z, u)?;
        let a = u[0];
        Ok(Matrix::from_row_slice(2, 2, &[0.0, 0.0, 0.5 * self.g * a * a, 0.0]))
    }

    fn eigen(&self, z: &Vector, u: &Vector) -> Result<Eigen> {
        self.check(z, u)?;
        let (a, q) = (u[0], u[1]);
        let c = self.sound_speed(z, a);
        let v = q / a;
        let (l1, l2) = (v - c, v + c);
        if l2 - l1 < EIGEN_GAP_TOL {
            return Err(Error::NotStrictlyHyperbolic { gap: l2 - l1 });
        }
        // ∇λ₁·(1, λ₁) = -3c/(2a), ∇λ₂·(1, λ₂) = 3c/(2a)
        let s1 = -2.0 * a / (3.0 * c);
        let s2 = 2.0 * a / (3.0 * c);
        let right = Matrix::from_row_slice(2, 2, &[s1, s2, s1 * l1, s2 * l2]);
        let left = Matrix::from_row_slice(
            2,
            2,
            &[
                l2 / (s1 * 2.0 * c),
                -1.0 / (s1 * 2.0 * c),
                -l1 / (s2 * 2.0 * c),
                1.0 / (s2 * 2.0 * c),
            ],
        );
        Ok(Eigen {
            values: vec![l1, l2],
            right,
            left,
        })
    }

    fn conserved_component(&self) -> Option<usize> {
        Some(0)
    }
}

/// `Ξ(z⁺, z⁻, u⁻) = G(z⁺, u⁻) − G(z⁻, u⁻)` with
/// `G(z, (a, q)) = (0, −½ g a² z₁ − g a z₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanalCoupling {
    pub g: f64,
}

impl CanalCoupling {
    fn source_potential(&self, z: &Vector, u: &Vector) -> f64 {
        let a = u[0];
        -0.5 * self.g * a * a * z[0] - self.g * a * z[1]
    }
}

impl Coupling for CanalCoupling {
    fn xi(&self, z_plus: &Vector, z_minus: &Vector, u_minus: &Vector) -> Result<Vector> {
        let second = self.source_potential(z_plus, u_minus) - self.source_potential(z_minus, u_minus);
        Ok(Vector::from_vec(vec![0.0, second]))
    }

    fn dini(&self, _z: &Vector, v: &Vector, u: &Vector) -> Result<Vector> {
        let a = u[0];
        Ok(Vector::from_vec(vec![0.0, -0.5 * self.g * a * a * v[0] - self.g * a * v[1]]))
    }
}
