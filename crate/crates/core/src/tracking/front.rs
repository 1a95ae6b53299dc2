use std::cell::OnceCell;

use crate::numerics::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrontKind {
    Shock,
    Rarefaction,
    Contact,
    NonPhysical,
    ZeroWave,
}

impl FrontKind {
    pub fn is_physical(self) -> bool {
        matches!(self, FrontKind::Shock | FrontKind::Rarefaction | FrontKind::Contact)
    }

    pub fn label(self) -> &'static str {
        match self {
            FrontKind::Shock => "shock",
            FrontKind::Rarefaction => "rarefaction",
            FrontKind::Contact => "contact",
            FrontKind::NonPhysical => "nonphysical",
            FrontKind::ZeroWave => "zero",
        }
    }
}

/// One discontinuity line `x(t) = x_ref + speed (t − t_ref)`.
///
/// `sigma` is the signed wave size for physical fronts, `‖u⁺ − u⁻‖` for
/// non-physical fronts and `‖z⁺ − z⁻‖` for zero-waves. Physical and
/// non-physical fronts see a single coefficient value (`z_left == z_right`).
#[derive(Debug, Clone)]
pub struct Front {
    pub id: u64,
    pub kind: FrontKind,
    pub family: Option<usize>,
    pub sigma: f64,
    pub x_ref: f64,
    pub t_ref: f64,
    pub speed: f64,
    pub left: Vector,
    pub right: Vector,
    pub z_left: Vector,
    pub z_right: Vector,
    /// Wave-size vector used by the Glimm functionals, filled on demand.
    pub(crate) strengths: OnceCell<Vector>,
}

impl Front {
    pub fn position(&self, t: f64) -> f64 {
        if self.speed == 0.0 {
            self.x_ref
        } else {
            self.x_ref + self.speed * (t - self.t_ref)
        }
    }

    pub fn jump_norm(&self) -> f64 {
        (&self.right - &self.left).norm()
    }
}
