//! Local comparison solutions at a point `(τ, ξ)` of a trajectory: the
//! generalized Riemann fan `U♯` and the frozen-coefficient linear solution
//! `U♭`, with the integral errors against the trajectory at `τ + θ`.

use crate::coefficient::{BVCoefficient, PiecewiseConstField};
use crate::error::Result;
use crate::models::BalanceLaw;
use crate::numerics::quad::adaptive_simpson;
use crate::numerics::{Matrix, Vector};
use crate::riemann::{sample_fan, solve_generalized, WaveFan, WaveType};

/// Quadrature tolerance inside rarefactions and on density pieces.
pub const LOCAL_QUAD_TOL: f64 = 1e-10;

/// A coefficient seen by the local solutions: the piecewise constant
/// approximation used by a run, or the BV coefficient itself.
#[derive(Debug, Clone, Copy)]
pub enum CoefficientRef<'a> {
    Field(&'a PiecewiseConstField),
    Bv(&'a BVCoefficient),
}

impl CoefficientRef<'_> {
    pub fn value(&self, x: f64) -> Vector {
        match self {
            Self::Field(f) => f.value(x).clone(),
            Self::Bv(b) => b.value(x),
        }
    }

    pub fn value_right(&self, x: f64) -> Vector {
        match self {
            Self::Field(f) => f.value_right(x).clone(),
            Self::Bv(b) => b.value_right(x),
        }
    }

    pub fn tv_open(&self, a: f64, b: f64) -> f64 {
        match self {
            Self::Field(f) => f.tv_open(a, b),
            Self::Bv(c) => c.tv_open(a, b),
        }
    }

    fn jump_points(&self) -> Vec<f64> {
        match self {
            Self::Field(f) => f.breaks().to_vec(),
            Self::Bv(b) => b.jumps().iter().map(|j| j.0).collect(),
        }
    }
}

fn l1(v: &Vector) -> f64 {
    v.lp_norm(1)
}

/// `U♯`: the generalized Riemann problem at `ξ` with the traces of `u` and of
/// the coefficient. Away from coefficient jumps this is the classical fan.
pub fn u_sharp(law: &BalanceLaw, zeta: CoefficientRef<'_>, u: &PiecewiseConstField, xi: f64) -> Result<WaveFan> {
    solve_generalized(
        law.model(),
        law.coupling.as_ref(),
        &zeta.value(xi),
        &zeta.value_right(xi),
        u.value(xi),
        u.value_right(xi),
    )
}

/// `(1/θ) ∫_{ξ−λ̂θ}^{ξ+λ̂θ} ‖u(τ+θ) − U♯((x−ξ)/θ)‖₁ dx`.
pub fn sharp_error(law: &BalanceLaw, fan: &WaveFan, later: &PiecewiseConstField, xi: f64, theta: f64) -> f64 {
    let model = law.model();
    let lh = model.lambda_hat();
    let (a, b) = (xi - lh * theta, xi + lh * theta);
    let mut cuts: Vec<f64> = later.breaks().iter().copied().collect();
    cuts.push(xi);
    for w in &fan.waves {
        cuts.push(xi + w.speed.0 * theta);
        cuts.push(xi + w.speed.1 * theta);
    }
    cuts.retain(|x| *x > a && *x < b);
    cuts.extend([a, b]);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut err = 0.0;
    for w in cuts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let s = (0.5 * (x0 + x1) - xi) / theta;
        let in_fan = fan
            .waves
            .iter()
            .any(|wv| wv.kind == WaveType::Rarefaction && s > wv.speed.0 && s < wv.speed.1);
        let u = later.value(0.5 * (x0 + x1));
        err += if in_fan {
            adaptive_simpson(|x| l1(&(u - sample_fan(model, fan, (x - xi) / theta))), x0, x1, LOCAL_QUAD_TOL * theta)
        } else {
            l1(&(u - sample_fan(model, fan, s))) * (x1 - x0)
        };
    }
    err / theta
}

/// `L_θ u(τ)` for `w_t + A w_x = m`, `A = D_u f(z̄, ū)`, where `m` collects
/// the atoms `Ξ(ζ(x̄+), ζ(x̄), ū) − f(ζ(x̄+), ū) + f(ζ(x̄), ū)` at coefficient
/// jumps and, for a BV coefficient, the density
/// `D⁺_w Ξ(ζ, ζ, ū) − D_z f(ζ, ū) w`.
#[derive(Debug, Clone)]
pub struct FlatSolution {
    theta: f64,
    speeds: Vec<f64>,
    left: Matrix,
    right: Matrix,
    data: PiecewiseConstField,
    atoms: Vec<(f64, Vector)>,
    density: Option<(BalanceLaw, BVCoefficient, Vector)>,
}

impl FlatSolution {
    /// Builds the solution from explicit data: `atoms` are `(x̄, weight)`;
    /// `density` carries the law, the coefficient and the frozen state.
    pub fn from_parts(
        law: &BalanceLaw,
        z_bar: &Vector,
        u_bar: &Vector,
        theta: f64,
        data: PiecewiseConstField,
        atoms: Vec<(f64, Vector)>,
        density: Option<(BVCoefficient, Vector)>,
    ) -> Result<Self> {
        let eig = law.model().eigen(z_bar, u_bar)?;
        crate::models::check_non_resonant(law.model(), &eig)?;
        Ok(Self {
            theta,
            speeds: eig.values.iter().copied().collect(),
            left: eig.left,
            right: eig.right,
            data,
            atoms,
            density: density.map(|(bv, ub)| (law.clone(), bv, ub)),
        })
    }

    fn density_at(&self, x: f64) -> Option<Vector> {
        let (law, bv, ub) = self.density.as_ref()?;
        let w = bv.density_at(x);
        if w.amax() == 0.0 {
            return Some(w);
        }
        let z = bv.value(x);
        let model = law.model();
        let g = law.coupling.dini(&z, &w, ub).ok()? - model.jacobian_z(&z, ub).ok()? * &w;
        Some(g)
    }

    /// `m(]lo, hi])` projected on `l_i`.
    fn source_mass(&self, i: usize, lo: f64, hi: f64) -> f64 {
        let l = self.left.row(i).transpose();
        let mut s: f64 = self.atoms.iter().filter(|(x, _)| *x > lo && *x <= hi).map(|(_, k)| l.dot(k)).sum();
        if let Some((_, bv, _)) = &self.density {
            for seg in bv.density() {
                let (a, b) = (lo.max(seg.x0), hi.min(seg.x1));
                if a < b {
                    s += adaptive_simpson(
                        |x| self.density_at(x).map(|g| l.dot(&g)).unwrap_or(f64::NAN),
                        a,
                        b,
                        LOCAL_QUAD_TOL,
                    );
                }
            }
        }
        s
    }

    pub fn value(&self, x: f64) -> Vector {
        let mut out = Vector::zeros(self.speeds.len());
        for (i, &lam) in self.speeds.iter().enumerate() {
            let foot = x - lam * self.theta;
            let l = self.left.row(i).transpose();
            let (lo, hi) = if foot < x { (foot, x) } else { (x, foot) };
            let c = l.dot(self.data.value(foot)) + self.source_mass(i, lo, hi) / lam.abs();
            out += self.right.column(i) * c;
        }
        out
    }

    /// Points where the solution may jump or lose smoothness.
    pub fn breaks(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = Vec::new();
        let mut sources: Vec<f64> = self.atoms.iter().map(|a| a.0).collect();
        if let Some((_, bv, _)) = &self.density {
            sources.extend(bv.density().iter().flat_map(|s| [s.x0, s.x1]));
        }
        for &lam in &self.speeds {
            pts.extend(self.data.breaks().iter().map(|y| y + lam * self.theta));
            pts.extend(sources.iter().map(|y| y + lam * self.theta));
        }
        pts.extend(sources);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.density.as_ref().is_none_or(|(_, bv, _)| bv.density().is_empty())
    }
}

/// `U♭` at `(τ, ξ)` over time `θ`: coefficient frozen at `ζ(ξ)`, state
/// frozen at `u(τ, ξ)`.
pub fn u_flat(law: &BalanceLaw, zeta: CoefficientRef<'_>, u: &PiecewiseConstField, xi: f64, theta: f64) -> Result<FlatSolution> {
    let model = law.model();
    let z_bar = zeta.value(xi);
    let u_bar = u.value(xi).clone();
    let mut atoms = Vec::new();
    for x in zeta.jump_points() {
        let (zl, zr) = (zeta.value(x), zeta.value_right(x));
        let k = law.coupling.xi(&zr, &zl, &u_bar)? - model.flux(&zr, &u_bar)? + model.flux(&zl, &u_bar)?;
        atoms.push((x, k));
    }
    let density = match zeta {
        CoefficientRef::Bv(bv) if !bv.density().is_empty() => Some((bv.clone(), u_bar.clone())),
        _ => None,
    };
    FlatSolution::from_parts(law, &z_bar, &u_bar, theta, u.clone(), atoms, density)
}

/// `(1/θ) ∫_{a+λ̂θ}^{b−λ̂θ} ‖u(τ+θ) − U♭‖₁ dx`, zero when the interval is
/// empty.
pub fn flat_error(law: &BalanceLaw, flat: &FlatSolution, later: &PiecewiseConstField, a: f64, b: f64) -> f64 {
    let theta = flat.theta;
    let lh = law.model().lambda_hat();
    let (lo, hi) = (a + lh * theta, b - lh * theta);
    if !(lo < hi) {
        return 0.0;
    }
    let mut cuts: Vec<f64> = later.breaks().iter().copied().chain(flat.breaks()).filter(|x| *x > lo && *x < hi).collect();
    cuts.extend([lo, hi]);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let smooth = flat.is_piecewise_constant();
    let mut err = 0.0;
    for w in cuts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let u = later.value(0.5 * (x0 + x1));
        err += if smooth {
            l1(&(u - flat.value(0.5 * (x0 + x1)))) * (x1 - x0)
        } else {
            adaptive_simpson(|x| l1(&(u - flat.value(x))), x0, x1, LOCAL_QUAD_TOL * theta)
        };
    }
    err / theta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{vector, CanalModel};
    use crate::riemann::solve_standard;

    fn law() -> BalanceLaw {
        BalanceLaw::canal(CanalModel::new(9.81))
    }

    #[test]
    fn sharp_fan_away_from_jumps_is_classical() {
        let zeta = PiecewiseConstField::new(vec![1.0], vec![vector(&[1.0, 0.0]), vector(&[1.0, 0.05])]).unwrap();
        let u = PiecewiseConstField::new(vec![0.0], vec![vector(&[1.1, 0.0]), vector(&[0.9, 0.0])]).unwrap();
        let fan = u_sharp(&law(), CoefficientRef::Field(&zeta), &u, 0.0).unwrap();
        let (sizes, _) = solve_standard(law().model(), &vector(&[1.0, 0.0]), u.value(0.0), u.value_right(0.0)).unwrap();
        assert_eq!(fan.sizes.sigma, sizes.sigma);
        assert!(fan.zero_wave.is_none());
    }

    #[test]
    fn constant_data_without_source_stays_constant() {
        let l = law();
        let zeta = PiecewiseConstField::constant(vector(&[1.0, 0.0]));
        let u = PiecewiseConstField::constant(vector(&[1.0, 0.3]));
        let f = u_flat(&l, CoefficientRef::Field(&zeta), &u, 0.0, 0.1).unwrap();
        for x in [-1.0, 0.0, 0.7] {
            assert!((f.value(x) - vector(&[1.0, 0.3])).amax() < 1e-14);
        }
        assert!(flat_error(&l, &f, &u, -2.0, 2.0) < 1e-13);
    }
}
