//! Riemann solvers: the classical problem at a fixed coefficient, the
//! transmission map `T` across a coefficient jump, and the generalized
//! problem gluing left-going waves of the `z⁻` flux, a stationary zero-wave
//! and right-going waves of the `z⁺` flux.

use crate::error::{Error, Result};
use crate::models::curves::{hugoniot, lax_curve, rarefaction_curve};
use crate::models::{check_non_resonant, Coupling, FieldKind, FluxModel};
use crate::numerics::newton::{newton, newton_fd, NewtonOptions};
use crate::numerics::{Matrix, Vector};

/// Residual tolerance of the Newton solves on wave sizes.
pub const CHAIN_TOL: f64 = 1e-11;
/// Residual tolerance of the transmission map.
pub const T_TOL: f64 = 1e-11;
/// Waves with `|σ|` at or below this are Newton noise and are not emitted;
/// the end-state snap in the fan absorbs them.
pub const WAVE_DROP: f64 = 1e-12;
/// Resonance guard band, relative to `lambda_hat`.
pub const SPEED_GAP_REL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveType {
    Shock,
    Rarefaction,
    Contact,
}

/// One elementary wave of a fan.
#[derive(Debug, Clone)]
pub struct Wave {
    pub family: usize,
    pub sigma: f64,
    pub kind: WaveType,
    /// Speeds of the left and right edge; they differ only for rarefactions.
    pub speed: (f64, f64),
    pub left: Vector,
    pub right: Vector,
    /// Coefficient value of the flux this wave belongs to.
    pub z: Vector,
}

/// The stationary jump at `x = 0` of a generalized fan.
#[derive(Debug, Clone)]
pub struct ZeroWaveRecord {
    pub left: Vector,
    pub right: Vector,
    pub xi: Vector,
}

/// Wave sizes `σ` with the split `σ = σ′ + σ″` into negative and positive
/// families.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSizes {
    pub sigma: Vector,
    pub i_o: usize,
}

impl WaveSizes {
    pub fn negative_part(&self) -> Vector {
        let mut s = self.sigma.clone();
        s.rows_mut(self.i_o, s.len() - self.i_o).fill(0.0);
        s
    }

    pub fn positive_part(&self) -> Vector {
        let mut s = self.sigma.clone();
        s.rows_mut(0, self.i_o).fill(0.0);
        s
    }
}

/// A self-similar solution. Waves are ordered left to right; families with
/// `σ = 0` are omitted.
#[derive(Debug, Clone)]
pub struct WaveFan {
    pub u_left: Vector,
    pub u_right: Vector,
    pub z_minus: Vector,
    pub z_plus: Vector,
    pub waves: Vec<Wave>,
    pub zero_wave: Option<ZeroWaveRecord>,
    pub sizes: WaveSizes,
}

impl WaveFan {
    /// Waves strictly left of `x = 0`.
    pub fn left_waves(&self) -> impl Iterator<Item = &Wave> {
        let io = self.sizes.i_o;
        self.waves.iter().filter(move |w| w.family < io)
    }

    pub fn right_waves(&self) -> impl Iterator<Item = &Wave> {
        let io = self.sizes.i_o;
        self.waves.iter().filter(move |w| w.family >= io)
    }
}

/// A coefficient jump to glue into a chain.
#[derive(Clone, Copy)]
struct Jump<'a> {
    coupling: &'a dyn Coupling,
    z_minus: &'a Vector,
    z_plus: &'a Vector,
}

/// End state of the Lax-curve chain for sizes `sigma`.
fn chain_end(
    model: &dyn FluxModel,
    z_minus: &Vector,
    z_plus: &Vector,
    jump: Option<Jump<'_>>,
    sigma: &Vector,
    u_left: &Vector,
) -> Result<Vector> {
    let io = model.i_o();
    let mut w = u_left.clone();
    for i in 0..model.n() {
        if i == io {
            if let Some(j) = jump {
                w = solve_t(model, j.coupling, j.z_plus, j.z_minus, &w)?;
            }
        }
        let z = if i < io { z_minus } else { z_plus };
        w = lax_curve(model, z, i, sigma[i], &w)?;
    }
    if io == model.n() {
        if let Some(j) = jump {
            w = solve_t(model, j.coupling, j.z_plus, j.z_minus, &w)?;
        }
    }
    Ok(w)
}

/// Builds the fan record for converged sizes, checking non-resonance.
fn build_fan(
    model: &dyn FluxModel,
    z_minus: &Vector,
    z_plus: &Vector,
    jump: Option<Jump<'_>>,
    sigma: Vector,
    u_left: &Vector,
    u_right: &Vector,
) -> Result<WaveFan> {
    let io = model.i_o();
    let gap = SPEED_GAP_REL * model.lambda_hat();
    let mut w = u_left.clone();
    let mut waves = Vec::new();
    let mut zero_wave = None;
    let check = |z: &Vector, u: &Vector| -> Result<()> { check_non_resonant(model, &model.eigen(z, u)?) };
    check(z_minus, &w)?;
    for i in 0..=model.n() {
        if i == io {
            if let Some(j) = jump {
                let right = solve_t(model, j.coupling, j.z_plus, j.z_minus, &w)?;
                check(z_plus, &right)?;
                zero_wave = Some(ZeroWaveRecord {
                    xi: j.coupling.xi(j.z_plus, j.z_minus, &w)?,
                    left: w.clone(),
                    right: right.clone(),
                });
                w = right;
            }
        }
        if i == model.n() {
            break;
        }
        let s = sigma[i];
        if s.abs() <= WAVE_DROP {
            continue;
        }
        let z = if i < io { z_minus } else { z_plus };
        let (right, kind, speed) = match model.field_kind(i) {
            FieldKind::LinearlyDegenerate => {
                let right = rarefaction_curve(model, z, i, s, &w)?;
                let lam = model.eigen(z, &w)?.values[i];
                (right, WaveType::Contact, (lam, lam))
            }
            FieldKind::GenuinelyNonlinear if s < 0.0 => {
                let hp = hugoniot(model, z, i, s, &w)?;
                (hp.state, WaveType::Shock, (hp.speed, hp.speed))
            }
            FieldKind::GenuinelyNonlinear => {
                let right = rarefaction_curve(model, z, i, s, &w)?;
                let lo = model.eigen(z, &w)?.values[i];
                let hi = model.eigen(z, &right)?.values[i];
                (right, WaveType::Rarefaction, (lo, hi))
            }
        };
        check(z, &right)?;
        let bad = if i < io { speed.1 >= -gap } else { speed.0 <= gap };
        if bad {
            return Err(Error::ResonanceGuard {
                speed: if i < io { speed.1 } else { speed.0 },
            });
        }
        waves.push(Wave {
            family: i,
            sigma: s,
            kind,
            speed,
            left: w.clone(),
            right: right.clone(),
            z: z.clone(),
        });
        w = right;
    }
    // the chain end matches u_right to the Newton tolerance; store it exactly
    // so neighbouring states agree bit for bit
    match (waves.last_mut(), zero_wave.as_mut()) {
        (Some(w), z) if !(z.is_some() && w.family < io) => w.right = u_right.clone(),
        (_, Some(z)) => z.right = u_right.clone(),
        _ => {}
    }
    Ok(WaveFan {
        u_left: u_left.clone(),
        u_right: u_right.clone(),
        z_minus: z_minus.clone(),
        z_plus: z_plus.clone(),
        waves,
        zero_wave,
        sizes: WaveSizes { sigma, i_o: io },
    })
}

fn chain_options() -> NewtonOptions {
    NewtonOptions {
        tol: CHAIN_TOL,
        max_iter: 40,
        fd_step: 1e-7,
    }
}

/// First-order guess `σ ≈ L(z, u)·Δu`.
fn linear_guess(model: &dyn FluxModel, z: &Vector, u: &Vector, du: &Vector) -> Result<Vector> {
    Ok(&model.eigen(z, u)?.left * du)
}

/// Classical Riemann problem for `u ↦ f(z, u)`.
pub fn solve_standard(model: &dyn FluxModel, z: &Vector, u_left: &Vector, u_right: &Vector) -> Result<(WaveSizes, WaveFan)> {
    let n = model.n();
    let sigma = if u_left == u_right {
        Vector::zeros(n)
    } else {
        let guess = linear_guess(model, z, u_left, &(u_right - u_left))?;
        newton_fd(
            |s| Ok(chain_end(model, z, z, None, s, u_left)? - u_right),
            guess,
            chain_options(),
            "standard Riemann problem",
        )?
    };
    let fan = build_fan(model, z, z, None, sigma, u_left, u_right)?;
    Ok((fan.sizes.clone(), fan))
}

/// `T(z⁺, z⁻)(u⁻)`: the state `u⁺` with
/// `f(z⁺, u⁺) = f(z⁻, u⁻) + Ξ(z⁺, z⁻, u⁻)`.
pub fn solve_t(model: &dyn FluxModel, coupling: &dyn Coupling, z_plus: &Vector, z_minus: &Vector, u_minus: &Vector) -> Result<Vector> {
    if z_plus == z_minus {
        return Ok(u_minus.clone());
    }
    let target = model.flux(z_minus, u_minus)? + coupling.xi(z_plus, z_minus, u_minus)?;
    let residual = |w: &Vector| -> Result<(Vector, Matrix)> {
        Ok((model.flux(z_plus, w)? - &target, model.jacobian_u(z_plus, w)?))
    };
    let opts = NewtonOptions {
        tol: T_TOL,
        ..NewtonOptions::default()
    };
    newton(residual, u_minus.clone(), opts, "transmission map").map_err(|e| match e {
        Error::SingularMatrix => Error::NonInvertible,
        other => other,
    })
}

/// Generalized Riemann problem: coefficient `z⁻` for `x < 0`, `z⁺` for
/// `x > 0`, data `u_left`, `u_right`.
pub fn solve_generalized(
    model: &dyn FluxModel,
    coupling: &dyn Coupling,
    z_minus: &Vector,
    z_plus: &Vector,
    u_left: &Vector,
    u_right: &Vector,
) -> Result<WaveFan> {
    if z_minus == z_plus {
        return Ok(solve_standard(model, z_minus, u_left, u_right)?.1);
    }
    let jump = Jump {
        coupling,
        z_minus,
        z_plus,
    };
    // sequential half-problems: cross the jump with the left state, then
    // resolve the remaining difference with the z⁺ structure
    let through = solve_t(model, coupling, z_plus, z_minus, u_left)?;
    let guess = linear_guess(model, z_plus, &through, &(u_right - &through))?;
    let sigma = newton_fd(
        |s| Ok(chain_end(model, z_minus, z_plus, Some(jump), s, u_left)? - u_right),
        guess,
        chain_options(),
        "generalized Riemann problem",
    )?;
    build_fan(model, z_minus, z_plus, Some(jump), sigma, u_left, u_right)
}

/// State on the `i`-rarefaction from `pre` where `λ_i = speed`.
fn rarefaction_interior(model: &dyn FluxModel, z: &Vector, i: usize, pre: &Vector, speed: f64, span: f64) -> Vector {
    let lam0 = model.eigen(z, pre).map(|e| e.values[i]).unwrap_or(speed);
    // with ∇λ·r = 1 the parameter is the eigenvalue increment
    let mut s = (speed - lam0).clamp(0.0, span);
    for _ in 0..8 {
        let Ok(w) = rarefaction_curve(model, z, i, s, pre) else { break };
        let Ok(eig) = model.eigen(z, &w) else { break };
        let g = eig.values[i] - speed;
        if g.abs() < 1e-14 {
            return w;
        }
        s = (s - g).clamp(0.0, span);
    }
    rarefaction_curve(model, z, i, s, pre).unwrap_or_else(|_| pre.clone())
}

/// The fan evaluated on the ray `x/t = speed`, left-continuous in `x`.
pub fn sample_fan(model: &dyn FluxModel, fan: &WaveFan, speed: f64) -> Vector {
    let mut state = fan.u_left.clone();
    let io = fan.sizes.i_o;
    let mut zero_done = fan.zero_wave.is_none();
    for w in &fan.waves {
        if !zero_done && w.family >= io {
            if speed <= 0.0 {
                return state;
            }
            state = fan.zero_wave.as_ref().map(|z| z.right.clone()).unwrap_or(state);
            zero_done = true;
        }
        if speed <= w.speed.0 {
            return state;
        }
        if w.kind == WaveType::Rarefaction && speed < w.speed.1 {
            return rarefaction_interior(model, &w.z, w.family, &w.left, speed, w.sigma);
        }
        state = w.right.clone();
    }
    if !zero_done && speed <= 0.0 {
        return state;
    }
    fan.u_right.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{vector, CanalCoupling, CanalModel, LinearCoupling, LinearSystemModel};

    fn canal() -> (CanalModel, CanalCoupling) {
        (CanalModel::new(9.81), CanalCoupling { g: 9.81 })
    }

    #[test]
    fn equal_states_give_empty_fan() {
        let (m, _) = canal();
        let z = vector(&[1.0, 0.0]);
        let u = vector(&[1.0, 0.1]);
        let (s, fan) = solve_standard(&m, &z, &u, &u).unwrap();
        assert_eq!(s.sigma.amax(), 0.0);
        assert!(fan.waves.is_empty());
    }

    #[test]
    fn transmission_over_bed_step() {
        let (m, c) = canal();
        let up = solve_t(&m, &c, &vector(&[1.0, 0.1]), &vector(&[1.0, 0.0]), &vector(&[1.0, 0.0])).unwrap();
        assert!((up[0] - 0.8f64.sqrt()).abs() < 1e-10, "{up}");
        assert_eq!(up[1], 0.0);
    }

    #[test]
    fn transmission_identity() {
        let (m, c) = canal();
        let z = vector(&[0.8, 0.2]);
        let u = vector(&[1.2, -0.1]);
        assert_eq!(solve_t(&m, &c, &z, &z, &u).unwrap(), u);
    }

    #[test]
    fn generalized_with_equal_coefficients_is_standard() {
        let (m, c) = canal();
        let z = vector(&[1.0, 0.0]);
        let (ul, ur) = (vector(&[1.05, 0.1]), vector(&[0.97, 0.05]));
        let g = solve_generalized(&m, &c, &z, &z, &ul, &ur).unwrap();
        let (s, _) = solve_standard(&m, &z, &ul, &ur).unwrap();
        assert!(g.zero_wave.is_none());
        assert_eq!(g.sizes.sigma, s.sigma);
    }

    #[test]
    fn bed_step_at_rest() {
        let (m, c) = canal();
        let u = vector(&[1.0, 0.0]);
        let (zm, zp) = (vector(&[1.0, 0.0]), vector(&[1.0, 0.1]));
        let fan = solve_generalized(&m, &c, &zm, &zp, &u, &u).unwrap();
        let zw = fan.zero_wave.as_ref().unwrap();
        let defect = m.flux(&zp, &zw.right).unwrap() - m.flux(&zm, &zw.left).unwrap() - &zw.xi;
        assert!(defect.amax() < 1e-10);
        assert_eq!(fan.waves.len(), 2);
        let end = chain_end(&m, &zm, &zp, Some(Jump { coupling: &c, z_minus: &zm, z_plus: &zp }), &fan.sizes.sigma, &u).unwrap();
        assert!((end - &u).amax() < 1e-9);
        // sampling is left-continuous at the zero-wave
        assert_eq!(sample_fan(&m, &fan, 0.0), zw.left);
        assert_eq!(sample_fan(&m, &fan, 1e-12), zw.right);
    }

    #[test]
    fn sampling_far_field() {
        let (m, _) = canal();
        let z = vector(&[1.0, 0.0]);
        let (ul, ur) = (vector(&[1.1, 0.0]), vector(&[0.9, 0.0]));
        let (_, fan) = solve_standard(&m, &z, &ul, &ur).unwrap();
        let lh = m.lambda_hat();
        assert_eq!(sample_fan(&m, &fan, -lh - 1.0), ul);
        assert_eq!(sample_fan(&m, &fan, lh + 1.0), ur);
    }

    #[test]
    fn linear_generalized_closed_form() {
        let m = LinearSystemModel::default_2x2();
        let c = LinearCoupling::default_2x2();
        let (zm, zp) = (vector(&[0.0]), vector(&[0.2]));
        let (ul, ur) = (vector(&[0.1, 0.0]), vector(&[-0.1, 0.3]));
        let fan = solve_generalized(&m, &c, &zm, &zp, &ul, &ur).unwrap();
        let zw = fan.zero_wave.unwrap();
        // A (u⁺ − u⁻) = (K − B) Δz
        let lhs = m.matrix() * (&zw.right - &zw.left);
        let rhs = (&c.k - m.coefficient_matrix()) * (&zp - &zm);
        assert!((lhs - rhs).amax() < 1e-12);
    }

    #[test]
    fn wave_size_split() {
        let s = WaveSizes {
            sigma: vector(&[1.0, 2.0, 3.0]),
            i_o: 1,
        };
        assert_eq!(s.negative_part() + s.positive_part(), s.sigma);
        assert_eq!(s.negative_part(), vector(&[1.0, 0.0, 0.0]));
    }
}
