//! Shock-curve decomposition of a jump and the wave content of a piecewise
//! constant field.

use crate::coefficient::PiecewiseConstField;
use crate::error::Result;
use crate::models::curves::hugoniot;
use crate::models::{BalanceLaw, FluxModel};
use crate::numerics::newton::{newton_fd, NewtonOptions};
use crate::numerics::Vector;
use crate::riemann::{solve_generalized, solve_standard, CHAIN_TOL};
use crate::tracking::{wave_potentials, WaveItem};

/// `v = S_n(q_n) ∘ … ∘ S_1(q_1)(u)` along Hugoniot loci of both signs.
#[derive(Debug, Clone)]
pub struct ShockDecomposition {
    pub q: Vector,
    /// `states[0] = u`, `states[n] = v`.
    pub states: Vec<Vector>,
    /// Rankine–Hugoniot speed of each step.
    pub speeds: Vec<f64>,
}

fn chain(model: &dyn FluxModel, z: &Vector, q: &Vector, u: &Vector) -> Result<(Vec<Vector>, Vec<f64>)> {
    let mut states = vec![u.clone()];
    let mut speeds = Vec::with_capacity(q.len());
    for i in 0..q.len() {
        let p = hugoniot(model, z, i, q[i], states.last().unwrap())?;
        states.push(p.state);
        speeds.push(p.speed);
    }
    Ok((states, speeds))
}

pub fn shock_decompose(model: &dyn FluxModel, z: &Vector, u: &Vector, v: &Vector) -> Result<ShockDecomposition> {
    let n = model.n();
    let q = if u == v {
        Vector::zeros(n)
    } else {
        let guess = &model.eigen(z, u)?.left * (v - u);
        let opts = NewtonOptions {
            tol: CHAIN_TOL,
            max_iter: 40,
            fd_step: 1e-7,
        };
        newton_fd(
            |q| Ok(chain(model, z, q, u)?.0.pop().unwrap() - v),
            guess,
            opts,
            "shock decomposition",
        )?
    };
    let (mut states, speeds) = chain(model, z, &q, u)?;
    *states.last_mut().unwrap() = v.clone();
    Ok(ShockDecomposition { q, states, speeds })
}

/// Wave content of one discontinuity of a field.
#[derive(Debug, Clone)]
pub struct FieldJump {
    pub x: f64,
    /// Riemann wave sizes of the jump; zero where only `ζ` jumps.
    pub sigma: Vector,
    /// `‖Δζ‖` at `x`.
    pub zero: f64,
}

/// Resolves every jump of `u` and of `zeta_h` into wave sizes: standard
/// Riemann problems away from coefficient jumps, generalized ones on them.
pub fn field_jumps(law: &BalanceLaw, zeta_h: &PiecewiseConstField, u: &PiecewiseConstField) -> Result<Vec<FieldJump>> {
    let model = law.model();
    let mut xs: Vec<f64> = u.breaks().iter().chain(zeta_h.breaks()).copied().collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut out = Vec::with_capacity(xs.len());
    for x in xs {
        let (zl, zr) = (zeta_h.value(x), zeta_h.value_right(x));
        let (ul, ur) = (u.value(x), u.value_right(x));
        let jump = if zl != zr {
            let fan = solve_generalized(model, law.coupling.as_ref(), zl, zr, ul, ur)?;
            FieldJump {
                x,
                sigma: fan.sizes.sigma,
                zero: (zr - zl).norm(),
            }
        } else if ul != ur {
            FieldJump {
                x,
                sigma: solve_standard(model, zl, ul, ur)?.0.sigma,
                zero: 0.0,
            }
        } else {
            continue;
        };
        out.push(jump);
    }
    Ok(out)
}

/// `(V, Q)` of the wave content of `u`.
pub fn field_potentials(model: &dyn FluxModel, jumps: &[FieldJump]) -> (f64, f64) {
    let io = model.i_o();
    let split: Vec<(Vector, Vector)> = jumps
        .iter()
        .map(|j| {
            let (mut neg, mut pos) = (j.sigma.clone(), j.sigma.clone());
            neg.rows_mut(io, neg.len() - io).fill(0.0);
            pos.rows_mut(0, io).fill(0.0);
            (neg, pos)
        })
        .collect();
    let items = jumps.iter().zip(&split).flat_map(|(j, (neg, pos))| {
        let zero = (j.zero > 0.0).then_some(WaveItem::Zero(j.zero));
        [Some(WaveItem::Waves(neg)), zero, Some(WaveItem::Waves(pos))].into_iter().flatten()
    });
    wave_potentials(model, items)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{vector, CanalModel};

    #[test]
    fn identical_states_give_zero() {
        let m = CanalModel::new(9.81);
        let z = vector(&[1.0, 0.0]);
        let u = vector(&[1.0, 0.2]);
        let d = shock_decompose(&m, &z, &u, &u).unwrap();
        assert_eq!(d.q, Vector::zeros(2));
        assert_eq!(d.states.len(), 3);
    }

    #[test]
    fn hugoniot_point_is_recovered() {
        let m = CanalModel::new(9.81);
        let z = vector(&[1.0, 0.0]);
        let u = vector(&[1.0, 0.1]);
        // a 2-shock of either sign is a single-family decomposition
        for q in [-0.05, 0.05] {
            let v = hugoniot(&m, &z, 1, q, &u).unwrap().state;
            let d = shock_decompose(&m, &z, &u, &v).unwrap();
            assert!(d.q[0].abs() < 1e-9, "{:?}", d.q);
            assert!((d.q[1] - q).abs() < 1e-9);
        }
    }
}
