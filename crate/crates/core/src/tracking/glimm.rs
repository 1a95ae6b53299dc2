use super::{Front, FrontKind, InteractionMode, InteractionRecord};
use crate::models::{FieldKind, FluxModel};
use crate::numerics::Vector;
use crate::riemann::solve_standard;

#[derive(Debug, Clone)]
pub struct GlimmReport {
    pub t: f64,
    pub v: f64,
    pub q: f64,
    pub upsilon: f64,
    pub c0: f64,
    pub tv_u: f64,
    /// `∫ u` over the configured window.
    pub mass: Vec<f64>,
    pub n_fronts: usize,
    pub np_strength: f64,
}

/// Wave-size vector of a front: `σ e_i` for a physical front, the sizes of
/// the Riemann problem between its traces for a non-physical one.
fn strengths<'a>(model: &dyn FluxModel, f: &'a Front) -> &'a Vector {
    f.strengths.get_or_init(|| {
        let n = model.n();
        match (f.kind, f.family) {
            (FrontKind::ZeroWave, _) => Vector::zeros(n),
            (_, Some(i)) => {
                let mut s = Vector::zeros(n);
                s[i] = f.sigma;
                s
            }
            _ => match solve_standard(model, &f.z_left, &f.left, &f.right) {
                Ok((sizes, _)) => sizes.sigma,
                Err(_) => model
                    .eigen(&f.z_left, &f.left)
                    .map(|e| &e.left * (&f.right - &f.left))
                    .unwrap_or_else(|_| Vector::from_element(n, f.jump_norm())),
            },
        }
    })
}

/// A located wave packet for the Glimm functionals: the wave-size vector of
/// a jump or the strength `‖Δζ‖` of a zero-wave.
#[derive(Debug, Clone, Copy)]
pub enum WaveItem<'a> {
    Waves(&'a Vector),
    Zero(f64),
}

/// `(V, Q)` for fronts in position order.
pub(crate) fn potentials(model: &dyn FluxModel, fronts: &[&Front]) -> (f64, f64) {
    wave_potentials(
        model,
        fronts.iter().map(|f| match f.kind {
            FrontKind::ZeroWave => WaveItem::Zero(f.sigma),
            _ => WaveItem::Waves(strengths(model, f)),
        }),
    )
}

/// `(V, Q)` for wave packets in position order.
///
/// `V = Σ|σ| + Σ‖Δζ‖`. `Q` sums `|σ_x,i||σ_y,j|` over approaching pairs:
/// `x < y` with `i > j`, same genuinely nonlinear family with one of them
/// negative, and `‖Δζ_x‖ |σ_y,j|` for a zero-wave at `x` and a negative
/// family wave right of it or a positive family wave left of it. Entries of
/// one packet do not interact with each other.
pub fn wave_potentials<'a, I>(model: &dyn FluxModel, items: I) -> (f64, f64)
where
    I: IntoIterator<Item = WaveItem<'a>>,
{
    let n = model.n();
    let io = model.i_o();
    let gnl: Vec<bool> = (0..n).map(|i| model.field_kind(i) == FieldKind::GenuinelyNonlinear).collect();
    let mut pre_abs = vec![0.0; n];
    let mut pre_neg = vec![0.0; n];
    let mut pre_zero = 0.0;
    let (mut v, mut q) = (0.0, 0.0);
    for item in items {
        let s = match item {
            WaveItem::Zero(dz) => {
                v += dz;
                q += dz * pre_abs[io..].iter().sum::<f64>();
                pre_zero += dz;
                continue;
            }
            WaveItem::Waves(s) => s,
        };
        // pairs with a front on the left of family above j
        let mut above = 0.0;
        for j in (0..n).rev() {
            let a = s[j].abs();
            if a > 0.0 {
                q += a * above;
                if gnl[j] {
                    q += a * if s[j] < 0.0 { pre_abs[j] } else { pre_neg[j] };
                }
                if j < io {
                    q += a * pre_zero;
                }
            }
            above += pre_abs[j];
        }
        for j in 0..n {
            let a = s[j].abs();
            v += a;
            pre_abs[j] += a;
            if s[j] < 0.0 {
                pre_neg[j] += a;
            }
        }
    }
    (v, q)
}

/// Smallest `C0` making `V + C0 Q` non-increasing over the recorded
/// accurate interactions: `max ΔV / (−ΔQ)` over those with `ΔV > 0`.
/// Returns `None` when some interaction raises `V` without lowering `Q`.
pub fn fit_c0(log: &[InteractionRecord]) -> Option<f64> {
    let mut c0: f64 = 0.0;
    for r in log.iter().filter(|r| r.mode == InteractionMode::Accurate) {
        let (Some((v0, q0)), Some((v1, q1))) = (r.before, r.after) else { continue };
        let (dv, dq) = (v1 - v0, q1 - q0);
        if dv <= 1e-14 * v0.max(1.0) {
            continue;
        }
        if dq >= 0.0 {
            return None;
        }
        c0 = c0.max(dv / -dq);
    }
    Some(c0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{vector, LinearSystemModel};

    fn front(kind: FrontKind, family: Option<usize>, sigma: f64) -> Front {
        Front {
            id: 0,
            kind,
            family,
            sigma,
            x_ref: 0.0,
            t_ref: 0.0,
            speed: 0.0,
            left: vector(&[0.0, 0.0]),
            right: vector(&[0.0, 0.0]),
            z_left: vector(&[0.0]),
            z_right: vector(&[0.0]),
            strengths: Default::default(),
        }
    }

    #[test]
    fn pair_counting() {
        let m = LinearSystemModel::default_2x2();
        // family 1 left of family 0 approach; reversed order does not
        let a = front(FrontKind::Contact, Some(1), 0.5);
        let b = front(FrontKind::Contact, Some(0), -0.2);
        let (v, q) = potentials(&m, &[&a, &b]);
        assert!((v - 0.7).abs() < 1e-15);
        assert!((q - 0.1).abs() < 1e-15);
        let (_, q) = potentials(&m, &[&b, &a]);
        assert_eq!(q, 0.0);
    }

    #[test]
    fn zero_wave_coupling() {
        let m = LinearSystemModel::default_2x2();
        let z = front(FrontKind::ZeroWave, None, 0.3);
        let pos = front(FrontKind::Contact, Some(1), 0.5);
        let neg = front(FrontKind::Contact, Some(0), 0.2);
        let (v, q) = potentials(&m, &[&pos, &z, &neg]);
        assert!((v - 1.0).abs() < 1e-15);
        assert!((q - (0.3 * 0.5 + 0.3 * 0.2 + 0.5 * 0.2)).abs() < 1e-15);
        let (_, q) = potentials(&m, &[&neg, &z, &pos]);
        assert_eq!(q, 0.0);
    }
}
