//! Empirical constants of the three interaction estimates, on random small
//! data around a base state.
//!
//! With `α` a full fan in `z⁻` followed by `β′, Δz, β″` at a zero-wave:
//! `u_r = H(z⁺,β″) T H(z⁻,β′) H(z⁻,α″) H(z⁻,α′) u_l` and
//! `u_* = H(z⁺,α″+β″) T H(z⁻,α′+β′) u_l`. The bounds checked are
//! `‖u_* − u_r‖` and `‖σ − (α+β)‖` (σ from the generalized Riemann problem
//! `(u_l, u_r)`) against `Σ_A |α_i β_j| + ‖Δz‖ Σ_{i ≥ i_o} |α_i|`, and, for a
//! non-physical jump `u_l → û` crossing `β′, Δz, β″`, the change of its size
//! against `(Σ|β_j| + ‖Δz‖) ‖û − u_l‖`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::models::{lax_curve, BalanceLaw, FieldKind};
use crate::numerics::Vector;
use crate::riemann::{solve_generalized, solve_t};

#[derive(Debug, Clone)]
pub struct AuditConfig {
    pub samples: usize,
    pub scales: Vec<f64>,
    pub seed: u64,
    pub u_center: Vector,
    pub u_spread: Vector,
    pub z_center: Vector,
    pub z_spread: Vector,
    /// Samples whose right-hand side is below `floor · scale²` are not used
    /// for fitting: the ratio there measures solver noise.
    pub floor: f64,
}

/// One random configuration at unit scale.
#[derive(Debug, Clone)]
pub struct AuditSample {
    pub u_l: Vector,
    pub z_minus: Vector,
    pub alpha: Vector,
    pub beta: Vector,
    pub dz: Vector,
    pub np: Vector,
}

/// Defects and right-hand sides of the three estimates for one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditMeasure {
    pub defect: [f64; 3],
    pub rhs: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct ScaleFit {
    pub scale: f64,
    /// `max defect / rhs` for each estimate.
    pub constants: [f64; 3],
    pub used: [usize; 3],
    /// Largest defect among samples excluded by the floor.
    pub small_rhs_defect: [f64; 3],
    pub failures: usize,
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub fits: Vec<ScaleFit>,
}

pub const ESTIMATE_NAMES: [&str; 3] = ["interaction", "generalized_riemann", "nonphysical_crossing"];

impl AuditReport {
    /// `max / min` of each constant across scales.
    pub fn variation(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            let vals: Vec<f64> = self.fits.iter().map(|f| f.constants[k]).collect();
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            *o = hi / lo;
        }
        out
    }
}

fn apply(law: &BalanceLaw, z: &Vector, sizes: &Vector, families: std::ops::Range<usize>, u: &Vector) -> Result<Vector> {
    let mut w = u.clone();
    for i in families {
        if sizes[i] != 0.0 {
            w = lax_curve(law.model(), z, i, sizes[i], &w)?;
        }
    }
    Ok(w)
}

/// `Σ_A |α_i β_j|`: `i > j`, or `i = j` genuinely nonlinear with a negative
/// member.
pub fn approaching_sum(law: &BalanceLaw, alpha: &Vector, beta: &Vector) -> f64 {
    let model = law.model();
    let n = alpha.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let approaching = i > j || (i == j && model.field_kind(i) == FieldKind::GenuinelyNonlinear && alpha[i].min(beta[j]) < 0.0);
            if approaching {
                s += (alpha[i] * beta[j]).abs();
            }
        }
    }
    s
}

/// Evaluates the three estimates on `sample` scaled by `scale`.
pub fn measure(law: &BalanceLaw, sample: &AuditSample, scale: f64) -> Result<AuditMeasure> {
    let model = law.model();
    let coupling = law.coupling.as_ref();
    let (n, io) = (model.n(), model.i_o());
    let alpha = &sample.alpha * scale;
    let beta = &sample.beta * scale;
    let dz = &sample.dz * scale;
    let zm = &sample.z_minus;
    let zp = zm + &dz;
    let ul = &sample.u_l;

    let across = |beta: &Vector, u: &Vector| -> Result<Vector> {
        let w = apply(law, zm, beta, 0..io, u)?;
        let w = solve_t(model, coupling, &zp, zm, &w)?;
        apply(law, &zp, beta, io..n, &w)
    };

    let after_alpha = apply(law, zm, &alpha, 0..n, ul)?;
    let u_r = across(&beta, &after_alpha)?;
    let u_star = across(&(&alpha + &beta), ul)?;
    let rhs = approaching_sum(law, &alpha, &beta) + dz.norm() * alpha.rows(io, n - io).abs().sum();
    let d1 = (&u_star - &u_r).norm();

    let fan = solve_generalized(model, coupling, zm, &zp, ul, &u_r)?;
    let d2 = (&fan.sizes.sigma - (&alpha + &beta)).norm();

    let hat = ul + &sample.np * scale;
    let jump = (&hat - ul).norm();
    let d3 = ((across(&beta, &hat)? - across(&beta, ul)?).norm() - jump).abs();
    let rhs3 = (beta.abs().sum() + dz.norm()) * jump;

    Ok(AuditMeasure {
        defect: [d1, d2, d3],
        rhs: [rhs, rhs, rhs3],
    })
}

fn uniform(rng: &mut ChaCha8Rng, center: &Vector, spread: &Vector) -> Vector {
    Vector::from_iterator(center.len(), center.iter().zip(spread.iter()).map(|(c, s)| c + s * rng.gen_range(-1.0..1.0)))
}

pub fn draw_samples(law: &BalanceLaw, cfg: &AuditConfig) -> Vec<AuditSample> {
    let model = law.model();
    let (n, p) = (model.n(), model.p());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let unit_n = Vector::from_element(n, 1.0);
    let unit_p = Vector::from_element(p, 1.0);
    let zero_n = Vector::zeros(n);
    let zero_p = Vector::zeros(p);
    (0..cfg.samples)
        .map(|_| {
            let u_l = uniform(&mut rng, &cfg.u_center, &cfg.u_spread);
            let z_minus = uniform(&mut rng, &cfg.z_center, &cfg.z_spread);
            let alpha = uniform(&mut rng, &zero_n, &unit_n);
            let beta = uniform(&mut rng, &zero_n, &unit_n);
            let dz = uniform(&mut rng, &zero_p, &unit_p);
            let np = uniform(&mut rng, &zero_n, &unit_n);
            AuditSample {
                u_l,
                z_minus,
                alpha,
                beta,
                dz,
                np,
            }
        })
        .collect()
}

/// Fits the constants at every scale on the same unit samples.
pub fn interaction_audit(law: &BalanceLaw, cfg: &AuditConfig) -> AuditReport {
    let samples = draw_samples(law, cfg);
    let fits = cfg
        .scales
        .iter()
        .map(|&scale| {
            let measures: Vec<Option<AuditMeasure>> = samples.par_iter().map(|s| measure(law, s, scale).ok()).collect();
            let mut fit = ScaleFit {
                scale,
                constants: [0.0; 3],
                used: [0; 3],
                small_rhs_defect: [0.0; 3],
                failures: 0,
            };
            for m in &measures {
                let Some(m) = m else {
                    fit.failures += 1;
                    continue;
                };
                for k in 0..3 {
                    if m.rhs[k] < cfg.floor * scale * scale {
                        fit.small_rhs_defect[k] = fit.small_rhs_defect[k].max(m.defect[k]);
                    } else {
                        fit.constants[k] = fit.constants[k].max(m.defect[k] / m.rhs[k]);
                        fit.used[k] += 1;
                    }
                }
            }
            fit
        })
        .collect();
    AuditReport { fits }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{vector, CanalModel};

    fn law() -> BalanceLaw {
        BalanceLaw::canal(CanalModel::new(9.81))
    }

    fn sample(alpha: [f64; 2], beta: [f64; 2], dz: [f64; 2]) -> AuditSample {
        AuditSample {
            u_l: vector(&[1.0, 0.1]),
            z_minus: vector(&[1.0, 0.0]),
            alpha: vector(&alpha),
            beta: vector(&beta),
            dz: vector(&dz),
            np: vector(&[0.3, -0.2]),
        }
    }

    #[test]
    fn approaching_pairs() {
        let l = law();
        // family 1 on the left meets family 0 on the right
        assert_eq!(approaching_sum(&l, &vector(&[0.0, 2.0]), &vector(&[3.0, 0.0])), 6.0);
        assert_eq!(approaching_sum(&l, &vector(&[2.0, 0.0]), &vector(&[0.0, 3.0])), 0.0);
        // two rarefactions of one family do not approach, a shock does
        assert_eq!(approaching_sum(&l, &vector(&[2.0, 0.0]), &vector(&[3.0, 0.0])), 0.0);
        assert_eq!(approaching_sum(&l, &vector(&[-2.0, 0.0]), &vector(&[3.0, 0.0])), 6.0);
    }

    #[test]
    fn non_approaching_waves_commute() {
        let m = measure(&law(), &sample([0.5, 0.0], [0.3, 0.7], [0.0, 0.0]), 1e-2).unwrap();
        assert_eq!(m.rhs[0], 0.0);
        assert!(m.defect[0] <= 1e-9, "{:?}", m);
        assert!(m.defect[1] <= 1e-9, "{:?}", m);
    }
}
