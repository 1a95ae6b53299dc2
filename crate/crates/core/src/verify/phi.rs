//! The weighted distance `Φ(u, v) = Σ_i ∫ |q_i| W_i dx`.
//!
//! `q(x)` decomposes `v(x)` against `u(x)` along Hugoniot loci and
//! `W_i = 1 + κ1 B_i + κ2 (Q(u) + Q(v))`. `B_i` adds to the
//! Bressan–Liu–Yang weight `A_i` the zero-wave strengths left of `x` for
//! negative families and right of `x` for positive ones. `A_i` counts waves
//! of both fields of family above `i` on the left and below `i` on the right,
//! and for a genuinely nonlinear family `i` the family-`i` waves of `u` on the
//! left and `v` on the right when `q_i < 0`, the other way round otherwise.

use super::decompose::{field_jumps, field_potentials, shock_decompose, FieldJump};
use crate::coefficient::PiecewiseConstField;
use crate::error::Result;
use crate::models::{BalanceLaw, FieldKind};
use crate::numerics::Vector;

#[derive(Debug, Clone)]
pub struct PhiReport {
    pub phi: f64,
    /// Intervals of the common refinement, with `q`, `W`, `A`, `B` on each.
    pub cells: Vec<(f64, f64)>,
    pub q: Vec<Vector>,
    pub w: Vec<Vector>,
    pub a: Vec<Vector>,
    pub b: Vec<Vector>,
    pub kappa: (f64, f64),
    pub w_min: f64,
    pub w_max: f64,
}

impl PhiReport {
    /// `1 ≤ W_i ≤ 2` on every cell.
    pub fn weights_admissible(&self) -> bool {
        self.w_min >= 1.0 && self.w_max <= 2.0
    }
}

/// The κ-independent part of `Φ`.
#[derive(Debug, Clone)]
pub struct PhiTerms {
    cells: Vec<(f64, f64)>,
    q: Vec<Vector>,
    a: Vec<Vector>,
    b: Vec<Vector>,
    q_sum: f64,
    /// `u` and `v` differ on an unbounded piece.
    unbounded: bool,
}

/// Running per-family sums of `|σ|` left of the current point.
struct Sums {
    all: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    zero: f64,
}

impl Sums {
    fn new(n: usize) -> Self {
        Self {
            all: vec![0.0; n],
            u: vec![0.0; n],
            v: vec![0.0; n],
            zero: 0.0,
        }
    }

    fn add(&mut self, j: &FieldJump, of_u: bool, with_zero: bool) {
        for (k, s) in j.sigma.iter().enumerate() {
            self.all[k] += s.abs();
            if of_u {
                self.u[k] += s.abs();
            } else {
                self.v[k] += s.abs();
            }
        }
        if with_zero {
            self.zero += j.zero;
        }
    }
}

impl PhiTerms {
    pub fn new(law: &BalanceLaw, zeta_h: &PiecewiseConstField, u: &PiecewiseConstField, v: &PiecewiseConstField) -> Result<Self> {
        let model = law.model();
        let (n, io) = (model.n(), model.i_o());
        let gnl: Vec<bool> = (0..n).map(|i| model.field_kind(i) == FieldKind::GenuinelyNonlinear).collect();
        let ju = field_jumps(law, zeta_h, u)?;
        let jv = field_jumps(law, zeta_h, v)?;
        let q_sum = field_potentials(model, &ju).1 + field_potentials(model, &jv).1;

        let mut total = Sums::new(n);
        for j in &ju {
            total.add(j, true, true);
        }
        for j in &jv {
            total.add(j, false, false);
        }
        let mut cuts: Vec<f64> = u.breaks().iter().chain(v.breaks()).chain(zeta_h.breaks()).copied().collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let unbounded = u.values()[0] != v.values()[0] || u.values().last() != v.values().last();

        let mut left = Sums::new(n);
        let (mut iu, mut iv) = (0, 0);
        let mut out = Self {
            cells: Vec::new(),
            q: Vec::new(),
            a: Vec::new(),
            b: Vec::new(),
            q_sum,
            unbounded,
        };
        for w in cuts.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            while iu < ju.len() && ju[iu].x <= x0 {
                left.add(&ju[iu], true, true);
                iu += 1;
            }
            while iv < jv.len() && jv[iv].x <= x0 {
                left.add(&jv[iv], false, false);
                iv += 1;
            }
            let mid = 0.5 * (x0 + x1);
            let (um, vm) = (u.value(mid), v.value(mid));
            let q = if um == vm {
                Vector::zeros(n)
            } else {
                shock_decompose(model, zeta_h.value(mid), um, vm)?.q
            };
            let mut a = Vector::zeros(n);
            let mut b = Vector::zeros(n);
            for i in 0..n {
                let mut s: f64 = left.all[i + 1..].iter().sum();
                s += (0..i).map(|k| total.all[k] - left.all[k]).sum::<f64>();
                if gnl[i] {
                    s += if q[i] < 0.0 {
                        left.u[i] + (total.v[i] - left.v[i])
                    } else {
                        left.v[i] + (total.u[i] - left.u[i])
                    };
                }
                a[i] = s;
                b[i] = s + if i < io { left.zero } else { total.zero - left.zero };
            }
            out.cells.push((x0, x1));
            out.q.push(q);
            out.a.push(a);
            out.b.push(b);
        }
        Ok(out)
    }

    pub fn b_max(&self) -> f64 {
        self.b.iter().map(|b| b.max()).fold(0.0, f64::max)
    }

    /// `Q(u) + Q(v)`.
    pub fn q_sum(&self) -> f64 {
        self.q_sum
    }

    pub fn evaluate(&self, kappa1: f64, kappa2: f64) -> PhiReport {
        let mut phi = if self.unbounded { f64::INFINITY } else { 0.0 };
        let (mut w_min, mut w_max) = (1.0f64, 1.0f64);
        let mut ws = Vec::with_capacity(self.cells.len());
        for ((x0, x1), (q, b)) in self.cells.iter().zip(self.q.iter().zip(&self.b)) {
            let w = b.map(|bi| 1.0 + kappa1 * bi + kappa2 * self.q_sum);
            w_min = w_min.min(w.min());
            w_max = w_max.max(w.max());
            phi += q.abs().dot(&w) * (x1 - x0);
            ws.push(w);
        }
        PhiReport {
            phi,
            cells: self.cells.clone(),
            q: self.q.clone(),
            w: ws,
            a: self.a.clone(),
            b: self.b.clone(),
            kappa: (kappa1, kappa2),
            w_min,
            w_max,
        }
    }
}

/// Scales `(κ1, κ2)` down, if needed, so that `κ1 b_max + κ2 q_sum ≤ 1`,
/// which keeps every weight in `[1, 2]`.
pub fn admissible_kappa(kappa1: f64, kappa2: f64, b_max: f64, q_sum: f64) -> (f64, f64) {
    let s = kappa1 * b_max + kappa2 * q_sum;
    if s <= 1.0 {
        (kappa1, kappa2)
    } else {
        let f = (1.0 - 1e-12) / s;
        (kappa1 * f, kappa2 * f)
    }
}

pub fn phi(
    law: &BalanceLaw,
    zeta_h: &PiecewiseConstField,
    u: &PiecewiseConstField,
    v: &PiecewiseConstField,
    kappa1: f64,
    kappa2: f64,
) -> Result<PhiReport> {
    Ok(PhiTerms::new(law, zeta_h, u, v)?.evaluate(kappa1, kappa2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{vector, CanalModel};

    fn law() -> BalanceLaw {
        BalanceLaw::canal(CanalModel::new(9.81))
    }

    fn step(x: f64, a: f64, b: f64) -> PiecewiseConstField {
        PiecewiseConstField::new(vec![x], vec![vector(&[a, 0.0]), vector(&[b, 0.0])]).unwrap()
    }

    #[test]
    fn phi_of_a_field_with_itself_is_zero() {
        let u = step(0.0, 1.1, 0.9);
        let z = PiecewiseConstField::new(vec![0.5], vec![vector(&[1.0, 0.0]), vector(&[1.0, 0.02])]).unwrap();
        let r = phi(&law(), &z, &u, &u, 100.0, 10.0).unwrap();
        assert_eq!(r.phi, 0.0);
    }

    #[test]
    fn shifted_step_costs_its_jump() {
        let z = PiecewiseConstField::constant(vector(&[1.0, 0.0]));
        let u = step(0.0, 1.0, 1.01);
        let v = step(0.1, 1.0, 1.01);
        let r = phi(&law(), &z, &u, &v, 0.0, 0.0).unwrap();
        let l1 = 0.1 * 0.01;
        // |q| is equivalent to the jump through the eigenvector scaling
        assert!(r.phi > 0.1 * l1 && r.phi < 10.0 * l1, "{}", r.phi);
        assert_eq!(r.cells.len(), 1);
    }

    #[test]
    fn kappa_is_clamped_into_the_weight_band() {
        let z = PiecewiseConstField::constant(vector(&[1.0, 0.0]));
        let u = step(0.0, 1.0, 1.1);
        let v = step(0.2, 1.0, 1.1);
        let t = PhiTerms::new(&law(), &z, &u, &v).unwrap();
        assert!(!t.evaluate(100.0, 10.0).weights_admissible());
        let (k1, k2) = admissible_kappa(100.0, 10.0, t.b_max(), t.q_sum());
        assert!(t.evaluate(k1, k2).weights_admissible());
    }
}
