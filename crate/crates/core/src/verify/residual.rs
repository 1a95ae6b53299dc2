//! Residual of the weak formulation against smooth test functions:
//!
//! `−∫∫ (u φ_t + f(ζ, u) φ_x) − Σ_x̄ ∫ Ξ(ζ(x̄+), ζ(x̄), u(t, x̄)) φ(t, x̄)
//!  − ∫∫ D⁺_v Ξ(ζ, ζ, u) φ d‖μ‖`.

use crate::coefficient::{BVCoefficient, PiecewiseConstField};
use crate::models::BalanceLaw;
use crate::numerics::quad::gauss5;
use crate::numerics::Vector;

/// Target accuracy of the time quadrature, per unit of time.
pub const RESIDUAL_QUAD_TOL: f64 = 1e-8;

fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let r = 1.0 - s * s;
        r * r * r
    }
}

fn bump_prime(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let r = 1.0 - s * s;
        -6.0 * s * r * r
    }
}

/// `max |ψ'|` for `ψ(s) = (1 − s²)³`, reached at `s² = 1/5`.
const BUMP_SLOPE: f64 = 1.717_300_206_719_838_4;

/// `φ(t, x) = ψ((t − t0)/rt) ψ((x − x0)/rx)` with `ψ(s) = (1 − s²)³₊`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub t0: f64,
    pub rt: f64,
    pub x0: f64,
    pub rx: f64,
}

impl TestFunction {
    pub fn phi(&self, t: f64, x: f64) -> f64 {
        bump((t - self.t0) / self.rt) * bump((x - self.x0) / self.rx)
    }

    pub fn phi_t(&self, t: f64, x: f64) -> f64 {
        bump_prime((t - self.t0) / self.rt) / self.rt * bump((x - self.x0) / self.rx)
    }

    pub fn phi_x(&self, t: f64, x: f64) -> f64 {
        bump((t - self.t0) / self.rt) * bump_prime((x - self.x0) / self.rx) / self.rx
    }

    /// `sup|φ| + sup|φ_t| + sup|φ_x|`.
    pub fn c1_norm(&self) -> f64 {
        1.0 + BUMP_SLOPE / self.rt + BUMP_SLOPE / self.rx
    }

    pub fn time_support(&self) -> (f64, f64) {
        (self.t0 - self.rt, self.t0 + self.rt)
    }

    pub fn space_support(&self) -> (f64, f64) {
        (self.x0 - self.rx, self.x0 + self.rx)
    }
}

/// Accumulates the residual slab by slab; within a slab the trajectory must
/// be piecewise constant with breakpoints moving linearly.
#[derive(Debug, Clone)]
pub struct WeakResidual {
    law: BalanceLaw,
    zeta: BVCoefficient,
    tests: Vec<TestFunction>,
    acc: Vec<Vector>,
}

impl WeakResidual {
    pub fn new(law: BalanceLaw, zeta: BVCoefficient, tests: Vec<TestFunction>) -> Self {
        let n = law.model().n();
        let acc = vec![Vector::zeros(n); tests.len()];
        Self { law, zeta, tests, acc }
    }

    pub fn tests(&self) -> &[TestFunction] {
        &self.tests
    }

    /// Max-norm of the residual vector of each test function.
    pub fn residuals(&self) -> Vec<f64> {
        self.acc.iter().map(|v| v.amax()).collect()
    }

    /// Spatial integrand `G(t)` for every test function active at `t`.
    fn integrand(&self, u: &PiecewiseConstField, t: f64, active: &[usize]) -> Vec<Vector> {
        let model = self.law.model();
        let n = model.n();
        let mut out = vec![Vector::zeros(n); active.len()];
        let jumps = self.zeta.jumps();
        let segs = self.zeta.density();
        for (slot, &k) in active.iter().enumerate() {
            let tf = &self.tests[k];
            let (a, b) = tf.space_support();
            let mut cuts: Vec<f64> = u.breaks().iter().copied().chain(jumps.iter().map(|j| j.0)).collect();
            cuts.extend(segs.iter().flat_map(|s| [s.x0, s.x1]));
            cuts.retain(|x| *x > a && *x < b);
            // keep pieces short so the fixed rule stays accurate
            let parts = 8;
            cuts.extend((0..=parts).map(|j| a + (b - a) * j as f64 / parts as f64));
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let g = &mut out[slot];
            for w in cuts.windows(2) {
                let (x0, x1) = (w[0], w[1]);
                let mid = 0.5 * (x0 + x1);
                let um = u.value(mid);
                let with_density = self.zeta.density_at(mid).amax() > 0.0;
                for (x, wt) in gauss5(x0, x1) {
                    let z = self.zeta.value(x);
                    let Ok(f) = model.flux(&z, um) else {
                        *g = Vector::from_element(n, f64::NAN);
                        continue;
                    };
                    *g -= (um * tf.phi_t(t, x) + f * tf.phi_x(t, x)) * wt;
                    if with_density {
                        let dv = self.zeta.density_at(x);
                        let d = self.law.coupling.dini(&z, &dv, um).unwrap_or_else(|_| Vector::from_element(n, f64::NAN));
                        *g -= d * (tf.phi(t, x) * wt);
                    }
                }
            }
            for (xb, _) in jumps.iter().filter(|j| j.0 > a && j.0 < b) {
                let (zl, zr) = (self.zeta.value(*xb), self.zeta.value_right(*xb));
                let xi = self
                    .law
                    .coupling
                    .xi(&zr, &zl, u.value(*xb))
                    .unwrap_or_else(|_| Vector::from_element(n, f64::NAN));
                *g -= xi * tf.phi(t, *xb);
            }
        }
        out
    }

    fn gauss_slab<F>(&self, profile: &F, t0: f64, t1: f64, active: &[usize]) -> Vec<Vector>
    where
        F: Fn(f64) -> PiecewiseConstField,
    {
        let n = self.law.model().n();
        let mut sum = vec![Vector::zeros(n); active.len()];
        for (t, w) in gauss5(t0, t1) {
            let u = profile(t);
            for (s, g) in sum.iter_mut().zip(self.integrand(&u, t, active)) {
                *s += g * w;
            }
        }
        sum
    }

    fn adapt<F>(&self, profile: &F, t0: f64, t1: f64, active: &[usize], whole: Vec<Vector>, depth: u32) -> Vec<Vector>
    where
        F: Fn(f64) -> PiecewiseConstField,
    {
        let tm = 0.5 * (t0 + t1);
        let left = self.gauss_slab(profile, t0, tm, active);
        let right = self.gauss_slab(profile, tm, t1, active);
        let halves: Vec<Vector> = left.iter().zip(&right).map(|(l, r)| l + r).collect();
        let diff = halves.iter().zip(&whole).map(|(h, w)| (h - w).amax()).fold(0.0, f64::max);
        if depth == 0 || !(diff > RESIDUAL_QUAD_TOL * (t1 - t0)) {
            return halves;
        }
        let l = self.adapt(profile, t0, tm, active, left, depth - 1);
        let r = self.adapt(profile, tm, t1, active, right, depth - 1);
        l.iter().zip(&r).map(|(a, b)| a + b).collect()
    }

    /// Adds the contribution of the slab `[t0, t1]`, where `profile(t)` is
    /// the trajectory at time `t`.
    pub fn accumulate<F>(&mut self, profile: F, t0: f64, t1: f64)
    where
        F: Fn(f64) -> PiecewiseConstField,
    {
        // group the active test functions by their clipped time window
        let mut windows: Vec<((f64, f64), Vec<usize>)> = Vec::new();
        for (k, tf) in self.tests.iter().enumerate() {
            let (a, b) = tf.time_support();
            let (lo, hi) = (t0.max(a), t1.min(b));
            if lo < hi {
                match windows.iter_mut().find(|(w, _)| *w == (lo, hi)) {
                    Some((_, ks)) => ks.push(k),
                    None => windows.push(((lo, hi), vec![k])),
                }
            }
        }
        for ((lo, hi), ks) in windows {
            let whole = self.gauss_slab(&profile, lo, hi, &ks);
            let parts = self.adapt(&profile, lo, hi, &ks, whole, 12);
            for (k, p) in ks.iter().zip(parts) {
                self.acc[*k] += p;
            }
        }
    }
}

/// Residual max-norm for one test function over a trajectory given on
/// slabs `[times[k], times[k+1]]`.
pub fn weak_residual<F>(law: &BalanceLaw, zeta: &BVCoefficient, profile: F, times: &[f64], test: TestFunction) -> f64
where
    F: Fn(f64) -> PiecewiseConstField,
{
    let mut acc = WeakResidual::new(law.clone(), zeta.clone(), vec![test]);
    for w in times.windows(2) {
        acc.accumulate(&profile, w[0], w[1]);
    }
    acc.residuals()[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{vector, CanalModel};

    #[test]
    fn bump_slope_constant() {
        let s = (0.2f64).sqrt();
        assert!((bump_prime(s).abs() - BUMP_SLOPE).abs() < 1e-14);
    }

    #[test]
    fn constant_state_has_no_residual() {
        let law = BalanceLaw::canal(CanalModel::new(9.81));
        let zeta = BVCoefficient::constant(vector(&[1.0, 0.0]));
        let u = PiecewiseConstField::constant(vector(&[1.0, 0.2]));
        let tf = TestFunction {
            t0: 0.5,
            rt: 0.3,
            x0: 0.1,
            rx: 0.4,
        };
        let r = weak_residual(&law, &zeta, |_| u.clone(), &[0.0, 1.0], tf);
        assert!(r < 1e-12, "{r}");
    }
}
