//! The coefficient `ζ ∈ BV(ℝ; 𝒵)`: a finite jump part plus a piecewise
//! linear density for the non-atomic part of `Dζ`, and its piecewise
//! constant approximations `ζ^h`.

mod approx;
mod field;
mod geometry;

pub use approx::{approximate, cell_measures, check_conditions, CellMeasures, CoefficientApproximation, DEFAULT_CELL_CAP};
pub use field::PiecewiseConstField;
pub use geometry::{canal_coefficient, coefficient_from_profiles, Profile};

use crate::error::{Error, Result};
use crate::numerics::quad::adaptive_simpson;
use crate::numerics::Vector;

/// Density `w` of the non-atomic part on `[x0, x1)`, linear between `w0`
/// and `w1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySegment {
    pub x0: f64,
    pub x1: f64,
    pub w0: Vector,
    pub w1: Vector,
}

impl DensitySegment {
    pub fn constant(x0: f64, x1: f64, w: Vector) -> Self {
        Self {
            x0,
            x1,
            w0: w.clone(),
            w1: w,
        }
    }

    pub fn at(&self, x: f64) -> Vector {
        let t = (x - self.x0) / (self.x1 - self.x0);
        &self.w0 * (1.0 - t) + &self.w1 * t
    }

    fn is_constant(&self) -> bool {
        self.w0 == self.w1
    }

    /// `∫_{x0}^{x} w`.
    fn integral_to(&self, x: f64) -> Vector {
        let x = x.clamp(self.x0, self.x1);
        (&self.w0 + self.at(x)) * (0.5 * (x - self.x0))
    }

    /// `∫_a^b ‖w‖` over the part of `[a, b]` inside the segment.
    fn mass(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = (a.max(self.x0), b.min(self.x1));
        if hi <= lo {
            return 0.0;
        }
        if self.is_constant() {
            return self.w0.norm() * (hi - lo);
        }
        adaptive_simpson(|x| self.at(x).norm(), lo, hi, 1e-14)
    }

    /// Unit direction of `w` just inside `[a, b]` at the left (`right = false`)
    /// or right end; `None` where the density vanishes identically.
    fn direction_at(&self, x: f64, from_right: bool) -> Option<Vector> {
        let w = self.at(x);
        let n = w.norm();
        if n > 0.0 {
            return Some(w / n);
        }
        // on a straight path through the origin the direction is constant
        let other = if from_right { &self.w1 } else { &self.w0 };
        let n = other.norm();
        (n > 0.0).then(|| other / n)
    }
}

/// `ζ` on ℝ, left-continuous: `ζ(x̄) = ζ(x̄−)` at every jump.
#[derive(Debug, Clone, PartialEq)]
pub struct BVCoefficient {
    base: Vector,
    jumps: Vec<(f64, Vector)>,
    density: Vec<DensitySegment>,
    /// `∫_{−∞}^{x0_k} w` for each density segment.
    cumulative: Vec<Vector>,
}

impl BVCoefficient {
    /// `base = ζ(−∞)`; jumps as `(x̄, ζ(x̄+) − ζ(x̄−))`.
    pub fn new(base: Vector, mut jumps: Vec<(f64, Vector)>, density: Vec<DensitySegment>) -> Result<Self> {
        let p = base.len();
        jumps.retain(|(_, d)| d.amax() > 0.0);
        jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in jumps.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::Config(format!("duplicate jump at x = {}", pair[0].0)));
            }
        }
        if jumps.iter().any(|(x, d)| !x.is_finite() || d.len() != p) {
            return Err(Error::Config("jump with bad position or dimension".into()));
        }
        let mut segments: Vec<DensitySegment> = Vec::new();
        for seg in density {
            if !(seg.x0 < seg.x1) || !seg.x0.is_finite() || !seg.x1.is_finite() {
                return Err(Error::Config(format!("density segment [{}, {}] is empty", seg.x0, seg.x1)));
            }
            if seg.w0.len() != p || seg.w1.len() != p {
                return Err(Error::Config("density dimension mismatch".into()));
            }
            segments.extend(split_at_zero(seg));
        }
        segments.sort_by(|a, b| a.x0.total_cmp(&b.x0));
        for pair in segments.windows(2) {
            if pair[1].x0 < pair[0].x1 {
                return Err(Error::Config(format!("density segments overlap near x = {}", pair[1].x0)));
            }
        }
        let mut cumulative = Vec::with_capacity(segments.len());
        let mut acc = Vector::zeros(p);
        for seg in &segments {
            cumulative.push(acc.clone());
            acc += seg.integral_to(seg.x1);
        }
        Ok(Self {
            base,
            jumps,
            density: segments,
            cumulative,
        })
    }

    pub fn constant(value: Vector) -> Self {
        Self::new(value, Vec::new(), Vec::new()).expect("constant coefficient")
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn jumps(&self) -> &[(f64, Vector)] {
        &self.jumps
    }

    pub fn density(&self) -> &[DensitySegment] {
        &self.density
    }

    pub fn at_minus_infinity(&self) -> Vector {
        self.base.clone()
    }

    pub fn at_plus_infinity(&self) -> Vector {
        self.value_right(f64::INFINITY)
    }

    /// Smallest interval containing all variation, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        let lo = self.jumps.first().map(|j| j.0).into_iter().chain(self.density.first().map(|s| s.x0));
        let hi = self.jumps.last().map(|j| j.0).into_iter().chain(self.density.last().map(|s| s.x1));
        let lo = lo.fold(f64::INFINITY, f64::min);
        let hi = hi.fold(f64::NEG_INFINITY, f64::max);
        (lo <= hi).then_some((lo, hi))
    }

    fn density_integral(&self, x: f64) -> Vector {
        let k = self.density.partition_point(|s| s.x0 < x);
        if k == 0 {
            return Vector::zeros(self.dim());
        }
        let seg = &self.density[k - 1];
        &self.cumulative[k - 1] + seg.integral_to(x)
    }

    fn value_with(&self, x: f64, include_jump_at_x: bool) -> Vector {
        let k = if include_jump_at_x {
            self.jumps.partition_point(|j| j.0 <= x)
        } else {
            self.jumps.partition_point(|j| j.0 < x)
        };
        let mut v = &self.base + self.density_integral(x);
        for (_, d) in &self.jumps[..k] {
            v += d;
        }
        v
    }

    /// `ζ(x) = ζ(x−)`.
    pub fn value(&self, x: f64) -> Vector {
        self.value_with(x, false)
    }

    /// `ζ(x+)`.
    pub fn value_right(&self, x: f64) -> Vector {
        self.value_with(x, true)
    }

    /// Jump `Δζ(x)`, zero away from the jump set.
    pub fn jump_at(&self, x: f64) -> Vector {
        match self.jumps.binary_search_by(|j| j.0.total_cmp(&x)) {
            Ok(k) => self.jumps[k].1.clone(),
            Err(_) => Vector::zeros(self.dim()),
        }
    }

    /// Density `w(x)` of the non-atomic part.
    pub fn density_at(&self, x: f64) -> Vector {
        let k = self.density.partition_point(|s| s.x0 <= x);
        match k.checked_sub(1).map(|k| &self.density[k]) {
            Some(seg) if x < seg.x1 => seg.at(x),
            _ => Vector::zeros(self.dim()),
        }
    }

    /// `‖μ‖(]a, b[)`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        if !(a < b) {
            return 0.0;
        }
        let start = self.density.partition_point(|s| s.x1 <= a);
        self.density[start..]
            .iter()
            .take_while(|s| s.x0 < b)
            .map(|s| s.mass(a, b))
            .sum()
    }

    /// `μ(]a, b[)`.
    pub fn signed_mass(&self, a: f64, b: f64) -> Vector {
        if !(a < b) {
            return Vector::zeros(self.dim());
        }
        self.density_integral(b) - self.density_integral(a)
    }

    fn jump_sum(&self, a: f64, b: f64, include_a: bool) -> f64 {
        let lo = if include_a {
            self.jumps.partition_point(|j| j.0 < a)
        } else {
            self.jumps.partition_point(|j| j.0 <= a)
        };
        let hi = self.jumps.partition_point(|j| j.0 < b);
        self.jumps[lo..hi.max(lo)].iter().map(|(_, d)| d.norm()).sum()
    }

    /// `tv(ζ, ]a, b[)`.
    pub fn tv_open(&self, a: f64, b: f64) -> f64 {
        if !(a < b) {
            return 0.0;
        }
        self.jump_sum(a, b, false) + self.mass(a, b)
    }

    /// `tv(ζ, [a, b[)`, which counts a jump located at `a`.
    pub fn tv_left_closed(&self, a: f64, b: f64) -> f64 {
        if !(a < b) {
            return 0.0;
        }
        self.jump_sum(a, b, true) + self.mass(a, b)
    }

    pub fn total_variation(&self) -> f64 {
        self.jumps.iter().map(|(_, d)| d.norm()).sum::<f64>() + self.mass(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Largest distance between directions `w/‖w‖` on `]a, b[`.
    pub fn direction_oscillation(&self, a: f64, b: f64) -> f64 {
        let mut dirs: Vec<Vector> = Vec::new();
        let start = self.density.partition_point(|s| s.x1 <= a);
        for s in self.density[start..].iter().take_while(|s| s.x0 < b) {
            let (lo, hi) = (a.max(s.x0), b.min(s.x1));
            if hi <= lo {
                continue;
            }
            dirs.extend(s.direction_at(lo, true));
            dirs.extend(s.direction_at(hi, false));
        }
        let mut osc: f64 = 0.0;
        for i in 0..dirs.len() {
            for j in i + 1..dirs.len() {
                osc = osc.max((&dirs[i] - &dirs[j]).norm());
            }
        }
        osc
    }
}

/// Splits a segment where a linear density passes through zero.
fn split_at_zero(seg: DensitySegment) -> Vec<DensitySegment> {
    let (n0, n1) = (seg.w0.norm(), seg.w1.norm());
    if n0 == 0.0 || n1 == 0.0 || seg.w0.dot(&seg.w1) > -0.999_999_999_999 * n0 * n1 {
        return vec![seg];
    }
    let t = n0 / (n0 + n1);
    let xm = seg.x0 + t * (seg.x1 - seg.x0);
    let zero = Vector::zeros(seg.w0.len());
    vec![
        DensitySegment {
            x0: seg.x0,
            x1: xm,
            w0: seg.w0.clone(),
            w1: zero.clone(),
        },
        DensitySegment {
            x0: xm,
            x1: seg.x1,
            w0: zero,
            w1: seg.w1,
        },
    ]
}

/// Pieces of `Dζ` from the decomposition into jumps and `v ‖μ‖`.
#[derive(Debug, Clone)]
pub struct Decomposition<'a> {
    pub jumps: &'a [(f64, Vector)],
    pub density: &'a [DensitySegment],
    coefficient: &'a BVCoefficient,
}

impl Decomposition<'_> {
    /// `v(x)`: unit direction of the non-atomic part, zero where `w = 0`.
    pub fn direction(&self, x: f64) -> Vector {
        let w = self.coefficient.density_at(x);
        let n = w.norm();
        if n > 0.0 {
            w / n
        } else {
            w
        }
    }

    /// Density of `‖μ‖` at `x`.
    pub fn mass_density(&self, x: f64) -> f64 {
        self.coefficient.density_at(x).norm()
    }
}

pub fn decompose(bv: &BVCoefficient) -> Decomposition<'_> {
    Decomposition {
        jumps: &bv.jumps,
        density: &bv.density,
        coefficient: bv,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::vector;

    fn ramp_and_step() -> BVCoefficient {
        BVCoefficient::new(
            vector(&[1.0, 0.0]),
            vec![(2.0, vector(&[0.0, 0.05]))],
            vec![DensitySegment::constant(0.0, 1.0, vector(&[0.0, 0.1]))],
        )
        .unwrap()
    }

    #[test]
    fn reconstruction_is_left_continuous() {
        let z = ramp_and_step();
        assert_eq!(z.value(-1.0), vector(&[1.0, 0.0]));
        assert!((z.value(0.5) - vector(&[1.0, 0.05])).amax() < 1e-15);
        assert!((z.value(2.0) - vector(&[1.0, 0.1])).amax() < 1e-15);
        assert!((z.value_right(2.0) - vector(&[1.0, 0.15])).amax() < 1e-15);
        assert!((z.total_variation() - 0.15).abs() < 1e-15);
    }

    #[test]
    fn ramp_decomposition() {
        let z = ramp_and_step();
        let d = decompose(&z);
        assert_eq!(d.direction(0.5), vector(&[0.0, 1.0]));
        assert!((d.mass_density(0.5) - 0.1).abs() < 1e-15);
        assert_eq!(d.direction(1.5), vector(&[0.0, 0.0]));
        let pure = BVCoefficient::new(vector(&[0.0]), vec![(0.0, vector(&[1.0]))], vec![]).unwrap();
        assert_eq!(pure.mass(f64::NEG_INFINITY, f64::INFINITY), 0.0);
    }

    #[test]
    fn left_closed_interval_counts_jump() {
        let z = ramp_and_step();
        assert!((z.tv_open(2.0, 3.0)).abs() < 1e-15);
        assert!((z.tv_left_closed(2.0, 3.0) - 0.05).abs() < 1e-15);
        assert!((z.tv_open(1.5, 3.0) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn zero_crossing_is_split() {
        let z = BVCoefficient::new(
            vector(&[0.0]),
            vec![],
            vec![DensitySegment {
                x0: 0.0,
                x1: 2.0,
                w0: vector(&[1.0]),
                w1: vector(&[-1.0]),
            }],
        )
        .unwrap();
        assert_eq!(z.density().len(), 2);
        assert_eq!(z.density()[0].x1, 1.0);
        assert!(z.direction_oscillation(0.0, 1.0) < 1e-15);
        assert!((z.direction_oscillation(0.5, 1.5) - 2.0).abs() < 1e-15);
        assert!((z.mass(0.0, 2.0) - 1.0).abs() < 1e-12);
    }
}
