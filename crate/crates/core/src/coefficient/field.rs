use crate::error::{Error, Result};
use crate::numerics::Vector;

/// A left-continuous piecewise constant function: `values[0]` on
/// `(−∞, b_0]`, `values[k]` on `(b_{k−1}, b_k]`, `values[N]` on `(b_{N−1}, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstField {
    breaks: Vec<f64>,
    values: Vec<Vector>,
}

impl PiecewiseConstField {
    pub fn new(breaks: Vec<f64>, values: Vec<Vector>) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(Error::Config(format!(
                "{} breakpoints need {} values, got {}",
                breaks.len(),
                breaks.len() + 1,
                values.len()
            )));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) || breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::Config("breakpoints must be finite and strictly increasing".into()));
        }
        let dim = values[0].len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::Config("field values of mixed dimension".into()));
        }
        Ok(Self { breaks, values })
    }

    pub fn constant(value: Vector) -> Self {
        Self {
            breaks: Vec::new(),
            values: vec![value],
        }
    }

    /// Same function with breakpoints between equal values removed.
    pub fn merged(&self) -> Self {
        let mut breaks = Vec::new();
        let mut values = vec![self.values[0].clone()];
        for (b, v) in self.breaks.iter().zip(&self.values[1..]) {
            if v != values.last().unwrap() {
                breaks.push(*b);
                values.push(v.clone());
            }
        }
        Self { breaks, values }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    /// `u(x) = u(x−)`.
    pub fn value(&self, x: f64) -> &Vector {
        &self.values[self.breaks.partition_point(|b| *b < x)]
    }

    /// `u(x+)`.
    pub fn value_right(&self, x: f64) -> &Vector {
        &self.values[self.breaks.partition_point(|b| *b <= x)]
    }

    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum()
    }

    /// `tv(u, ]a, b[)`.
    pub fn tv_open(&self, a: f64, b: f64) -> f64 {
        let lo = self.breaks.partition_point(|x| *x <= a);
        let hi = self.breaks.partition_point(|x| *x < b);
        (lo..hi.max(lo)).map(|k| (&self.values[k + 1] - &self.values[k]).norm()).sum()
    }

    /// Pieces `(x_left, x_right, value)` covering `[a, b]`.
    pub fn pieces(&self, a: f64, b: f64) -> Vec<(f64, f64, &Vector)> {
        let mut out = Vec::new();
        if !(a < b) {
            return out;
        }
        let mut k = self.breaks.partition_point(|x| *x <= a);
        let mut left = a;
        loop {
            let right = self.breaks.get(k).copied().unwrap_or(f64::INFINITY).min(b);
            if right > left {
                out.push((left, right, &self.values[k]));
            }
            if right >= b {
                break;
            }
            left = right;
            k += 1;
        }
        out
    }

    /// `∫_a^b u`.
    pub fn integral(&self, a: f64, b: f64) -> Vector {
        let mut acc = Vector::zeros(self.dim());
        for (l, r, v) in self.pieces(a, b) {
            acc += v * (r - l);
        }
        acc
    }

    /// `∫_a^b ‖u − v‖₁` computed exactly on the common refinement.
    pub fn l1_distance(&self, other: &Self, a: f64, b: f64) -> f64 {
        if !(a < b) {
            return 0.0;
        }
        let mut cuts: Vec<f64> = self
            .breaks
            .iter()
            .chain(&other.breaks)
            .copied()
            .filter(|x| *x > a && *x < b)
            .collect();
        cuts.push(a);
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                (self.value(mid) - other.value(mid)).lp_norm(1) * (w[1] - w[0])
            })
            .sum()
    }

    /// Largest pointwise max-norm difference over `[a, b]`.
    pub fn sup_distance(&self, other: &Self, a: f64, b: f64) -> f64 {
        let mut probes: Vec<f64> = vec![a, b];
        for x in self.breaks.iter().chain(&other.breaks).filter(|x| **x >= a && **x <= b) {
            probes.push(*x);
        }
        probes
            .iter()
            .flat_map(|x| [(self.value(*x) - other.value(*x)).amax(), (self.value_right(*x) - other.value_right(*x)).amax()])
            .fold(0.0, f64::max)
    }
}
