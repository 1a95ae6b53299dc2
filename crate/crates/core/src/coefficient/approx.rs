use super::{BVCoefficient, PiecewiseConstField};
use crate::error::{Error, Result};
use crate::numerics::quad::adaptive_simpson;
use crate::numerics::Vector;

pub const DEFAULT_CELL_CAP: usize = 4_000_000;

/// `ζ^h` together with the grid it was built on.
#[derive(Debug, Clone)]
pub struct CoefficientApproximation {
    pub h: f64,
    /// `x_1 < … < x_{N−1}`.
    pub points: Vec<f64>,
    /// The marked jump set `𝓘^h`, a subset of `points`.
    pub marked: Vec<f64>,
    /// `ζ^h` with trivial breakpoints removed; its breakpoints are the
    /// zero-wave positions.
    pub field: PiecewiseConstField,
}

impl CoefficientApproximation {
    /// Open cells `]x_{i−1}, x_i[`, `i = 1..N`, with `x_0 = −∞`, `x_N = +∞`.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.points.len();
        (0..=n).map(move |i| {
            let a = if i == 0 { f64::NEG_INFINITY } else { self.points[i - 1] };
            let b = if i == n { f64::INFINITY } else { self.points[i] };
            (a, b)
        })
    }
}

/// Splits every cell failing `ok` by bisection until all pass.
fn refine<F: Fn(f64, f64) -> bool>(points: &[f64], ok: F, cap: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(points.len());
    for w in points.windows(2) {
        out.push(w[0]);
        let mut stack = vec![(w[0], w[1])];
        let mut pending = Vec::new();
        while let Some((a, b)) = stack.pop() {
            let m = 0.5 * (a + b);
            if ok(a, b) || !(a < m && m < b) {
                continue;
            }
            pending.push(m);
            if out.len() + pending.len() > cap {
                return Err(Error::CellBudgetExceeded { cap });
            }
            stack.push((a, m));
            stack.push((m, b));
        }
        pending.sort_by(f64::total_cmp);
        out.extend(pending);
    }
    out.extend(points.last());
    Ok(out)
}

fn insert_sorted(points: &mut Vec<f64>, extra: impl IntoIterator<Item = f64>) {
    points.extend(extra);
    points.sort_by(f64::total_cmp);
    points.dedup();
}

/// Builds the grid for `ζ^h` and the piecewise constant approximation:
/// outer points beyond `±1/h` and all variation, marked jumps, the short
/// cell before each marked jump, total variation and direction budgets per
/// cell, and the width cap, in that order.
pub fn approximate(bv: &BVCoefficient, h: f64, cap: usize) -> Result<CoefficientApproximation> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Config(format!("approximation parameter h = {h} must be positive")));
    }
    let (lo, hi) = bv.support().unwrap_or((0.0, 0.0));
    let x_first = lo.min(-1.0 / h) - 0.5 * h;
    let x_last = hi.max(1.0 / h) + 0.5 * h;
    let mut points = vec![x_first, x_last];

    // jumps of size at least h/#jumps; the rest sums to less than h
    let jumps = bv.jumps();
    let threshold = h / jumps.len().max(1) as f64;
    let marked: Vec<f64> = jumps.iter().filter(|(_, d)| d.norm() >= threshold).map(|(x, _)| *x).collect();
    insert_sorted(&mut points, marked.iter().copied());

    let budget = h / (1.0 + marked.len() as f64);
    let mut before = Vec::with_capacity(marked.len());
    for &x in &marked {
        let k = jumps.partition_point(|j| j.0 < x);
        let gap = if k == 0 { f64::INFINITY } else { x - jumps[k - 1].0 };
        let mut d = (0.5 * h).min(0.5 * gap);
        for _ in 0..200 {
            if bv.tv_left_closed(x - d, x) < budget {
                break;
            }
            d *= 0.5;
        }
        before.push(x - d);
    }
    insert_sorted(&mut points, before);

    points = refine(&points, |a, b| bv.tv_open(a, b) < h, cap)?;

    let seg_ends: Vec<f64> = bv.density().iter().flat_map(|s| [s.x0, s.x1]).collect();
    insert_sorted(&mut points, seg_ends);
    points = refine(&points, |a, b| bv.direction_oscillation(a, b) < h, cap)?;

    let mut widened = Vec::with_capacity(points.len());
    for w in points.windows(2) {
        widened.push(w[0]);
        let pieces = (((w[1] - w[0]) / (0.999 * h)).floor() as usize) + 1;
        if pieces > 1 {
            if widened.len() + pieces > cap {
                return Err(Error::CellBudgetExceeded { cap });
            }
            for k in 1..pieces {
                widened.push(w[0] + (w[1] - w[0]) * k as f64 / pieces as f64);
            }
        }
    }
    widened.extend(points.last());
    let points = widened;
    if points.len() > cap {
        return Err(Error::CellBudgetExceeded { cap });
    }

    let mut values = Vec::with_capacity(points.len() + 1);
    values.push(bv.at_minus_infinity());
    values.extend(points.iter().map(|x| bv.value_right(*x)));
    let field = PiecewiseConstField::new(points.clone(), values)?.merged();
    Ok(CoefficientApproximation {
        h,
        points,
        marked,
        field,
    })
}

/// Verifies the grid conditions independently of the constructor; returns
/// the list of violations.
pub fn check_conditions(bv: &BVCoefficient, approx: &CoefficientApproximation) -> Vec<String> {
    let h = approx.h;
    let pts = &approx.points;
    let mut bad = Vec::new();
    if pts.len() < 2 || pts[0] >= -1.0 / h || *pts.last().unwrap() <= 1.0 / h {
        bad.push("(i) outer points do not enclose [-1/h, 1/h]".to_string());
    }
    if pts.windows(2).any(|w| !(w[0] < w[1])) {
        bad.push("(i) points not strictly increasing".to_string());
    }
    let missed: f64 = bv
        .jumps()
        .iter()
        .filter(|(x, _)| !approx.marked.contains(x))
        .map(|(_, d)| d.norm())
        .sum();
    if missed >= h {
        bad.push(format!("(ii) unmarked jumps sum to {missed:e}"));
    }
    let budget = h / (1.0 + approx.marked.len() as f64);
    for &x in &approx.marked {
        match pts.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) if i > 0 => {
                let tv = bv.tv_left_closed(pts[i - 1], x);
                if tv >= budget {
                    bad.push(format!("(iii) tv before marked jump {x} is {tv:e}"));
                }
            }
            _ => bad.push(format!("(ii) marked jump {x} is not an interior grid point")),
        }
    }
    for (a, b) in approx.cells() {
        let tv = bv.tv_open(a, b);
        if tv >= h {
            bad.push(format!("(iv) tv on ]{a}, {b}[ is {tv:e}"));
        }
        let osc = bv.direction_oscillation(a, b);
        if osc >= h {
            bad.push(format!("(v) direction oscillation on ]{a}, {b}[ is {osc:e}"));
        }
        if a.is_finite() && b.is_finite() && !(b - a < h) {
            bad.push(format!("(vi) cell ]{a}, {b}[ wider than h"));
        }
    }
    for (i, &x) in pts.iter().enumerate() {
        let left = if i == 0 { bv.at_minus_infinity() } else { bv.value_right(pts[i - 1]) };
        if (approx.field.value(x) - left).amax() > 1e-12 || (approx.field.value_right(x) - bv.value_right(x)).amax() > 1e-12 {
            bad.push(format!("(vii) values at {x} do not follow the cell rule"));
        }
    }
    bad
}

/// Per-cell non-atomic masses `δ_i` and mean directions `v_i`.
#[derive(Debug, Clone)]
pub struct CellMeasures {
    pub cells: Vec<(f64, f64)>,
    pub delta: Vec<f64>,
    pub v: Vec<Vector>,
}

impl CellMeasures {
    /// `v^h(x)`, constant on `]x_{i−1}, x_i]`.
    pub fn vh(&self, x: f64) -> &Vector {
        let i = self.cells.partition_point(|c| c.1 < x);
        &self.v[i.min(self.v.len() - 1)]
    }

    /// `∫ ‖v^h − v‖ d‖μ‖`.
    pub fn direction_defect(&self, bv: &BVCoefficient) -> f64 {
        let mut total = 0.0;
        for seg in bv.density() {
            let start = self.cells.partition_point(|c| c.1 <= seg.x0);
            for (k, &(a, b)) in self.cells.iter().enumerate().skip(start) {
                let (lo, hi) = (a.max(seg.x0), b.min(seg.x1));
                if lo >= seg.x1 {
                    break;
                }
                if hi <= lo {
                    continue;
                }
                let vi = &self.v[k];
                total += adaptive_simpson(
                    |x| {
                        let w = seg.at(x);
                        let n = w.norm();
                        if n == 0.0 {
                            0.0
                        } else {
                            (vi - w / n).norm() * n
                        }
                    },
                    lo,
                    hi,
                    1e-13,
                );
            }
        }
        total
    }
}

pub fn cell_measures(bv: &BVCoefficient, approx: &CoefficientApproximation) -> CellMeasures {
    let cells: Vec<(f64, f64)> = approx.cells().collect();
    let mut delta = Vec::with_capacity(cells.len());
    let mut v = Vec::with_capacity(cells.len());
    for &(a, b) in &cells {
        let d = bv.mass(a, b);
        delta.push(d);
        v.push(if d > 0.0 { bv.signed_mass(a, b) / d } else { Vector::zeros(bv.dim()) });
    }
    CellMeasures { cells, delta, v }
}
