use serde::{Deserialize, Serialize};

use super::{BVCoefficient, DensitySegment};
use crate::error::{Error, Result};
use crate::numerics::Vector;

/// Sub-pieces used to represent `1/σ` on a linear width segment.
const RECIPROCAL_PIECES: usize = 64;

/// A scalar profile along the canal, constant outside its nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `values[0]` left of `breaks[0]`, `values[k]` on `(breaks[k−1], breaks[k]]`.
    Steps {
        breaks: Vec<f64>,
        values: Vec<f64>,
    },
    /// Nodes joined linearly; a repeated abscissa marks a jump.
    Table {
        x: Vec<f64>,
        y: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Transform {
    Identity,
    Reciprocal,
}

impl Transform {
    fn apply(self, y: f64) -> f64 {
        match self {
            Transform::Identity => y,
            Transform::Reciprocal => 1.0 / y,
        }
    }
}

/// Jumps `(x, before, after)` and linear pieces `(x0, x1, y0, y1)`.
struct Pieces {
    first: f64,
    jumps: Vec<(f64, f64, f64)>,
    linear: Vec<(f64, f64, f64, f64)>,
}

impl Profile {
    fn pieces(&self) -> Result<Pieces> {
        match self {
            Profile::Constant { value } => Ok(Pieces {
                first: *value,
                jumps: Vec::new(),
                linear: Vec::new(),
            }),
            Profile::Steps { breaks, values } => {
                if values.len() != breaks.len() + 1 || breaks.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::Config("step profile: need increasing breaks and one more value".into()));
                }
                Ok(Pieces {
                    first: values[0],
                    jumps: breaks.iter().enumerate().map(|(k, x)| (*x, values[k], values[k + 1])).collect(),
                    linear: Vec::new(),
                })
            }
            Profile::Table { x, y } => {
                if x.is_empty() || x.len() != y.len() || x.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::Config("table profile: need matching, non-decreasing nodes".into()));
                }
                if x.windows(3).any(|w| w[0] == w[1] && w[1] == w[2]) {
                    return Err(Error::Config("table profile: abscissa repeated more than twice".into()));
                }
                let mut p = Pieces {
                    first: y[0],
                    jumps: Vec::new(),
                    linear: Vec::new(),
                };
                for k in 0..x.len() - 1 {
                    if x[k] == x[k + 1] {
                        p.jumps.push((x[k], y[k], y[k + 1]));
                    } else {
                        p.linear.push((x[k], x[k + 1], y[k], y[k + 1]));
                    }
                }
                Ok(p)
            }
        }
    }
}

/// Piecewise constant density `(x0, x1, slope)` of `φ(profile)`.
fn density_pieces(p: &Pieces, t: Transform) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for &(x0, x1, y0, y1) in &p.linear {
        match t {
            Transform::Identity => out.push((x0, x1, (y1 - y0) / (x1 - x0))),
            Transform::Reciprocal => {
                // constant density per sub-piece with the exact increment,
                // so 1/σ is matched at every sub-node
                for k in 0..RECIPROCAL_PIECES {
                    let s0 = k as f64 / RECIPROCAL_PIECES as f64;
                    let s1 = (k + 1) as f64 / RECIPROCAL_PIECES as f64;
                    let (a, b) = (x0 + s0 * (x1 - x0), x0 + s1 * (x1 - x0));
                    let (ya, yb) = (y0 + s0 * (y1 - y0), y0 + s1 * (y1 - y0));
                    out.push((a, b, (t.apply(yb) - t.apply(ya)) / (b - a)));
                }
            }
        }
    }
    out
}

fn build(components: &[(&Profile, Transform)]) -> Result<BVCoefficient> {
    let p = components.len();
    let pieces: Vec<Pieces> = components.iter().map(|(pr, _)| pr.pieces()).collect::<Result<_>>()?;
    for (pc, (_, t)) in pieces.iter().zip(components) {
        let all = std::iter::once(pc.first)
            .chain(pc.jumps.iter().flat_map(|j| [j.1, j.2]))
            .chain(pc.linear.iter().flat_map(|l| [l.2, l.3]));
        for y in all {
            if !y.is_finite() || (*t == Transform::Reciprocal && y <= 0.0) {
                return Err(Error::Config(format!("profile value {y} not admissible")));
            }
        }
    }
    let base = Vector::from_iterator(p, pieces.iter().zip(components).map(|(pc, (_, t))| t.apply(pc.first)));

    let mut jump_x: Vec<f64> = pieces.iter().flat_map(|pc| pc.jumps.iter().map(|j| j.0)).collect();
    jump_x.sort_by(f64::total_cmp);
    jump_x.dedup();
    let jumps = jump_x
        .iter()
        .map(|&x| {
            let d = Vector::from_iterator(
                p,
                pieces.iter().zip(components).map(|(pc, (_, t))| {
                    pc.jumps
                        .iter()
                        .find(|j| j.0 == x)
                        .map(|j| t.apply(j.2) - t.apply(j.1))
                        .unwrap_or(0.0)
                }),
            );
            (x, d)
        })
        .collect();

    let dens: Vec<Vec<(f64, f64, f64)>> = pieces.iter().zip(components).map(|(pc, (_, t))| density_pieces(pc, *t)).collect();
    let mut cuts: Vec<f64> = dens.iter().flatten().flat_map(|d| [d.0, d.1]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut density = Vec::new();
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let v = Vector::from_iterator(
            p,
            dens.iter().map(|d| d.iter().find(|s| s.0 <= mid && mid < s.1).map(|s| s.2).unwrap_or(0.0)),
        );
        if v.amax() > 0.0 {
            density.push(DensitySegment::constant(w[0], w[1], v));
        }
    }
    BVCoefficient::new(base, jumps, density)
}

/// `ζ = (1/σ, b)` from the canal width `σ` and bed height `b`.
pub fn canal_coefficient(width: &Profile, bed: &Profile) -> Result<BVCoefficient> {
    build(&[(width, Transform::Reciprocal), (bed, Transform::Identity)])
}

/// `ζ` given componentwise.
pub fn coefficient_from_profiles(components: &[Profile]) -> Result<BVCoefficient> {
    let list: Vec<(&Profile, Transform)> = components.iter().map(|c| (c, Transform::Identity)).collect();
    build(&list)
}
