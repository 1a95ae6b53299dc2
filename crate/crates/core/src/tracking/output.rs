//! Plain CSV writers for fronts, snapshots and functional series.

use std::io::{self, Write};

use super::{GlimmReport, Tracker};
use crate::coefficient::PiecewiseConstField;

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(",")
}

/// One row per front at the tracker's current time.
pub fn write_fronts<W: Write>(tracker: &Tracker, mut w: W) -> io::Result<()> {
    let n = tracker.law().model().n();
    let cols: Vec<String> = (1..=n).map(|k| format!("left{k}")).chain((1..=n).map(|k| format!("right{k}"))).collect();
    writeln!(w, "id,kind,family,sigma,x,speed,{}", cols.join(","))?;
    let t = tracker.time();
    for f in tracker.fronts() {
        let family = f.family.map(|i| i.to_string()).unwrap_or_default();
        let states: Vec<f64> = f.left.iter().chain(f.right.iter()).copied().collect();
        writeln!(
            w,
            "{},{},{},{:.17e},{:.17e},{:.17e},{}",
            f.id,
            f.kind.label(),
            family,
            f.sigma,
            f.position(t),
            f.speed,
            join(&states)
        )?;
    }
    Ok(())
}

/// Piecewise constant profile of `u` and `ζ` on `[a, b]`: a sentinel row at
/// each bound and one row per breakpoint of either field inside, carrying
/// the values to the right of it.
pub fn write_snapshot<W: Write>(u: &PiecewiseConstField, zeta: &PiecewiseConstField, (a, b): (f64, f64), mut w: W) -> io::Result<()> {
    let cols: Vec<String> = (1..=u.dim())
        .map(|k| format!("u{k}"))
        .chain((1..=zeta.dim()).map(|k| format!("zeta{k}")))
        .collect();
    writeln!(w, "x,{}", cols.join(","))?;
    let mut xs: Vec<f64> = u.breaks().iter().chain(zeta.breaks()).copied().filter(|x| *x > a && *x < b).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let row = |x: f64, uv: &crate::numerics::Vector, zv: &crate::numerics::Vector| {
        let vals: Vec<f64> = uv.iter().chain(zv.iter()).copied().collect();
        format!("{x:.17e},{}", join(&vals))
    };
    writeln!(w, "{}", row(a, u.value_right(a), zeta.value_right(a)))?;
    for x in xs {
        writeln!(w, "{}", row(x, u.value_right(x), zeta.value_right(x)))?;
    }
    writeln!(w, "{}", row(b, u.value(b), zeta.value(b)))?;
    Ok(())
}

pub fn write_series<W: Write>(series: &[GlimmReport], mut w: W) -> io::Result<()> {
    let n = series.first().map(|r| r.mass.len()).unwrap_or(0);
    let cols: Vec<String> = (1..=n).map(|k| format!("mass{k}")).collect();
    writeln!(w, "t,V,Q,Upsilon,TV_u,{},n_fronts", cols.join(","))?;
    for r in series {
        writeln!(
            w,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{}",
            r.t,
            r.v,
            r.q,
            r.upsilon,
            r.tv_u,
            join(&r.mass),
            r.n_fronts
        )?;
    }
    Ok(())
}
