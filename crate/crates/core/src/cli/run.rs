//! The `run`, `converge` and `verify` verbs.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::checks::{l1_full, run_checks, C0_MARGIN};
use super::config::RunConfig;
use super::scenario::Problem;
use crate::error::{Error, Result};
use crate::tracking::fit_c0;
use crate::tracking::output::{write_fronts, write_series, write_snapshot};
use crate::verify::VerificationReport;

/// Overrides `outputs.dir` when set.
pub const OUTPUT_DIR_VAR: &str = "BVTRACK_OUTPUT_DIR";

pub fn output_dir(cfg: &RunConfig) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(&cfg.outputs.dir))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::Io(format!("bad output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn csv(fill: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    fill(&mut buf)?;
    Ok(buf)
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: String,
    pub report: Option<VerificationReport>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.report.as_ref().map_or(true, |r| r.all_passed())
    }
}

fn checks_report(cfg: &RunConfig) -> Result<Option<VerificationReport>> {
    if cfg.verification.checks.is_empty() {
        return Ok(None);
    }
    let mut report = VerificationReport::default();
    run_checks(cfg, &cfg.verification.checks, &mut report)?;
    Ok(Some(report))
}

pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    let dir = output_dir(cfg);
    let problem = Problem::build(cfg)?;
    let mut tcfg = problem.tracker_config(cfg, cfg.numerics.eps);
    tcfg.record_glimm = true;
    let mut tr = problem.tracker(tcfg)?;
    let window = (cfg.numerics.window[0], cfg.numerics.window[1]);
    let mut times = cfg.outputs.snapshot_times.clone();
    times.sort_by(f64::total_cmp);
    for (k, &t) in times.iter().enumerate() {
        tr.advance(t)?;
        let snap = tr.snapshot(t);
        let bytes = csv(|w| write_snapshot(&snap, &problem.approx.field, window, w))?;
        atomic_write(&dir.join(format!("snapshot_{k}.csv")), &bytes)?;
    }
    tr.advance(cfg.numerics.t_end)?;

    // the weight is either given or fitted on this run's interactions
    let c0 = match cfg.numerics.c0 {
        Some(c) => c,
        None => fit_c0(&tr.log).map(|c| c * C0_MARGIN).filter(|c| *c > 0.0).unwrap_or(1.0),
    };
    let mut series = tr.series.clone();
    for r in &mut series {
        r.c0 = c0;
        r.upsilon = r.v + c0 * r.q;
    }
    if cfg.outputs.series {
        atomic_write(&dir.join("series.csv"), &csv(|w| write_series(&series, w))?)?;
    }
    if cfg.outputs.fronts {
        atomic_write(&dir.join("fronts.csv"), &csv(|w| write_fronts(&tr, w))?)?;
    }

    let s = &tr.stats;
    let ups0 = series.first().map_or(0.0, |r| r.upsilon);
    let ups_max = series.iter().map(|r| r.upsilon).fold(ups0, f64::max);
    let mut summary = String::new();
    let _ = writeln!(summary, "[run]");
    let _ = writeln!(summary, "t_end = {}", cfg.numerics.t_end);
    let _ = writeln!(summary, "eps = {}", cfg.numerics.eps);
    let _ = writeln!(summary, "h = {}", cfg.numerics.h);
    let _ = writeln!(summary, "interactions = {}", s.interactions);
    let _ = writeln!(summary, "accurate = {}", s.accurate);
    let _ = writeln!(summary, "simplified = {}", s.simplified);
    let _ = writeln!(summary, "nonphysical = {}", s.nonphysical);
    let _ = writeln!(summary, "fronts_final = {}", tr.front_count());
    let _ = writeln!(summary, "fronts_max = {}", s.max_fronts);
    let _ = writeln!(summary, "c0 = {c0:.6e}");
    let _ = writeln!(summary, "upsilon0 = {ups0:.6e}");
    let _ = writeln!(summary, "upsilon_max = {ups_max:.6e}");
    let stride = (series.len() / 20).max(1);
    let _ = writeln!(summary, "\n[upsilon]");
    for r in series.iter().step_by(stride).chain(series.last()) {
        let _ = writeln!(summary, "{:.6e} {:.6e} {}", r.t, r.upsilon, r.n_fronts);
    }

    let report = checks_report(cfg)?;
    if let Some(r) = &report {
        atomic_write(&dir.join("report.txt"), r.to_string().as_bytes())?;
        let _ = writeln!(summary, "\n[checks]\nstatus = {}", if r.all_passed() { "pass" } else { "fail" });
    }
    let _ = writeln!(summary, "\nwall_time_s = {:.3}", start.elapsed().as_secs_f64());
    atomic_write(&dir.join("summary.txt"), summary.as_bytes())?;
    Ok(RunOutcome { summary, report })
}

pub fn verify(cfg: &RunConfig) -> Result<RunOutcome> {
    let mut cfg = cfg.clone();
    if cfg.verification.checks.is_empty() {
        cfg.verification.checks = super::config::CheckName::ALL.to_vec();
    }
    let report = checks_report(&cfg)?.expect("checks enabled");
    let text = report.to_string();
    atomic_write(&output_dir(&cfg).join("report.txt"), text.as_bytes())?;
    Ok(RunOutcome {
        summary: text,
        report: Some(report),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub h: f64,
    /// L1 distance at `t_end` to the next finer level.
    pub distance: Option<f64>,
    /// `log2` of the ratio of successive distances.
    pub order: Option<f64>,
}

/// Levels `(ε, h)` from the config lists, or four dyadic halvings.
pub fn levels(cfg: &RunConfig) -> Vec<(f64, f64)> {
    let n = &cfg.numerics;
    match (&n.eps_list, &n.h_list) {
        (Some(e), Some(h)) => e.iter().copied().zip(h.iter().copied()).collect(),
        (Some(e), None) => e.iter().map(|e| (*e, n.h)).collect(),
        (None, Some(h)) => h.iter().map(|h| (n.eps, *h)).collect(),
        (None, None) => (0..4).map(|k| (n.eps / f64::from(1 << k), n.h / f64::from(1 << k))).collect(),
    }
}

/// Runs every level to `t_end` and compares successive levels in L1 over
/// the whole line.
pub fn convergence(cfg: &RunConfig) -> Result<Vec<ConvergenceRow>> {
    let t_end = cfg.numerics.t_end;
    let finals = levels(cfg)
        .par_iter()
        .map(|&(eps, h)| {
            let p = Problem::with(cfg, h, &[])?;
            let mut tr = p.tracker(p.tracker_config(cfg, eps))?;
            tr.advance(t_end)?;
            Ok(((eps, h), tr.snapshot(t_end)))
        })
        .collect::<Result<Vec<_>>>()?;
    let dist: Vec<f64> = finals.windows(2).map(|w| l1_full(&w[0].1, &w[1].1)).collect();
    Ok(finals
        .iter()
        .enumerate()
        .map(|(k, ((eps, h), _))| ConvergenceRow {
            eps: *eps,
            h: *h,
            distance: dist.get(k).copied(),
            order: match (k.checked_sub(1).and_then(|j| dist.get(j)), dist.get(k)) {
                (Some(d0), Some(d1)) => Some((d0 / d1).log2()),
                _ => None,
            },
        })
        .collect())
}

pub fn converge(cfg: &RunConfig) -> Result<RunOutcome> {
    let rows = convergence(cfg)?;
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.17e}")).unwrap_or_default();
    let mut text = String::from("level,eps,h,distance,order\n");
    for (k, r) in rows.iter().enumerate() {
        let _ = writeln!(text, "{k},{:.17e},{:.17e},{},{}", r.eps, r.h, opt(r.distance), opt(r.order));
    }
    atomic_write(&output_dir(cfg).join("convergence.csv"), text.as_bytes())?;
    let report = checks_report(cfg)?;
    if let Some(r) = &report {
        atomic_write(&output_dir(cfg).join("report.txt"), r.to_string().as_bytes())?;
    }
    Ok(RunOutcome { summary: text, report })
}
