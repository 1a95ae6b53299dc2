//! Measurements behind the verification checks, and their evaluation into
//! a report with the default thresholds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Bump, CheckName, RunConfig};
use super::scenario::Problem;
use crate::coefficient::PiecewiseConstField;
use crate::error::Result;
use crate::models::vector;
use crate::tracking::{fit_c0, InteractionMode, Tracker, TrackerConfig};
use crate::verify::{
    admissible_kappa, flat_error, interaction_audit, sharp_error, u_flat, u_sharp, AuditConfig, AuditReport, CoefficientRef, PhiTerms,
    TestFunction, VerificationReport, WeakResidual, ESTIMATE_NAMES,
};

/// Largest zero-wave defect allowed.
pub const ZERO_WAVE_TOL: f64 = 1e-10;
/// Allowed spread `max/min` of the Lipschitz constant across `ε`.
pub const LIPSCHITZ_SPREAD: f64 = 1.2;
/// Allowed growth of the `Φ` rate constant from one `ε` to the next.
pub const PHI_GROWTH: f64 = 1.5;
/// Slack for "decreasing" in the condition-(i) tables.
pub const DECAY_SLACK: f64 = 1e-12;
/// Allowed spread of the fitted condition-(ii) constant across `θ`.
pub const FLAT_SPREAD: f64 = 4.0;
/// Factor in `|residual| ≤ c (ε + h) ‖φ‖_{C¹} TV`.
pub const RESIDUAL_FACTOR: f64 = 5.0;
/// Allowed spread of the interaction constants across scales.
pub const AUDIT_SPREAD: f64 = 2.0;
/// Safety factor on the fitted Glimm weight.
pub const C0_MARGIN: f64 = 1.1;

/// Runs to `t_end` and returns the largest zero-wave defect seen between
/// events.
pub fn zero_wave_defect(problem: &Problem, tcfg: TrackerConfig, t_end: f64) -> Result<f64> {
    let mut tr = problem.tracker(tcfg)?;
    let mut worst = tr.zero_wave_defect();
    tr.advance_observed(t_end, |t, _, _| worst = worst.max(t.zero_wave_defect()))?;
    Ok(worst.max(tr.zero_wave_defect()))
}

#[derive(Debug, Clone)]
pub struct GlimmCheck {
    pub c0: f64,
    pub upsilon0: f64,
    /// `max_t Υ(t) − Υ(0)` with the fitted weight.
    pub excess: f64,
    pub accurate: usize,
    /// Accurate interactions where `Υ` did not strictly decrease.
    pub non_decreasing: usize,
    pub interactions: usize,
    pub series: Vec<(f64, f64)>,
}

/// Runs with recording on and evaluates `Υ = V + C0 Q` along the run, with
/// `C0` given or else fitted on the accurate interactions.
pub fn glimm_check(problem: &Problem, mut tcfg: TrackerConfig, t_end: f64, c0: Option<f64>) -> Result<GlimmCheck> {
    tcfg.record_glimm = true;
    let mut tr = problem.tracker(tcfg)?;
    tr.advance(t_end)?;
    let c0 = c0.unwrap_or_else(|| {
        let c = fit_c0(&tr.log).unwrap_or(f64::INFINITY) * C0_MARGIN;
        if c > 0.0 { c } else { 1.0 }
    });
    let series: Vec<(f64, f64)> = tr.series.iter().map(|r| (r.t, r.v + c0 * r.q)).collect();
    let upsilon0 = series.first().map(|s| s.1).unwrap_or(0.0);
    let excess = series.iter().map(|s| s.1 - upsilon0).fold(0.0, f64::max);
    let mut accurate = 0;
    let mut non_decreasing = 0;
    for r in tr.log.iter().filter(|r| r.mode == InteractionMode::Accurate) {
        accurate += 1;
        if let (Some((v0, q0)), Some((v1, q1))) = (r.before, r.after) {
            if !((v1 + c0 * q1) < (v0 + c0 * q0)) {
                non_decreasing += 1;
            }
        }
    }
    Ok(GlimmCheck {
        c0,
        upsilon0,
        excess,
        accurate,
        non_decreasing,
        interactions: tr.stats.interactions,
        series,
    })
}

/// A bump of L1 size `size` in the first state component, 0.3 left of the
/// coefficient's variation.
pub fn perturbation(problem: &Problem, size: f64) -> Bump {
    let lo = problem.zeta.support().map(|s| s.0).unwrap_or(0.0);
    let n = problem.law.model().n();
    let mut delta = vec![0.0; n];
    delta[0] = size / 0.1;
    Bump {
        x0: Some(lo - 0.3),
        x1: Some(lo - 0.2),
        delta,
    }
}

/// Two runs from `u0` and `u0 + δ` sampled at common times.
#[derive(Debug, Clone)]
pub struct PairSeries {
    pub eps: f64,
    pub times: Vec<f64>,
    pub l1: Vec<f64>,
    pub delta_l1: f64,
    pub phi: Vec<f64>,
    pub kappa: (f64, f64),
    pub weights_ok: bool,
}

impl PairSeries {
    /// `max_t ‖u(t) − v(t)‖ / ‖δ‖`.
    pub fn lipschitz(&self) -> f64 {
        self.l1.iter().fold(0.0f64, |m, d| m.max(*d)) / self.delta_l1
    }

    /// `max_{s<t} [Φ(t) − Φ(s)] / ((t − s) ε)`.
    pub fn phi_rate(&self) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for i in 0..self.times.len() {
            for j in i + 1..self.times.len() {
                best = best.max((self.phi[j] - self.phi[i]) / ((self.times[j] - self.times[i]) * self.eps));
            }
        }
        best
    }
}

/// `∫ ‖a − b‖₁` over the whole line.
pub fn l1_full(a: &PiecewiseConstField, b: &PiecewiseConstField) -> f64 {
    let lo = a.breaks().first().into_iter().chain(b.breaks().first()).fold(0.0f64, |m, x| m.min(*x)) - 1.0;
    let hi = a.breaks().last().into_iter().chain(b.breaks().last()).fold(0.0f64, |m, x| m.max(*x)) + 1.0;
    a.l1_distance(b, lo, hi)
}

/// Advances a tracker and snapshots it at the given increasing times.
pub fn snapshots(mut tr: Tracker, times: &[f64]) -> Result<Vec<PiecewiseConstField>> {
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        tr.advance(t)?;
        out.push(tr.snapshot(t));
    }
    Ok(out)
}

pub fn stability_pair(cfg: &RunConfig, eps: f64, size: f64, t_end: f64, samples: usize, with_phi: bool) -> Result<PairSeries> {
    let base = Problem::build(cfg)?;
    let bump = perturbation(&base, size);
    let moved = Problem::with(cfg, cfg.numerics.h, &[bump])?;
    let times: Vec<f64> = (0..=samples).map(|k| t_end * k as f64 / samples as f64).collect();
    let (su, sv) = rayon::join(
        || snapshots(base.tracker(base.tracker_config(cfg, eps))?, &times),
        || snapshots(moved.tracker(moved.tracker_config(cfg, eps))?, &times),
    );
    let (su, sv) = (su?, sv?);
    let delta_l1 = l1_full(&base.u0, &moved.u0);
    let l1: Vec<f64> = su.iter().zip(&sv).map(|(a, b)| l1_full(a, b)).collect();
    let (mut phi, mut kappa, mut weights_ok) = (Vec::new(), (0.0, 0.0), true);
    if with_phi {
        let zh = &base.approx.field;
        let terms: Vec<PhiTerms> = su
            .par_iter()
            .zip(&sv)
            .map(|(a, b)| PhiTerms::new(&base.law, zh, a, b))
            .collect::<Result<_>>()?;
        let b_max = terms.iter().map(|t| t.b_max()).fold(0.0, f64::max);
        let q_max = terms.iter().map(|t| t.q_sum()).fold(0.0, f64::max);
        kappa = admissible_kappa(cfg.numerics.kappa1, cfg.numerics.kappa2, b_max, q_max);
        for t in &terms {
            let r = t.evaluate(kappa.0, kappa.1);
            weights_ok &= r.weights_admissible();
            phi.push(r.phi);
        }
    }
    Ok(PairSeries {
        eps,
        times,
        l1,
        delta_l1,
        phi,
        kappa,
        weights_ok,
    })
}

/// Errors at one `(τ, ξ)` for each `θ`.
#[derive(Debug, Clone)]
pub struct LocalSample {
    pub tau: f64,
    pub xi: f64,
    pub sharp: Vec<f64>,
    pub flat: Vec<f64>,
    /// `[TV(u(τ), ]a,b[) + TV(ζ, ]a,b[)]²` on the interval of each `θ`.
    pub tv2: Vec<f64>,
}

impl LocalSample {
    pub fn sharp_decreasing(&self) -> bool {
        self.sharp.windows(2).all(|w| w[1] <= w[0] + DECAY_SLACK)
    }
}

/// Condition-(i) and -(ii) errors at random points `(τ, ξ)`, `τ` uniform in
/// `tau_range`, `ξ` uniform in `xi_range`. The interval of condition (ii)
/// is `ξ ± 2 λ̂ θ`.
pub fn local_samples(
    problem: &Problem,
    tcfg: TrackerConfig,
    thetas: &[f64],
    samples: usize,
    seed: u64,
    tau_range: (f64, f64),
    xi_range: (f64, f64),
) -> Result<Vec<LocalSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<(f64, f64)> = (0..samples)
        .map(|_| (rng.gen_range(tau_range.0..tau_range.1), rng.gen_range(xi_range.0..xi_range.1)))
        .collect();
    let mut times: Vec<f64> = points.iter().flat_map(|(tau, _)| std::iter::once(*tau).chain(thetas.iter().map(move |th| tau + th))).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let snaps = snapshots(problem.tracker(tcfg)?, &times)?;
    let at = |t: f64| &snaps[times.partition_point(|s| *s < t)];
    let law = &problem.law;
    let zh = &problem.approx.field;
    let lh = law.model().lambda_hat();
    points
        .par_iter()
        .map(|&(tau, xi)| {
            let now = at(tau);
            let fan = u_sharp(law, CoefficientRef::Field(zh), now, xi)?;
            let mut s = LocalSample {
                tau,
                xi,
                sharp: Vec::new(),
                flat: Vec::new(),
                tv2: Vec::new(),
            };
            for &th in thetas {
                let later = at(tau + th);
                s.sharp.push(sharp_error(law, &fan, later, xi, th));
                let (a, b) = (xi - 2.0 * lh * th, xi + 2.0 * lh * th);
                let flat = u_flat(law, CoefficientRef::Field(zh), now, xi, th)?;
                s.flat.push(flat_error(law, &flat, later, a, b));
                let tv = now.tv_open(a, b) + zh.tv_open(a, b);
                s.tv2.push(tv * tv);
            }
            Ok(s)
        })
        .collect()
}

/// `max error/tv²` at each `θ` over samples with positive variation, and
/// the largest error where the variation vanishes.
/// Per-level constants `max flat / tv²`, the largest error on windows with
/// no variation, and the number of windows skipped because their variation
/// is below `floor`. Such windows hold only non-physical fronts and
/// sub-resolution pieces, whose error is first order in their size.
pub fn flat_constants(samples: &[LocalSample], levels: usize, floor: f64) -> (Vec<f64>, f64, usize) {
    let mut c = vec![0.0f64; levels];
    let mut exact = 0.0f64;
    let mut skipped = 0;
    for s in samples {
        for k in 0..levels {
            if s.tv2[k] >= floor * floor && s.tv2[k] > 0.0 {
                c[k] = c[k].max(s.flat[k] / s.tv2[k]);
            } else if s.tv2[k] > 0.0 {
                skipped += 1;
            } else {
                exact = exact.max(s.flat[k]);
            }
        }
    }
    (c, exact, skipped)
}

#[derive(Debug, Clone)]
pub struct ResidualCheck {
    pub tests: Vec<TestFunction>,
    pub residuals: Vec<f64>,
    pub bounds: Vec<f64>,
    pub tv_bound: f64,
}

/// Weak residual of a run against random bumps supported in
/// `(0, t_end) × xi_range`.
pub fn residual_check(problem: &Problem, tcfg: TrackerConfig, t_end: f64, count: usize, seed: u64, xi_range: (f64, f64)) -> Result<ResidualCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tests: Vec<TestFunction> = (0..count)
        .map(|_| {
            let rt = rng.gen_range(0.1..0.3) * t_end;
            let t0 = rng.gen_range(rt * 1.01..t_end - rt * 1.01);
            let rx = rng.gen_range(0.1..0.5);
            let x0 = rng.gen_range(xi_range.0..xi_range.1);
            TestFunction { t0, rt, x0, rx }
        })
        .collect();
    let eps = tcfg.eps;
    let mut tr = problem.tracker(tcfg)?;
    let mut acc = WeakResidual::new(problem.law.clone(), problem.zeta.clone(), tests.clone());
    let mut tv_u = tr.snapshot(0.0).total_variation();
    tr.advance_observed(t_end, |t, t0, t1| {
        acc.accumulate(|s| t.snapshot(s), t0, t1);
        tv_u = tv_u.max(t.snapshot(t1).total_variation());
    })?;
    let tv_bound = tv_u + problem.zeta.total_variation();
    let h = problem.approx.h;
    let bounds = tests.iter().map(|tf| RESIDUAL_FACTOR * (eps + h) * tf.c1_norm() * tv_bound).collect();
    Ok(ResidualCheck {
        residuals: acc.residuals(),
        tests,
        bounds,
        tv_bound,
    })
}

pub fn audit_config(cfg: &RunConfig) -> AuditConfig {
    let v = &cfg.verification;
    AuditConfig {
        samples: v.audit_samples,
        scales: v.audit_scales.clone(),
        seed: v.seed,
        u_center: vector(&[1.0, 0.0]),
        u_spread: vector(&[0.2, 0.2]),
        z_center: vector(&[1.0, 0.0]),
        z_spread: vector(&[0.1, 0.1]),
        floor: 1e-2,
    }
}

fn xi_range(problem: &Problem) -> (f64, f64) {
    let (lo, hi) = problem.zeta.support().unwrap_or((0.0, 0.0));
    (lo - 1.0, hi + 1.0)
}

/// Runs the enabled checks and records them in `report`.
pub fn run_checks(cfg: &RunConfig, checks: &[CheckName], report: &mut VerificationReport) -> Result<()> {
    let problem = Problem::build(cfg)?;
    let v = &cfg.verification;
    let t_end = cfg.numerics.t_end;
    let eps = cfg.numerics.eps;
    let tcfg = || problem.tracker_config(cfg, eps);
    let wants = |c: CheckName| checks.contains(&c);

    if wants(CheckName::ZeroWave) {
        let d = zero_wave_defect(&problem, tcfg(), t_end)?;
        report.constant("zero_wave_defect", d);
        report.check("zero_wave", d <= ZERO_WAVE_TOL, format!("max defect {d:.3e} (tolerance {ZERO_WAVE_TOL:e})"));
    }
    if wants(CheckName::Glimm) {
        let g = glimm_check(&problem, tcfg(), t_end, cfg.numerics.c0)?;
        report.constant("c0", g.c0);
        report.constant("upsilon0", g.upsilon0);
        let bound = v.glimm_slack * eps;
        report.check(
            "glimm_bound",
            g.excess <= bound,
            format!("max Υ(t) − Υ(0) = {:.3e} vs K ε = {bound:.3e}", g.excess),
        );
        report.check(
            "glimm_decrease",
            g.non_decreasing == 0,
            format!("{} of {} accurate interactions without strict decrease", g.non_decreasing, g.accurate),
        );
    }
    if wants(CheckName::Lipschitz) || wants(CheckName::Phi) {
        let with_phi = wants(CheckName::Phi);
        let pairs: Vec<PairSeries> = v
            .eps_levels
            .iter()
            .map(|&e| stability_pair(cfg, e, v.perturbation, t_end, 50, with_phi))
            .collect::<Result<_>>()?;
        let ls: Vec<f64> = pairs.iter().map(|p| p.lipschitz()).collect();
        if wants(CheckName::Lipschitz) {
            let spread = ls.iter().copied().fold(0.0, f64::max) / ls.iter().copied().fold(f64::INFINITY, f64::min);
            report.constant("lipschitz_max", ls.iter().copied().fold(0.0, f64::max));
            report.table("lipschitz", &["eps", "L"], pairs.iter().zip(&ls).map(|(p, l)| vec![p.eps, *l]).collect());
            report.check("lipschitz", spread < LIPSCHITZ_SPREAD, format!("spread of L across eps {spread:.3}"));
        }
        if with_phi {
            let rates: Vec<f64> = pairs.iter().map(|p| p.phi_rate()).collect();
            let stable = rates.windows(2).all(|w| w[1] <= PHI_GROWTH * w[0].max(0.0) || w[1] <= 0.0);
            let weights = pairs.iter().all(|p| p.weights_ok);
            report.table(
                "phi_rate",
                &["eps", "C", "kappa1", "kappa2"],
                pairs.iter().zip(&rates).map(|(p, c)| vec![p.eps, *c, p.kappa.0, p.kappa.1]).collect(),
            );
            report.check("phi_weights", weights, "1 ≤ W_i ≤ 2 at all sampled times");
            report.check("phi_rate", stable, format!("rate constants {}", sci(&rates)));
        }
    }
    if wants(CheckName::Characterization) {
        let samples = local_samples(&problem, tcfg(), &v.thetas, v.samples, v.seed, (0.05, 0.5 * t_end), xi_range(&problem))?;
        let decreasing = samples.iter().filter(|s| s.sharp_decreasing()).count();
        let (c, exact, skipped) = flat_constants(&samples, v.thetas.len(), cfg.numerics.eps);
        let c_max = c.iter().copied().fold(0.0, f64::max);
        let c_min = c.iter().copied().fold(f64::INFINITY, f64::min);
        report.constant("flat_constant", c_max);
        let mean = |k: usize, f: &dyn Fn(&LocalSample) -> f64| samples.iter().map(f).sum::<f64>() / samples.len().max(1) as f64 / (k as f64).max(1.0);
        report.table(
            "local_errors",
            &["theta", "mean_sharp_error", "mean_flat_error", "flat_constant"],
            v.thetas
                .iter()
                .enumerate()
                .map(|(k, th)| vec![*th, mean(1, &|s| s.sharp[k]), mean(1, &|s| s.flat[k]), c[k]])
                .collect(),
        );
        report.check(
            "sharp_decay",
            decreasing == samples.len(),
            format!("{decreasing} of {} samples decrease along θ-halving", samples.len()),
        );
        report.check(
            "flat_bound",
            c_max.is_finite() && c_max <= FLAT_SPREAD * c_min.max(f64::MIN_POSITIVE) && exact <= 1e-10,
            format!("fitted C per θ {}, error without variation {exact:.1e}, {skipped} windows below ε skipped", sci(&c)),
        );
    }
    if wants(CheckName::WeakResidual) {
        let r = residual_check(&problem, tcfg(), t_end, v.test_functions, v.seed, xi_range(&problem))?;
        let ok = r.residuals.iter().zip(&r.bounds).all(|(a, b)| a <= b);
        let worst = r.residuals.iter().zip(&r.bounds).map(|(a, b)| a / b).fold(0.0, f64::max);
        report.constant("residual_to_bound", worst);
        report.table(
            "weak_residual",
            &["t0", "x0", "residual", "bound"],
            r.tests.iter().zip(r.residuals.iter().zip(&r.bounds)).map(|(t, (a, b))| vec![t.t0, t.x0, *a, *b]).collect(),
        );
        report.check("weak_residual", ok, format!("largest residual/bound {worst:.3e}"));
    }
    if wants(CheckName::InteractionAudit) {
        let a: AuditReport = interaction_audit(&problem.law, &audit_config(cfg));
        let var = a.variation();
        for (k, name) in ESTIMATE_NAMES.iter().enumerate() {
            report.constant(format!("audit_{name}"), a.fits.iter().map(|f| f.constants[k]).fold(0.0, f64::max));
        }
        report.table(
            "interaction_audit",
            &["scale", "C_interaction", "C_generalized", "C_nonphysical", "failures"],
            a.fits.iter().map(|f| vec![f.scale, f.constants[0], f.constants[1], f.constants[2], f.failures as f64]).collect(),
        );
        let finite = a.fits.iter().all(|f| f.constants.iter().all(|c| c.is_finite()) && f.failures == 0);
        report.check("interaction_audit", finite && var.iter().all(|v| *v < AUDIT_SPREAD), format!("variation across scales {}", sci(&var)));
    }
    Ok(())
}

fn sci(v: &[f64]) -> String {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", cells.join(", "))
}
