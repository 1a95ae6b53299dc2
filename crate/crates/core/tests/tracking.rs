use bvtrack::coefficient::{approximate, canal_coefficient, PiecewiseConstField, Profile, DEFAULT_CELL_CAP};
use bvtrack::models::{shock_curve, vector, BalanceLaw, CanalModel, FieldKind, FluxModel, LinearCoupling, LinearSystemModel};
use bvtrack::numerics::Vector;
use bvtrack::riemann::solve_standard;
use bvtrack::tracking::{fit_c0, steady_state, Front, FrontKind, InteractionMode, Tracker, TrackerConfig};
use proptest::prelude::*;

fn canal() -> BalanceLaw {
    BalanceLaw::canal(CanalModel::new(9.81))
}

fn flat() -> PiecewiseConstField {
    PiecewiseConstField::constant(vector(&[1.0, 0.0]))
}

fn config(eps: f64) -> TrackerConfig {
    let mut cfg = TrackerConfig::new(eps);
    cfg.record_glimm = true;
    cfg
}

fn field(breaks: &[f64], values: &[[f64; 2]]) -> PiecewiseConstField {
    PiecewiseConstField::new(breaks.to_vec(), values.iter().map(|v| vector(v)).collect()).unwrap()
}

/// Bed steps of the given heights at the given positions over a unit-width
/// canal, and the lake at rest on it with a raised pool left of `dam`.
fn stepped_canal(steps: &[(f64, f64)], dam: f64, pool: f64) -> (PiecewiseConstField, PiecewiseConstField) {
    let mut x = Vec::new();
    let mut y = vec![0.0];
    for &(at, dh) in steps {
        x.push(at);
        y.push(y.last().unwrap() + dh);
    }
    let bed = Profile::Steps { breaks: x, values: y };
    let zeta = canal_coefficient(&Profile::Constant { value: 1.0 }, &bed).unwrap();
    let zh = approximate(&zeta, 0.05, DEFAULT_CELL_CAP).unwrap().field;
    let rest = steady_state(&canal(), &zh, &vector(&[1.0, 0.0])).unwrap();
    let mut breaks: Vec<f64> = rest.breaks().to_vec();
    breaks.push(dam);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let raise = |x: f64, v: &Vector| if x <= dam { v + vector(&[pool, 0.0]) } else { v.clone() };
    let mut values = vec![raise(breaks[0] - 1.0, rest.value(breaks[0] - 1.0))];
    values.extend(breaks.iter().map(|&b| raise(b + 1e-9, rest.value_right(b))));
    (zh, PiecewiseConstField::new(breaks, values).unwrap())
}

/// `(V, Q)` enumerated pair by pair.
fn brute_force_potentials(model: &dyn FluxModel, fronts: &[&Front]) -> (f64, f64) {
    let n = model.n();
    let io = model.i_o();
    let sizes: Vec<Option<Vector>> = fronts
        .iter()
        .map(|f| match f.kind {
            FrontKind::ZeroWave => None,
            FrontKind::NonPhysical => Some(solve_standard(model, &f.z_left, &f.left, &f.right).unwrap().0.sigma),
            _ => {
                let mut s = Vector::zeros(n);
                s[f.family.unwrap()] = f.sigma;
                Some(s)
            }
        })
        .collect();
    let mut v = 0.0;
    let mut q = 0.0;
    for (a, sa) in sizes.iter().enumerate() {
        match sa {
            None => v += fronts[a].sigma,
            Some(s) => v += s.lp_norm(1),
        }
        for (b, sb) in sizes.iter().enumerate().skip(a + 1) {
            match (sa, sb) {
                (Some(x), Some(y)) => {
                    for i in 0..n {
                        for j in 0..n {
                            let p = (x[i] * y[j]).abs();
                            if i > j {
                                q += p;
                            }
                            if i == j && model.field_kind(i) == FieldKind::GenuinelyNonlinear && x[i].min(y[i]) < 0.0 {
                                q += p;
                            }
                        }
                    }
                }
                (None, Some(y)) => q += fronts[a].sigma * (0..io).map(|j| y[j].abs()).sum::<f64>(),
                (Some(x), None) => q += fronts[b].sigma * (io..n).map(|j| x[j].abs()).sum::<f64>(),
                (None, None) => {}
            }
        }
    }
    (v, q)
}

#[test]
fn constant_data_has_no_fronts() {
    let mut t = Tracker::init(canal(), flat(), &flat(), config(0.01)).unwrap();
    assert_eq!(t.front_count(), 0);
    assert!(t.next_event().is_none());
    t.advance(3.0).unwrap();
    assert_eq!(t.snapshot(3.0), flat());
}

#[test]
fn single_coefficient_jump() {
    let zeta = field(&[0.0], &[[1.0, 0.0], [1.0, 0.1]]);
    let t = Tracker::init(canal(), zeta, &flat(), config(0.01)).unwrap();
    let zero: Vec<_> = t.fronts().filter(|f| f.kind == FrontKind::ZeroWave).collect();
    assert_eq!(zero.len(), 1);
    assert!(t.front_count() > 1);
    let g = t.glimm();
    assert!(g.upsilon <= 10.0 * 0.1, "Υ(0) = {}", g.upsilon);
    assert!(t.zero_wave_defect() <= 1e-10);
    let fronts: Vec<&Front> = t.fronts().collect();
    let (v, q) = brute_force_potentials(t.law().model(), &fronts);
    assert!((v - g.v).abs() < 1e-12 && (q - g.q).abs() < 1e-12);
}

#[test]
fn initial_profile_is_reproduced() {
    let (zh, u0) = stepped_canal(&[(0.0, 0.02), (0.5, -0.01)], -0.5, 0.03);
    let t = Tracker::init(canal(), zh, &u0, config(0.01)).unwrap();
    assert!(t.snapshot(0.0).l1_distance(&u0, -10.0, 10.0) <= 0.01);
}

#[test]
fn collision_time_from_kinematics() {
    // speeds 3 and −1, unit gap: contact at t = 1/4
    let law = BalanceLaw::linear(LinearSystemModel::default_2x2(), LinearCoupling::default_2x2());
    let zeta = PiecewiseConstField::constant(vector(&[0.0]));
    let u0 = field(&[0.0, 1.0], &[[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]]);
    let mut t = Tracker::init(law, zeta, &u0, config(0.01)).unwrap();
    assert_eq!(t.front_count(), 2);
    let (time, _, _) = t.next_event().unwrap();
    assert!((time - 0.25).abs() < 1e-12);
    t.advance(1.0).unwrap();
    assert!(t.next_event().is_none());
    assert_eq!(t.stats.interactions, 1);
}

#[test]
fn dam_break_has_no_interactions() {
    let u0 = field(&[0.0], &[[1.1, 0.0], [0.9, 0.0]]);
    let mut t = Tracker::init(canal(), flat(), &u0, config(0.01)).unwrap();
    let before = t.glimm();
    t.advance(2.0).unwrap();
    assert_eq!(t.stats.interactions, 0);
    let after = t.glimm();
    assert_eq!(before.v, after.v);
    assert_eq!(before.q, after.q);
    let shocks = t.fronts().filter(|f| f.kind == FrontKind::Shock).count();
    let rarefactions = t.fronts().filter(|f| f.kind == FrontKind::Rarefaction).count();
    assert_eq!(shocks, 1);
    assert!(rarefactions > 1);
    // V is the plain sum of sizes
    let sum: f64 = t.fronts().map(|f| f.sigma.abs()).sum();
    assert!((sum - after.v).abs() < 1e-14);
}

#[test]
fn same_family_shocks_merge_and_lower_upsilon() {
    let model = CanalModel::new(9.81);
    let z = vector(&[1.0, 0.0]);
    let a = vector(&[1.0, 0.0]);
    let b = shock_curve(&model, &z, 0, -0.05, &a).unwrap();
    let c = shock_curve(&model, &z, 0, -0.05, &b).unwrap();
    let u0 = PiecewiseConstField::new(vec![0.0, 0.2], vec![a, b, c]).unwrap();
    let mut t = Tracker::init(canal(), flat(), &u0, config(0.01)).unwrap();
    t.advance(5.0).unwrap();
    assert!(t.stats.accurate >= 1);
    let rec = t.log.iter().find(|r| r.kinds == (FrontKind::Shock, FrontKind::Shock)).unwrap();
    let (v0, q0) = rec.before.unwrap();
    let (v1, q1) = rec.after.unwrap();
    assert!(v1 + 10.0 * q1 < v0 + 10.0 * q0);
}

#[test]
fn canal_mass_is_conserved_with_accurate_solves() {
    let (zh, u0) = stepped_canal(&[(0.0, 0.03), (0.4, 0.02), (1.0, -0.04)], -0.5, 0.05);
    let mut cfg = config(0.01);
    cfg.rho = Some(0.0);
    cfg.window = (-30.0, 30.0);
    let mut t = Tracker::init(canal(), zh, &u0, cfg).unwrap();
    let m0 = t.glimm().mass[0];
    t.advance(3.0).unwrap();
    assert!(t.stats.accurate > 10);
    assert_eq!(t.stats.simplified, 0);
    let m1 = t.glimm().mass[0];
    assert!((m1 - m0).abs() < 1e-9, "{m0} vs {m1}");
}

#[test]
fn rarefaction_steps_through_zero_waves_keep_the_relation() {
    // the left-going rarefaction crosses two bed steps
    let (zh, u0) = stepped_canal(&[(-1.0, 0.03), (-0.6, -0.02)], 0.0, 0.05);
    let mut t = Tracker::init(canal(), zh, &u0, config(0.01)).unwrap();
    let mut worst: f64 = 0.0;
    t.advance_observed(1.0, |tr, _, _| worst = worst.max(tr.zero_wave_defect())).unwrap();
    assert!(t.log.iter().any(|r| r.kinds == (FrontKind::ZeroWave, FrontKind::Rarefaction)));
    assert!(worst <= 1e-10, "{worst:e}");
    assert!(t.audit().is_empty());
}

#[test]
fn time_lipschitz_in_l1() {
    let (zh, u0) = stepped_canal(&[(0.0, 0.02), (0.3, 0.02)], -0.3, 0.04);
    let law = canal();
    let lambda_hat = law.model().lambda_hat();
    let mut t = Tracker::init(law, zh, &u0, config(0.01)).unwrap();
    let mut prev = t.snapshot(0.0);
    let mut tv_max = prev.total_variation();
    for k in 1..=20 {
        let s = 0.05 * k as f64;
        t.advance(s).unwrap();
        let snap = t.snapshot(s);
        tv_max = tv_max.max(snap.total_variation());
        let d = snap.l1_distance(&prev, -20.0, 20.0);
        // ‖·‖₁ ≤ √2 ‖·‖₂ for two components
        assert!(d <= lambda_hat * tv_max * 2f64.sqrt() * 0.05 * (1.0 + 1e-9), "step {k}: {d}");
        prev = snap;
    }
}

#[test]
fn glimm_functional_bound_and_fitted_c0() {
    let (zh, u0) = stepped_canal(&[(0.0, 0.01), (0.3, 0.01), (0.7, -0.01)], -0.5, 0.03);
    let mut t = Tracker::init(canal(), zh, &u0, config(0.005)).unwrap();
    t.advance(5.0).unwrap();
    let c0 = fit_c0(&t.log).expect("every accurate interaction lowers Q when it raises V");
    assert!(c0 < 10.0, "fitted C0 = {c0}");
    let u0v = t.series[0].upsilon;
    for r in &t.series {
        assert!(r.upsilon <= u0v + 10.0 * 0.005, "Υ({}) = {}", r.t, r.upsilon);
    }
    for r in t.log.iter().filter(|r| r.mode == InteractionMode::Accurate) {
        let (v0, q0) = r.before.unwrap();
        let (v1, q1) = r.after.unwrap();
        assert!(v1 + 10.0 * q1 < v0 + 10.0 * q0 + 1e-14);
    }
}

#[test]
fn nonphysical_fronts_move_at_the_bound_and_stay_small() {
    let (zh, u0) = stepped_canal(&[(0.0, 0.02), (0.2, 0.02), (0.4, -0.03)], -0.4, 0.04);
    let eps = 0.02;
    let mut t = Tracker::init(canal(), zh, &u0, config(eps)).unwrap();
    t.advance(2.0).unwrap();
    assert!(t.stats.simplified > 0);
    let lambda_hat = t.law().model().lambda_hat();
    assert!(t.fronts().filter(|f| f.kind == FrontKind::NonPhysical).all(|f| f.speed == lambda_hat));
    assert!(t.nonphysical_strength() <= eps);
}

#[test]
fn front_cap_is_enforced() {
    let (zh, u0) = stepped_canal(&[(0.0, 0.02), (0.2, 0.02), (0.4, -0.03)], -0.4, 0.04);
    let mut cfg = config(0.02);
    cfg.front_cap = 10;
    let mut t = Tracker::init(canal(), zh, &u0, cfg).unwrap();
    assert!(matches!(t.advance(2.0), Err(bvtrack::Error::FrontBudgetExceeded { cap: 10 })));
}

#[test]
fn domain_budget_is_enforced() {
    let (zh, u0) = stepped_canal(&[(0.0, 0.02)], -0.4, 0.04);
    let mut cfg = config(0.02);
    cfg.domain_budget = 1e-3;
    assert!(matches!(Tracker::init(canal(), zh, &u0, cfg), Err(bvtrack::Error::DomainBudgetExceeded { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_runs_stay_consistent(
        steps in prop::collection::vec((-1.0f64..1.0, -0.02f64..0.02), 0..4),
        dam in -1.5f64..0.5,
        pool in -0.05f64..0.05,
        eps in prop::sample::select(vec![0.02, 0.01]),
    ) {
        let mut steps = steps;
        steps.sort_by(|a, b| a.0.total_cmp(&b.0));
        steps.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-3);
        let (zh, u0) = stepped_canal(&steps, dam, pool);
        let mut t = Tracker::init(canal(), zh.clone(), &u0, config(eps)).unwrap();
        let mut last = 0.0;
        let mut ok = true;
        let mut ratio: f64 = 0.0;
        t.advance_observed(2.0, |tr, _, t1| {
            ok &= t1 >= last;
            last = t1;
            ok &= tr.audit().is_empty() && tr.zero_wave_defect() <= 1e-10;
            let g = tr.glimm();
            if g.v > 0.0 {
                ratio = ratio.max(tr.snapshot(tr.time()).total_variation() / g.v);
            }
        }).unwrap();
        prop_assert!(ok);
        prop_assert!(ratio <= 2.0, "TV(u)/V = {}", ratio);
        let positions: Vec<f64> = t.fronts().filter(|f| f.kind == FrontKind::ZeroWave).map(|f| f.x_ref).collect();
        prop_assert_eq!(positions, zh.breaks().to_vec());
        let fronts: Vec<&Front> = t.fronts().collect();
        let (v, q) = brute_force_potentials(t.law().model(), &fronts);
        let g = t.glimm();
        prop_assert!((v - g.v).abs() <= 1e-12 * (1.0 + v) && (q - g.q).abs() <= 1e-12 * (1.0 + q));
    }
}
