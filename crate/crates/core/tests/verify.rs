use bvtrack::coefficient::{BVCoefficient, DensitySegment, PiecewiseConstField};
use bvtrack::models::curves::hugoniot;
use bvtrack::models::{vector, BalanceLaw, CanalModel};
use bvtrack::numerics::quad::adaptive_simpson;
use bvtrack::numerics::Vector;
use bvtrack::riemann::{solve_generalized, solve_t};
use bvtrack::tracking::{Tracker, TrackerConfig};
use bvtrack::verify::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn canal() -> BalanceLaw {
    BalanceLaw::canal(CanalModel::new(9.81))
}

fn field(breaks: &[f64], values: &[[f64; 2]]) -> PiecewiseConstField {
    PiecewiseConstField::new(breaks.to_vec(), values.iter().map(|v| vector(v)).collect()).unwrap()
}

#[test]
fn decomposition_residual_and_equivalence() {
    let law = canal();
    let model = law.model();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst, mut up, mut down) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let z = vector(&[rng.gen_range(0.9..1.1), rng.gen_range(-0.1..0.1)]);
        let u = vector(&[rng.gen_range(0.8..1.2), rng.gen_range(-0.2..0.2)]);
        let v = &u + vector(&[rng.gen_range(-0.05..0.05), rng.gen_range(-0.05..0.05)]);
        let d = shock_decompose(model, &z, &u, &v).unwrap();
        // recompose along the Hugoniot loci independently of the solver
        let mut w = u.clone();
        for i in 0..2 {
            w = hugoniot(model, &z, i, d.q[i], &w).unwrap().state;
        }
        worst = worst.max((&w - &v).amax());
        let (du, sq) = ((&u - &v).norm(), d.q.abs().sum());
        up = up.max(du / sq);
        down = down.max(sq / du);
    }
    assert!(worst <= 1e-10, "residual {worst}");
    assert!(up.is_finite() && down.is_finite() && up < 10.0 && down < 10.0, "{up} {down}");
}

#[test]
fn phi_is_equivalent_to_l1() {
    let law = canal();
    let model = law.model();
    let zeta = field(&[0.3], &[[1.0, 0.0], [1.0, 0.02]]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let mut breaks: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        breaks.sort_by(f64::total_cmp);
        let mut vals = vec![[1.0, 0.0]];
        vals.extend((0..6).map(|_| [1.0 + rng.gen_range(-0.02..0.02), rng.gen_range(-0.02..0.02)]));
        let u = field(&breaks, &vals);
        let shifted: Vec<f64> = breaks.iter().map(|b| b + 0.05).collect();
        let v = field(&shifted, &vals);
        let terms = PhiTerms::new(&law, &zeta, &u, &v).unwrap();
        let (k1, k2) = admissible_kappa(100.0, 10.0, terms.b_max(), terms.q_sum());
        let r = terms.evaluate(k1, k2);
        assert!(r.weights_admissible(), "{} {}", r.w_min, r.w_max);
        // pointwise equivalence constant of the decomposition on the cells
        let mut c: f64 = 1.0;
        for ((x0, x1), q) in r.cells.iter().zip(&r.q) {
            let mid = 0.5 * (x0 + x1);
            let du = (u.value(mid) - v.value(mid)).lp_norm(1);
            if du > 0.0 {
                c = c.max(du / q.abs().sum()).max(q.abs().sum() / du);
            }
        }
        let l1 = u.l1_distance(&v, -3.0, 3.0);
        assert!(r.phi >= l1 / c * (1.0 - 1e-12) && r.phi <= 2.0 * c * l1 * (1.0 + 1e-12), "{} {} {}", r.phi, l1, c);
        let _ = model;
    }
}

#[test]
fn sharp_fan_at_a_coefficient_jump_is_the_generalized_solution() {
    let law = canal();
    let zeta = field(&[0.0], &[[1.0, 0.0], [1.0, 0.03]]);
    let u = PiecewiseConstField::constant(vector(&[1.0, 0.1]));
    let fan = u_sharp(&law, CoefficientRef::Field(&zeta), &u, 0.0).unwrap();
    let direct = solve_generalized(law.model(), law.coupling.as_ref(), &vector(&[1.0, 0.0]), &vector(&[1.0, 0.03]), &u.values()[0], &u.values()[0]).unwrap();
    assert_eq!(fan.sizes.sigma, direct.sizes.sigma);
    assert!(fan.zero_wave.is_some());
}

/// `l_i · w` transported along `x − λ_i(θ − s)` and fed by a smooth source
/// density `g`, integrated in time. The time interval is split where the
/// characteristic passes the points in `features`.
fn characteristics(speeds: &[f64], left: &[Vector], right: &[Vector], g: &dyn Fn(f64) -> Vector, features: &[f64], theta: f64, x: f64) -> Vector {
    let mut out = Vector::zeros(speeds.len());
    for i in 0..speeds.len() {
        let mut cuts = vec![0.0, theta];
        cuts.extend(features.iter().map(|y| theta - (x - y) / speeds[i]).filter(|s| *s > 0.0 && *s < theta));
        cuts.sort_by(f64::total_cmp);
        let c: f64 = cuts
            .windows(2)
            .map(|w| adaptive_simpson(|s| left[i].dot(&g(x - speeds[i] * (theta - s))), w[0], w[1], 1e-13))
            .sum();
        out += &right[i] * c;
    }
    out
}

#[test]
fn flat_solution_matches_characteristics_for_an_atom() {
    let law = canal();
    let (zb, ub) = (vector(&[1.0, 0.0]), vector(&[1.0, 0.1]));
    let k = vector(&[0.0, -0.3]);
    let (xbar, theta) = (0.2, 0.1);
    let zero = PiecewiseConstField::constant(vector(&[0.0, 0.0]));
    let flat = FlatSolution::from_parts(&law, &zb, &ub, theta, zero, vec![(xbar, k.clone())], None).unwrap();
    let eig = law.model().eigen(&zb, &ub).unwrap();
    let left: Vec<Vector> = (0..2).map(|i| eig.l(i)).collect();
    let right: Vec<Vector> = (0..2).map(|i| eig.r(i)).collect();
    // the atom smeared into a narrow bump of the same mass
    let width = 1e-4;
    let bump = |x: f64| {
        let s = (x - xbar) / width;
        if s.abs() < 1.0 {
            &k * (0.75 * (1.0 - s * s) / width)
        } else {
            Vector::zeros(2)
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let x = rng.gen_range(-0.4..0.8);
        let near = [xbar, xbar + eig.values[0] * theta, xbar + eig.values[1] * theta]
            .iter()
            .any(|p| (x - p).abs() < 2.0 * width * 10.0);
        if near {
            continue;
        }
        let oracle = characteristics(&eig.values, &left, &right, &bump, &[xbar - width, xbar, xbar + width], theta, x);
        assert!((flat.value(x) - &oracle).amax() < 1e-8, "x = {x}: {} vs {}", flat.value(x), oracle);
    }
}

#[test]
fn flat_solution_matches_characteristics_for_a_density() {
    let law = canal();
    let bv = BVCoefficient::new(vector(&[1.0, 0.0]), vec![], vec![DensitySegment::constant(0.0, 0.3, vector(&[0.05, 0.2]))]).unwrap();
    let u = PiecewiseConstField::constant(vector(&[1.0, 0.1]));
    let theta = 0.05;
    let flat = u_flat(&law, CoefficientRef::Bv(&bv), &u, 0.1, theta).unwrap();
    let (zb, ub) = (bv.value(0.1), vector(&[1.0, 0.1]));
    let eig = law.model().eigen(&zb, &ub).unwrap();
    let left: Vec<Vector> = (0..2).map(|i| eig.l(i)).collect();
    let right: Vec<Vector> = (0..2).map(|i| eig.r(i)).collect();
    // source density written out for the canal: ∂_z of the coupling
    // potential minus ∂_z f, along w
    let g = |x: f64| {
        let w = bv.density_at(x);
        let a = ub[0];
        vector(&[0.0, -0.5 * 9.81 * a * a * w[0] - 9.81 * a * w[1] - 0.5 * 9.81 * a * a * w[0]])
    };
    for x in [-0.3, 0.02, 0.1, 0.17, 0.29, 0.4, 0.6] {
        let expect = characteristics(&eig.values, &left, &right, &g, &[0.0, 0.3], theta, x) + &ub;
        assert!((flat.value(x) - &expect).amax() < 1e-8, "x = {x}: {} vs {}", flat.value(x), expect);
    }
}

fn add(a: &PiecewiseConstField, b: &PiecewiseConstField) -> PiecewiseConstField {
    let mut xs: Vec<f64> = a.breaks().iter().chain(b.breaks()).copied().collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut vals = vec![a.values()[0].clone() + &b.values()[0]];
    vals.extend(xs.iter().map(|&x| a.value_right(x) + b.value_right(x)));
    PiecewiseConstField::new(xs, vals).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flat_solution_is_linear(
        b1 in -0.5f64..0.5, b2 in -0.5f64..0.5,
        v1 in prop::array::uniform2(-0.1f64..0.1), v2 in prop::array::uniform2(-0.1f64..0.1),
        k1 in prop::array::uniform2(-0.3f64..0.3), k2 in prop::array::uniform2(-0.3f64..0.3),
        x in -1.0f64..1.0,
    ) {
        let law = canal();
        let (zb, ub) = (vector(&[1.0, 0.0]), vector(&[1.0, 0.1]));
        let u1 = field(&[b1], &[[0.0, 0.0], v1]);
        let u2 = field(&[b2], &[v2, [0.0, 0.0]]);
        let m1 = vec![(0.1, vector(&k1))];
        let m2 = vec![(-0.2, vector(&k2))];
        let both: Vec<(f64, Vector)> = m1.iter().chain(&m2).cloned().collect();
        let make = |u: PiecewiseConstField, m: Vec<(f64, Vector)>| FlatSolution::from_parts(&law, &zb, &ub, 0.07, u, m, None).unwrap();
        let s = make(add(&u1, &u2), both).value(x);
        let parts = make(u1.clone(), m1.clone()).value(x) + make(u2.clone(), m2.clone()).value(x);
        prop_assert!((s - parts).amax() <= 1e-12);
    }
}

#[test]
fn single_shock_has_no_weak_residual() {
    let law = canal();
    let model = law.model();
    let z = vector(&[1.0, 0.0]);
    let ul = vector(&[1.0, 0.0]);
    let p = hugoniot(model, &z, 0, -0.1, &ul).unwrap();
    let zeta = BVCoefficient::constant(z);
    let profile = |t: f64| PiecewiseConstField::new(vec![0.1 + p.speed * t], vec![ul.clone(), p.state.clone()]).unwrap();
    let tf = TestFunction { t0: 0.5, rt: 0.4, x0: 0.0, rx: 3.0 };
    let r = weak_residual(&law, &zeta, profile, &[0.0, 1.0], tf);
    assert!(r < 1e-9, "{r}");
    // a shock moving at the wrong speed leaves a residual
    let wrong = |t: f64| PiecewiseConstField::new(vec![0.1 + 1.1 * p.speed * t], vec![ul.clone(), p.state.clone()]).unwrap();
    assert!(weak_residual(&law, &zeta, wrong, &[0.0, 1.0], tf) > 1e-4);
}

#[test]
fn stationary_zero_wave_has_no_weak_residual() {
    let law = canal();
    let (zl, zr) = (vector(&[1.0, 0.0]), vector(&[1.0 / 1.02, 0.03]));
    let zeta = BVCoefficient::new(zl.clone(), vec![(0.2, &zr - &zl)], vec![]).unwrap();
    let ul = vector(&[1.0, 0.2]);
    let ur = solve_t(law.model(), law.coupling.as_ref(), &zr, &zl, &ul).unwrap();
    let u = PiecewiseConstField::new(vec![0.2], vec![ul, ur]).unwrap();
    let tf = TestFunction { t0: 1.0, rt: 0.5, x0: 0.3, rx: 0.4 };
    let r = weak_residual(&law, &zeta, |_| u.clone(), &[0.0, 2.0], tf);
    assert!(r < 1e-9, "{r}");
}

#[test]
fn sharp_error_decays_on_a_tracked_dam_break() {
    let law = canal();
    let zeta = field(&[0.5], &[[1.0, 0.0], [1.0, 0.02]]);
    let u0 = field(&[0.0], &[[1.05, 0.0], [1.0, 0.0]]);
    let mut tr = Tracker::init(law.clone(), zeta.clone(), &u0, TrackerConfig::new(1e-3)).unwrap();
    let tau = 0.1;
    tr.advance(tau).unwrap();
    let at_tau = tr.snapshot(tau);
    let xi = 0.5;
    let fan = u_sharp(&law, CoefficientRef::Field(&zeta), &at_tau, xi).unwrap();
    let mut errs = Vec::new();
    for theta in [0.1, 0.05, 0.025, 0.0125] {
        let mut probe = tr.clone();
        probe.advance(tau + theta).unwrap();
        errs.push(sharp_error(&law, &fan, &probe.snapshot(tau + theta), xi, theta));
    }
    assert!(errs.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{errs:?}");
    assert!(errs[3] < errs[0], "{errs:?}");
}

#[test]
fn audit_constants_are_finite_and_regression_cases_hold() {
    let law = canal();
    let cfg = AuditConfig {
        samples: 200,
        scales: vec![1e-2, 1e-3],
        seed: 5,
        u_center: vector(&[1.0, 0.0]),
        u_spread: vector(&[0.2, 0.2]),
        z_center: vector(&[1.0, 0.0]),
        z_spread: vector(&[0.1, 0.1]),
        floor: 1e-2,
    };
    let report = interaction_audit(&law, &cfg);
    for f in &report.fits {
        assert_eq!(f.failures, 0);
        assert!(f.constants.iter().all(|c| c.is_finite() && *c > 0.0), "{f:?}");
    }
    // only negative-family waves in α: the coefficient jump does not enter
    let base = AuditSample {
        u_l: vector(&[1.0, 0.1]),
        z_minus: vector(&[1.0, 0.0]),
        alpha: vector(&[0.7, 0.0]),
        beta: vector(&[0.4, -0.6]),
        dz: vector(&[0.0, 0.0]),
        np: vector(&[0.1, 0.1]),
    };
    let d0 = measure(&law, &base, 1e-2).unwrap().defect[0];
    for dz in [[0.5, 0.5], [-1.0, 2.0]] {
        let s = AuditSample { dz: vector(&dz), ..base.clone() };
        let d = measure(&law, &s, 1e-2).unwrap().defect[0];
        assert!((d - d0).abs() <= 1e-9, "{d} vs {d0}");
    }
}
