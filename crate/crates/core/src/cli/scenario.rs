//! Named scenarios and the construction of a problem from a configuration.

use super::config::{Background, Bump, GeometryConfig, InitialConfig, ModelName, RunConfig, ScenarioName};
use crate::coefficient::{
    approximate, canal_coefficient, coefficient_from_profiles, BVCoefficient, CoefficientApproximation, DensitySegment,
    PiecewiseConstField, Profile, DEFAULT_CELL_CAP,
};
use crate::error::{Error, Result};
use crate::models::{AdmissibleBox, BalanceLaw, CanalModel, LinearCoupling, LinearSystemModel};
use crate::numerics::Vector;
use crate::tracking::{steady_state, Tracker, TrackerConfig};

/// Geometry and initial data of a named scenario. All of them are canal
/// problems; the non-flat ones start from the lake at rest with a raised
/// pool on the left.
pub fn scenario(name: ScenarioName) -> (GeometryConfig, InitialConfig) {
    let canal = |width: Profile, bed: Profile| GeometryConfig {
        width: Some(width),
        bed: Some(bed),
        components: None,
        zeta: None,
    };
    let unit = Profile::Constant { value: 1.0 };
    let flat = Profile::Constant { value: 0.0 };
    let pool = |x1: f64, da: f64| InitialConfig {
        scenario: None,
        background: Background::Rest,
        state: Some(vec![1.0, 0.0]),
        pieces: None,
        bumps: vec![Bump {
            x0: None,
            x1: Some(x1),
            delta: vec![da, 0.0],
        }],
    };
    match name {
        ScenarioName::FlatDamBreak => (
            canal(unit, flat),
            InitialConfig {
                scenario: None,
                background: Background::Constant,
                state: Some(vec![0.9, 0.0]),
                pieces: None,
                bumps: vec![Bump {
                    x0: None,
                    x1: Some(0.0),
                    delta: vec![0.2, 0.0],
                }],
            },
        ),
        ScenarioName::BedStep => (
            canal(
                unit,
                Profile::Steps {
                    breaks: vec![0.5],
                    values: vec![0.0, 0.02],
                },
            ),
            pool(0.0, 0.05),
        ),
        ScenarioName::WidthConstriction => (
            canal(
                Profile::Steps {
                    breaks: vec![0.3, 0.6],
                    values: vec![1.0, 0.9, 1.0],
                },
                flat,
            ),
            pool(0.0, 0.05),
        ),
        ScenarioName::RampBed => (
            canal(
                unit,
                Profile::Table {
                    x: vec![0.0, 1.0],
                    y: vec![0.0, 0.05],
                },
            ),
            pool(-0.5, 0.05),
        ),
        // TV(ζ) = 0.05: bed steps of 0.01 up at 0 and down at 1, a ramp
        // rising 0.02 over [0.2, 0.4], and a 1% narrowing at 0.6
        ScenarioName::Mixed => (
            canal(
                Profile::Steps {
                    breaks: vec![0.6],
                    values: vec![1.0, 1.0 / 1.01],
                },
                Profile::Table {
                    x: vec![0.0, 0.0, 0.2, 0.4, 1.0, 1.0],
                    y: vec![0.0, 0.01, 0.01, 0.03, 0.03, 0.02],
                },
            ),
            pool(-0.5, 0.05),
        ),
    }
}

pub fn build_law(cfg: &RunConfig) -> Result<BalanceLaw> {
    let m = &cfg.model;
    match m.name {
        ModelName::Canal => {
            let default = CanalModel::new(m.g);
            let model = if m.a_min.is_some() || m.state_box.is_some() || m.zeta_box.is_some() {
                let to_box = |b: &Option<[Vec<f64>; 2]>, d: &AdmissibleBox| match b {
                    Some([lo, hi]) => AdmissibleBox::new(lo.clone(), hi.clone()),
                    None => d.clone(),
                };
                use crate::models::FluxModel;
                CanalModel::with_boxes(
                    m.g,
                    m.a_min.unwrap_or(CanalModel::DEFAULT_A_MIN),
                    to_box(&m.state_box, default.state_box()),
                    to_box(&m.zeta_box, default.zeta_box()),
                    None,
                )
            } else {
                default
            };
            Ok(BalanceLaw::canal(model))
        }
        ModelName::Linear => Ok(BalanceLaw::linear(LinearSystemModel::default_2x2(), LinearCoupling::default_2x2())),
    }
}

fn vector(v: &[f64]) -> Vector {
    Vector::from_column_slice(v)
}

fn build_coefficient(cfg: &RunConfig, geometry: &GeometryConfig) -> Result<BVCoefficient> {
    if let Some(z) = &geometry.zeta {
        let jumps = z.jumps.iter().map(|j| (j.x, vector(&j.delta))).collect();
        let density = z
            .density
            .iter()
            .map(|d| DensitySegment {
                x0: d.x0,
                x1: d.x1,
                w0: vector(&d.w0),
                w1: vector(&d.w1),
            })
            .collect();
        return BVCoefficient::new(vector(&z.base), jumps, density);
    }
    if let Some(c) = &geometry.components {
        return coefficient_from_profiles(c);
    }
    if cfg.model.name != ModelName::Canal {
        return Err(Error::Config("width and bed profiles apply to the canal model only".into()));
    }
    let width = geometry.width.clone().unwrap_or(Profile::Constant { value: 1.0 });
    let bed = geometry.bed.clone().unwrap_or(Profile::Constant { value: 0.0 });
    canal_coefficient(&width, &bed)
}

/// `field + delta` on `(x0, x1]`.
pub fn add_bump(field: &PiecewiseConstField, bump: &Bump) -> Result<PiecewiseConstField> {
    let delta = vector(&bump.delta);
    if delta.len() != field.dim() {
        return Err(Error::Config("bump dimension differs from the state dimension".into()));
    }
    let (x0, x1) = (bump.x0.unwrap_or(f64::NEG_INFINITY), bump.x1.unwrap_or(f64::INFINITY));
    if !(x0 < x1) {
        return Err(Error::Config(format!("empty bump interval ({x0}, {x1}]")));
    }
    let mut breaks: Vec<f64> = field.breaks().to_vec();
    breaks.extend([x0, x1].into_iter().filter(|x| x.is_finite()));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let inside = |x: f64| x > x0 && x <= x1;
    let first = field.values()[0].clone() + if x0 == f64::NEG_INFINITY { delta.clone() } else { Vector::zeros(delta.len()) };
    let mut values = vec![first];
    for w in breaks.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        values.push(field.value(mid) + if inside(mid) { delta.clone() } else { Vector::zeros(delta.len()) });
    }
    if let Some(&last) = breaks.last() {
        let beyond = field.value_right(last) + if x1 == f64::INFINITY { delta.clone() } else { Vector::zeros(delta.len()) };
        values.push(beyond);
    }
    Ok(PiecewiseConstField::new(breaks, values)?.merged())
}

fn build_initial(law: &BalanceLaw, zeta_h: &PiecewiseConstField, init: &InitialConfig, extra: &[Bump]) -> Result<PiecewiseConstField> {
    let base = if let Some(p) = &init.pieces {
        PiecewiseConstField::new(p.breaks.clone(), p.values.iter().map(|v| vector(v)).collect())?
    } else {
        let state = vector(init.state.as_deref().ok_or_else(|| Error::Config("initial.state missing".into()))?);
        match init.background {
            Background::Constant => PiecewiseConstField::constant(state),
            Background::Rest => steady_state(law, zeta_h, &state)?,
        }
    };
    let n = law.model().n();
    if base.dim() != n {
        return Err(Error::Config(format!("initial data of dimension {} for a system of size {n}", base.dim())));
    }
    init.bumps.iter().chain(extra).try_fold(base, |f, b| add_bump(&f, b))
}

/// Everything a run needs, built for one value of `h`.
#[derive(Debug, Clone)]
pub struct Problem {
    pub law: BalanceLaw,
    pub zeta: BVCoefficient,
    pub approx: CoefficientApproximation,
    pub u0: PiecewiseConstField,
}

impl Problem {
    pub fn build(cfg: &RunConfig) -> Result<Self> {
        Self::with(cfg, cfg.numerics.h, &[])
    }

    /// The problem at approximation parameter `h`, with `extra` bumps added
    /// to the initial data.
    pub fn with(cfg: &RunConfig, h: f64, extra: &[Bump]) -> Result<Self> {
        let law = build_law(cfg)?;
        let (geometry, initial) = match cfg.initial.scenario {
            Some(name) => {
                let (g, mut i) = scenario(name);
                i.bumps.extend(cfg.initial.bumps.iter().cloned());
                (cfg.geometry.clone().unwrap_or(g), i)
            }
            None => (cfg.geometry.clone().expect("validated"), cfg.initial.clone()),
        };
        let zeta = build_coefficient(cfg, &geometry)?;
        if zeta.dim() != law.model().p() {
            return Err(Error::Config(format!("coefficient of dimension {} for a model expecting {}", zeta.dim(), law.model().p())));
        }
        let approx = approximate(&zeta, h, DEFAULT_CELL_CAP)?;
        let u0 = build_initial(&law, &approx.field, &initial, extra)?;
        Ok(Self { law, zeta, approx, u0 })
    }

    pub fn tracker_config(&self, cfg: &RunConfig, eps: f64) -> TrackerConfig {
        let mut t = TrackerConfig::new(eps);
        t.rho = cfg.numerics.rho;
        t.c0 = cfg.numerics.c0.unwrap_or(t.c0);
        t.front_cap = cfg.numerics.front_cap;
        t.window = (cfg.numerics.window[0], cfg.numerics.window[1]);
        t
    }

    pub fn tracker(&self, tcfg: TrackerConfig) -> Result<Tracker> {
        Tracker::init(self.law.clone(), self.approx.field.clone(), &self.u0, tcfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_on_a_half_line() {
        let f = PiecewiseConstField::constant(vector(&[1.0, 0.0]));
        let g = add_bump(
            &f,
            &Bump {
                x0: None,
                x1: Some(0.0),
                delta: vec![0.1, 0.0],
            },
        )
        .unwrap();
        assert_eq!(g.breaks(), &[0.0]);
        assert_eq!(g.value(-1.0)[0], 1.1);
        assert_eq!(g.value(0.0)[0], 1.1);
        assert_eq!(g.value(0.5)[0], 1.0);
    }

    #[test]
    fn bump_inside_existing_pieces() {
        let f = PiecewiseConstField::new(vec![0.0], vec![vector(&[1.0]), vector(&[2.0])]).unwrap();
        let g = add_bump(
            &f,
            &Bump {
                x0: Some(-1.0),
                x1: Some(1.0),
                delta: vec![0.5],
            },
        )
        .unwrap();
        assert_eq!(g.breaks(), &[-1.0, 0.0, 1.0]);
        let v: Vec<f64> = g.values().iter().map(|v| v[0]).collect();
        assert_eq!(v, vec![1.0, 1.5, 2.5, 2.0]);
    }

    #[test]
    fn mixed_scenario_variation() {
        let (g, _) = scenario(ScenarioName::Mixed);
        let z = canal_coefficient(g.width.as_ref().unwrap(), g.bed.as_ref().unwrap()).unwrap();
        // the width step enters through 1/σ
        assert!((z.total_variation() - 0.05).abs() < 1e-12, "{}", z.total_variation());
    }
}
