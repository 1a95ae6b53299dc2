//! Run configuration, read from TOML.
//!
//! ```toml
//! [model]
//! name = "canal"            # or "linear" (the 2×2 test system)
//! g = 9.81
//!
//! [geometry]                # optional when a scenario is named
//! width = { kind = "constant", value = 1.0 }
//! bed = { kind = "table", x = [0.0, 1.0], y = [0.0, 0.05] }
//!
//! [initial]
//! scenario = "bed_step"     # or background/state/bumps/pieces
//!
//! [numerics]
//! eps = 5e-3
//! h = 1e-2
//! t_end = 1.0
//!
//! [outputs]
//! dir = "out"
//! snapshot_times = [0.5, 1.0]
//!
//! [verification]
//! checks = ["zero_wave", "glimm"]
//! ```

use serde::{Deserialize, Serialize};

use crate::coefficient::Profile;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryConfig>,
    pub initial: InitialConfig,
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
    #[serde(default)]
    pub verification: VerificationConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Canal,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: ModelName,
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_min: Option<f64>,
    /// Admissible state box `[lower, upper]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_box: Option<[Vec<f64>; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_box: Option<[Vec<f64>; 2]>,
}

fn default_g() -> f64 {
    9.81
}

/// Either canal width and bed profiles, one profile per coefficient
/// component, or the coefficient given directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<Profile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bed: Option<Profile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<Profile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<ZetaSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZetaSpec {
    pub base: Vec<f64>,
    #[serde(default)]
    pub jumps: Vec<JumpSpec>,
    #[serde(default)]
    pub density: Vec<DensitySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    pub x: f64,
    pub delta: Vec<f64>,
}

/// Linear density from `w0` at `x0` to `w1` at `x1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub x0: f64,
    pub x1: f64,
    pub w0: Vec<f64>,
    pub w1: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    FlatDamBreak,
    BedStep,
    WidthConstriction,
    RampBed,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Background {
    /// The constant `state`.
    #[default]
    Constant,
    /// The stationary solution through `ζ^h` starting from `state` on the
    /// left.
    Rest,
}

/// `delta` added on `(x0, x1]`; a missing bound is infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x1: Option<f64>,
    pub delta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecesSpec {
    pub breaks: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioName>,
    #[serde(default)]
    pub background: Background,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pieces: Option<PiecesSpec>,
    /// Added on top of the background, the pieces or the scenario data.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bumps: Vec<Bump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    pub eps: f64,
    pub h: f64,
    pub t_end: f64,
    /// Glimm weight; fitted from the run when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default = "default_kappa1")]
    pub kappa1: f64,
    #[serde(default = "default_kappa2")]
    pub kappa2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default = "default_front_cap")]
    pub front_cap: usize,
    /// Domain for snapshots and masses.
    #[serde(default = "default_window")]
    pub window: [f64; 2],
    /// Parameter sequences of `converge`; dyadic from `eps`, `h` when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_list: Option<Vec<f64>>,
}

fn default_kappa1() -> f64 {
    100.0
}

fn default_kappa2() -> f64 {
    10.0
}

fn default_front_cap() -> usize {
    200_000
}

fn default_window() -> [f64; 2] {
    [-10.0, 10.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_true")]
    pub series: bool,
    #[serde(default)]
    pub fronts: bool,
}

fn default_dir() -> String {
    "output".into()
}

fn default_true() -> bool {
    true
}

impl Default for OutputsConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            snapshot_times: Vec::new(),
            series: true,
            fronts: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    ZeroWave,
    Glimm,
    Lipschitz,
    Phi,
    Characterization,
    WeakResidual,
    InteractionAudit,
}

impl CheckName {
    pub const ALL: [CheckName; 7] = [
        CheckName::ZeroWave,
        CheckName::Glimm,
        CheckName::Lipschitz,
        CheckName::Phi,
        CheckName::Characterization,
        CheckName::WeakResidual,
        CheckName::InteractionAudit,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationConfig {
    #[serde(default)]
    pub checks: Vec<CheckName>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Random `(τ, ξ)` points for the characterization checks.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    /// L1 size of the initial perturbation for the stability checks.
    #[serde(default = "default_perturbation")]
    pub perturbation: f64,
    /// Approximation parameters compared by the stability checks.
    #[serde(default = "default_eps_levels")]
    pub eps_levels: Vec<f64>,
    #[serde(default = "default_test_functions")]
    pub test_functions: usize,
    #[serde(default = "default_audit_samples")]
    pub audit_samples: usize,
    #[serde(default = "default_audit_scales")]
    pub audit_scales: Vec<f64>,
    /// Slack `K` in `Υ(t) ≤ Υ(0) + K ε`.
    #[serde(default = "default_glimm_slack")]
    pub glimm_slack: f64,
}

fn default_seed() -> u64 {
    1
}

fn default_samples() -> usize {
    100
}

fn default_thetas() -> Vec<f64> {
    vec![0.1, 0.05, 0.025, 0.0125]
}

fn default_perturbation() -> f64 {
    1e-3
}

fn default_eps_levels() -> Vec<f64> {
    vec![1e-2, 5e-3, 2.5e-3]
}

fn default_test_functions() -> usize {
    10
}

fn default_audit_samples() -> usize {
    10_000
}

fn default_audit_scales() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4]
}

fn default_glimm_slack() -> f64 {
    10.0
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            checks: Vec::new(),
            seed: default_seed(),
            samples: default_samples(),
            thetas: default_thetas(),
            perturbation: default_perturbation(),
            eps_levels: default_eps_levels(),
            test_functions: default_test_functions(),
            audit_samples: default_audit_samples(),
            audit_scales: default_audit_scales(),
            glimm_slack: default_glimm_slack(),
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} = {x} must be positive and finite")))
    }
}

fn descending(name: &str, v: &[f64]) -> Result<()> {
    if v.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::Config(format!("{name} must be strictly decreasing")));
    }
    v.iter().try_for_each(|x| positive(name, *x))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let n = &self.numerics;
        positive("numerics.eps", n.eps)?;
        positive("numerics.h", n.h)?;
        positive("numerics.t_end", n.t_end)?;
        positive("numerics.kappa1", n.kappa1)?;
        positive("numerics.kappa2", n.kappa2)?;
        if let Some(c0) = n.c0 {
            positive("numerics.c0", c0)?;
        }
        if let Some(rho) = n.rho {
            if !(rho >= 0.0) {
                return Err(Error::Config(format!("numerics.rho = {rho} must be non-negative")));
            }
        }
        if n.front_cap == 0 {
            return Err(Error::Config("numerics.front_cap must be positive".into()));
        }
        if !(n.window[0] < n.window[1]) {
            return Err(Error::Config("numerics.window must be an increasing pair".into()));
        }
        if let Some(l) = &n.eps_list {
            descending("numerics.eps_list", l)?;
        }
        if let Some(l) = &n.h_list {
            descending("numerics.h_list", l)?;
        }
        if let (Some(e), Some(h)) = (&n.eps_list, &n.h_list) {
            if e.len() != h.len() {
                return Err(Error::Config("numerics.eps_list and h_list differ in length".into()));
            }
        }
        if self.model.name == ModelName::Canal {
            positive("model.g", self.model.g)?;
        }
        for &t in &self.outputs.snapshot_times {
            if !(t >= 0.0 && t <= n.t_end) {
                return Err(Error::Config(format!("snapshot time {t} outside [0, t_end]")));
            }
        }
        let v = &self.verification;
        descending("verification.thetas", &v.thetas)?;
        descending("verification.eps_levels", &v.eps_levels)?;
        descending("verification.audit_scales", &v.audit_scales)?;
        positive("verification.perturbation", v.perturbation)?;
        let init = &self.initial;
        let given = [init.scenario.is_some(), init.pieces.is_some(), init.state.is_some()];
        if given.iter().filter(|g| **g).count() != 1 {
            return Err(Error::Config("initial: give exactly one of scenario, pieces, state".into()));
        }
        if init.scenario.is_none() && self.geometry.is_none() {
            return Err(Error::Config("geometry block required without a scenario".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[model]
name = "canal"

[initial]
scenario = "mixed"

[numerics]
eps = 5e-3
h = 1e-2
t_end = 1.0
"#;

    #[test]
    fn round_trip() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        let again = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.numerics.kappa1, 100.0);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = MINIMAL.replace("eps = 5e-3", "eps = -1.0");
        assert!(RunConfig::from_toml(&bad).is_err());
        let late = format!("{MINIMAL}\n[outputs]\nsnapshot_times = [2.0]\n");
        assert!(RunConfig::from_toml(&late).is_err());
        let unknown = MINIMAL.replace("[numerics]", "[numerics]\nfoo = 1");
        assert!(RunConfig::from_toml(&unknown).is_err());
    }
}
