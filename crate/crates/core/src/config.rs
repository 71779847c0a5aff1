//! Run configuration: schema, defaults, validation, hashing and presets.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::initial::{InitialDataSpec, Preparation, Profile};
use crate::integrators::{Sampling, Scheme, StepperConfig, Tracker};
use crate::models::{Flux, JinXinModel, Monomial};
use crate::spectral::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    EpsilonConvergence,
    Decay,
    Overdamping,
    Spectrum,
    Uniformity,
    Selftest,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::EpsilonConvergence => "epsilon-convergence",
            ExperimentKind::Decay => "decay",
            ExperimentKind::Overdamping => "overdamping",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Uniformity => "uniformity",
            ExperimentKind::Selftest => "selftest",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsSpec {
    Single(f64),
    List(Vec<f64>),
}

impl EpsSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            EpsSpec::Single(e) => vec![*e],
            EpsSpec::List(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Flux id; defaults to `burgers1d` or `burgers2d` by dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<String>,
    pub a: Vec<f64>,
    pub eps: EpsSpec,
    pub d: usize,
    /// Component count; defaults to that of the flux.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<Monomial>,
}

impl ModelConfig {
    pub fn flux_id(&self) -> &str {
        self.flux.as_deref().unwrap_or(if self.d == 2 { "burgers2d" } else { "burgers1d" })
    }

    pub fn build_flux(&self) -> Result<Flux> {
        let id = self.flux_id();
        let n = match self.n {
            Some(n) => n,
            None => match id {
                "burgers2d" => 2,
                "polynomial" => self.terms.iter().map(|t| t.component + 1).max().unwrap_or(1),
                _ => 1,
            },
        };
        Flux::from_id(id, n, self.d, &self.terms)
    }

    pub fn build(&self, eps: f64) -> Result<JinXinModel> {
        JinXinModel::new(self.build_flux()?, self.a.clone(), eps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "L")]
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { points: 64, length: 2.0 * PI }
    }
}

impl GridConfig {
    pub fn build(&self, d: usize) -> Result<Grid> {
        Grid::new(d, self.points, self.length)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Lebesgue exponent of the low-frequency spaces.
    pub p: f64,
    /// Offset in `J_eps = -floor(log2 eps) + k0`.
    pub k0: i32,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { p: 2.0, k0: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConfig {
    /// Regularity indices `sigma` of the fitted norms `B^sigma_{p,1}`.
    pub sigma: Vec<f64>,
    /// Summation index of the asserted norm in `j`. `2` fits the `L^2`
    /// proxy `B^sigma_{2,2}`; the `r = 1` norm is then reported alongside.
    pub r: f64,
    /// Fit window `[t_lo, t_hi]`.
    pub window: [f64; 2],
    pub tolerance: f64,
    /// Also co-run the limit equation and fit `u - u*`.
    pub difference: bool,
    pub difference_tolerance: f64,
    /// Rerun at `eps / 2` and compare the difference-curve level.
    pub compare_half_eps: bool,
    pub half_eps_tolerance: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            sigma: vec![0.0],
            r: 1.0,
            window: [5.0, 500.0],
            tolerance: 0.05,
            difference: false,
            difference_tolerance: 0.15,
            compare_half_eps: false,
            half_eps_tolerance: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OverdampingConfig {
    /// Integer mode indices of the monitored wave.
    pub mode: Vec<i64>,
    pub inv_eps: Vec<f64>,
    /// Fit window in units of `1/omega`.
    pub window: [f64; 2],
    /// Step as a fraction of `1/omega`.
    pub dt_omega: f64,
    pub tolerance: f64,
}

impl Default for OverdampingConfig {
    fn default() -> Self {
        OverdampingConfig {
            mode: vec![1],
            inv_eps: vec![
                0.25, 0.35, 0.5, 0.7, 1.0, 1.2, 1.4, 1.6, 1.75, 1.85, 2.0, 2.2, 2.4, 2.7, 3.0, 3.5, 4.0, 5.0, 7.0,
                10.0, 16.0,
            ],
            window: [100.0, 300.0],
            dt_omega: 0.01,
            tolerance: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub symbol: f64,
    pub inv_eps_range: [f64; 2],
    pub points: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig { symbol: 1.0, inv_eps_range: [0.1, 10.0], points: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniformityConfig {
    pub preparations: Vec<Preparation>,
    /// Largest allowed max/min ratio of `X_p(t_end)/X_{p,0}` across eps.
    pub spread: f64,
    /// Growth of `X_p` after `after` must stay below `growth`.
    pub after: f64,
    pub growth: f64,
}

impl Default for UniformityConfig {
    fn default() -> Self {
        UniformityConfig {
            preparations: vec![
                Preparation::DarcyPrepared,
                Preparation::IllPrepared { v_scale: 0.1, eps_power: 0.0 },
            ],
            spread: 3.0,
            after: 1.0,
            growth: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub slope_range: [f64; 2],
    pub z_slope_min: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig { slope_range: [0.85, 1.15], z_slope_min: 0.85 }
    }
}

fn default_data() -> InitialDataSpec {
    InitialDataSpec {
        profile: Profile::GaussianBump { width: 1.0 },
        amplitude: 0.1,
        preparation: Preparation::DarcyPrepared,
    }
}

fn default_stepper() -> StepperConfig {
    StepperConfig::new(Scheme::ImexSsp2, 1.0)
}

fn default_output() -> String {
    "runs".to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub model: ModelConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_data")]
    pub data: InitialDataSpec,
    #[serde(default = "default_stepper")]
    pub stepper: StepperConfig,
    #[serde(default)]
    pub trackers: Vec<Tracker>,
    #[serde(default = "default_output")]
    pub output: String,
    /// Added to the random-spectrum seed.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
    #[serde(default)]
    pub decay: DecayConfig,
    #[serde(default)]
    pub overdamping: OverdampingConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub uniformity: UniformityConfig,
}

/// Parses and validates a JSON config; errors name the offending path.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path.is_empty() { ".".to_string() } else { path }, e.inner())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    parse_config_str(&std::fs::read_to_string(path)?)
}

fn positive(path: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::config(path, format!("must be positive and finite, got {x}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if !(1..=2).contains(&m.d) {
            return Err(Error::config("model.d", format!("dimension must be 1 or 2, got {}", m.d)));
        }
        if m.a.len() != m.d {
            return Err(Error::config("model.a", format!("need one coefficient per axis ({}), got {}", m.d, m.a.len())));
        }
        for (i, a) in m.a.iter().enumerate() {
            if !(a.is_finite() && *a > 0.0) {
                return Err(Error::config(format!("model.a[{i}]"), format!("a_i > 0 required (diffusion coefficients must be positive), got {a}")));
            }
        }
        let eps = m.eps.values();
        if eps.is_empty() {
            return Err(Error::config("model.eps", "empty eps list"));
        }
        for (i, e) in eps.iter().enumerate() {
            positive(&format!("model.eps[{i}]"), *e)?;
        }
        if matches!(m.eps, EpsSpec::List(_)) {
            match self.experiment {
                ExperimentKind::EpsilonConvergence | ExperimentKind::Uniformity => {}
                ExperimentKind::Decay => {
                    return Err(Error::config("model.eps", "decay is a single-eps experiment; give one value"))
                }
                other => {
                    return Err(Error::config("model.eps", format!("{} takes a single eps", other.name())))
                }
            }
        }
        let flux = m.build_flux().map_err(|e| Error::config("model.flux", e))?;
        if let Some(n) = m.n {
            if n != flux.ncomp() {
                return Err(Error::config("model.n", format!("flux {} has {} component(s)", flux.id(), flux.ncomp())));
            }
        }
        self.grid.build(m.d).map_err(|e| Error::config("grid", e))?;
        self.data.validate("data")?;
        self.stepper.validate()?;
        if !(self.analysis.p >= 1.0) {
            return Err(Error::config("analysis.p", "need p >= 1"));
        }
        for (i, t) in self.trackers.iter().enumerate() {
            if !(t.p >= 1.0 && t.r >= 1.0 && t.s.is_finite()) {
                return Err(Error::config(format!("trackers[{i}]"), "need finite s, p >= 1 and r >= 1"));
            }
        }
        match self.experiment {
            ExperimentKind::Decay => {
                let w = self.decay.window;
                if !(w[0] > 0.0 && w[0] < w[1]) {
                    return Err(Error::config("decay.window", "need 0 < t_lo < t_hi"));
                }
                if !(self.decay.r >= 1.0) {
                    return Err(Error::config("decay.r", "need r >= 1"));
                }
                if self.decay.sigma.is_empty() {
                    return Err(Error::config("decay.sigma", "need at least one sigma"));
                }
            }
            ExperimentKind::Overdamping => {
                if self.overdamping.mode.len() != m.d {
                    return Err(Error::config("overdamping.mode", format!("need {} indices", m.d)));
                }
                for (i, x) in self.overdamping.inv_eps.iter().enumerate() {
                    positive(&format!("overdamping.inv_eps[{i}]"), *x)?;
                }
                let w = self.overdamping.window;
                if !(w[0] >= 0.0 && w[0] < w[1]) {
                    return Err(Error::config("overdamping.window", "need 0 <= lo < hi"));
                }
                positive("overdamping.dt_omega", self.overdamping.dt_omega)?;
            }
            ExperimentKind::Spectrum => {
                let r = self.spectrum.inv_eps_range;
                if !(r[0] > 0.0 && r[0] < r[1]) || self.spectrum.points < 2 {
                    return Err(Error::config("spectrum", "need 0 < lo < hi and at least 2 points"));
                }
                if !(self.spectrum.symbol >= 0.0) {
                    return Err(Error::config("spectrum.symbol", "must be nonnegative"));
                }
            }
            ExperimentKind::Uniformity => {
                if self.uniformity.preparations.is_empty() {
                    return Err(Error::config("uniformity.preparations", "need at least one preparation"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Canonical JSON (sorted keys) without the output location.
    pub fn canonical_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("output");
        }
        Ok(serde_json::to_string(&v)?)
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.canonical_json()?.as_bytes())))
    }

    /// Short form used for result directories.
    pub fn short_hash(&self) -> Result<String> {
        Ok(self.hash()?[..16].to_string())
    }

    /// Effective seed of a random-spectrum profile.
    pub fn data_with_seed(&self) -> InitialDataSpec {
        let mut data = self.data.clone();
        if let Profile::RandomSpectrum { seed, .. } = &mut data.profile {
            *seed = seed.wrapping_add(self.seed);
        }
        data
    }
}

pub const PRESETS: [&str; 6] = ["thm1-uniform", "thm2-epsilon", "thm3-decay-1d", "thm3-decay-2d", "fig1-overdamping", "selftest"];

fn base(experiment: ExperimentKind, d: usize, eps: EpsSpec) -> RunConfig {
    RunConfig {
        experiment,
        model: ModelConfig {
            flux: None,
            a: vec![1.0; d],
            eps,
            d,
            n: None,
            terms: Vec::new(),
        },
        grid: GridConfig::default(),
        data: default_data(),
        stepper: default_stepper(),
        trackers: Vec::new(),
        output: default_output(),
        seed: 0,
        analysis: AnalysisConfig::default(),
        convergence: ConvergenceConfig::default(),
        decay: DecayConfig::default(),
        overdamping: OverdampingConfig::default(),
        spectrum: SpectrumConfig::default(),
        uniformity: UniformityConfig::default(),
    }
}

fn geometric(t0: f64, ratio: f64) -> Sampling {
    Sampling::Geometric { t0, ratio }
}

/// Shipped configurations, one per acceptance experiment.
pub fn preset(name: &str) -> Result<RunConfig> {
    let cfg = match name {
        "thm1-uniform" => {
            let mut c = base(ExperimentKind::Uniformity, 1, EpsSpec::List(vec![1.0, 0.5, 0.1, 0.02]));
            c.grid = GridConfig { points: 1024, length: 32.0 * PI };
            c.data = InitialDataSpec {
                profile: Profile::GaussianBump { width: 2.0 },
                amplitude: 0.1,
                preparation: Preparation::DarcyPrepared,
            };
            c.stepper.t_end = 50.0;
            c.stepper.sample_every = geometric(0.01, 1.05);
            c
        }
        "thm2-epsilon" => {
            let mut c = base(ExperimentKind::EpsilonConvergence, 1, EpsSpec::List(vec![0.2, 0.1, 0.05, 0.025]));
            c.grid = GridConfig { points: 256, length: 8.0 * PI };
            c.data = InitialDataSpec {
                profile: Profile::RandomSpectrum { sigma1: -0.5, seed: 1, kappa_max: Some(4.0) },
                amplitude: 0.1,
                preparation: Preparation::IllPrepared { v_scale: 0.1, eps_power: 1.0 },
            };
            c.stepper.t_end = 10.0;
            c.stepper.sample_every = geometric(1e-4, 1.05);
            c
        }
        "thm3-decay-1d" => {
            let mut c = base(ExperimentKind::Decay, 1, EpsSpec::Single(0.5));
            c.grid = GridConfig { points: 4096, length: 200.0 * PI };
            c.data = InitialDataSpec {
                profile: Profile::RandomSpectrum { sigma1: -0.5, seed: 7, kappa_max: None },
                amplitude: 0.1,
                preparation: Preparation::DarcyPrepared,
            };
            c.stepper.t_end = 500.0;
            c.stepper.sample_every = geometric(0.05, 1.05);
            c.decay.window = [5.0, 500.0];
            c.decay.r = 2.0;
            c
        }
        "thm3-decay-2d" => {
            let mut c = base(ExperimentKind::Decay, 2, EpsSpec::Single(0.05));
            c.grid = GridConfig { points: 256, length: 64.0 * PI };
            c.data = InitialDataSpec {
                profile: Profile::RandomSpectrum { sigma1: -1.0, seed: 11, kappa_max: Some(1.0) },
                amplitude: 0.1,
                preparation: Preparation::IllPrepared { v_scale: 0.1, eps_power: 1.0 },
            };
            c.stepper.t_end = 50.0;
            c.stepper.sample_every = geometric(0.01, 1.05);
            c.decay = DecayConfig {
                window: [5.0, 50.0],
                tolerance: 0.1,
                difference: true,
                compare_half_eps: true,
                ..DecayConfig::default()
            };
            c
        }
        "fig1-overdamping" => {
            let mut c = base(ExperimentKind::Overdamping, 1, EpsSpec::Single(1.0));
            c.model.flux = Some("zero".into());
            c.grid = GridConfig { points: 8, length: 2.0 * PI };
            c.stepper.cfl = 1.0;
            c
        }
        "selftest" => base(ExperimentKind::Selftest, 1, EpsSpec::Single(1.0)),
        other => {
            return Err(Error::config(
                "preset",
                format!("unknown preset {other:?}; available: {}", PRESETS.join(", ")),
            ))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}
