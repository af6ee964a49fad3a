use robust_esn::esn::{EmbeddingSpec, EsnConfig};
use robust_esn::lmi::default_mu_grid;
use robust_esn::sim::DisturbanceSpec;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Where the synthesis LMIs are imposed over θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThetaSynthesis {
    /// Every vertex of the plant's parameter set.
    Vertices,
    Fixed {
        value: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CollectionConfig {
    /// Number of samples in the training trace.
    pub length: usize,
    pub seed: u64,
    pub u2: DisturbanceSpec,
    pub d: DisturbanceSpec,
    pub x0: Vec<f64>,
}

impl Default for CollectionConfig {
    fn default() -> Self {
        let noise = DisturbanceSpec::FilteredNoise {
            cutoff_hz: 0.5,
            amplitude_bound: FRAC_1_SQRT_2,
            seed: 0,
        };
        Self {
            length: 5000,
            seed: 1,
            u2: noise.clone(),
            d: noise,
            x0: vec![0.0; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub x0: Vec<f64>,
    /// Seconds.
    pub duration: f64,
    pub disturbance: DisturbanceSpec,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            x0: vec![-0.0225, 0.252, 0.005],
            duration: 60.0,
            disturbance: DisturbanceSpec::reference_sinusoid(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// `builtin:vdp` or a path to a JSON plant file.
    pub plant: String,
    pub ts: f64,
    /// Parameter value of the simulated plant.
    pub plant_theta: Vec<f64>,
    pub theta_synthesis: ThetaSynthesis,
    pub mu_grid: Vec<f64>,
    /// Golden-section refinement around the best grid point.
    pub mu_refine: bool,
    pub strictness_eps: f64,
    pub variable_bound: Option<f64>,
    pub certificate_samples: usize,
    pub certificate_seed: u64,
    pub esn: EsnConfig,
    pub embedding: EmbeddingSpec,
    pub washout: usize,
    pub collection: CollectionConfig,
    pub simulation: SimulationConfig,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            plant: "builtin:vdp".into(),
            ts: 0.1,
            plant_theta: vec![0.75],
            theta_synthesis: ThetaSynthesis::Vertices,
            mu_grid: default_mu_grid(),
            mu_refine: false,
            strictness_eps: 1e-7,
            variable_bound: Some(1e4),
            certificate_samples: 10_000,
            certificate_seed: 7,
            esn: EsnConfig::default(),
            embedding: EmbeddingSpec {
                m: 1,
                delta: 2,
                n_y: 1,
                n_u: 1,
            },
            washout: 100,
            collection: CollectionConfig::default(),
            simulation: SimulationConfig::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        // Relative plant paths are resolved against the config's directory.
        if let Some(rel) = cfg.plant_path().filter(|p| p.is_relative()) {
            if let Some(dir) = path.parent() {
                cfg.plant = dir.join(rel).display().to_string();
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is serializable")
    }

    pub fn is_builtin_vdp(&self) -> bool {
        self.plant == "builtin:vdp"
    }

    pub fn plant_path(&self) -> Option<PathBuf> {
        (!self.plant.starts_with("builtin:")).then(|| PathBuf::from(&self.plant))
    }

    /// `round(duration / Ts)` samples.
    pub fn sim_samples(&self) -> usize {
        (self.simulation.duration / self.ts).round() as usize
    }

    /// The network input width follows from the embedding.
    pub fn esn_config(&self) -> EsnConfig {
        self.esn_config_for(&self.embedding)
    }

    pub fn esn_config_for(&self, embedding: &EmbeddingSpec) -> EsnConfig {
        EsnConfig {
            n_upsilon: embedding.input_dim(),
            ..self.esn.clone()
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        if self.plant.starts_with("builtin:") && !self.is_builtin_vdp() {
            return bad(format!(
                "unknown builtin plant {:?}; only builtin:vdp exists",
                self.plant
            ));
        }
        if !(self.ts > 0.0 && self.ts.is_finite()) {
            return bad(format!("ts = {} must be positive", self.ts));
        }
        if self.mu_grid.is_empty() || self.mu_grid.iter().any(|&m| !(m > 0.0 && m < 1.0)) {
            return bad("mu_grid must be nonempty with every value in (0, 1)".into());
        }
        if !(self.strictness_eps > 0.0) {
            return bad("strictness_eps must be positive".into());
        }
        if let ThetaSynthesis::Fixed { value } = &self.theta_synthesis {
            if value.is_empty() || value.iter().any(|v| !v.is_finite()) {
                return bad("theta_synthesis.value must be a nonempty finite vector".into());
            }
        }
        if self.plant_theta.iter().any(|v| !v.is_finite()) {
            return bad("plant_theta must be finite".into());
        }
        self.embedding
            .validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        self.esn_config()
            .validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        if self.collection.length <= self.embedding.horizon() + self.washout {
            return bad(format!(
                "collection.length = {} leaves no training rows after the embedding horizon {} and washout {}",
                self.collection.length,
                self.embedding.horizon(),
                self.washout
            ));
        }
        for (name, spec) in [
            ("collection.u2", &self.collection.u2),
            ("collection.d", &self.collection.d),
            ("simulation.disturbance", &self.simulation.disturbance),
        ] {
            spec.validate()
                .map_err(|e| CliError::Validation(format!("{name}: {e}")))?;
        }
        if !(self.simulation.duration > 0.0) || self.sim_samples() == 0 {
            return bad("simulation.duration must cover at least one sample".into());
        }
        if self
            .simulation
            .x0
            .iter()
            .chain(&self.collection.x0)
            .any(|v| !v.is_finite())
        {
            return bad("initial states must be finite".into());
        }
        Ok(())
    }
}
