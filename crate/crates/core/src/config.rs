//! Declarative run configuration (TOML) with powers in dBm and path gains
//! in dB, resolved into the linear quantities used everywhere else.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::ExperimentConfig;
use crate::model::{ChannelGenSpec, ChannelSet, SystemParams};
use crate::optimal::SearchConfig;
use crate::sdr::{FeasibilityConfig, SolverConfig};
use crate::suboptimal::Scheme2Config;

/// `x` dBm in Watts.
pub fn dbm_to_watts(x: f64) -> f64 {
    10f64.powf((x - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// `x` dB as a linear power ratio.
pub fn db_to_linear(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

pub fn linear_to_db(r: f64) -> f64 {
    10.0 * r.log10()
}

/// One value shared by every energy receiver, or one value each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerReceiver {
    All(f64),
    Each(Vec<f64>),
}

impl PerReceiver {
    fn expand(&self, k: usize, what: &str) -> Result<Vec<f64>> {
        match self {
            PerReceiver::All(x) => Ok(vec![*x; k]),
            PerReceiver::Each(v) if v.len() == k => Ok(v.clone()),
            PerReceiver::Each(v) => Err(Error::validation(format!(
                "{what}: expected {k} values, got {}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub antennas: usize,
    pub energy_receivers: usize,
    pub power_dbm: f64,
    pub ir_noise_dbm: f64,
    pub er_noise_dbm: PerReceiver,
    pub efficiency: f64,
    pub weights: PerReceiver,
    /// Secrecy target in bits/s/Hz.
    pub secrecy_target: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            antennas: 4,
            energy_receivers: 3,
            power_dbm: 30.0,
            ir_noise_dbm: -50.0,
            er_noise_dbm: PerReceiver::All(-50.0),
            efficiency: 0.5,
            weights: PerReceiver::All(1.0),
            secrecy_target: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationSection {
    /// Average path gain to the information receiver.
    pub rho_h_db: f64,
    /// Average path gain to each energy receiver.
    pub rho_g_db: PerReceiver,
    pub seed: u64,
}

impl Default for GenerationSection {
    fn default() -> Self {
        Self {
            rho_h_db: -70.0,
            rho_g_db: PerReceiver::All(-30.0),
            seed: 1,
        }
    }
}

/// Channel source: a channel JSON file or a random draw. An absent
/// `[channels]` table means the default draw; a present one must name
/// exactly one source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation: Option<GenerationSection>,
}

impl Default for ChannelsSection {
    fn default() -> Self {
        Self {
            file: None,
            generation: Some(GenerationSection::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub grid_points: usize,
    pub rel_tol: f64,
    pub max_refine_iter: usize,
    pub null_tol: f64,
}

impl Default for SearchSection {
    fn default() -> Self {
        let d = SearchConfig::default();
        Self {
            grid_points: d.grid_points,
            rel_tol: d.rel_tol,
            max_refine_iter: d.max_refine_iter,
            null_tol: d.null_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeasibilitySection {
    pub grid_points: usize,
    pub refine_rel_tol: f64,
    pub backoff: f64,
}

impl Default for FeasibilitySection {
    fn default() -> Self {
        let d = FeasibilityConfig::default();
        Self {
            grid_points: d.grid_points,
            refine_rel_tol: d.refine_rel_tol,
            backoff: d.backoff,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSection {
    pub trials: usize,
    pub points: usize,
    pub absolute_grid: bool,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self {
            trials: 50,
            points: 20,
            absolute_grid: true,
        }
    }
}

/// Everything a CLI run needs. Missing keys take the reference defaults:
/// four antennas, three energy receivers, 30 dBm budget, -50 dBm noise,
/// 50% efficiency, unit weights, -70 dB / -30 dB average path gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    pub channels: ChannelsSection,
    pub solver: SolverConfig,
    pub search: SearchSection,
    pub feasibility: FeasibilitySection,
    pub scheme2: Scheme2Config,
    /// Region sweep points.
    pub points: usize,
    pub montecarlo: MonteCarloSection,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: PathBuf::from("<config>"),
            message: e.to_string(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::validation(format!("cannot render config: {e}")))
    }

    /// Linear system parameters.
    pub fn system_params(&self) -> Result<SystemParams> {
        let s = &self.system;
        let k = s.energy_receivers;
        let params = SystemParams {
            antennas: s.antennas,
            energy_receivers: k,
            power: dbm_to_watts(s.power_dbm),
            ir_noise: dbm_to_watts(s.ir_noise_dbm),
            er_noise: s
                .er_noise_dbm
                .expand(k, "er_noise_dbm")?
                .into_iter()
                .map(dbm_to_watts)
                .collect(),
            efficiency: s.efficiency,
            weights: s.weights.expand(k, "weights")?,
            secrecy_target: s.secrecy_target,
        };
        params.validate()?;
        Ok(params)
    }

    /// Random-draw statistics; an error when channels come from a file.
    pub fn generation_spec(&self) -> Result<ChannelGenSpec> {
        self.check_channel_source()?;
        let g = self
            .channels
            .generation
            .as_ref()
            .ok_or_else(|| Error::validation("this command needs [channels.generation], not a channel file"))?;
        let spec = ChannelGenSpec {
            rho_h_sq: db_to_linear(g.rho_h_db),
            rho_g_sq: g
                .rho_g_db
                .expand(self.system.energy_receivers, "rho_g_db")?
                .into_iter()
                .map(db_to_linear)
                .collect(),
            seed: g.seed,
        };
        Ok(spec)
    }

    fn check_channel_source(&self) -> Result<()> {
        match (&self.channels.file, &self.channels.generation) {
            (Some(_), None) | (None, Some(_)) => Ok(()),
            _ => Err(Error::validation(
                "exactly one of channels.file and channels.generation must be given",
            )),
        }
    }

    /// The single channel realization of `solve`, `region` and `feasibility`.
    pub fn channels(&self, params: &SystemParams) -> Result<ChannelSet> {
        self.check_channel_source()?;
        let ch = match &self.channels.file {
            Some(path) => ChannelSet::read(path)?,
            None => crate::model::generate_channels(params, &self.generation_spec()?)?,
        };
        ch.validate_for(params)?;
        Ok(ch)
    }

    /// Seed of the random draw, if channels are generated.
    pub fn seed(&self) -> Option<u64> {
        self.channels.generation.as_ref().map(|g| g.seed)
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let search = SearchConfig {
            grid_points: self.search.grid_points,
            rel_tol: self.search.rel_tol,
            max_refine_iter: self.search.max_refine_iter,
            null_tol: self.search.null_tol,
            solver: self.solver,
            feasibility: FeasibilityConfig {
                grid_points: self.feasibility.grid_points,
                refine_rel_tol: self.feasibility.refine_rel_tol,
                backoff: self.feasibility.backoff,
                solver: self.solver,
            },
        };
        search.validate()?;
        if self.scheme2.grid_points < 2 {
            return Err(Error::validation("scheme2.grid_points must be at least 2"));
        }
        Ok(ExperimentConfig {
            search,
            scheme2: self.scheme2,
        })
    }

    /// Checks every section without touching channel files.
    pub fn validate(&self) -> Result<()> {
        self.system_params()?;
        self.check_channel_source()?;
        if self.channels.generation.is_some() {
            self.generation_spec()?.validate(&self.system_params()?)?;
        }
        self.experiment()?;
        Ok(())
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemSection::default(),
            channels: ChannelsSection::default(),
            solver: SolverConfig::default(),
            search: SearchSection::default(),
            feasibility: FeasibilitySection::default(),
            scheme2: Scheme2Config::default(),
            points: 20,
            montecarlo: MonteCarloSection::default(),
            output: OutputSection::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert_eq!(dbm_to_watts(30.0), 1.0);
        assert!((dbm_to_watts(-50.0) - 1e-8).abs() < 1e-22);
        assert!((db_to_linear(-30.0) - 1e-3).abs() < 1e-18);
        for x in [-70.0, -50.0, -3.3, 0.0, 12.5, 30.0, 47.0] {
            let w = dbm_to_watts(x);
            assert!((dbm_to_watts(watts_to_dbm(w)) - w).abs() <= 1e-12 * w);
            let r = db_to_linear(x);
            assert!((db_to_linear(linear_to_db(r)) - r).abs() <= 1e-12 * r);
        }
    }

    #[test]
    fn defaults_resolve_to_reference() {
        let cfg = RunConfig::from_toml("").unwrap();
        let p = cfg.system_params().unwrap();
        let r = SystemParams::reference();
        assert_eq!(p.antennas, r.antennas);
        assert_eq!(p.power, r.power);
        assert!((p.ir_noise - r.ir_noise).abs() < 1e-22);
        let spec = cfg.generation_spec().unwrap();
        assert!((spec.rho_h_sq - 1e-7).abs() < 1e-20);
        assert_eq!(spec.rho_g_sq.len(), 3);
        cfg.validate().unwrap();
    }

    #[test]
    fn sections_override() {
        let cfg = RunConfig::from_toml(
            r#"
            points = 7
            [system]
            antennas = 6
            energy_receivers = 2
            er_noise_dbm = [-50.0, -40.0]
            [channels.generation]
            rho_g_db = -20.0
            seed = 9
            "#,
        )
        .unwrap();
        let p = cfg.system_params().unwrap();
        assert_eq!(p.antennas, 6);
        assert!((p.er_noise[1] - 1e-7).abs() < 1e-20);
        assert_eq!(cfg.seed(), Some(9));
        assert_eq!(cfg.points, 7);
        assert_eq!(cfg.generation_spec().unwrap().rho_h_sq, db_to_linear(-70.0));
    }

    #[test]
    fn exactly_one_channel_source() {
        let both = RunConfig::from_toml("[channels]\nfile = \"h.json\"\n[channels.generation]\nseed = 1\n").unwrap();
        assert!(both.validate().is_err());
        let neither = RunConfig::from_toml("[channels]\n").unwrap();
        assert!(neither.validate().is_err());
        let file = RunConfig::from_toml("[channels]\nfile = \"h.json\"\n").unwrap();
        assert!(file.validate().is_ok());
        assert!(file.generation_spec().is_err());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lengths() {
        assert!(RunConfig::from_toml("[system]\nantenas = 4\n").is_err());
        let cfg = RunConfig::from_toml("[system]\nweights = [1.0, 2.0]\n").unwrap();
        assert!(cfg.system_params().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
