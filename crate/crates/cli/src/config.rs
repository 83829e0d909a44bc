//! JSON configuration file. Every section is optional; command-line flags
//! override whatever the file sets.

use std::path::Path;

use anyhow::Context;
use reserve_core::bench::BenchConfig;
use reserve_core::domain::Spacing;
use reserve_core::simulation::{ExperimentOptions, ExperimentSetting, StreamConfig, TuneGrid};
use reserve_core::{EngineConfig, FloorGrid, HyperParams, Selection, Variant};
use serde::{Deserialize, Serialize};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "RESERVE_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Number of levels including the zero (no floor) level.
    pub levels: usize,
    pub min: f64,
    pub max: f64,
    pub spacing: Spacing,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            levels: 32,
            min: 0.05,
            max: 20.0,
            spacing: Spacing::Geometric,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> anyhow::Result<FloorGrid> {
        Ok(FloorGrid::with_zero_level(
            self.levels,
            self.min,
            self.max,
            self.spacing,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineSection {
    pub variant: Variant,
    pub grid: GridSpec,
    pub hyper: HyperParams,
    /// Overrides the variant's default floor selection rule.
    pub selection: Option<Selection>,
    pub capacity: Option<usize>,
}

impl Default for EngineSection {
    fn default() -> Self {
        EngineSection {
            variant: Variant::M1,
            grid: GridSpec::default(),
            hyper: HyperParams::default(),
            selection: None,
            capacity: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub setting: ExperimentSetting,
    pub train_fraction: f64,
    pub variants: Vec<Variant>,
    pub uncensored_reference: bool,
    pub pl_res_online_rate: f64,
    pub warm_start_iterations: usize,
    /// Tune on the training split before the test run.
    pub tune: bool,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let o = ExperimentOptions::default();
        ExperimentSection {
            setting: ExperimentSetting::S2,
            train_fraction: o.train_fraction,
            variants: o.variants,
            uncensored_reference: o.uncensored_reference,
            pl_res_online_rate: o.pl_res_online_rate,
            warm_start_iterations: o.warm_start_iterations,
            tune: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// The one seed behind every random choice: stream, model init, tuning.
    pub seed: u64,
    pub engine: EngineSection,
    pub stream: StreamConfig,
    pub experiment: ExperimentSection,
    pub tune: TuneGrid,
    pub bench: BenchConfig,
}

impl Config {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Copies the top-level seed into the sections that carry their own.
    pub fn resolve_seed(&mut self) {
        self.stream.seed = self.seed;
        self.bench.seed = self.seed;
    }

    pub fn engine_config(&self) -> anyhow::Result<EngineConfig> {
        let e = &self.engine;
        let mut config = EngineConfig::new(e.variant, e.grid.build()?, e.hyper.clone(), self.seed);
        if let Some(s) = e.selection {
            config.selection = s;
        }
        config.capacity = e.capacity;
        config.validate()?;
        Ok(config)
    }

    pub fn stream_config(&self) -> anyhow::Result<StreamConfig> {
        let stream = StreamConfig {
            seed: self.seed,
            ..self.stream.clone()
        };
        stream.validate()?;
        Ok(stream)
    }

    pub fn experiment_options(&self) -> ExperimentOptions {
        let x = &self.experiment;
        ExperimentOptions {
            train_fraction: x.train_fraction,
            variants: x.variants.clone(),
            uncensored_reference: x.uncensored_reference,
            pl_res_online_rate: x.pl_res_online_rate,
            warm_start_iterations: x.warm_start_iterations,
            tune: x.tune.then(|| self.tune.clone()),
            timed: false,
        }
    }
}
