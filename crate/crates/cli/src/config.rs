//! The TOML run configuration.

use std::path::PathBuf;

use rieszlab::experiments::{
    CylinderLemmaConfig, CylinderSpec, DichotomyConfig, GluedSpec, HeatConfig, LocalizationConfig, ManifoldSpec,
    RescalingConfig, SigmaBoundsConfig,
};
use rieszlab::{AxisBoundary, EstimatorOptions};
use serde::{Deserialize, Serialize};

/// Which configured host `build` and `riesz-norm` act on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HostKind {
    #[default]
    Base,
    Cylinder,
    Glued,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub host: HostKind,
    /// Exponents for `riesz-norm`.
    pub p: Vec<f64>,
    /// Largest host `riesz-norm` will decompose.
    pub max_vertices: usize,
    pub base: ManifoldSpec,
    pub cylinder: CylinderSpec,
    pub glued: GluedSpec,
    /// Bases of the glued pieces in the dichotomy experiment.
    pub bases: Vec<ManifoldSpec>,
    pub estimator: EstimatorOptions,
    pub cylinder_lemma: CylinderLemmaConfig,
    pub rescale: RescalingConfig,
    pub localize: LocalizationConfig,
    pub heat: HeatConfig,
    pub sigma_bounds: SigmaBoundsConfig,
    pub dichotomy: DichotomyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: None,
            out: None,
            threads: None,
            host: HostKind::Base,
            p: vec![2.0, 3.0],
            max_vertices: 4096,
            base: ManifoldSpec::unit_cycle(16),
            cylinder: CylinderSpec {
                base: ManifoldSpec::unit_cycle(16),
                axis_steps: 32,
                spacing: 1.0,
                boundary: AxisBoundary::Periodic,
            },
            glued: GluedSpec::default(),
            bases: [8, 16, 32].into_iter().map(ManifoldSpec::unit_cycle).collect(),
            estimator: EstimatorOptions::default(),
            cylinder_lemma: CylinderLemmaConfig::default(),
            rescale: RescalingConfig::default(),
            localize: LocalizationConfig::default(),
            heat: HeatConfig::default(),
            sigma_bounds: SigmaBoundsConfig::default(),
            dichotomy: DichotomyConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs serialize")
    }
}
