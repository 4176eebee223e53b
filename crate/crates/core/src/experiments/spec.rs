//! Declarative descriptions of the hosts an experiment runs on.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cylinder::{build_cylinder, AxisBoundary, CylinderGraph};
use crate::error::{invalid, Result};
use crate::glue::{default_sites, glue, BridgePolicy, GlueOptions, GluedManifold};
use crate::io::read_graph;
use crate::manifold::{build_cycle, build_path, build_random, build_torus, WeightedGraphManifold};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ManifoldSpec {
    Cycle { n: usize, circumference: f64 },
    Path { n: usize, spacing: f64 },
    Torus { d: usize, n: usize, side: f64 },
    Random { n: usize, chord_prob: f64, seed: u64 },
    /// A graph interchange file.
    File { path: PathBuf },
}

impl ManifoldSpec {
    /// `C_n` with unit spacing.
    pub fn unit_cycle(n: usize) -> Self {
        ManifoldSpec::Cycle {
            n,
            circumference: n as f64,
        }
    }

    pub fn build(&self) -> Result<WeightedGraphManifold> {
        match self {
            ManifoldSpec::Cycle { n, circumference } => build_cycle(*n, *circumference),
            ManifoldSpec::Path { n, spacing } => build_path(*n, *spacing),
            ManifoldSpec::Torus { d, n, side } => build_torus(*d, *n, *side),
            ManifoldSpec::Random { n, chord_prob, seed } => build_random(*n, *chord_prob, *seed),
            ManifoldSpec::File { path } => Ok(read_graph(&std::fs::read_to_string(path)?)?.graph),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ManifoldSpec::Cycle { n, circumference } => format!("cycle(n={n};L={circumference})"),
            ManifoldSpec::Path { n, spacing } => format!("path(n={n};h={spacing})"),
            ManifoldSpec::Torus { d, n, side } => format!("torus(d={d};n={n};L={side})"),
            ManifoldSpec::Random { n, chord_prob, seed } => {
                format!("random(n={n};q={chord_prob};seed={seed})")
            }
            ManifoldSpec::File { path } => format!("file({})", path.display()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderSpec {
    pub base: ManifoldSpec,
    pub axis_steps: usize,
    #[serde(default = "unit")]
    pub spacing: f64,
    #[serde(default = "periodic")]
    pub boundary: AxisBoundary,
}

fn unit() -> f64 {
    1.0
}

fn periodic() -> AxisBoundary {
    AxisBoundary::Periodic
}

impl CylinderSpec {
    pub fn build(&self) -> Result<CylinderGraph> {
        build_cylinder(&self.base.build()?, self.axis_steps, self.spacing, self.boundary)
    }
}

/// Cylinders over `pieces` glued onto a torus-cylinder backbone at the
/// default sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GluedSpec {
    pub pieces: Vec<ManifoldSpec>,
    pub piece_axis_steps: usize,
    pub backbone: ManifoldSpec,
    pub backbone_axis_steps: usize,
    pub spacing: f64,
    pub boundary: AxisBoundary,
    pub cut_offset: usize,
    pub bridge_policy: BridgePolicy,
}

impl Default for GluedSpec {
    /// Two `C_16` cylinders on a `C_16` backbone, unit spacing, 32 axis steps.
    fn default() -> Self {
        GluedSpec {
            pieces: vec![ManifoldSpec::unit_cycle(16), ManifoldSpec::unit_cycle(16)],
            piece_axis_steps: 32,
            backbone: ManifoldSpec::Torus {
                d: 1,
                n: 16,
                side: 16.0,
            },
            backbone_axis_steps: 32,
            spacing: 1.0,
            boundary: AxisBoundary::Periodic,
            cut_offset: 2,
            bridge_policy: BridgePolicy::CompleteBipartite,
        }
    }
}

impl GluedSpec {
    pub fn build(&self) -> Result<GluedManifold> {
        if !matches!(self.backbone, ManifoldSpec::Torus { .. }) {
            return invalid("the backbone base must be a torus");
        }
        let backbone = build_cylinder(&self.backbone.build()?, self.backbone_axis_steps, self.spacing, self.boundary)?;
        let pieces = self
            .pieces
            .iter()
            .map(|b| build_cylinder(&b.build()?, self.piece_axis_steps, self.spacing, self.boundary))
            .collect::<Result<Vec<_>>>()?;
        let sites = default_sites(&pieces, &backbone);
        glue(
            pieces,
            backbone,
            &sites,
            GlueOptions {
                bridge_policy: self.bridge_policy,
                cut_offset: self.cut_offset,
            },
        )
    }
}
