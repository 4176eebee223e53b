//! `R_p(M × ℝ) ≥ R_p(M)`: estimate both sides on a base and its cylinder.

use serde::{Deserialize, Serialize};

use super::report::{ExperimentReport, Verdict};
use crate::cylinder::{build_cylinder, AxisBoundary};
use crate::error::Result;
use crate::io::write_field;
use crate::manifold::WeightedGraphManifold;
use crate::norms::{riesz_norm, EstimatorOptions, OperatorNormEstimate};
use crate::riesz::Restriction;
use crate::spectral::decompose;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CylinderLemmaConfig {
    pub p: f64,
    pub axis_steps: usize,
    pub spacing: f64,
    pub boundary: AxisBoundary,
    /// Fewer axis steps than this gives an inconclusive verdict.
    pub min_axis_steps: usize,
    /// Relative lower-bound slack: pass iff `U ≥ (1 - slack) L`.
    pub slack: f64,
    /// Also start the cylinder ascent from the base witness lifted as `w ⊗ 1`.
    pub lifted_start: bool,
    pub estimator: EstimatorOptions,
}

impl Default for CylinderLemmaConfig {
    fn default() -> Self {
        CylinderLemmaConfig {
            p: 3.0,
            axis_steps: 16,
            spacing: 1.0,
            boundary: AxisBoundary::Periodic,
            min_axis_steps: 4,
            slack: 0.02,
            lifted_start: true,
            estimator: EstimatorOptions::default(),
        }
    }
}

fn row(r: &mut ExperimentReport, host: &str, vertices: usize, e: &OperatorNormEstimate) {
    r.push(vec![
        host.into(),
        vertices.into(),
        e.value.into(),
        e.restarts.into(),
        e.iterations.into(),
        e.converged.into(),
        e.best_start.into(),
    ]);
}

pub fn exp_cylinder_lemma(base: &WeightedGraphManifold, cfg: &CylinderLemmaConfig, seed: u64) -> Result<ExperimentReport> {
    let mut r = ExperimentReport::new(
        "cylinder",
        &["host", "vertices", "value", "restarts", "iterations", "converged", "best_start"],
    );
    r.param("seed", seed);
    r.param("p", cfg.p);
    r.param("base_vertices", base.len());
    r.param("axis_steps", cfg.axis_steps);
    r.param("spacing", cfg.spacing);
    r.param("axis_length", cfg.axis_steps as f64 * cfg.spacing);
    r.param("boundary", format!("{:?}", cfg.boundary).to_lowercase());
    r.param("restarts", cfg.estimator.restarts);
    r.param("lifted_start", cfg.lifted_start);
    r.tolerance("slack", cfg.slack);
    r.tolerance("min_axis_steps", cfg.min_axis_steps as f64);

    if cfg.axis_steps < cfg.min_axis_steps {
        r.conclude(
            Verdict::Inconclusive,
            format!("axis_steps={} below guard {}", cfg.axis_steps, cfg.min_axis_steps),
        );
        return Ok(r);
    }
    let opts = EstimatorOptions {
        seed,
        ..cfg.estimator.clone()
    };
    let db = decompose(base)?;
    let lower = riesz_norm(base, &db, cfg.p, &Restriction::All, &opts)?;
    row(&mut r, "base", base.len(), &lower);

    let cyl = build_cylinder(base, cfg.axis_steps, cfg.spacing, cfg.boundary)?;
    let dc = decompose(cyl.graph())?;
    let mut copts = opts.clone();
    if cfg.lifted_start {
        let lifted = cyl.tensor(lower.witness.values(), &vec![1.0; cfg.axis_steps])?;
        copts.extra_starts.push(lifted.into_values());
    }
    let upper = riesz_norm(cyl.graph(), &dc, cfg.p, &Restriction::All, &copts)?;
    row(&mut r, "cylinder", cyl.len(), &upper);

    r.attach("base_witness", write_field(lower.witness.values()));
    r.attach("cylinder_witness", write_field(upper.witness.values()));
    let ok = upper.value >= (1.0 - cfg.slack) * lower.value;
    r.conclude(
        Verdict::from_bool(ok),
        format!("L={:.6} U={:.6} U/L={:.6}", lower.value, upper.value, upper.value / lower.value),
    );
    Ok(r)
}
