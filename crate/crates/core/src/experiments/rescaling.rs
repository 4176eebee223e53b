//! The rescaled operators `R̃_λ` converge to `R_base ⊗ id` as `λ → 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{ExperimentReport, Verdict};
use super::{nonincreasing, rel_gap};
use crate::cylinder::{build_cylinder, AxisBoundary};
use crate::error::{invalid, Result};
use crate::field::{is_mean_zero, ScalarField};
use crate::manifold::WeightedGraphManifold;
use crate::norms::{lp_norm, project_mean_zero};
use crate::riesz::{rescaled_riesz, riesz_transform, CylinderSpectrum, Restriction};
use crate::spectral::decompose;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RescalingConfig {
    pub p: f64,
    pub axis_steps: usize,
    pub spacing: f64,
    pub boundary: AxisBoundary,
    /// Decreasing rescaling parameters.
    pub lambdas: Vec<f64>,
    /// Width in axis steps of the default Gaussian profile `ρ`.
    pub profile_width: f64,
    pub final_tol: f64,
}

impl Default for RescalingConfig {
    fn default() -> Self {
        RescalingConfig {
            p: 3.0,
            axis_steps: 64,
            spacing: 1.0,
            boundary: AxisBoundary::Periodic,
            lambdas: (0..5).map(|k| 0.5f64.powi(k)).collect(),
            profile_width: 8.0,
            final_tol: 0.05,
        }
    }
}

/// A mean-zero Gaussian bump around base vertex 0, in graph distance.
pub fn base_profile(base: &WeightedGraphManifold) -> Result<ScalarField> {
    let d = base.distances_from(&[0]);
    let raw: Vec<f64> = d.iter().map(|&k| (-((k * k) as f64) / 8.0).exp()).collect();
    project_mean_zero(base.mu(), &ScalarField::new(raw))
}

/// A Gaussian of the given width centered on the middle of an axis with
/// `steps` points at `spacing`, scaled to unit `L^p` norm.
pub fn axis_profile(steps: usize, spacing: f64, width: f64, p: f64) -> Result<Vec<f64>> {
    if !(width > 0.0) {
        return invalid("profile width must be positive");
    }
    let mid = steps as f64 / 2.0;
    let raw: Vec<f64> = (0..steps)
        .map(|t| {
            let z = (t as f64 - mid) / width;
            (-0.5 * z * z).exp()
        })
        .collect();
    let norm = lp_norm(&vec![spacing; steps], &raw, p)?;
    Ok(raw.into_iter().map(|x| x / norm).collect())
}

pub fn exp_rescaling(
    base: &WeightedGraphManifold,
    f: &ScalarField,
    rho: &[f64],
    cfg: &RescalingConfig,
) -> Result<ExperimentReport> {
    let mut r = ExperimentReport::new("rescale", &["lambda", "value", "target", "deviation", "input_norm"]);
    r.param("p", cfg.p);
    r.param("base_vertices", base.len());
    r.param("axis_steps", cfg.axis_steps);
    r.param("spacing", cfg.spacing);
    r.param("axis_length", cfg.axis_steps as f64 * cfg.spacing);
    r.param("boundary", format!("{:?}", cfg.boundary).to_lowercase());
    r.tolerance("final_deviation", cfg.final_tol);
    r.note("deviation = |‖R̃_λ(f⊗ρ)‖_p − ‖R f‖_p ‖ρ‖_p| / (‖R f‖_p ‖ρ‖_p)");

    if cfg.lambdas.is_empty() || cfg.lambdas.iter().any(|l| !(*l > 0.0)) {
        return invalid("lambda grid must be nonempty and positive");
    }
    if cfg.lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return invalid("lambda grid must be strictly decreasing");
    }
    if !is_mean_zero(base.mu(), f.values()) {
        return invalid("base field must be mean-zero");
    }
    let cyl = build_cylinder(base, cfg.axis_steps, cfg.spacing, cfg.boundary)?;
    let rho_norm = lp_norm(cyl.axis().mu(), rho, cfg.p)?;
    if (rho_norm - 1.0).abs() > 1e-12 {
        return invalid(format!("axis profile must have unit L^p norm, got {rho_norm}"));
    }
    let db = decompose(base)?;
    let target = lp_norm(base.mu(), &riesz_transform(base, &db, f, &Restriction::All)?, cfg.p)? * rho_norm;
    let spec = CylinderSpectrum::new(&cyl)?;
    let field = cyl.tensor(f.values(), rho)?;
    let input_norm = lp_norm(cyl.graph().mu(), &field, cfg.p)?;

    let values = cfg
        .lambdas
        .par_iter()
        .map(|&l| lp_norm(cyl.graph().mu(), &rescaled_riesz(&cyl, &spec, l, &field)?, cfg.p))
        .collect::<Result<Vec<f64>>>()?;
    let mut devs = Vec::with_capacity(values.len());
    for (&l, &a) in cfg.lambdas.iter().zip(&values) {
        let d = rel_gap(a, target);
        devs.push(d);
        r.push(vec![l.into(), a.into(), target.into(), d.into(), input_norm.into()]);
    }
    let last = *devs.last().unwrap();
    let decreasing = nonincreasing(&devs, 0.0);
    r.conclude(
        Verdict::from_bool(decreasing && last <= cfg.final_tol),
        format!("final_deviation={last:.6e} decreasing={decreasing}"),
    );
    Ok(r)
}
