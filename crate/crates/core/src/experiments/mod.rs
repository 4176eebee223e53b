//! Scripted numerical experiments, each producing an [`ExperimentReport`].

mod cylinder;
mod dichotomy;
mod heat;
mod localization;
mod report;
mod rescaling;
mod sigma;
mod spec;

pub use cylinder::{exp_cylinder_lemma, CylinderLemmaConfig};
pub use dichotomy::{exp_dichotomy, DichotomyConfig};
pub use heat::{exp_heat_convergence, heat_source, HeatConfig};
pub use localization::{exp_localization, localization_source, LocalizationConfig};
pub use report::{fmt_float, Cell, ExperimentReport, Verdict};
pub use rescaling::{axis_profile, base_profile, exp_rescaling, RescalingConfig};
pub use sigma::{exp_sigma_bounds, sigma_default_fields, SigmaBoundsConfig};
pub use spec::{CylinderSpec, GluedSpec, ManifoldSpec};

use std::f64::consts::PI;

use crate::cylinder::CylinderGraph;
use crate::error::{invalid, Result};
use crate::field::ScalarField;
use crate::glue::{Component, GluedManifold};

/// Experiment identifiers accepted by the command line.
pub const EXPERIMENT_IDS: [&str; 6] = ["cylinder", "rescale", "localize", "heat", "sigma-bounds", "dichotomy"];

/// `i_* τ_s F` for a field on a glued component.
pub fn transport(g: &GluedManifold, c: Component, field: &ScalarField, s: i64) -> Result<ScalarField> {
    let (cyl, _) = g.component(c)?;
    g.pushforward(c, &cyl.translate(field, s)?)
}

/// `τ_{-s} i^* f` for an ambient field.
pub fn transport_back(g: &GluedManifold, c: Component, field: &ScalarField, s: i64) -> Result<ScalarField> {
    let (cyl, _) = g.component(c)?;
    cyl.translate(&g.pullback(c, field)?, -s)
}

/// Whether every vertex where `field` is nonzero is flagged isometric.
pub(crate) fn inside_isometric(g: &GluedManifold, c: Component, field: &ScalarField) -> Result<bool> {
    let (_, emb) = g.component(c)?;
    Ok(field
        .values()
        .iter()
        .enumerate()
        .all(|(v, x)| *x == 0.0 || emb.is_isometric(v)))
}

/// A smooth bump `cos²` in the axis variable, supported on levels
/// `center - radius ..= center + radius` (wrapping on a periodic axis), times
/// the base profile `phi`.
pub fn axis_bump(cyl: &CylinderGraph, phi: &[f64], center: usize, radius: usize) -> Result<ScalarField> {
    let n = cyl.axis_steps();
    if 2 * radius + 1 > n {
        return invalid(format!("bump of radius {radius} does not fit on {n} axis steps"));
    }
    let mut rho = vec![0.0; n];
    for k in -(radius as i64)..=(radius as i64) {
        let t = (center as i64 + k).rem_euclid(n as i64) as usize;
        let c = (PI * k as f64 / (2.0 * (radius as f64 + 1.0))).cos();
        rho[t] = c * c;
    }
    cyl.tensor(phi, &rho)
}

/// Relative gap `|a - b| / |b|`.
pub(crate) fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Whether `xs` never increases by more than `tol`.
pub(crate) fn nonincreasing(xs: &[f64], tol: f64) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0] + tol)
}
