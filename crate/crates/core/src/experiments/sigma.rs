//! Bounds on the subordination integrand `σ^{-1/2} ⟨e^{σΔ} F, G⟩` with `F = ΔH`:
//! `|⟨e^{σΔ}F, G⟩| ≤ ‖F‖₂‖G‖₂` and `σ |⟨e^{σΔ}F, G⟩| ≤ e^{-1} ‖H‖₂‖G‖₂`.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use super::axis_bump;
use super::report::{fmt_float, ExperimentReport, Verdict};
use super::rescaling::base_profile;
use crate::cylinder::CylinderGraph;
use crate::error::{invalid, Result};
use crate::field::{check_len, ScalarField};
use crate::quadrature::composite_panels;
use crate::riesz::CylinderSpectrum;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SigmaBoundsConfig {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub points: usize,
    /// Two truncation levels `T₁ < T₂` for `∫_0^T σ^{-1/2} ⟨e^{σΔ}F, G⟩ dσ`.
    pub truncations: [f64; 2],
    pub nodes_per_panel: usize,
}

impl Default for SigmaBoundsConfig {
    fn default() -> Self {
        SigmaBoundsConfig {
            sigma_min: 1e-3,
            sigma_max: 1e3,
            points: 50,
            truncations: [1e2, 1e3],
            nodes_per_panel: 20,
        }
    }
}

/// `(H, G)`: two compactly supported bumps, `G` three levels above `H` and
/// centered on a different base vertex.
pub fn sigma_default_fields(c: &CylinderGraph) -> Result<(ScalarField, ScalarField)> {
    let phi = base_profile(c.base())?;
    let mid = c.axis_steps() / 2;
    let h = axis_bump(c, phi.values(), mid, 2)?;
    let dist = c.base().distances_from(&[c.base_len() / 4]);
    let psi: Vec<f64> = dist.iter().map(|&k| (-((k * k) as f64) / 8.0).exp()).collect();
    let g = axis_bump(c, &psi, (mid + 3) % c.axis_steps(), 2)?;
    Ok((h, g))
}

pub fn exp_sigma_bounds(
    c: &CylinderGraph,
    h: &ScalarField,
    g: &ScalarField,
    cfg: &SigmaBoundsConfig,
) -> Result<ExperimentReport> {
    let host = c.graph();
    check_len(host.len(), h.len())?;
    check_len(host.len(), g.len())?;
    if !(cfg.sigma_min > 0.0 && cfg.sigma_max > cfg.sigma_min) || cfg.points < 2 {
        return invalid("sigma grid needs 0 < sigma_min < sigma_max and at least 2 points");
    }
    let [t1, t2] = cfg.truncations;
    if !(t1 > 0.0 && t2 > t1) {
        return invalid("truncations must satisfy 0 < T1 < T2");
    }
    let mut r = ExperimentReport::new(
        "sigma-bounds",
        &["sigma", "integrand", "ratio_contraction", "ratio_energy", "bound_contraction", "bound_energy", "tighter"],
    );
    r.param("vertices", host.len());
    r.param("axis_steps", c.axis_steps());
    r.param("axis_length", c.axis_steps() as f64 * c.spacing());
    r.param("sigma_min", cfg.sigma_min);
    r.param("sigma_max", cfg.sigma_max);
    r.param("points", cfg.points);
    r.tolerance("ratio_contraction", 1.0);
    r.tolerance("ratio_energy", (-1.0f64).exp());
    r.note("ratio_contraction = |⟨e^{σΔ}F,G⟩| / (‖F‖‖G‖); ratio_energy = σ|⟨e^{σΔ}F,G⟩| / (‖H‖‖G‖)");

    let f = host.apply_generator(h.values());
    let d = CylinderSpectrum::new(c)?.full();
    let cf = d.coefficients(&f);
    let cg = d.coefficients(g.values());
    let norm = |x: &[f64]| host.inner(x, x).sqrt();
    let (nf, ng, nh) = (norm(&f), norm(g.values()), norm(h.values()));
    let pair = |sigma: f64| -> f64 {
        (0..d.len())
            .map(|k| (-sigma * d.eigenvalues()[k]).exp() * cf[k] * cg[k])
            .sum()
    };

    let slack = 1.0 + 1e-12;
    let mut ok = true;
    let ratio = (cfg.sigma_max / cfg.sigma_min).ln();
    for i in 0..cfg.points {
        let sigma = cfg.sigma_min * (ratio * i as f64 / (cfg.points - 1) as f64).exp();
        let ip = pair(sigma);
        let r1 = ip.abs() / (nf * ng);
        let r2 = sigma * ip.abs() / (nh * ng);
        ok &= r1 <= slack && r2 <= E.recip() * slack;
        let b1 = sigma.powf(-0.5) * nf * ng;
        let b2 = sigma.powf(-1.5) * E.recip() * nh * ng;
        let tighter = if sigma.powf(-0.5) <= sigma.powf(-1.5) { "contraction" } else { "energy" };
        r.push(vec![
            sigma.into(),
            (sigma.powf(-0.5) * ip).into(),
            r1.into(),
            r2.into(),
            b1.into(),
            b2.into(),
            tighter.into(),
        ]);
    }

    // ∫_0^T σ^{-1/2} e^{-λσ} dσ = 2 ∫_0^{√T} e^{-λt²} dt, mode by mode
    let kd = d.kernel_dim();
    let integral = |t: f64| -> f64 {
        let rule = composite_panels(0.5 / d.max_eigenvalue().sqrt(), t.sqrt(), cfg.nodes_per_panel);
        (kd..d.len())
            .map(|k| {
                let l = d.eigenvalues()[k];
                2.0 * rule.iter().map(|(x, w)| w * (-l * x * x).exp()).sum::<f64>() * cf[k] * cg[k]
            })
            .sum()
    };
    let (j1, j2) = (integral(t1), integral(t2));
    let full: f64 = (kd..d.len())
        .map(|k| (PI / d.eigenvalues()[k]).sqrt() * cf[k] * cg[k])
        .sum();
    let env = 2.0 * E.recip() * nh * ng;
    let step_bound = env * (t1.powf(-0.5) - t2.powf(-0.5));
    let tail_bound = env * t2.powf(-0.5);
    let abs_slack = 1e-12 * (full.abs() + env);
    let step_ok = (j2 - j1).abs() <= step_bound * slack + abs_slack;
    let tail_ok = (full - j2).abs() <= tail_bound * slack + abs_slack;
    r.param("integral_T1", fmt_float(j1));
    r.param("integral_T2", fmt_float(j2));
    r.param("integral_full", fmt_float(full));
    r.param("step_bound", fmt_float(step_bound));
    r.param("tail_bound", fmt_float(tail_bound));
    ok &= step_ok && tail_ok;
    r.conclude(
        Verdict::from_bool(ok),
        format!("pointwise_bounds_and_tails_ok={ok} step_ok={step_ok} tail_ok={tail_ok}"),
    );
    Ok(r)
}
