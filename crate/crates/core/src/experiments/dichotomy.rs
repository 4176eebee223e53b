//! Transported lower bound: `R_p(M) ≥ max_n R_p(M_n × ℝ)` for a manifold
//! glued from the cylinders `M_n × ℝ`.

use serde::{Deserialize, Serialize};

use super::report::{ExperimentReport, Verdict};
use super::spec::ManifoldSpec;
use crate::cylinder::{build_cylinder, AxisBoundary};
use crate::error::{invalid, Result};
use crate::field::ScalarField;
use crate::glue::{default_sites, glue, BridgePolicy, Component, GlueOptions};
use crate::io::write_field;
use crate::manifold::WeightedGraphManifold;
use crate::norms::{lp_unchecked, op_norm_lower_bound, riesz_norm, EstimatorOptions, NormObjective, RieszOperator};
use crate::riesz::Restriction;
use crate::spectral::decompose;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DichotomyConfig {
    pub p: f64,
    pub piece_axis_steps: usize,
    pub backbone: ManifoldSpec,
    pub backbone_axis_steps: usize,
    pub spacing: f64,
    pub cut_offset: usize,
    pub bridge_policy: BridgePolicy,
    /// Axis shifts `s` at which each piece witness is transported.
    /// Empty means quarter turns of the piece axis.
    pub shifts: Vec<i64>,
    pub slack: f64,
    pub estimator: EstimatorOptions,
}

impl Default for DichotomyConfig {
    fn default() -> Self {
        DichotomyConfig {
            p: 3.0,
            piece_axis_steps: 16,
            backbone: ManifoldSpec::Torus {
                d: 1,
                n: 16,
                side: 16.0,
            },
            backbone_axis_steps: 16,
            spacing: 1.0,
            cut_offset: 2,
            bridge_policy: BridgePolicy::CompleteBipartite,
            shifts: Vec::new(),
            slack: 0.02,
            estimator: EstimatorOptions::default(),
        }
    }
}

/// Zero outside the isometric region.
fn restrict_isometric(field: &ScalarField, iso: impl Fn(usize) -> bool) -> ScalarField {
    ScalarField::new(
        field
            .values()
            .iter()
            .enumerate()
            .map(|(v, x)| if iso(v) { *x } else { 0.0 })
            .collect(),
    )
}

pub fn exp_dichotomy(bases: &[WeightedGraphManifold], cfg: &DichotomyConfig, seed: u64) -> Result<ExperimentReport> {
    if bases.is_empty() {
        return invalid("at least one base is required");
    }
    let dim = bases[0].dim_hint();
    if bases.iter().any(|b| b.dim_hint() != dim) {
        return invalid("all bases must share the same dimension");
    }
    let mut r = ExperimentReport::new(
        "dichotomy",
        &["host", "vertices", "value", "transported_start", "restarts", "converged"],
    );
    r.param("seed", seed);
    r.param("p", cfg.p);
    r.param("pieces", bases.len());
    r.param("piece_axis_steps", cfg.piece_axis_steps);
    r.param("backbone", cfg.backbone.label());
    r.param("backbone_axis_steps", cfg.backbone_axis_steps);
    r.param("spacing", cfg.spacing);
    r.param("cut_offset", cfg.cut_offset);
    r.param("restarts", cfg.estimator.restarts);
    r.tolerance("slack", cfg.slack);
    r.note("transported_start = ‖R(w)‖_p/‖w‖_p for the best transported piece witness w (mean-zero projected)");

    let opts = EstimatorOptions {
        seed,
        ..cfg.estimator.clone()
    };
    let boundary = AxisBoundary::Periodic;
    let backbone_base = cfg.backbone.build()?;
    if backbone_base.dim_hint() != dim {
        return invalid("backbone dimension differs from the pieces");
    }
    let backbone = build_cylinder(&backbone_base, cfg.backbone_axis_steps, cfg.spacing, boundary)?;
    let pieces = bases
        .iter()
        .map(|b| build_cylinder(b, cfg.piece_axis_steps, cfg.spacing, boundary))
        .collect::<Result<Vec<_>>>()?;

    let mut piece_estimates = Vec::with_capacity(pieces.len());
    for (n, cyl) in pieces.iter().enumerate() {
        let d = decompose(cyl.graph())?;
        let e = riesz_norm(cyl.graph(), &d, cfg.p, &Restriction::All, &opts)?;
        r.attach(&format!("piece{n}_witness"), write_field(e.witness.values()));
        piece_estimates.push(e);
    }

    let sites = default_sites(&pieces, &backbone);
    let glued = glue(
        pieces,
        backbone,
        &sites,
        GlueOptions {
            bridge_policy: cfg.bridge_policy,
            cut_offset: cfg.cut_offset,
        },
    )?;
    let amb = glued.ambient();
    let da = decompose(amb)?;
    let op = RieszOperator::new(amb, &da, &Restriction::All)?;
    let ratio = |w: &[f64]| -> f64 {
        let vol = amb.volume();
        let mean = amb.mu().iter().zip(w).map(|(m, x)| m * x).sum::<f64>() / vol;
        let w: Vec<f64> = w.iter().map(|x| x - mean).collect();
        let n = lp_unchecked(amb.mu(), &w, cfg.p);
        if n == 0.0 {
            0.0
        } else {
            op.output_norm(&w, cfg.p) / n
        }
    };

    let mut gopts = opts.clone();
    let mut best_transport = Vec::with_capacity(piece_estimates.len());
    for (n, e) in piece_estimates.iter().enumerate() {
        let c = Component::Piece(n);
        let (cyl, emb) = glued.component(c)?;
        let steps = cyl.axis_steps() as i64;
        let shifts: Vec<i64> = if cfg.shifts.is_empty() {
            (0..4).map(|k| k * steps / 4).collect()
        } else {
            cfg.shifts.clone()
        };
        let mut best = 0.0f64;
        for s in shifts {
            let moved = cyl.translate(&e.witness, s)?;
            let kept = restrict_isometric(&moved, |v| emb.is_isometric(v));
            let w = glued.pushforward(c, &kept)?;
            best = best.max(ratio(w.values()));
            gopts.extra_starts.push(w.into_values());
        }
        best_transport.push(best);
    }
    let ge = op_norm_lower_bound(&op, cfg.p, &gopts)?;
    r.attach("glued_witness", write_field(ge.witness.values()));

    for (n, (e, t)) in piece_estimates.iter().zip(&best_transport).enumerate() {
        r.push(vec![
            format!("piece{n}").into(),
            glued.pieces()[n].len().into(),
            e.value.into(),
            (*t).into(),
            e.restarts.into(),
            e.converged.into(),
        ]);
    }
    r.push(vec![
        "glued".into(),
        amb.len().into(),
        ge.value.into(),
        best_transport.iter().copied().fold(0.0, f64::max).into(),
        ge.restarts.into(),
        ge.converged.into(),
    ]);
    let max_piece = piece_estimates.iter().map(|e| e.value).fold(0.0, f64::max);
    let ok = ge.value >= (1.0 - cfg.slack) * max_piece;
    r.conclude(
        Verdict::from_bool(ok),
        format!("glued={:.6} max_piece={max_piece:.6} ratio={:.6}", ge.value, ge.value / max_piece),
    );
    Ok(r)
}
