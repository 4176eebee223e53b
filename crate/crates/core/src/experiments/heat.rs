//! Heat-flow localization with its random-walk coupling bound:
//! `|(e^{σΔ_M} i_*τ_sF)(i(x, t+s)) − (e^{σΔ_piece}F)(x, t)| ≤ 2‖F‖_∞ ℙ(T ≤ 2σ)`.

use serde::{Deserialize, Serialize};

use super::localization::{bump_center, shift_vertex};
use super::report::{ExperimentReport, Verdict};
use super::rescaling::base_profile;
use super::{axis_bump, inside_isometric, transport};
use crate::error::{invalid, Error, Result};
use crate::field::ScalarField;
use crate::glue::{Component, GluedManifold};
use crate::spectral::{decompose, heat_semigroup};
use crate::walk::{exit_probability, StoppingRule};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatConfig {
    pub piece: usize,
    pub sigma: f64,
    /// Levels between the glue level and the center of `F`.
    pub bump_offset: usize,
    pub bump_radius: usize,
    pub s_grid: Vec<i64>,
    /// Probe points as `[base vertex, level offset from the bump center]`.
    pub probes: Vec<[i64; 2]>,
    pub samples: usize,
    /// `|A − B|` at the largest `s` must fall below `final_tol · ‖F‖_∞`.
    pub final_tol: f64,
}

impl Default for HeatConfig {
    fn default() -> Self {
        HeatConfig {
            piece: 0,
            sigma: 1.0,
            bump_offset: 5,
            bump_radius: 2,
            s_grid: vec![0, 2, 4, 6, 8, 10],
            probes: vec![[0, 0], [4, -2], [8, 2]],
            samples: 100_000,
            final_tol: 1e-3,
        }
    }
}

/// `F`: a base bump times an axis bump `bump_offset` levels above the glue level.
pub fn heat_source(g: &GluedManifold, cfg: &HeatConfig) -> Result<ScalarField> {
    let c = Component::Piece(cfg.piece);
    let (cyl, _) = g.component(c)?;
    let phi = base_profile(cyl.base())?;
    axis_bump(cyl, phi.values(), bump_center(g, c, cfg.bump_offset)?, cfg.bump_radius)
}

pub fn exp_heat_convergence(g: &GluedManifold, f: &ScalarField, cfg: &HeatConfig, seed: u64) -> Result<ExperimentReport> {
    let c = Component::Piece(cfg.piece);
    let (cyl, emb) = g.component(c)?;
    let mut r = ExperimentReport::new(
        "heat",
        &["s", "probe", "vertex", "ambient", "piece", "abs_diff", "p_hat", "p_stderr", "bound", "holds"],
    );
    r.param("seed", seed);
    r.param("piece", cfg.piece);
    r.param("sigma", cfg.sigma);
    r.param("walk_horizon", 2.0 * cfg.sigma);
    r.param("samples", cfg.samples);
    r.param("axis_steps", cyl.axis_steps());
    r.param("axis_length", cyl.axis_steps() as f64 * cyl.spacing());
    r.param("cut_offset", g.cut_offset());
    r.tolerance("final_diff_over_sup", cfg.final_tol);
    r.tolerance("stderr_multiplier", 3.0);
    r.note("bound = 2‖F‖_∞ (p_hat + 3 stderr); stopping region = non-isometric glue band");
    r.note("p_hat decreasing: p_hat(s') ≤ p_hat(s) + 3 joint stderr for consecutive grid points");

    if !(cfg.sigma > 0.0) {
        return invalid(format!("sigma must be positive, got {}", cfg.sigma));
    }
    if f.len() != cyl.len() {
        return invalid("F does not live on the piece");
    }
    let sup = f.max_abs();
    let center = bump_center(g, c, cfg.bump_offset)? as i64;
    let probes = cfg
        .probes
        .iter()
        .map(|&[x, dt]| {
            if x < 0 || x as usize >= cyl.base_len() {
                return invalid(format!("probe base vertex {x} out of range"));
            }
            let t = (center + dt).rem_euclid(cyl.axis_steps() as i64) as usize;
            Ok(cyl.vertex(x as usize, t))
        })
        .collect::<Result<Vec<usize>>>()?;

    let rule = StoppingRule::glue_band(g, c)?;
    let mut grid = Vec::new();
    for &s in &cfg.s_grid {
        let shifted = match cyl.translate(f, s) {
            Ok(t) => t,
            Err(Error::OutOfRange(_)) => {
                r.note(format!("grid truncated at s={s}: support leaves the axis"));
                break;
            }
            Err(e) => return Err(e),
        };
        let probes_ok = probes
            .iter()
            .all(|&v| shift_vertex(cyl, v, s).is_some_and(|w| emb.is_isometric(w)));
        if !probes_ok || !inside_isometric(g, c, &shifted)? {
            r.note(format!("grid truncated at s={s}: support or probes reach the glue band"));
            break;
        }
        grid.push(s);
    }
    if grid.len() < 2 {
        r.conclude(Verdict::Inconclusive, format!("only {} valid grid points", grid.len()));
        return Ok(r);
    }

    let dp = decompose(cyl.graph())?;
    let da = decompose(g.ambient())?;
    let piece_heat = heat_semigroup(&dp, cfg.sigma, f)?;
    let mut holds_all = true;
    let mut decreasing = true;
    let mut prev: Option<Vec<(f64, f64)>> = None;
    let mut last_max = 0.0f64;
    for &s in &grid {
        let amb_heat = heat_semigroup(&da, cfg.sigma, &transport(g, c, f, s)?)?;
        let mut cur = Vec::with_capacity(probes.len());
        last_max = 0.0;
        for (k, &v) in probes.iter().enumerate() {
            let w = shift_vertex(cyl, v, s).expect("validated");
            let a = amb_heat.values()[emb.get(w).expect("isometric vertices are embedded")];
            let b = piece_heat.values()[v];
            let (p, se) = exit_probability(cyl.graph(), w, &rule, 2.0 * cfg.sigma, cfg.samples, seed)?;
            let diff = (a - b).abs();
            let bound = 2.0 * sup * (p + 3.0 * se);
            let holds = diff <= bound;
            holds_all &= holds;
            last_max = last_max.max(diff);
            cur.push((p, se));
            r.push(vec![
                s.into(),
                k.into(),
                w.into(),
                a.into(),
                b.into(),
                diff.into(),
                p.into(),
                se.into(),
                bound.into(),
                holds.into(),
            ]);
        }
        if let Some(prev) = &prev {
            for ((p0, e0), (p1, e1)) in prev.iter().zip(&cur) {
                decreasing &= *p1 <= p0 + 3.0 * (e0 * e0 + e1 * e1).sqrt();
            }
        }
        prev = Some(cur);
    }
    let small = last_max < cfg.final_tol * sup;
    r.conclude(
        Verdict::from_bool(holds_all && small && decreasing),
        format!(
            "coupling_bound_holds={holds_all} final_max_diff_over_sup={:.6e} exit_decreasing={decreasing}",
            last_max / sup
        ),
    );
    Ok(r)
}
