//! Cylinders `M × ℝ` truncated to a finite axis.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{check_len, ScalarField};
use crate::manifold::{build_cycle, build_path, product_tagged, WeightedGraphManifold};

pub const BASE_TAG: &str = "base";
pub const AXIS_TAG: &str = "axis";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisBoundary {
    Periodic,
    Reflecting,
}

/// Product of a base graph with a discretized line; vertex `(x, t)` has index
/// `t * |base| + x`. Base edges are tagged `"base"` and axis edges `"axis"`.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderGraph {
    base: WeightedGraphManifold,
    axis: WeightedGraphManifold,
    spacing: f64,
    boundary: AxisBoundary,
    graph: WeightedGraphManifold,
}

impl CylinderGraph {
    pub fn graph(&self) -> &WeightedGraphManifold {
        &self.graph
    }

    pub fn base(&self) -> &WeightedGraphManifold {
        &self.base
    }

    pub fn axis(&self) -> &WeightedGraphManifold {
        &self.axis
    }

    pub fn axis_steps(&self) -> usize {
        self.axis.len()
    }

    pub fn base_len(&self) -> usize {
        self.base.len()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn boundary(&self) -> AxisBoundary {
        self.boundary
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn vertex(&self, x: usize, t: usize) -> usize {
        debug_assert!(x < self.base_len() && t < self.axis_steps());
        t * self.base_len() + x
    }

    /// `(x, t)` coordinates of a cylinder vertex.
    pub fn coords(&self, v: usize) -> (usize, usize) {
        (v % self.base_len(), v / self.base_len())
    }

    pub fn level(&self, v: usize) -> usize {
        v / self.base_len()
    }

    /// Axis distance in steps; wraps around on a periodic axis.
    pub fn axis_distance(&self, t1: usize, t2: usize) -> usize {
        let d = t1.abs_diff(t2);
        match self.boundary {
            AxisBoundary::Periodic => d.min(self.axis_steps() - d),
            AxisBoundary::Reflecting => d,
        }
    }

    /// Tensor product field `(f ⊗ ρ)(x, t) = f(x) ρ(t)`.
    pub fn tensor(&self, f: &[f64], rho: &[f64]) -> Result<ScalarField> {
        check_len(self.base_len(), f.len())?;
        check_len(self.axis_steps(), rho.len())?;
        let values = rho
            .iter()
            .flat_map(|r| f.iter().map(move |x| x * r))
            .collect();
        Ok(ScalarField::new(values))
    }

    /// Translation along the axis: `(τ_s F)(x, t) = F(x, t - s)`.
    ///
    /// On a reflecting axis the shifted support must stay at least one step
    /// away from both ends.
    pub fn translate(&self, field: &ScalarField, s: i64) -> Result<ScalarField> {
        check_len(self.len(), field.len())?;
        let steps = self.axis_steps() as i64;
        let nb = self.base_len();
        let f = field.values();
        let mut out = vec![0.0; f.len()];
        for (v, &val) in f.iter().enumerate() {
            let (x, t) = self.coords(v);
            let shifted = t as i64 + s;
            let target = match self.boundary {
                AxisBoundary::Periodic => shifted.rem_euclid(steps),
                AxisBoundary::Reflecting => {
                    if val == 0.0 {
                        continue;
                    }
                    if shifted < 1 || shifted > steps - 2 {
                        return Err(Error::OutOfRange(format!(
                            "translation by {s} moves support to level {shifted} on a reflecting axis of {steps} steps"
                        )));
                    }
                    shifted
                }
            };
            out[target as usize * nb + x] = val;
        }
        Ok(ScalarField::new(out))
    }
}

/// Builds `base × axis`, where the axis is a cycle (periodic) or a path
/// (reflecting) of `axis_steps` vertices at spacing `spacing`.
pub fn build_cylinder(
    base: &WeightedGraphManifold,
    axis_steps: usize,
    spacing: f64,
    boundary: AxisBoundary,
) -> Result<CylinderGraph> {
    let min_steps = match boundary {
        AxisBoundary::Periodic => 3,
        AxisBoundary::Reflecting => 2,
    };
    if axis_steps < min_steps {
        return invalid(format!(
            "{boundary:?} axis needs at least {min_steps} steps, got {axis_steps}"
        ));
    }
    let axis = match boundary {
        AxisBoundary::Periodic => build_cycle(axis_steps, axis_steps as f64 * spacing)?,
        AxisBoundary::Reflecting => build_path(axis_steps, spacing)?,
    };
    let graph = product_tagged(base, &axis, Some(BASE_TAG), Some(AXIS_TAG));
    Ok(CylinderGraph {
        base: base.clone(),
        axis,
        spacing,
        boundary,
        graph,
    })
}
