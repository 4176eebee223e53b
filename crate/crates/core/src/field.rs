//! Vertex-indexed functions and pointwise gradient magnitudes.

use crate::error::{invalid, Result};
use crate::manifold::WeightedGraphManifold;

/// Relative tolerance for the mean-zero condition `|Σ mu f| ≤ tol · Σ mu |f|`.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

/// A real function on the vertices of a host graph.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
    mean_zero: bool,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        ScalarField {
            values,
            mean_zero: false,
        }
    }

    pub fn zeros(n: usize) -> Self {
        ScalarField {
            values: vec![0.0; n],
            mean_zero: true,
        }
    }

    /// Wraps `values` after checking the mean-zero condition against `mu`.
    pub fn mean_zero(mu: &[f64], values: Vec<f64>) -> Result<Self> {
        check_len(mu.len(), values.len())?;
        if !is_mean_zero(mu, &values) {
            return invalid(format!(
                "field is not mean-zero: Σ mu f = {:e}",
                weighted_sum(mu, &values)
            ));
        }
        Ok(ScalarField {
            values,
            mean_zero: true,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Whether the field was constructed with a verified mean-zero flag.
    pub fn is_flagged_mean_zero(&self) -> bool {
        self.mean_zero
    }

    pub fn check_host(&self, host: &WeightedGraphManifold) -> Result<()> {
        check_len(host.len(), self.len())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        ScalarField {
            values: self.values.iter().map(|x| c * x).collect(),
            mean_zero: self.mean_zero,
        }
    }
}

impl From<Vec<f64>> for ScalarField {
    fn from(values: Vec<f64>) -> Self {
        ScalarField::new(values)
    }
}

/// Pointwise length `|∇u|(v) ≥ 0` of a discrete gradient, optionally restricted
/// to the edges of one product factor.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientMagnitudeField {
    pub values: Vec<f64>,
    pub restriction: Option<String>,
}

impl GradientMagnitudeField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Anything that is a list of vertex values.
pub trait VertexValues {
    fn vertex_values(&self) -> &[f64];
}

impl VertexValues for ScalarField {
    fn vertex_values(&self) -> &[f64] {
        &self.values
    }
}

impl VertexValues for GradientMagnitudeField {
    fn vertex_values(&self) -> &[f64] {
        &self.values
    }
}

impl VertexValues for [f64] {
    fn vertex_values(&self) -> &[f64] {
        self
    }
}

impl VertexValues for Vec<f64> {
    fn vertex_values(&self) -> &[f64] {
        self
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return invalid(format!("field has {got} values, host has {expected} vertices"));
    }
    Ok(())
}

pub(crate) fn weighted_sum(mu: &[f64], f: &[f64]) -> f64 {
    mu.iter().zip(f).map(|(m, x)| m * x).sum()
}

pub fn is_mean_zero(mu: &[f64], f: &[f64]) -> bool {
    let scale: f64 = mu.iter().zip(f).map(|(m, x)| m * x.abs()).sum();
    weighted_sum(mu, f).abs() <= MEAN_ZERO_TOL * scale
}
