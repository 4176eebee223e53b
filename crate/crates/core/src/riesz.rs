//! Gradient magnitudes and the Riesz transform `R = ∇(-Δ)^{-1/2}`.
//!
//! The gradient is the carré du champ
//!
//! ```text
//! |∇f|(v)² = (2 mu(v))^{-1} Σ_{u~v} w(uv) (f(u) - f(v))²
//! ```
//!
//! so that `‖|∇f|‖²_{L²(mu)} = <f, -Δf>_mu` and `R` is an isometry on
//! mean-zero `L²`.

use nalgebra::DMatrix;

use crate::cylinder::{CylinderGraph, BASE_TAG};
use crate::error::{invalid, Result};
use crate::field::{check_len, is_mean_zero, GradientMagnitudeField, ScalarField};
use crate::manifold::WeightedGraphManifold;
use crate::spectral::{decompose, inv_sqrt_spectral, SpectralDecomposition};

/// Which edges enter a gradient.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Restriction {
    #[default]
    All,
    /// Only edges carrying this factor tag.
    Tag(String),
}

impl Restriction {
    pub fn tag(t: &str) -> Self {
        Restriction::Tag(t.to_string())
    }

    /// Per-edge inclusion mask, rejecting tags the host does not carry.
    pub fn edge_mask(&self, host: &WeightedGraphManifold) -> Result<Vec<bool>> {
        match self {
            Restriction::All => Ok(vec![true; host.edges().len()]),
            Restriction::Tag(t) => {
                if !host.has_tag(t) {
                    return invalid(format!("no edge carries the factor tag {t:?}"));
                }
                Ok(host.edges().iter().map(|e| e.tag.as_deref() == Some(t.as_str())).collect())
            }
        }
    }

    fn label(&self) -> Option<String> {
        match self {
            Restriction::All => None,
            Restriction::Tag(t) => Some(t.clone()),
        }
    }
}

pub(crate) fn magnitudes(host: &WeightedGraphManifold, f: &[f64], mask: &[bool]) -> Vec<f64> {
    let mut sq = vec![0.0; host.len()];
    for (e, keep) in host.edges().iter().zip(mask) {
        if *keep {
            let d = f[e.b] - f[e.a];
            let c = e.w * d * d;
            sq[e.a] += c;
            sq[e.b] += c;
        }
    }
    sq.iter()
        .zip(host.mu())
        .map(|(s, m)| (s / (2.0 * m)).sqrt())
        .collect()
}

pub fn gradient_magnitude(
    host: &WeightedGraphManifold,
    f: &ScalarField,
    restrict: &Restriction,
) -> Result<GradientMagnitudeField> {
    f.check_host(host)?;
    let mask = restrict.edge_mask(host)?;
    Ok(GradientMagnitudeField {
        values: magnitudes(host, f.values(), &mask),
        restriction: restrict.label(),
    })
}

/// `|∇ (-Δ)^{-1/2} f|` for mean-zero `f`.
pub fn riesz_transform(
    host: &WeightedGraphManifold,
    d: &SpectralDecomposition,
    f: &ScalarField,
    restrict: &Restriction,
) -> Result<GradientMagnitudeField> {
    let u = inv_sqrt_spectral(d, f)?;
    gradient_magnitude(host, &u, restrict)
}

/// Factor decompositions of a cylinder, for separable functional calculus.
#[derive(Clone, Debug)]
pub struct CylinderSpectrum {
    pub base: SpectralDecomposition,
    pub axis: SpectralDecomposition,
}

impl CylinderSpectrum {
    pub fn new(cyl: &CylinderGraph) -> Result<Self> {
        Ok(CylinderSpectrum {
            base: decompose(cyl.base())?,
            axis: decompose(cyl.axis())?,
        })
    }

    /// The full cylinder decomposition in the separable basis `v_j ⊗ w_k`.
    pub fn full(&self) -> SpectralDecomposition {
        SpectralDecomposition::product(&self.base, &self.axis)
    }
}

/// `R̃_λ F = |∇_base (-Δ_base - λ² ∂_t²)^{-1/2} F|`, evaluated mode by mode with
/// symbol `(λ_j + λ² μ_k)^{-1/2}`.
pub fn rescaled_riesz(
    cyl: &CylinderGraph,
    spec: &CylinderSpectrum,
    lambda: f64,
    f: &ScalarField,
) -> Result<GradientMagnitudeField> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return invalid(format!("rescaling parameter must be positive, got {lambda}"));
    }
    let host = cyl.graph();
    check_len(host.len(), f.len())?;
    if !is_mean_zero(host.mu(), f.values()) {
        return invalid("rescaled Riesz transform needs a mean-zero input");
    }
    let (nb, na) = (cyl.base_len(), cyl.axis_steps());
    // F as an nb × na matrix, weighted by mu_base ⊗ mu_axis
    let weighted = DMatrix::from_fn(nb, na, |x, t| {
        spec.base.mu()[x] * spec.axis.mu()[t] * f.values()[t * nb + x]
    });
    let mut coeff = spec.base.vectors().tr_mul(&weighted) * spec.axis.vectors();
    let scale = coeff.amax();
    let l2 = lambda * lambda;
    for k in 0..na {
        for j in 0..nb {
            let symbol = spec.base.eigenvalues()[j] + l2 * spec.axis.eigenvalues()[k];
            let zero_mode = j < spec.base.kernel_dim() && k < spec.axis.kernel_dim();
            if zero_mode {
                if coeff[(j, k)].abs() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
                    return invalid("input has a component on the zero mode");
                }
                coeff[(j, k)] = 0.0;
            } else {
                coeff[(j, k)] /= symbol.sqrt();
            }
        }
    }
    let u = spec.base.vectors() * coeff * spec.axis.vectors().transpose();
    let values: Vec<f64> = (0..na).flat_map(|t| (0..nb).map(move |x| (x, t))).map(|(x, t)| u[(x, t)]).collect();
    let mask = Restriction::tag(BASE_TAG).edge_mask(host)?;
    Ok(GradientMagnitudeField {
        values: magnitudes(host, &values, &mask),
        restriction: Some(BASE_TAG.to_string()),
    })
}
