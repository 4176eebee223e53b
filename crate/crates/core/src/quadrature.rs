//! Gauss–Legendre panels for the subordination integral
//!
//! ```text
//! (-Δ)^{-1/2} f = π^{-1/2} ∫_0^∞ σ^{-1/2} e^{σΔ} f dσ = 2π^{-1/2} ∫_0^∞ e^{t²Δ} f dt
//! ```
//!
//! after substituting `σ = t²`, which removes the endpoint singularity.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

// P_n(x) and P_n'(x) by the three-term recurrence
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub nodes_per_panel: usize,
    /// Truncate at `T` with `e^{-λ₁ T²} ≤ tail_tol`.
    pub tail_tol: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            nodes_per_panel: 20,
            tail_tol: 1e-10,
        }
    }
}

/// Quadrature nodes `t_i` (ascending) and weights for `∫_0^T g(t) dt`, with
/// geometrically growing panels adapted to `e^{-λ t²}` for `λ ∈ [gap, lambda_max]`.
pub fn subordination_rule(gap: f64, lambda_max: f64, cfg: &QuadConfig) -> Result<Vec<(f64, f64)>> {
    if !(gap > 0.0 && gap.is_finite()) {
        return invalid(format!("spectral gap estimate must be positive, got {gap}"));
    }
    if !(cfg.tail_tol > 0.0 && cfg.tail_tol < 1.0) || cfg.nodes_per_panel == 0 {
        return invalid("quadrature config out of range");
    }
    let t_max = ((1.0 / cfg.tail_tol).ln() / gap).sqrt();
    let first = 0.5 / lambda_max.max(gap).sqrt();
    Ok(composite_panels(first, t_max, cfg.nodes_per_panel))
}

/// Gauss–Legendre rule on `[0, t_max]` over panels `[0, a], [a, 2a], [2a, 4a], …`.
pub fn composite_panels(first: f64, t_max: f64, nodes_per_panel: usize) -> Vec<(f64, f64)> {
    let first = first.min(t_max);
    let mut edges = vec![0.0, first];
    while *edges.last().unwrap() < t_max {
        let next = (edges.last().unwrap() * 2.0).min(t_max);
        edges.push(next);
    }
    let (x, w) = gauss_legendre(nodes_per_panel);
    let mut rule = Vec::with_capacity((edges.len() - 1) * x.len());
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (xi, wi) in x.iter().zip(&w) {
            rule.push((mid + half * xi, half * wi));
        }
    }
    rule
}
