//! `L^p` norms and lower bounds for `L^p → L^p` operator norms.
//!
//! The estimator is a nonlinear power method: for a convex numerator
//! `N(f) = ‖A f‖_p` it alternates a gradient evaluation (apply `A`, the duality
//! map `y ↦ |y|^{p-1} sgn y`, then the adjoint) with the maximizer of the
//! linearization on the unit `p`-sphere. Every returned value is the exact
//! ratio `‖A w‖_p / ‖w‖_p` of its witness `w`, hence a lower bound.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::{check_len, ScalarField, VertexValues};
use crate::manifold::WeightedGraphManifold;
use crate::riesz::{magnitudes, Restriction};
use crate::rng::{op, stream};
use crate::spectral::{mean_zero_output, SpectralDecomposition};

/// `(Σ mu |f|^p)^{1/p}`, or `max |f|` for `p = ∞`.
pub fn lp_norm<F: VertexValues + ?Sized>(mu: &[f64], f: &F, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return invalid(format!("p must be at least 1, got {p}"));
    }
    let v = f.vertex_values();
    check_len(mu.len(), v.len())?;
    Ok(lp_unchecked(mu, v, p))
}

pub(crate) fn lp_unchecked(mu: &[f64], v: &[f64], p: f64) -> f64 {
    let top = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if p.is_infinite() || top == 0.0 {
        return top;
    }
    let s: f64 = mu.iter().zip(v).map(|(m, x)| m * (x.abs() / top).powf(p)).sum();
    top * s.powf(1.0 / p)
}

/// `f - (Σ mu f / Σ mu)`.
pub fn project_mean_zero(mu: &[f64], f: &ScalarField) -> Result<ScalarField> {
    check_len(mu.len(), f.len())?;
    Ok(mean_zero_output(mu, f.values().to_vec()))
}

/// Norm of the Hilbert transform on `L^p`: `max(tan, cot)(π / 2p)`.
pub fn hilbert_reference(p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return invalid(format!("p must lie in (1, ∞), got {p}"));
    }
    let a = std::f64::consts::PI / (2.0 * p);
    Ok(a.tan().max(1.0 / a.tan()))
}

/// A map whose `L^p → L^p` norm is being estimated.
pub trait NormObjective: Sync {
    /// Volume weights of the input space.
    fn input_measure(&self) -> &[f64];

    /// Whether inputs are restricted to mean-zero fields.
    fn mean_zero_domain(&self) -> bool;

    /// `‖A f‖_p`.
    fn output_norm(&self, f: &[f64], p: f64) -> f64;

    /// Euclidean gradient of `‖A f‖_p^p / p` with respect to the vertex values of `f`.
    fn ascent_gradient(&self, f: &[f64], p: f64) -> Vec<f64>;

    /// Deterministic starting points tried before the random restarts.
    fn structured_starts(&self) -> Vec<Vec<f64>> {
        Vec::new()
    }
}

/// A dense linear map between weighted `ℓ^p` spaces.
pub struct DenseOperator {
    pub matrix: DMatrix<f64>,
    pub mu_in: Vec<f64>,
    pub mu_out: Vec<f64>,
    pub mean_zero: bool,
}

impl DenseOperator {
    /// Unit-weight map on all inputs.
    pub fn plain(matrix: DMatrix<f64>) -> Self {
        let (m, n) = matrix.shape();
        DenseOperator {
            matrix,
            mu_in: vec![1.0; n],
            mu_out: vec![1.0; m],
            mean_zero: false,
        }
    }
}

impl NormObjective for DenseOperator {
    fn input_measure(&self) -> &[f64] {
        &self.mu_in
    }

    fn mean_zero_domain(&self) -> bool {
        self.mean_zero
    }

    fn output_norm(&self, f: &[f64], p: f64) -> f64 {
        let y = &self.matrix * DVector::from_column_slice(f);
        lp_unchecked(&self.mu_out, y.as_slice(), p)
    }

    fn ascent_gradient(&self, f: &[f64], p: f64) -> Vec<f64> {
        let y = &self.matrix * DVector::from_column_slice(f);
        let z = DVector::from_iterator(
            y.len(),
            y.iter().zip(&self.mu_out).map(|(y, m)| m * y.abs().powf(p - 1.0) * y.signum()),
        );
        self.matrix.tr_mul(&z).iter().copied().collect()
    }

    fn structured_starts(&self) -> Vec<Vec<f64>> {
        let n = self.mu_in.len();
        (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect()
    }
}

/// `f ↦ |∇_restrict (-Δ)^{-1/2} f|` on mean-zero fields, linearized through the
/// edge differences `y_e = √w_e (u_b - u_a)` of `u = (-Δ)^{-1/2} f`.
pub struct RieszOperator<'a> {
    host: &'a WeightedGraphManifold,
    inv_sqrt: DMatrix<f64>,
    mask: Vec<bool>,
    starts: Vec<Vec<f64>>,
}

impl<'a> RieszOperator<'a> {
    pub fn new(host: &'a WeightedGraphManifold, d: &SpectralDecomposition, restrict: &Restriction) -> Result<Self> {
        if d.len() != host.len() {
            return invalid("decomposition does not match host");
        }
        let mask = restrict.edge_mask(host)?;
        let inv_sqrt = d.operator_matrix(d.inv_sqrt_multiplier());
        let n = host.len();
        let mut starts = Vec::new();
        for k in d.kernel_dim()..(d.kernel_dim() + 4).min(n) {
            starts.push(d.eigenvector(k));
        }
        let bumps = 4.min(n);
        for i in 0..bumps {
            let mut e = vec![0.0; n];
            e[i * n / bumps] = 1.0;
            starts.push(e);
        }
        Ok(RieszOperator {
            host,
            inv_sqrt,
            mask,
            starts,
        })
    }

    fn potential(&self, f: &[f64]) -> DVector<f64> {
        &self.inv_sqrt * DVector::from_column_slice(f)
    }

    /// Pointwise magnitudes `|R f|`.
    pub fn magnitudes(&self, f: &[f64]) -> Vec<f64> {
        let u = self.potential(f);
        magnitudes(self.host, u.as_slice(), &self.mask)
    }
}

impl NormObjective for RieszOperator<'_> {
    fn input_measure(&self) -> &[f64] {
        self.host.mu()
    }

    fn mean_zero_domain(&self) -> bool {
        true
    }

    fn output_norm(&self, f: &[f64], p: f64) -> f64 {
        lp_unchecked(self.host.mu(), &self.magnitudes(f), p)
    }

    fn ascent_gradient(&self, f: &[f64], p: f64) -> Vec<f64> {
        let u = self.potential(f);
        let g = magnitudes(self.host, u.as_slice(), &self.mask);
        let gp: Vec<f64> = g.iter().map(|x| if *x > 0.0 { x.powf(p - 2.0) } else { 0.0 }).collect();
        let mut du = DVector::zeros(self.host.len());
        for (e, keep) in self.host.edges().iter().zip(&self.mask) {
            if !*keep {
                continue;
            }
            let sw = e.w.sqrt();
            let y = sw * (u[e.b] - u[e.a]);
            let z = 0.5 * y * (gp[e.a] + gp[e.b]);
            du[e.b] += sw * z;
            du[e.a] -= sw * z;
        }
        self.inv_sqrt.tr_mul(&du).iter().copied().collect()
    }

    fn structured_starts(&self) -> Vec<Vec<f64>> {
        self.starts.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub window: usize,
    /// Set per run from the run seed rather than from configuration.
    #[serde(skip)]
    pub seed: u64,
    /// Additional starting points (e.g. transported witnesses).
    #[serde(skip)]
    pub extra_starts: Vec<Vec<f64>>,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            restarts: 32,
            max_iter: 500,
            rel_tol: 1e-8,
            window: 5,
            seed: 0,
            extra_starts: Vec::new(),
        }
    }
}

impl EstimatorOptions {
    pub fn with_seed(seed: u64) -> Self {
        EstimatorOptions {
            seed,
            ..Default::default()
        }
    }
}

/// A certified lower bound for an operator norm.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorNormEstimate {
    pub p: f64,
    pub value: f64,
    /// Unit-`p`-norm input attaining `value`.
    pub witness: ScalarField,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    /// Index of the winning start (structured, extra, then random).
    pub best_start: usize,
}

struct RunResult {
    value: f64,
    witness: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn prepare<A: NormObjective + ?Sized>(a: &A, x: &[f64], p: f64) -> Option<Vec<f64>> {
    let mu = a.input_measure();
    let mut x = x.to_vec();
    if a.mean_zero_domain() {
        let vol: f64 = mu.iter().sum();
        let mean = mu.iter().zip(&x).map(|(m, v)| m * v).sum::<f64>() / vol;
        x.iter_mut().for_each(|v| *v -= mean);
    }
    let norm = lp_unchecked(mu, &x, p);
    if !(norm > 0.0 && norm.is_finite()) {
        return None;
    }
    x.iter_mut().for_each(|v| *v /= norm);
    Some(x)
}

fn ascend<A: NormObjective + ?Sized>(a: &A, start: &[f64], p: f64, opts: &EstimatorOptions) -> Option<RunResult> {
    let mu = a.input_measure();
    let mut x = prepare(a, start, p)?;
    let ratio = |x: &[f64]| a.output_norm(x, p) / lp_unchecked(mu, x, p);
    let mut history = vec![ratio(&x)];
    let mut best = RunResult {
        value: history[0],
        witness: x.clone(),
        iterations: 0,
        converged: false,
    };
    let q = 1.0 / (p - 1.0);
    for it in 1..=opts.max_iter {
        best.iterations = it;
        let g = a.ascent_gradient(&x, p);
        if g.iter().all(|v| *v == 0.0) {
            best.converged = true;
            break;
        }
        let dual: Vec<f64> = g
            .iter()
            .zip(mu)
            .map(|(gv, m)| gv.signum() * (gv.abs() / m).powf(q))
            .collect();
        let Some(next) = prepare(a, &dual, p) else {
            best.converged = true;
            break;
        };
        x = next;
        let r = ratio(&x);
        if r > best.value {
            best.value = r;
            best.witness = x.clone();
        }
        history.push(r);
        let h = history.len();
        if h > opts.window && (history[h - 1] - history[h - 1 - opts.window]).abs() <= opts.rel_tol * history[h - 1].abs() {
            best.converged = true;
            break;
        }
    }
    Some(best)
}

/// Multistart nonlinear power iteration; returns the best local maximum found.
pub fn op_norm_lower_bound<A: NormObjective + ?Sized>(
    a: &A,
    p: f64,
    opts: &EstimatorOptions,
) -> Result<OperatorNormEstimate> {
    if !(p > 1.0 && p.is_finite()) {
        return invalid(format!("p must lie in (1, ∞), got {p}"));
    }
    let n = a.input_measure().len();
    for s in &opts.extra_starts {
        check_len(n, s.len())?;
    }
    let mut starts = a.structured_starts();
    starts.extend(opts.extra_starts.iter().cloned());
    for r in 0..opts.restarts {
        let mut rng = stream(opts.seed, op::RESTART, r as u64);
        starts.push((0..n).map(|_| StandardNormal.sample(&mut rng)).collect());
    }
    let runs: Vec<Option<RunResult>> = starts.par_iter().map(|s| ascend(a, s, p, opts)).collect();

    let mut best: Option<(usize, &RunResult)> = None;
    let mut iterations = 0;
    for (i, run) in runs.iter().enumerate() {
        if let Some(r) = run {
            iterations += r.iterations;
            if best.map_or(true, |(_, b)| r.value > b.value) {
                best = Some((i, r));
            }
        }
    }
    let (best_start, value, witness, converged) = match best {
        Some((i, r)) => (i, r.value, r.witness.clone(), r.converged),
        // every start was annihilated: the zero map on this domain
        None => (0, 0.0, zero_witness(a, p), true),
    };
    Ok(OperatorNormEstimate {
        p,
        value,
        witness: ScalarField::new(witness),
        iterations,
        restarts: starts.len(),
        converged,
        best_start,
    })
}

fn zero_witness<A: NormObjective + ?Sized>(a: &A, p: f64) -> Vec<f64> {
    let n = a.input_measure().len();
    let mut e = vec![0.0; n];
    if n > 1 {
        e[0] = 1.0;
        e[1] = -1.0;
    } else if n == 1 {
        e[0] = 1.0;
    }
    prepare(a, &e, p).unwrap_or(e)
}

/// `R_p` lower bound for a host with its decomposition.
pub fn riesz_norm(
    host: &WeightedGraphManifold,
    d: &SpectralDecomposition,
    p: f64,
    restrict: &Restriction,
    opts: &EstimatorOptions,
) -> Result<OperatorNormEstimate> {
    let a = RieszOperator::new(host, d, restrict)?;
    op_norm_lower_bound(&a, p, opts)
}
