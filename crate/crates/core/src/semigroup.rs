//! Heat semigroups and the subordination route to `(-Δ)^{-1/2}`.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::field::{check_len, is_mean_zero, ScalarField};
use crate::manifold::WeightedGraphManifold;
use crate::quadrature::{subordination_rule, QuadConfig};
use crate::spectral::{mean_zero_output, SpectralDecomposition};

/// Something that can evaluate `e^{σΔ} f`.
pub trait HeatSemigroup {
    fn mu(&self) -> &[f64];

    /// Upper bound on the spectrum of `-Δ`.
    fn spectral_radius_bound(&self) -> f64;

    fn heat(&self, sigma: f64, f: &[f64]) -> Vec<f64>;

    /// `e^{σ_i Δ} f` for ascending times `σ_i`.
    fn heat_sequence(&self, times: &[f64], f: &[f64]) -> Vec<Vec<f64>> {
        times.iter().map(|&s| self.heat(s, f)).collect()
    }
}

impl HeatSemigroup for SpectralDecomposition {
    fn mu(&self) -> &[f64] {
        SpectralDecomposition::mu(self)
    }

    fn spectral_radius_bound(&self) -> f64 {
        self.max_eigenvalue()
    }

    fn heat(&self, sigma: f64, f: &[f64]) -> Vec<f64> {
        self.apply(f, |_, l| (-sigma * l).exp())
    }
}

/// Matrix-free semigroup by uniformization: with `q ≥ max_v rate(v)`,
///
/// ```text
/// e^{σΔ} = Σ_k e^{-qσ} (qσ)^k / k! · (I + Δ/q)^k
/// ```
///
/// a Poisson mixture of powers of a stochastic matrix, evaluated with sparse
/// products only.
pub struct UniformizedSemigroup<'a> {
    host: &'a WeightedGraphManifold,
    rate: f64,
}

impl<'a> UniformizedSemigroup<'a> {
    pub fn new(host: &'a WeightedGraphManifold) -> Self {
        let rate = (0..host.len())
            .map(|v| host.weighted_degree(v) / host.mu()[v])
            .fold(0.0, f64::max);
        UniformizedSemigroup { host, rate }
    }

    // x + Δx / q
    fn step(&self, x: &[f64]) -> Vec<f64> {
        let lap = self.host.apply_generator(x);
        x.iter().zip(lap).map(|(a, b)| a + b / self.rate).collect()
    }

    fn advance(&self, dt: f64, f: &[f64]) -> Vec<f64> {
        if dt <= 0.0 || self.rate == 0.0 {
            return f.to_vec();
        }
        let m = self.rate * dt;
        let k_max = (m + 12.0 * m.sqrt() + 40.0).ceil() as usize;
        // Poisson weights in log space, accumulated upward from k = 0
        let mut log_w = -m;
        let mut acc = vec![0.0; f.len()];
        let mut power = f.to_vec();
        for k in 0..=k_max {
            if k > 0 {
                log_w += m.ln() - (k as f64).ln();
                power = self.step(&power);
            }
            let w = log_w.exp();
            if w > 0.0 {
                for (a, p) in acc.iter_mut().zip(&power) {
                    *a += w * p;
                }
            }
        }
        acc
    }
}

impl HeatSemigroup for UniformizedSemigroup<'_> {
    fn mu(&self) -> &[f64] {
        self.host.mu()
    }

    fn spectral_radius_bound(&self) -> f64 {
        2.0 * self.rate
    }

    fn heat(&self, sigma: f64, f: &[f64]) -> Vec<f64> {
        // split long times so each Poisson mixture stays short
        let chunk = 64.0 / self.rate.max(1e-300);
        let mut x = f.to_vec();
        let mut left = sigma;
        while left > 0.0 {
            let dt = left.min(chunk);
            x = self.advance(dt, &x);
            left -= dt;
        }
        x
    }

    fn heat_sequence(&self, times: &[f64], f: &[f64]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(times.len());
        let mut x = f.to_vec();
        let mut now = 0.0;
        for &t in times {
            x = self.heat(t - now, &x);
            now = t;
            out.push(x.clone());
        }
        out
    }
}

/// `(-Δ)^{-1/2} f` as `2π^{-1/2} Σ_i w_i e^{t_i² Δ} f` over composite
/// Gauss–Legendre panels truncated where `e^{-gap·T²} ≤ tail_tol`.
pub fn inv_sqrt_subordination<S: HeatSemigroup + ?Sized>(
    semigroup: &S,
    f: &ScalarField,
    gap: f64,
    quad: &QuadConfig,
) -> Result<ScalarField> {
    let mu = semigroup.mu();
    check_len(mu.len(), f.len())?;
    if !is_mean_zero(mu, f.values()) {
        return invalid("subordination input must be mean-zero");
    }
    let rule = subordination_rule(gap, semigroup.spectral_radius_bound(), quad)?;
    let times: Vec<f64> = rule.iter().map(|(t, _)| t * t).collect();
    let flows = semigroup.heat_sequence(&times, f.values());
    let mut acc = vec![0.0; f.len()];
    for ((_, w), flow) in rule.iter().zip(&flows) {
        for (a, x) in acc.iter_mut().zip(flow) {
            *a += w * x;
        }
    }
    let c = 2.0 / PI.sqrt();
    Ok(mean_zero_output(mu, acc.into_iter().map(|x| c * x).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{build_cycle, build_path};
    use crate::spectral::decompose;

    #[test]
    fn uniformized_matches_spectral_heat() {
        let c = build_cycle(7, 3.5).unwrap();
        let d = decompose(&c).unwrap();
        let u = UniformizedSemigroup::new(&c);
        let f: Vec<f64> = (0..7).map(|i| (i as f64 * 1.3).sin()).collect();
        for sigma in [0.0, 0.01, 0.7, 5.0, 90.0] {
            let a = d.heat(sigma, &f);
            let b = u.heat(sigma, &f);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12, "σ = {sigma}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn p2_subordination() {
        let p2 = build_path(2, 1.0).unwrap();
        let u = UniformizedSemigroup::new(&p2);
        let r = inv_sqrt_subordination(&u, &ScalarField::new(vec![1.0, -1.0]), 2.0, &QuadConfig::default())
            .unwrap();
        let s = 0.5f64.sqrt();
        assert!((r.values()[0] - s).abs() < 1e-9);
        assert!(inv_sqrt_subordination(&u, &ScalarField::new(vec![1.0, -1.0]), 0.0, &QuadConfig::default()).is_err());
    }
}
