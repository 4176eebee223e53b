//! Dense functional calculus for `-Δ`.
//!
//! The generator is symmetrized as `S = M^{-1/2} L M^{-1/2}` with `L` the
//! weighted graph Laplacian and `M = diag(mu)`; eigenvectors of `S` are mapped
//! back to `v_k = M^{-1/2} q_k`, which are orthonormal in `<·,·>_mu`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::field::{check_len, is_mean_zero, weighted_sum, ScalarField};
use crate::manifold::WeightedGraphManifold;

pub const DEFAULT_SIZE_CAP: usize = 6000;

/// Eigenvalues below this fraction of `max(1, λ_max)` are treated as kernel.
const KERNEL_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    mu: Vec<f64>,
    eigenvalues: Vec<f64>,
    // columns are the eigenvectors v_k in vertex coordinates
    vectors: DMatrix<f64>,
    kernel_dim: usize,
}

impl SpectralDecomposition {
    /// Assembles a decomposition from parts, validating shapes and ordering.
    pub fn from_parts(mu: Vec<f64>, eigenvalues: Vec<f64>, vectors: DMatrix<f64>) -> Result<Self> {
        let n = mu.len();
        if eigenvalues.len() != n || vectors.nrows() != n || vectors.ncols() != n {
            return invalid("decomposition parts have inconsistent sizes");
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return invalid("eigenvalues must be ascending");
        }
        let kernel_dim = kernel_count(&eigenvalues);
        Ok(SpectralDecomposition {
            mu,
            eigenvalues,
            vectors,
            kernel_dim,
        })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k).iter().copied().collect()
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel_dim
    }

    /// Smallest nonzero eigenvalue.
    pub fn spectral_gap(&self) -> f64 {
        self.eigenvalues.get(self.kernel_dim).copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Coefficients `<f, v_k>_mu`.
    pub fn coefficients(&self, f: &[f64]) -> DVector<f64> {
        let weighted = DVector::from_iterator(f.len(), self.mu.iter().zip(f).map(|(m, x)| m * x));
        self.vectors.tr_mul(&weighted)
    }

    /// `Σ_k c_k v_k`.
    pub fn synthesize(&self, c: &DVector<f64>) -> Vec<f64> {
        (&self.vectors * c).iter().copied().collect()
    }

    /// `φ(-Δ) f` for a multiplier given per mode as `φ(k, λ_k)`.
    pub fn apply<F: Fn(usize, f64) -> f64>(&self, f: &[f64], multiplier: F) -> Vec<f64> {
        let mut c = self.coefficients(f);
        for (k, ck) in c.iter_mut().enumerate() {
            *ck *= multiplier(k, self.eigenvalues[k]);
        }
        self.synthesize(&c)
    }

    /// Dense matrix of `φ(-Δ)` acting on vertex values: `V diag(φ) Vᵀ M`.
    pub fn operator_matrix<F: Fn(usize, f64) -> f64>(&self, multiplier: F) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for k in 0..self.len() {
            let m = multiplier(k, self.eigenvalues[k]);
            scaled.column_mut(k).scale_mut(m);
        }
        let mut op = scaled * self.vectors.transpose();
        for (j, m) in self.mu.iter().enumerate() {
            op.column_mut(j).scale_mut(*m);
        }
        op
    }

    /// Multiplier of `(-Δ)^{-1/2}` on the mean-zero subspace.
    pub fn inv_sqrt_multiplier(&self) -> impl Fn(usize, f64) -> f64 + '_ {
        move |k, lambda| {
            if k < self.kernel_dim {
                0.0
            } else {
                lambda.powf(-0.5)
            }
        }
    }

    /// Separable decomposition of a product graph `A × B` from its factors.
    /// Vertex `(i, j)` has index `j * |A| + i`, matching
    /// [`crate::manifold::product_tagged`].
    pub fn product(a: &SpectralDecomposition, b: &SpectralDecomposition) -> SpectralDecomposition {
        let (na, nb) = (a.len(), b.len());
        let n = na * nb;
        let mut modes: Vec<(f64, usize, usize)> = Vec::with_capacity(n);
        for j in 0..nb {
            for i in 0..na {
                modes.push((a.eigenvalues[i] + b.eigenvalues[j], i, j));
            }
        }
        modes.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.2, x.1).cmp(&(y.2, y.1))));
        let mut mu = Vec::with_capacity(n);
        for mb in &b.mu {
            for ma in &a.mu {
                mu.push(ma * mb);
            }
        }
        let mut vectors = DMatrix::zeros(n, n);
        for (col, &(_, i, j)) in modes.iter().enumerate() {
            let va = a.vectors.column(i);
            let vb = b.vectors.column(j);
            let mut c = vectors.column_mut(col);
            for y in 0..nb {
                for x in 0..na {
                    c[y * na + x] = va[x] * vb[y];
                }
            }
        }
        let eigenvalues: Vec<f64> = modes.iter().map(|m| m.0).collect();
        let kernel_dim = kernel_count(&eigenvalues);
        SpectralDecomposition {
            mu,
            eigenvalues,
            vectors,
            kernel_dim,
        }
    }
}

fn kernel_count(eigenvalues: &[f64]) -> usize {
    let scale = eigenvalues.last().copied().unwrap_or(0.0).max(1.0);
    eigenvalues.iter().take_while(|l| **l <= KERNEL_TOL * scale).count()
}

/// Full decomposition of `-Δ` with the default size cap.
pub fn decompose(m: &WeightedGraphManifold) -> Result<SpectralDecomposition> {
    decompose_with_cap(m, DEFAULT_SIZE_CAP)
}

pub fn decompose_with_cap(m: &WeightedGraphManifold, cap: usize) -> Result<SpectralDecomposition> {
    let n = m.len();
    if n > cap {
        return Err(Error::ResourceLimit(format!(
            "dense decomposition of {n} vertices exceeds the cap of {cap}"
        )));
    }
    let mu = m.mu();
    let sqrt_mu: Vec<f64> = mu.iter().map(|x| x.sqrt()).collect();
    let mut s = DMatrix::<f64>::zeros(n, n);
    for e in m.edges() {
        let off = e.w / (sqrt_mu[e.a] * sqrt_mu[e.b]);
        s[(e.a, e.b)] -= off;
        s[(e.b, e.a)] -= off;
        s[(e.a, e.a)] += e.w / mu[e.a];
        s[(e.b, e.b)] += e.w / mu[e.b];
    }
    let asym = (&s - s.transpose()).amax();
    if asym > 0.0 {
        return Err(Error::Internal(format!("symmetrized generator is not symmetric ({asym:e})")));
    }

    let eig = SymmetricEigen::new(s.clone());
    let (mut values, mut basis) = (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors);
    let scale = values.iter().fold(1.0f64, |a, l| a.max(l.abs()));
    if max_residual(m, &sqrt_mu, &values, &basis) > 1e-12 * scale {
        jacobi_polish(&s, &mut values, &mut basis, 1e-15 * scale);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let q = basis.column(i);
        let mut v = vectors.column_mut(col);
        for r in 0..n {
            v[r] = q[r] / sqrt_mu[r];
        }
    }

    let kernel_dim = kernel_count(&eigenvalues);
    for l in eigenvalues.iter_mut().take(kernel_dim) {
        *l = 0.0;
    }
    if kernel_dim == 1 {
        // the kernel of a connected graph is exactly the constants
        let c = 1.0 / m.volume().sqrt();
        vectors.column_mut(0).fill(c);
    }

    let scale = eigenvalues.last().copied().unwrap_or(0.0).max(1.0);
    for k in 0..n {
        let v: Vec<f64> = vectors.column(k).iter().copied().collect();
        let lap = m.apply_generator(&v);
        let r: Vec<f64> = lap.iter().zip(&v).map(|(a, b)| -a - eigenvalues[k] * b).collect();
        let res = m.inner(&r, &r).sqrt();
        if res > 1e-9 * scale {
            return Err(Error::Internal(format!(
                "eigenpair {k} has residual {res:e} (λ = {})",
                eigenvalues[k]
            )));
        }
    }

    Ok(SpectralDecomposition {
        mu: mu.to_vec(),
        eigenvalues,
        vectors,
        kernel_dim,
    })
}

/// Largest `‖Sq - λq‖` over the columns, through the sparse generator.
fn max_residual(m: &WeightedGraphManifold, sqrt_mu: &[f64], values: &[f64], basis: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for (k, l) in values.iter().enumerate() {
        let v: Vec<f64> = basis.column(k).iter().zip(sqrt_mu).map(|(q, r)| q / r).collect();
        let lap = m.apply_generator(&v);
        let r: Vec<f64> = lap.iter().zip(&v).map(|(a, b)| -a - l * b).collect();
        worst = worst.max(m.inner(&r, &r).sqrt());
    }
    worst
}

/// Threshold Jacobi sweeps on `QᵀSQ`, for when the QR iteration stops early
/// inside a tight eigenvalue cluster.
fn jacobi_polish(s: &DMatrix<f64>, values: &mut [f64], basis: &mut DMatrix<f64>, tol: f64) {
    let n = values.len();
    let mut b = basis.transpose() * s * &*basis;
    for _ in 0..30 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let bpq = b[(p, q)];
                if bpq.abs() <= tol {
                    continue;
                }
                rotated = true;
                let theta = (b[(q, q)] - b[(p, p)]) / (2.0 * bpq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (bkp, bkq) = (b[(k, p)], b[(k, q)]);
                    b[(k, p)] = c * bkp - sn * bkq;
                    b[(k, q)] = sn * bkp + c * bkq;
                }
                for k in 0..n {
                    let (bpk, bqk) = (b[(p, k)], b[(q, k)]);
                    b[(p, k)] = c * bpk - sn * bqk;
                    b[(q, k)] = sn * bpk + c * bqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (basis[(k, p)], basis[(k, q)]);
                    basis[(k, p)] = c * vkp - sn * vkq;
                    basis[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    for (k, l) in values.iter_mut().enumerate() {
        *l = b[(k, k)];
    }
}

fn require_mean_zero(mu: &[f64], f: &ScalarField) -> Result<()> {
    check_len(mu.len(), f.len())?;
    if !is_mean_zero(mu, f.values()) {
        return invalid(format!(
            "input must be mean-zero (Σ mu f = {:e})",
            weighted_sum(mu, f.values())
        ));
    }
    Ok(())
}

/// Removes the (rounding-level) mean and flags the result.
pub(crate) fn mean_zero_output(mu: &[f64], mut v: Vec<f64>) -> ScalarField {
    let vol: f64 = mu.iter().sum();
    let mean = weighted_sum(mu, &v) / vol;
    for x in v.iter_mut() {
        *x -= mean;
    }
    ScalarField::mean_zero(mu, v.clone()).unwrap_or_else(|_| ScalarField::new(v))
}

/// `e^{σΔ} f`.
pub fn heat_semigroup(d: &SpectralDecomposition, sigma: f64, f: &ScalarField) -> Result<ScalarField> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return invalid(format!("heat time must be non-negative, got {sigma}"));
    }
    check_len(d.len(), f.len())?;
    if sigma == 0.0 {
        return Ok(f.clone());
    }
    Ok(ScalarField::new(d.apply(f.values(), |_, l| (-sigma * l).exp())))
}

/// `(-Δ)^{-1/2} f` by spectral calculus on the mean-zero subspace.
pub fn inv_sqrt_spectral(d: &SpectralDecomposition, f: &ScalarField) -> Result<ScalarField> {
    require_mean_zero(&d.mu, f)?;
    let u = d.apply(f.values(), d.inv_sqrt_multiplier());
    Ok(mean_zero_output(&d.mu, u))
}

/// Mean-zero `u` with `Δu = f`, refined once against the sparse generator.
pub fn solve_poisson(
    m: &WeightedGraphManifold,
    d: &SpectralDecomposition,
    f: &ScalarField,
) -> Result<ScalarField> {
    require_mean_zero(&d.mu, f)?;
    check_len(m.len(), f.len())?;
    let kd = d.kernel_dim;
    let solve = |rhs: &[f64]| d.apply(rhs, |k, l| if k < kd { 0.0 } else { -1.0 / l });
    let mut u = solve(f.values());
    let lap = m.apply_generator(&u);
    let r: Vec<f64> = f.values().iter().zip(&lap).map(|(a, b)| a - b).collect();
    let du = solve(&r);
    for (x, dx) in u.iter_mut().zip(du) {
        *x += dx;
    }
    Ok(mean_zero_output(&d.mu, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{build_cycle, build_path};

    #[test]
    fn p2_spectrum_and_vectors() {
        let p2 = build_path(2, 1.0).unwrap();
        let d = decompose(&p2).unwrap();
        assert!(d.eigenvalues()[0].abs() < 1e-14);
        assert!((d.eigenvalues()[1] - 2.0).abs() < 1e-12);
        let v1 = d.eigenvector(1);
        assert!((v1[0] + v1[1]).abs() < 1e-12);
        assert!((v1[0].abs() - 0.5f64.sqrt()).abs() < 1e-12);
        let v0 = d.eigenvector(0);
        assert!((v0[0] - v0[1]).abs() < 1e-15);
    }

    #[test]
    fn heat_on_p2() {
        let d = decompose(&build_path(2, 1.0).unwrap()).unwrap();
        let f = ScalarField::new(vec![1.0, -1.0]);
        let h = heat_semigroup(&d, 0.5, &f).unwrap();
        let e = (-1.0f64).exp();
        assert!((h.values()[0] - e).abs() < 1e-14 && (h.values()[1] + e).abs() < 1e-14);
        assert_eq!(heat_semigroup(&d, 0.0, &f).unwrap(), f);
        assert!(heat_semigroup(&d, -0.1, &f).is_err());
    }

    #[test]
    fn inv_sqrt_on_p2() {
        let d = decompose(&build_path(2, 1.0).unwrap()).unwrap();
        let u = inv_sqrt_spectral(&d, &ScalarField::new(vec![1.0, -1.0])).unwrap();
        let s = 0.5f64.sqrt();
        assert!((u.values()[0] - s).abs() < 1e-14 && (u.values()[1] + s).abs() < 1e-14);
        assert!(inv_sqrt_spectral(&d, &ScalarField::new(vec![1.0, 0.0])).is_err());
    }

    #[test]
    fn size_cap() {
        let c = build_cycle(10, 1.0).unwrap();
        assert!(matches!(decompose_with_cap(&c, 9), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn poisson_on_eigenvector() {
        let c = build_cycle(6, 3.0).unwrap();
        let d = decompose(&c).unwrap();
        let v = d.eigenvector(2);
        let u = solve_poisson(&c, &d, &ScalarField::new(v.clone())).unwrap();
        for (a, b) in u.values().iter().zip(&v) {
            assert!((a + b / d.eigenvalues()[2]).abs() < 1e-12);
        }
        let z = solve_poisson(&c, &d, &ScalarField::zeros(6)).unwrap();
        assert!(z.values().iter().all(|x| x.abs() < 1e-300));
    }
}
