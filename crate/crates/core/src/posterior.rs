//! Gaussian posteriors of the unconstrained linear system.
//!
//! Dropping the finite-alphabet constraint makes the posterior of `x` given
//! `y` Gaussian. Two forms are used: the least-squares (zero-forcing) form
//! with mean `(HᵀH)⁻¹Hᵀy` and covariance `σ²(HᵀH)⁻¹`, and the Bayesian
//! (MMSE) form with a N(0, eI) prior, which regularizes the Gram matrix by
//! `(σ²/e)I`. The full covariance is materialized because tree construction
//! consumes every pairwise correlation.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::channel::LinearSystem;
use crate::{Error, Result};

/// Mean and covariance of the unconstrained Gaussian posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPosterior {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianPosterior {
    /// Wraps a mean/covariance pair, enforcing symmetry of the covariance.
    ///
    /// The input is symmetrized after an asymmetry check of 1e−12 relative
    /// to the largest entry, so downstream consumers can rely on exact
    /// `C[i,j] == C[j,i]`.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if cov.nrows() != n || cov.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "covariance is {}×{} but the mean has {} entries",
                cov.nrows(),
                cov.ncols(),
                n
            )));
        }
        let max_abs = cov.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !max_abs.is_finite() || mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericFailure(
                "posterior contains non-finite entries".into(),
            ));
        }
        let tol = 1e-12 * max_abs.max(1e-300);
        for i in 0..n {
            if cov[(i, i)] < 0.0 {
                return Err(Error::DegenerateCovariance(format!(
                    "negative variance {} at index {i}",
                    cov[(i, i)]
                )));
            }
            for j in (i + 1)..n {
                if (cov[(i, j)] - cov[(j, i)]).abs() > tol {
                    return Err(Error::InvalidArgument(format!(
                        "covariance asymmetric at ({i},{j}): {} vs {}",
                        cov[(i, j)],
                        cov[(j, i)]
                    )));
                }
            }
        }
        let cov = symmetrize(cov);
        Ok(Self { mean, cov })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Correlation coefficient ρ_ij = C_ij / √(C_ii C_jj).
    pub fn correlation(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.dim();
        if i >= n || j >= n {
            return Err(Error::InvalidArgument(format!(
                "index ({i},{j}) out of range for dimension {n}"
            )));
        }
        if i == j {
            return Err(Error::InvalidArgument(
                "correlation requires two distinct indices".into(),
            ));
        }
        let denom = self.cov[(i, i)] * self.cov[(j, j)];
        if !(denom > 0.0) {
            return Err(Error::DegenerateCovariance(format!(
                "nonpositive variance product for pair ({i},{j})"
            )));
        }
        Ok(self.cov[(i, j)] / denom.sqrt())
    }

    /// Symmetric matrix of squared correlation coefficients ρ²_ij, zero on
    /// the diagonal. These are the edge weights for the spanning tree.
    pub fn squared_correlation_weights(&self) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let mut w = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let rho = self.correlation(i, j)?;
                let r2 = rho * rho;
                w[(i, j)] = r2;
                w[(j, i)] = r2;
            }
        }
        Ok(w)
    }
}

fn symmetrize(mut cov: DMatrix<f64>) -> DMatrix<f64> {
    let n = cov.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    cov
}

/// Least-squares posterior: `z = (HᵀH)⁻¹Hᵀy`, `C = σ²(HᵀH)⁻¹`.
///
/// Fails with a singular-system error when the Gram matrix has no Cholesky
/// factorization; there is no regularization fallback here.
pub fn zf_posterior(sys: &LinearSystem) -> Result<GaussianPosterior> {
    let gram = sys.h().tr_mul(sys.h());
    let chol = Cholesky::new(gram).ok_or_else(|| {
        Error::SingularSystem("HᵀH is not positive definite (rank-deficient H)".into())
    })?;
    let z = chol.solve(&sys.h().tr_mul(sys.y()));
    let cov = chol.inverse() * sys.noise_variance();
    GaussianPosterior::new(z, cov)
}

/// Bayesian posterior under an N(0, eI) prior:
/// `z = (HᵀH + (σ²/e)I)⁻¹Hᵀy`, `C = σ²(HᵀH + (σ²/e)I)⁻¹`.
pub fn mmse_posterior(sys: &LinearSystem, e: f64) -> Result<GaussianPosterior> {
    if !(e > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mean symbol energy must be positive, got {e}"
        )));
    }
    let n = sys.n_vars();
    let lambda = sys.noise_variance() / e;
    let mut gram = sys.h().tr_mul(sys.h());
    for i in 0..n {
        gram[(i, i)] += lambda;
    }
    let chol = Cholesky::new(gram).ok_or_else(|| {
        Error::SingularSystem(
            "regularized Gram matrix is not positive definite (σ² = 0 with rank-deficient H)"
                .into(),
        )
    })?;
    let z = chol.solve(&sys.h().tr_mul(sys.y()));
    let cov = chol.inverse() * sys.noise_variance();
    GaussianPosterior::new(z, cov)
}

/// Mutual information of two jointly Gaussian variables with correlation ρ:
/// `I = −ln(1 − ρ²)` (natural log).
pub fn mutual_information(rho: f64) -> Result<f64> {
    if !(rho.is_finite() && rho.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "correlation must satisfy |ρ| < 1, got {rho}"
        )));
    }
    Ok(-(1.0 - rho * rho).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_real_channel;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_system(m: usize, n: usize, noise_variance: f64, seed: u64) -> LinearSystem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = sample_real_channel(m, n, &mut rng).unwrap();
        let y = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal) * 3.0);
        LinearSystem::new(h, y, noise_variance).unwrap()
    }

    #[test]
    fn identity_system_zf() {
        let y = DVector::from_vec(vec![0.5, -1.5]);
        let sys = LinearSystem::new(DMatrix::identity(2, 2), y.clone(), 1.0).unwrap();
        let post = zf_posterior(&sys).unwrap();
        assert_eq!(post.mean(), &y);
        assert_eq!(post.cov(), &DMatrix::identity(2, 2));
    }

    #[test]
    fn scaled_identity_zf() {
        let sys = LinearSystem::new(
            DMatrix::identity(2, 2) * 2.0,
            DVector::from_vec(vec![2.0, 4.0]),
            1.0,
        )
        .unwrap();
        let post = zf_posterior(&sys).unwrap();
        assert_relative_eq!(post.mean()[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(post.mean()[1], 2.0, max_relative = 1e-12);
        assert_relative_eq!(post.cov()[(0, 0)], 0.25, max_relative = 1e-12);
        assert_relative_eq!(post.cov()[(1, 1)], 0.25, max_relative = 1e-12);
        assert_eq!(post.cov()[(0, 1)], 0.0);
    }

    #[test]
    fn zf_satisfies_normal_equations() {
        let sys = random_system(6, 4, 0.5, 1);
        let post = zf_posterior(&sys).unwrap();
        let resid = sys.h().tr_mul(&(sys.y() - sys.h() * post.mean()));
        let scale = sys.h().tr_mul(sys.y()).norm().max(1.0);
        assert!(resid.norm() <= 1e-10 * scale, "residual {}", resid.norm());
    }

    #[test]
    fn zf_rejects_rank_deficient_systems() {
        // two identical columns
        let h = DMatrix::from_column_slice(3, 2, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
        let sys = LinearSystem::new(h, DVector::zeros(3), 1.0).unwrap();
        assert!(matches!(zf_posterior(&sys), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn identity_system_mmse_halves() {
        let y = DVector::from_vec(vec![3.0, -1.0]);
        let sys = LinearSystem::new(DMatrix::identity(2, 2), y.clone(), 1.0).unwrap();
        let post = mmse_posterior(&sys, 1.0).unwrap();
        assert_relative_eq!(post.mean()[0], 1.5, max_relative = 1e-12);
        assert_relative_eq!(post.mean()[1], -0.5, max_relative = 1e-12);
        assert_relative_eq!(post.cov()[(0, 0)], 0.5, max_relative = 1e-12);
    }

    #[test]
    fn mmse_approaches_zf_at_vanishing_regularization() {
        let mut sys = random_system(8, 8, 0.5, 2);
        // make sure the draw is reasonably conditioned for the limit check
        let gram = sys.h().tr_mul(sys.h());
        assert!(Cholesky::new(gram).is_some());
        let zf = zf_posterior(&sys).unwrap();
        // shrink σ² so σ²/e → 0
        sys = LinearSystem::new(sys.h().clone(), sys.y().clone(), 1e-12).unwrap();
        let mmse = mmse_posterior(&sys, 5.0).unwrap();
        for i in 0..8 {
            assert!((mmse.mean()[i] - zf.mean()[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn mmse_satisfies_normal_equations() {
        let sys = random_system(8, 8, 0.3, 3);
        let e = 5.0;
        let post = mmse_posterior(&sys, e).unwrap();
        let lambda = sys.noise_variance() / e;
        let mut gram = sys.h().tr_mul(sys.h());
        for i in 0..8 {
            gram[(i, i)] += lambda;
        }
        let b = sys.h().tr_mul(sys.y());
        let resid = &b - &gram * post.mean();
        assert!(resid.norm() <= 1e-10 * b.norm().max(1.0));
    }

    #[test]
    fn posterior_is_symmetric_positive_definite() {
        for seed in 0..20 {
            let sys = random_system(10, 10, 0.8, 100 + seed);
            let post = mmse_posterior(&sys, 5.0).unwrap();
            for i in 0..10 {
                assert!(post.cov()[(i, i)] > 0.0);
                for j in 0..10 {
                    assert_eq!(post.cov()[(i, j)], post.cov()[(j, i)]);
                }
            }
            assert!(Cholesky::new(post.cov().clone()).is_some());
        }
    }

    #[test]
    fn mmse_mean_is_continuous_in_noise_variance() {
        let sys = random_system(10, 10, 0.5, 8);
        let base = mmse_posterior(&sys, 5.0).unwrap();
        let bumped = LinearSystem::new(
            sys.h().clone(),
            sys.y().clone(),
            sys.noise_variance() * (1.0 + 1e-6),
        )
        .unwrap();
        let perturbed = mmse_posterior(&bumped, 5.0).unwrap();
        let rel = (perturbed.mean() - base.mean()).norm() / base.mean().norm();
        assert!(rel < 1e-4, "relative mean change {rel}");
    }

    #[test]
    fn correlation_examples() {
        let post = GaussianPosterior::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]),
        )
        .unwrap();
        assert_relative_eq!(post.correlation(0, 1).unwrap(), 0.5, max_relative = 1e-12);

        let post = GaussianPosterior::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[4.0, 3.0, 3.0, 9.0]),
        )
        .unwrap();
        assert_relative_eq!(post.correlation(0, 1).unwrap(), 0.5, max_relative = 1e-12);

        let diag = GaussianPosterior::new(DVector::zeros(3), DMatrix::identity(3, 3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(diag.correlation(i, j).unwrap(), 0.0);
                }
            }
        }
        assert!(diag.correlation(1, 1).is_err());
    }

    #[test]
    fn correlation_is_exactly_symmetric() {
        let sys = random_system(6, 6, 0.4, 9);
        let post = mmse_posterior(&sys, 5.0).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    assert_eq!(
                        post.correlation(i, j).unwrap(),
                        post.correlation(j, i).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn mutual_information_examples() {
        assert_eq!(mutual_information(0.0).unwrap(), 0.0);
        assert_relative_eq!(
            mutual_information(0.5).unwrap(),
            -(0.75f64.ln()),
            max_relative = 1e-12
        );
        assert!((mutual_information(0.5).unwrap() - 0.28768).abs() < 1e-5);
        assert!(
            mutual_information(0.1f64.sqrt()).unwrap() < mutual_information(0.9f64.sqrt()).unwrap()
        );
        assert!(mutual_information(1.0).is_err());
        assert!(mutual_information(-1.2).is_err());
    }
}
