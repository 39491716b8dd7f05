#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "btm/counts.hpp"
#include "btm/mle.hpp"
#include "btm/samples.hpp"

namespace btm {

/// Gaussian approximation to the posterior: mean at the MAP/MLE, covariance
/// the Moore-Penrose pseudo-inverse of the observed information. The all-ones
/// lambda direction stays in the null space, which pins sum(lambda) = 0.
struct GaussianPosterior {
    Eigen::VectorXd mean;        // (t+1), tau last
    Eigen::MatrixXd covariance;  // (t+1) x (t+1)
    std::vector<std::string> teams;

    double sd(Eigen::Index k) const { return std::sqrt(std::max(0.0, covariance(k, k))); }

    /// rho_ij = Sigma_ij / sqrt(Sigma_ii Sigma_jj); entries touching a
    /// zero-variance coordinate are reported as 0.
    Eigen::MatrixXd correlation() const;
};

/// Eigendecomposition-based pseudo-inverse of a symmetric matrix.
/// Eigenvalues with |e| <= rank_tol * max|e| are treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& h, double rank_tol = 1e-9);

GaussianPosterior gaussian_approximation(const OutcomeSystem& system,
                                         const CountsMatrix& counts, const MleFit& fit,
                                         double rank_tol = 1e-9);

/// Draws n samples from N(mean, Sigma) through the eigenfactor of Sigma; zero
/// modes contribute nothing, so every draw keeps sum(lambda) = 0.
SampleSet sample_gaussian(const GaussianPosterior& post, int n, std::uint64_t seed);

struct MarginalSummary {
    double mean = 0.0;
    double sd = 0.0;
    double q05 = 0.0;  // central 90% interval
    double q95 = 0.0;
};

/// Closed-form marginal of gamma_ij = lambda_i - lambda_j.
MarginalSummary marginal_gamma(const GaussianPosterior& post, std::size_t i, std::size_t j);

/// Sample-based marginal of gamma_ij.
MarginalSummary marginal_gamma(const SampleSet& samples, std::size_t i, std::size_t j);

}  // namespace btm
