#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "btm/counts.hpp"
#include "btm/samples.hpp"

namespace btm {

struct HmcConfig {
    int chains = 4;
    int warmup = 1000;
    int draws_per_chain = 1000;
    int leapfrog_steps = 32;
    double target_accept = 0.8;
    std::uint64_t seed = 0;
};

struct HmcDiagnostics {
    std::vector<double> accept_rate;   // per chain
    Eigen::VectorXd rhat;              // split R-hat per coordinate
    Eigen::VectorXd ess;               // rank-normalized ESS per coordinate
    std::vector<bool> rhat_defined;    // false for zero-variance coordinates
    int divergences = 0;

    /// All defined split R-hats below 1.05.
    bool mixed() const;
};

/// Log posterior in the reduced parametrization omega_i = lambda_i -
/// lambda_{i+1} (t-1 values) plus tau, equal to the log-likelihood at any
/// lambda with those differences. When the system has no overtime outcome a
/// standard-normal prior on tau keeps the otherwise-unused coordinate proper.
struct ReducedEval {
    double value = 0.0;
    Eigen::VectorXd grad;  // over (omega_1..omega_{t-1}, tau)
};
ReducedEval log_posterior_reduced(const OutcomeSystem& system, const CountsMatrix& counts,
                                  const Eigen::VectorXd& omega, double tau);

/// Maps a reduced point to centered lambdas with sum(lambda) = 0.
Eigen::VectorXd lambda_from_omega(const Eigen::VectorXd& omega);

namespace hmc_kernel {

/// Log density and its gradient at q.
using LogDensity = std::function<double(const Eigen::VectorXd& q, Eigen::VectorXd& grad)>;

struct RunResult {
    std::vector<Eigen::MatrixXd> chains;  // draws_per_chain x dim each
    std::vector<double> accept_rate;
    int divergences = 0;
};

/// Static-path leapfrog HMC with dual-averaged step size and a diagonal mass
/// matrix estimated during warmup. Deterministic per (config, platform).
RunResult run(const LogDensity& target, Eigen::Index dim, const HmcConfig& config);

/// Mean absolute Hamiltonian error over random trajectories of fixed path
/// length; used to verify the integrator's second-order accuracy.
double mean_abs_energy_error(const LogDensity& target, const Eigen::VectorXd& q0,
                             double step, int steps, int trajectories, std::uint64_t seed);

}  // namespace hmc_kernel

struct HmcRun {
    SampleSet samples;
    HmcDiagnostics diagnostics;
};

/// Samples the exact posterior in (omega, tau), returned in (lambda, tau)
/// coordinates with sum(lambda) = 0. Throws DegenerateData on improper
/// posteriors; poor mixing is flagged in the diagnostics, not thrown.
HmcRun hmc_sample(const OutcomeSystem& system, const CountsMatrix& counts,
                  const HmcConfig& config);

/// Split R-hat and rank-normalized ESS; needs at least two chains.
HmcDiagnostics diagnostics(const SampleSet& samples);

}  // namespace btm
