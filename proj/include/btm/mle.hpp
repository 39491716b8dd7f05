#pragma once

#include <Eigen/Core>
#include <cstddef>

#include "btm/counts.hpp"
#include "btm/model.hpp"
#include "btm/outcome_system.hpp"

namespace btm {

struct FitOptions {
    double tol = 1e-10;      // on relative parameter change
    int max_iter = 10000;
    double damping = 1.0;    // geometric interpolation factor on oscillation
};

struct MleFit {
    ModelParams params;      // normalized: sum(lambda) = 0
    int iterations = 0;
    bool converged = false;
    double max_residual = 0.0;
    double log_likelihood_at_mle = 0.0;
};

/// Per-team points residuals p_k - E[p_k] and the overtime-count residual
/// n^o - E[n^o]; all zero at the MLE.
struct MlResiduals {
    Eigen::VectorXd points;
    double overtime = 0.0;
    double max_abs() const;
};

MlResiduals ml_equation_residuals(const OutcomeSystem& system, const CountsMatrix& counts,
                                  const ModelParams& params);

/// Throws DegenerateData when the MLE cannot be finite: a team with zero or
/// maximal points, a comparison graph that is not strongly connected, or an
/// overtime parameter with no (or only) overtime games.
void check_degeneracy(const OutcomeSystem& system, const CountsMatrix& counts);

/// Fixed-point iteration: nu update, then sequential per-team pi updates,
/// then rescaling to prod(pi) = 1. Returns converged = false (not an
/// exception) when max_iter is exhausted.
MleFit fit_mle(const OutcomeSystem& system, const CountsMatrix& counts,
               const FitOptions& opts = {});

}  // namespace btm
