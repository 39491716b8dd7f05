#pragma once

#include <Eigen/Core>
#include <cstddef>

#include "btm/counts.hpp"
#include "btm/outcome_system.hpp"

namespace btm {

/// Team log-strengths lambda_i = ln pi_i plus the log-overtime parameter
/// tau = ln nu. Only differences of lambdas are identifiable; the solvers
/// normalize to sum(lambda) = 0.
struct ModelParams {
    Eigen::VectorXd lambda;
    double tau = 0.0;

    static ModelParams zero(std::size_t t) {
        return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(t)), 0.0};
    }
};

/// Gradient of the log-likelihood in (lambda, tau).
struct GradVector {
    Eigen::VectorXd dlambda;
    double dtau = 0.0;
};

/// Outcome probabilities theta^I_ij for an ordered pair: softmax over
/// outcomes of p_I (lambda_i - lambda_j) + o_I tau.
Eigen::VectorXd outcome_probs(const OutcomeSystem& system, const ModelParams& params,
                              std::size_t i, std::size_t j);

/// log theta^I_ij via log-sum-exp; exact even when some theta underflows.
Eigen::VectorXd log_outcome_probs(const OutcomeSystem& system, const ModelParams& params,
                                  std::size_t i, std::size_t j);

double log_likelihood(const OutcomeSystem& system, const CountsMatrix& counts,
                      const ModelParams& params);

GradVector grad_log_likelihood(const OutcomeSystem& system, const CountsMatrix& counts,
                               const ModelParams& params);

/// Observed information: minus the matrix of second derivatives of the
/// log-likelihood, (t+1) x (t+1) with tau last. Singular along the all-ones
/// lambda direction.
Eigen::MatrixXd hessian(const OutcomeSystem& system, const CountsMatrix& counts,
                        const ModelParams& params);

/// Probability that a game between equal-strength teams ends in an o = 1
/// outcome: m_o nu / (m_r + m_o nu).
double even_match_overtime_prob(const OutcomeSystem& system, double tau);

/// Conditional win probability ignoring overtime: logistic(lambda_i - lambda_j).
double playoff_win_prob(const ModelParams& params, std::size_t i, std::size_t j);

}  // namespace btm
