#include "btm/model.hpp"

#include <cmath>

#include "btm/errors.hpp"

namespace btm {

namespace {

void check_pair(const ModelParams& params, std::size_t i, std::size_t j) {
    const auto t = static_cast<std::size_t>(params.lambda.size());
    if (i >= t || j >= t) throw DimensionMismatch("team index out of range");
    if (i == j) throw SameTeam("i and j must differ");
}

void check_dims(const OutcomeSystem& system, const CountsMatrix& counts,
                const ModelParams& params) {
    if (counts.outcome_count() != system.size()) {
        throw DimensionMismatch("counts do not match outcome system");
    }
    if (static_cast<std::size_t>(params.lambda.size()) != counts.team_count()) {
        throw DimensionMismatch("lambda length does not match team count");
    }
}

Eigen::VectorXd exponents(const OutcomeSystem& system, const ModelParams& params,
                          std::size_t i, std::size_t j) {
    const double gamma = params.lambda[static_cast<Eigen::Index>(i)] -
                         params.lambda[static_cast<Eigen::Index>(j)];
    Eigen::VectorXd x(static_cast<Eigen::Index>(system.size()));
    for (std::size_t k = 0; k < system.size(); ++k) {
        const auto& out = system.outcome(k);
        x[static_cast<Eigen::Index>(k)] = out.p * gamma + out.o * params.tau;
    }
    return x;
}

}  // namespace

Eigen::VectorXd outcome_probs(const OutcomeSystem& system, const ModelParams& params,
                              std::size_t i, std::size_t j) {
    check_pair(params, i, j);
    Eigen::VectorXd x = exponents(system, params, i, j);
    const Eigen::VectorXd e = (x.array() - x.maxCoeff()).exp();
    return e / e.sum();
}

Eigen::VectorXd log_outcome_probs(const OutcomeSystem& system, const ModelParams& params,
                                  std::size_t i, std::size_t j) {
    check_pair(params, i, j);
    Eigen::VectorXd x = exponents(system, params, i, j);
    const double m = x.maxCoeff();
    const double lse = m + std::log((x.array() - m).exp().sum());
    return x.array() - lse;
}

double log_likelihood(const OutcomeSystem& system, const CountsMatrix& counts,
                      const ModelParams& params) {
    check_dims(system, counts, params);
    const std::size_t t = counts.team_count();
    double ll = 0.0;
    // Single pass over unordered pairs. The mirror invariant makes the j-side
    // counts n^{-I}_ji identical to n^I_ij, so one perspective covers every
    // game exactly once.
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = i + 1; j < t; ++j) {
            if (counts.pair_games(i, j) == 0) continue;
            const Eigen::VectorXd logp = log_outcome_probs(system, params, i, j);
            for (std::size_t k = 0; k < system.size(); ++k) {
                ll += counts.count(k, i, j) * logp[static_cast<Eigen::Index>(k)];
            }
        }
    }
    return ll;
}

GradVector grad_log_likelihood(const OutcomeSystem& system, const CountsMatrix& counts,
                               const ModelParams& params) {
    check_dims(system, counts, params);
    const std::size_t t = counts.team_count();
    GradVector g{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(t)), 0.0};
    double expected_overtime = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = i + 1; j < t; ++j) {
            const int n = counts.pair_games(i, j);
            if (n == 0) continue;
            const Eigen::VectorXd theta = outcome_probs(system, params, i, j);
            double pbar = 0.0;
            double obar = 0.0;
            for (std::size_t k = 0; k < system.size(); ++k) {
                const auto& out = system.outcome(k);
                pbar += out.p * theta[static_cast<Eigen::Index>(k)];
                obar += out.o * theta[static_cast<Eigen::Index>(k)];
            }
            // d/dlambda_i of the pair's contribution; antisymmetric in (i, j).
            double points_i = 0.0;
            for (std::size_t k = 0; k < system.size(); ++k) {
                points_i += counts.count(k, i, j) * system.outcome(k).p;
            }
            const double di = points_i - n * pbar;
            g.dlambda[static_cast<Eigen::Index>(i)] += di;
            g.dlambda[static_cast<Eigen::Index>(j)] -= di;
            expected_overtime += n * obar;
        }
    }
    g.dtau = counts.overtime_games() - expected_overtime;
    return g;
}

Eigen::MatrixXd hessian(const OutcomeSystem& system, const CountsMatrix& counts,
                        const ModelParams& params) {
    check_dims(system, counts, params);
    const std::size_t t = counts.team_count();
    const auto te = static_cast<Eigen::Index>(t);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(te + 1, te + 1);
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = i + 1; j < t; ++j) {
            const int n = counts.pair_games(i, j);
            if (n == 0) continue;
            const Eigen::VectorXd theta = outcome_probs(system, params, i, j);
            double pbar = 0.0;
            double obar = 0.0;
            for (std::size_t k = 0; k < system.size(); ++k) {
                const auto& out = system.outcome(k);
                pbar += out.p * theta[static_cast<Eigen::Index>(k)];
                obar += out.o * theta[static_cast<Eigen::Index>(k)];
            }
            // Var(p), Cov(o, p) under theta_ij; under theta_ji these become
            // Var(p) and -Cov(o, p).
            double var_p = 0.0;
            double cov_op = 0.0;
            for (std::size_t k = 0; k < system.size(); ++k) {
                const auto& out = system.outcome(k);
                const double th = theta[static_cast<Eigen::Index>(k)];
                var_p += out.p * th * (out.p - pbar);
                cov_op += out.o * th * (out.p - pbar);
            }
            const auto ie = static_cast<Eigen::Index>(i);
            const auto je = static_cast<Eigen::Index>(j);
            h(ie, ie) += n * var_p;
            h(je, je) += n * var_p;
            h(ie, je) -= n * var_p;
            h(je, ie) -= n * var_p;
            h(te, ie) += n * cov_op;
            h(ie, te) += n * cov_op;
            h(te, je) -= n * cov_op;
            h(je, te) -= n * cov_op;
            h(te, te) += n * obar * (1.0 - obar);
        }
    }
    return h;
}

double even_match_overtime_prob(const OutcomeSystem& system, double tau) {
    const double m_o = system.overtime_outcomes();
    const double m_r = system.regulation_outcomes();
    if (m_o == 0.0) return 0.0;
    const double nu = std::exp(tau);
    return m_o * nu / (m_r + m_o * nu);
}

double playoff_win_prob(const ModelParams& params, std::size_t i, std::size_t j) {
    check_pair(params, i, j);
    const double gamma = params.lambda[static_cast<Eigen::Index>(i)] -
                         params.lambda[static_cast<Eigen::Index>(j)];
    return 1.0 / (1.0 + std::exp(-gamma));
}

}  // namespace btm
