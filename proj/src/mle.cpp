#include "btm/mle.hpp"

#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "btm/errors.hpp"

namespace btm {

double MlResiduals::max_abs() const {
    double m = std::abs(overtime);
    if (points.size() > 0) m = std::max(m, points.cwiseAbs().maxCoeff());
    return m;
}

MlResiduals ml_equation_residuals(const OutcomeSystem& system, const CountsMatrix& counts,
                                  const ModelParams& params) {
    const GradVector g = grad_log_likelihood(system, counts, params);
    // The ML equations are exactly the stationarity conditions: the gradient
    // components are p_k - E[p_k] and n^o - E[n^o].
    return {g.dlambda, g.dtau};
}

namespace {

// Edge k -> i when team k earned any points against team i.
std::vector<std::vector<int>> points_graph(const OutcomeSystem& system,
                                           const CountsMatrix& counts, bool reversed) {
    const std::size_t t = counts.team_count();
    std::vector<std::vector<int>> adj(t);
    for (std::size_t k = 0; k < t; ++k) {
        for (std::size_t i = 0; i < t; ++i) {
            if (k == i) continue;
            double pts = 0.0;
            for (std::size_t c = 0; c < system.size(); ++c) {
                pts += counts.count(c, k, i) * system.outcome(c).p;
            }
            if (pts > 0.0) {
                if (reversed) {
                    adj[i].push_back(static_cast<int>(k));
                } else {
                    adj[k].push_back(static_cast<int>(i));
                }
            }
        }
    }
    return adj;
}

bool all_reachable(const std::vector<std::vector<int>>& adj) {
    std::vector<char> seen(adj.size(), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    std::size_t visited = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++visited;
                q.push(v);
            }
        }
    }
    return visited == adj.size();
}

}  // namespace

void check_degeneracy(const OutcomeSystem& system, const CountsMatrix& counts) {
    if (counts.team_count() < 2 || counts.total_games() == 0) {
        throw DegenerateData("need at least two teams and one game");
    }
    std::string losers;
    std::string winners;
    for (std::size_t k = 0; k < counts.team_count(); ++k) {
        const double p = counts.points(k);
        if (p == 0.0) losers += (losers.empty() ? "" : ", ") + counts.teams()[k];
        if (p == counts.max_points(k)) {
            winners += (winners.empty() ? "" : ", ") + counts.teams()[k];
        }
    }
    if (!winners.empty()) {
        throw DegenerateData("MLE diverges: team(s) with maximal points: " + winners);
    }
    if (!losers.empty()) {
        throw DegenerateData("MLE diverges: team(s) with zero points: " + losers);
    }
    if (!all_reachable(points_graph(system, counts, false)) ||
        !all_reachable(points_graph(system, counts, true))) {
        throw DegenerateData("comparison graph is not strongly connected");
    }
    if (!system.tau_free()) {
        const double n_o = counts.overtime_games();
        if (n_o == 0.0) {
            throw DegenerateData("no tie/overtime games: log-overtime parameter diverges");
        }
        if (n_o == counts.total_games()) {
            throw DegenerateData("every game went to tie/overtime: "
                                 "log-overtime parameter diverges");
        }
    }
}

namespace {

// E[n^o] at the current parameters.
double expected_overtime(const OutcomeSystem& system, const CountsMatrix& counts,
                         const ModelParams& params) {
    const std::size_t t = counts.team_count();
    double e = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = i + 1; j < t; ++j) {
            const int n = counts.pair_games(i, j);
            if (n == 0) continue;
            const Eigen::VectorXd theta = outcome_probs(system, params, i, j);
            for (std::size_t k = 0; k < system.size(); ++k) {
                e += n * system.outcome(k).o * theta[static_cast<Eigen::Index>(k)];
            }
        }
    }
    return e;
}

// E[p_k] = sum_i n_ki sum_I p_I theta^I_ki at the current parameters.
double expected_points(const OutcomeSystem& system, const CountsMatrix& counts,
                       const ModelParams& params, std::size_t k) {
    double e = 0.0;
    for (std::size_t i = 0; i < counts.team_count(); ++i) {
        if (i == k) continue;
        const int n = counts.pair_games(k, i);
        if (n == 0) continue;
        const Eigen::VectorXd theta = outcome_probs(system, params, k, i);
        for (std::size_t c = 0; c < system.size(); ++c) {
            e += n * system.outcome(c).p * theta[static_cast<Eigen::Index>(c)];
        }
    }
    return e;
}

double dampen(double delta, double& prev_delta, double damping) {
    if (damping < 1.0 && delta * prev_delta < 0.0) delta *= damping;
    prev_delta = delta;
    return delta;
}

}  // namespace

MleFit fit_mle(const OutcomeSystem& system, const CountsMatrix& counts,
               const FitOptions& opts) {
    check_degeneracy(system, counts);
    const std::size_t t = counts.team_count();
    const auto te = static_cast<Eigen::Index>(t);

    ModelParams params = ModelParams::zero(t);
    const double n_o = counts.overtime_games();
    Eigen::VectorXd points(te);
    for (std::size_t k = 0; k < t; ++k) points[static_cast<Eigen::Index>(k)] = counts.points(k);

    const double residual_tol = opts.tol * std::max(1.0, double(counts.total_games()));

    Eigen::VectorXd prev_dlambda = Eigen::VectorXd::Zero(te);
    double prev_dtau = 0.0;

    MleFit fit;
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        double max_change = 0.0;

        if (!system.tau_free()) {
            // nu update: nu_new = nu * n^o / E[n^o].
            const double d = dampen(std::log(n_o / expected_overtime(system, counts, params)),
                                    prev_dtau, opts.damping);
            params.tau += d;
            max_change = std::max(max_change, std::abs(d) / (1.0 + std::abs(params.tau)));
        }

        // Sequential pi updates using the latest values:
        // pi_new = pi * p_k / E[p_k].
        for (std::size_t k = 0; k < t; ++k) {
            const auto ke = static_cast<Eigen::Index>(k);
            const double d = dampen(std::log(points[ke] / expected_points(system, counts,
                                                                          params, k)),
                                    prev_dlambda[ke], opts.damping);
            params.lambda[ke] += d;
            max_change = std::max(max_change, std::abs(d) / (1.0 + std::abs(params.lambda[ke])));
        }

        // Rescale to prod(pi) = 1, i.e. sum(lambda) = 0.
        params.lambda.array() -= params.lambda.mean();

        fit.iterations = iter;
        fit.max_residual = ml_equation_residuals(system, counts, params).max_abs();
        if (max_change < opts.tol && fit.max_residual < residual_tol) {
            fit.converged = true;
            break;
        }
    }

    fit.params = std::move(params);
    fit.log_likelihood_at_mle = log_likelihood(system, counts, fit.params);
    return fit;
}

}  // namespace btm
