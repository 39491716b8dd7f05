#include "btm/hmc.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "btm/errors.hpp"
#include "btm/mle.hpp"
#include "btm/model.hpp"

namespace btm {

Eigen::VectorXd lambda_from_omega(const Eigen::VectorXd& omega) {
    const Eigen::Index t = omega.size() + 1;
    Eigen::VectorXd lambda(t);
    lambda[0] = 0.0;
    for (Eigen::Index i = 1; i < t; ++i) lambda[i] = lambda[i - 1] - omega[i - 1];
    lambda.array() -= lambda.mean();
    return lambda;
}

ReducedEval log_posterior_reduced(const OutcomeSystem& system, const CountsMatrix& counts,
                                  const Eigen::VectorXd& omega, double tau) {
    const auto t = static_cast<Eigen::Index>(counts.team_count());
    if (omega.size() != t - 1) {
        throw DimensionMismatch("omega must have t-1 entries");
    }
    ModelParams params{lambda_from_omega(omega), tau};
    ReducedEval eval;
    eval.value = log_likelihood(system, counts, params);
    const GradVector g = grad_log_likelihood(system, counts, params);

    // Chain rule through lambda_i = c(omega) - sum_{k<i} omega_k with c the
    // centering term: dlambda_i/domega_k = (t-k-1)/t - [i > k].
    eval.grad.resize(t);
    const double gsum = g.dlambda.sum();
    double tail = 0.0;  // sum_{i > k} dL/dlambda_i
    for (Eigen::Index k = t - 2; k >= 0; --k) {
        tail += g.dlambda[k + 1];
        eval.grad[k] = gsum * double(t - k - 1) / double(t) - tail;
    }
    eval.grad[t - 1] = g.dtau;

    if (system.tau_free()) {
        eval.value += -0.5 * tau * tau - 0.5 * std::log(2.0 * std::numbers::pi);
        eval.grad[t - 1] += -tau;
    }
    return eval;
}

namespace hmc_kernel {

namespace {

struct Leapfrog {
    const LogDensity& target;
    const Eigen::VectorXd& inv_mass;  // position-update scale, = variances

    // One trajectory; returns new (q, grad, logp) and the energy error.
    // Sets diverged when the Hamiltonian blows up.
    bool integrate(Eigen::VectorXd& q, Eigen::VectorXd& grad, double& logp,
                   Eigen::VectorXd p, double step, int steps, double& delta_h) const {
        const double h0 = -logp + 0.5 * (p.array().square() * inv_mass.array()).sum();
        Eigen::VectorXd q_new = q;
        Eigen::VectorXd g_new = grad;
        double lp_new = logp;
        for (int s = 0; s < steps; ++s) {
            p += 0.5 * step * g_new;
            q_new.array() += step * p.array() * inv_mass.array();
            lp_new = target(q_new, g_new);
            if (!std::isfinite(lp_new)) {
                delta_h = std::numeric_limits<double>::infinity();
                return false;
            }
            p += 0.5 * step * g_new;
        }
        const double h1 = -lp_new + 0.5 * (p.array().square() * inv_mass.array()).sum();
        delta_h = h1 - h0;
        if (!std::isfinite(delta_h) || delta_h > 1000.0) return false;
        q = std::move(q_new);
        grad = std::move(g_new);
        logp = lp_new;
        return true;
    }
};

// Nesterov dual averaging on log(step), after Hoffman & Gelman (2014).
struct DualAverage {
    double mu;
    double log_step;
    double log_step_avg = 0.0;
    double h_sum = 0.0;
    int iter = 0;

    explicit DualAverage(double step0)
        : mu(std::log(10.0 * step0)), log_step(std::log(step0)) {}

    void update(double accept_prob, double target_accept) {
        ++iter;
        constexpr double gamma = 0.05, t0 = 10.0, kappa = 0.75;
        h_sum += target_accept - accept_prob;
        log_step = mu - std::sqrt(double(iter)) / gamma * h_sum / (double(iter) + t0);
        const double eta = std::pow(double(iter), -kappa);
        log_step_avg = eta * log_step + (1.0 - eta) * log_step_avg;
    }

    double step() const { return std::exp(log_step); }
    double averaged_step() const { return std::exp(log_step_avg); }
};

struct ChainOutput {
    Eigen::MatrixXd draws;
    double accept_rate = 0.0;
    int divergences = 0;
};

ChainOutput run_chain(const LogDensity& target, Eigen::Index dim, const HmcConfig& config,
                      std::uint64_t chain_seed) {
    std::mt19937_64 rng(chain_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Eigen::VectorXd q(dim);
    for (Eigen::Index k = 0; k < dim; ++k) q[k] = 0.5 * normal(rng);
    Eigen::VectorXd grad(dim);
    double logp = target(q, grad);

    Eigen::VectorXd inv_mass = Eigen::VectorXd::Ones(dim);
    ChainOutput out;
    out.draws.resize(config.draws_per_chain, dim);

    const int phase1 = config.warmup / 2;
    Eigen::MatrixXd window(std::max(1, config.warmup - phase1), dim);
    int window_rows = 0;

    DualAverage da(0.1);
    double step = da.step();
    int accepted = 0, proposed = 0;

    const auto one_transition = [&](bool adapt) {
        Leapfrog lf{target, inv_mass};
        Eigen::VectorXd p(dim);
        for (Eigen::Index k = 0; k < dim; ++k) {
            p[k] = normal(rng) / std::sqrt(inv_mass[k]);
        }
        Eigen::VectorXd q_prop = q, g_prop = grad;
        double lp_prop = logp, dh = 0.0;
        const bool ok = lf.integrate(q_prop, g_prop, lp_prop, p, step,
                                     config.leapfrog_steps, dh);
        const double accept_prob = ok ? std::min(1.0, std::exp(-dh)) : 0.0;
        if (!ok) ++out.divergences;
        ++proposed;
        if (ok && unif(rng) < accept_prob) {
            q = q_prop;
            grad = g_prop;
            logp = lp_prop;
            ++accepted;
        }
        if (adapt) {
            da.update(accept_prob, config.target_accept);
            step = da.step();
        }
    };

    for (int it = 0; it < config.warmup; ++it) {
        one_transition(true);
        if (it >= phase1) {
            window.row(window_rows++) = q.transpose();
        }
        if (it == config.warmup - 1 && window_rows > 1) {
            // Rescale the mass matrix by the second-half warmup variances.
            Eigen::VectorXd mean = window.topRows(window_rows).colwise().mean();
            for (Eigen::Index k = 0; k < dim; ++k) {
                const double var = (window.col(k).head(window_rows).array() - mean[k])
                                       .square()
                                       .sum() /
                                   double(window_rows - 1);
                if (var > 1e-12) inv_mass[k] = var;
            }
        }
    }

    step = da.averaged_step();
    accepted = 0;
    proposed = 0;
    out.divergences = 0;
    for (int it = 0; it < config.draws_per_chain; ++it) {
        one_transition(false);
        out.draws.row(it) = q.transpose();
    }
    out.accept_rate = proposed > 0 ? double(accepted) / double(proposed) : 0.0;
    return out;
}

}  // namespace

RunResult run(const LogDensity& target, Eigen::Index dim, const HmcConfig& config) {
    RunResult result;
    result.chains.reserve(config.chains);
    for (int c = 0; c < config.chains; ++c) {
        // Sub-seed per chain; splitmix-style scramble keeps streams apart.
        const std::uint64_t chain_seed =
            (config.seed + 0x9e3779b97f4a7c15ULL * (std::uint64_t(c) + 1)) ^ 0xda3e39cb94b95bdbULL;
        ChainOutput out = run_chain(target, dim, config, chain_seed);
        result.chains.push_back(std::move(out.draws));
        result.accept_rate.push_back(out.accept_rate);
        result.divergences += out.divergences;
    }
    return result;
}

double mean_abs_energy_error(const LogDensity& target, const Eigen::VectorXd& q0,
                             double step, int steps, int trajectories, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::VectorXd inv_mass = Eigen::VectorXd::Ones(q0.size());
    Leapfrog lf{target, inv_mass};
    double total = 0.0;
    for (int traj = 0; traj < trajectories; ++traj) {
        Eigen::VectorXd q = q0;
        Eigen::VectorXd grad(q.size());
        double logp = target(q, grad);
        Eigen::VectorXd p(q.size());
        for (Eigen::Index k = 0; k < p.size(); ++k) p[k] = normal(rng);
        double dh = 0.0;
        lf.integrate(q, grad, logp, p, step, steps, dh);
        total += std::abs(dh);
    }
    return total / double(trajectories);
}

}  // namespace hmc_kernel

HmcRun hmc_sample(const OutcomeSystem& system, const CountsMatrix& counts,
                  const HmcConfig& config) {
    check_degeneracy(system, counts);
    const auto t = static_cast<Eigen::Index>(counts.team_count());
    const Eigen::Index dim = t;  // (t-1) omegas + tau

    const hmc_kernel::LogDensity target = [&](const Eigen::VectorXd& q,
                                              Eigen::VectorXd& grad) {
        const ReducedEval eval =
            log_posterior_reduced(system, counts, q.head(t - 1), q[t - 1]);
        grad = eval.grad;
        return eval.value;
    };

    const hmc_kernel::RunResult result = hmc_kernel::run(target, dim, config);

    HmcRun run;
    run.samples.source = SampleSource::hmc;
    run.samples.seed = config.seed;
    run.samples.draws.resize(config.chains * config.draws_per_chain, t + 1);
    run.samples.chain_ids.reserve(run.samples.draws.rows());
    Eigen::Index row = 0;
    for (int c = 0; c < config.chains; ++c) {
        const Eigen::MatrixXd& chain = result.chains[c];
        for (Eigen::Index r = 0; r < chain.rows(); ++r, ++row) {
            run.samples.draws.row(row).head(t) =
                lambda_from_omega(chain.row(r).head(t - 1)).transpose();
            run.samples.draws(row, t) = chain(r, t - 1);
            run.samples.chain_ids.push_back(c);
        }
    }

    run.diagnostics = diagnostics(run.samples);
    run.diagnostics.accept_rate = result.accept_rate;
    run.diagnostics.divergences = result.divergences;
    return run;
}

bool HmcDiagnostics::mixed() const {
    for (Eigen::Index k = 0; k < rhat.size(); ++k) {
        if (rhat_defined[static_cast<std::size_t>(k)] && rhat[k] > 1.05) return false;
    }
    return true;
}

namespace {

// Acklam's rational approximation to the standard normal quantile.
double inv_phi(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) return -inv_phi(1.0 - p);
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Average ranks with ties, mapped through the normal quantile.
std::vector<Eigen::VectorXd> rank_normalize(const std::vector<Eigen::VectorXd>& chains) {
    std::vector<std::pair<double, std::pair<int, int>>> all;
    for (int c = 0; c < int(chains.size()); ++c) {
        for (Eigen::Index i = 0; i < chains[c].size(); ++i) {
            all.push_back({chains[c][i], {c, int(i)}});
        }
    }
    std::sort(all.begin(), all.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    const double total = double(all.size());
    std::vector<Eigen::VectorXd> out(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c) out[c].resize(chains[c].size());
    std::size_t pos = 0;
    while (pos < all.size()) {
        std::size_t end = pos;
        while (end < all.size() && all[end].first == all[pos].first) ++end;
        const double rank = 0.5 * double(pos + 1 + end);  // average rank, 1-based
        const double z = inv_phi((rank - 0.375) / (total + 0.25));
        for (std::size_t k = pos; k < end; ++k) {
            out[all[k].second.first][all[k].second.second] = z;
        }
        pos = end;
    }
    return out;
}

double split_rhat(const std::vector<Eigen::VectorXd>& chains, bool& defined) {
    const auto m = double(chains.size());
    const auto n = double(chains[0].size());
    Eigen::VectorXd means(chains.size()), vars(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c) {
        means[c] = chains[c].mean();
        vars[c] = (chains[c].array() - means[c]).square().sum() / (n - 1.0);
    }
    const double grand = means.mean();
    const double b = n / (m - 1.0) * (means.array() - grand).square().sum();
    const double w = vars.mean();
    if (w <= 0.0) {
        defined = false;
        return 1.0;
    }
    defined = true;
    const double var_plus = (n - 1.0) / n * w + b / n;
    return std::sqrt(var_plus / w);
}

double combined_ess(const std::vector<Eigen::VectorXd>& chains) {
    const auto m = double(chains.size());
    const auto n = chains[0].size();
    Eigen::VectorXd means(chains.size()), vars(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c) {
        means[c] = chains[c].mean();
        vars[c] = (chains[c].array() - means[c]).square().sum() / (double(n) - 1.0);
    }
    const double w = vars.mean();
    const double grand = means.mean();
    const double b = double(n) / (m - 1.0) * (means.array() - grand).square().sum();
    const double var_plus = (double(n) - 1.0) / double(n) * w + b / double(n);
    if (var_plus <= 0.0) return 0.0;

    // Variogram estimate of the combined autocorrelation (BDA3 sec. 11.5),
    // truncated by Geyer's initial positive-pair rule.
    double rho_sum = 0.0;
    for (Eigen::Index lag = 1; lag + 1 < n; lag += 2) {
        double rho_pair = 0.0;
        for (int half = 0; half < 2; ++half) {
            const Eigen::Index tlag = lag + half;
            double v = 0.0;
            for (const auto& chain : chains) {
                v += (chain.tail(n - tlag) - chain.head(n - tlag)).squaredNorm();
            }
            v /= m * double(n - tlag);
            rho_pair += 1.0 - v / (2.0 * var_plus);
        }
        if (rho_pair < 0.0) break;
        rho_sum += rho_pair;
    }
    const double ess = m * double(n) / (1.0 + 2.0 * rho_sum);
    return std::min(ess, m * double(n));
}

}  // namespace

HmcDiagnostics diagnostics(const SampleSet& samples) {
    std::map<int, std::vector<Eigen::Index>> by_chain;
    for (Eigen::Index r = 0; r < samples.size(); ++r) {
        by_chain[samples.chain_ids[static_cast<std::size_t>(r)]].push_back(r);
    }
    if (by_chain.size() < 2) throw TooFewChains("split R-hat needs at least 2 chains");

    const Eigen::Index d = samples.dim();
    HmcDiagnostics diag;
    diag.rhat.resize(d);
    diag.ess.resize(d);
    diag.rhat_defined.assign(static_cast<std::size_t>(d), true);

    for (Eigen::Index k = 0; k < d; ++k) {
        // Split each chain in half.
        std::vector<Eigen::VectorXd> halves;
        for (const auto& [id, rows] : by_chain) {
            const std::size_t half = rows.size() / 2;
            if (half < 2) throw TooFewChains("chains too short to split");
            Eigen::VectorXd first(half), second(half);
            for (std::size_t i = 0; i < half; ++i) {
                first[static_cast<Eigen::Index>(i)] = samples.draws(rows[i], k);
                second[static_cast<Eigen::Index>(i)] = samples.draws(rows[i + half], k);
            }
            halves.push_back(std::move(first));
            halves.push_back(std::move(second));
        }
        bool defined = true;
        diag.rhat[k] = split_rhat(halves, defined);
        diag.rhat_defined[static_cast<std::size_t>(k)] = defined;
        diag.ess[k] = defined ? combined_ess(rank_normalize(halves)) : 0.0;
    }
    return diag;
}

}  // namespace btm
