#include "btm/laplace.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "btm/errors.hpp"
#include "btm/model.hpp"

namespace btm {

Eigen::MatrixXd GaussianPosterior::correlation() const {
    const Eigen::Index n = covariance.rows();
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double denom = sd(i) * sd(j);
            if (denom > 0.0) rho(i, j) = covariance(i, j) / denom;
        }
    }
    return rho;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& h, double rank_tol) {
    if (h.rows() != h.cols()) throw NotSymmetric("matrix is not square");
    if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff())) {
        throw NotSymmetric("matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    const Eigen::VectorXd& vals = eig.eigenvalues();
    const double cutoff = rank_tol * vals.cwiseAbs().maxCoeff();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(vals.size());
    for (Eigen::Index k = 0; k < vals.size(); ++k) {
        if (std::abs(vals[k]) > cutoff) inv[k] = 1.0 / vals[k];
    }
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

GaussianPosterior gaussian_approximation(const OutcomeSystem& system,
                                         const CountsMatrix& counts, const MleFit& fit,
                                         double rank_tol) {
    if (!fit.converged) throw NotConverged("fit did not converge");
    const Eigen::Index t = fit.params.lambda.size();
    GaussianPosterior post;
    post.mean.resize(t + 1);
    post.mean.head(t) = fit.params.lambda;
    post.mean[t] = fit.params.tau;
    post.covariance = pseudo_inverse(hessian(system, counts, fit.params), rank_tol);
    post.teams = counts.teams();
    return post;
}

SampleSet sample_gaussian(const GaussianPosterior& post, int n, std::uint64_t seed) {
    const Eigen::Index d = post.mean.size();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(post.covariance);
    const Eigen::VectorXd& vals = eig.eigenvalues();
    const double cutoff = 1e-12 * std::max(1.0, vals.cwiseAbs().maxCoeff());

    std::vector<Eigen::Index> active;
    for (Eigen::Index k = 0; k < d; ++k) {
        if (vals[k] > cutoff) active.push_back(k);
    }
    Eigen::MatrixXd factor(d, static_cast<Eigen::Index>(active.size()));
    for (std::size_t a = 0; a < active.size(); ++a) {
        factor.col(static_cast<Eigen::Index>(a)) =
            eig.eigenvectors().col(active[a]) * std::sqrt(vals[active[a]]);
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    SampleSet out;
    out.source = SampleSource::gaussian;
    out.seed = seed;
    out.draws.resize(n, d);
    out.chain_ids.assign(static_cast<std::size_t>(n), 0);
    Eigen::VectorXd z(factor.cols());
    for (int row = 0; row < n; ++row) {
        for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = normal(rng);
        out.draws.row(row) = (post.mean + factor * z).transpose();
    }
    return out;
}

namespace {

MarginalSummary summary_from_draws(std::vector<double> g) {
    MarginalSummary s;
    const double n = static_cast<double>(g.size());
    double sum = 0.0;
    for (double v : g) sum += v;
    s.mean = sum / n;
    double ss = 0.0;
    for (double v : g) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (n - 1.0));
    std::sort(g.begin(), g.end());
    const auto q = [&](double p) {
        const double pos = p * (n - 1.0);
        const auto lo = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        if (lo + 1 >= g.size()) return g.back();
        return g[lo] * (1.0 - frac) + g[lo + 1] * frac;
    };
    s.q05 = q(0.05);
    s.q95 = q(0.95);
    return s;
}

}  // namespace

MarginalSummary marginal_gamma(const GaussianPosterior& post, std::size_t i, std::size_t j) {
    if (i == j) throw SameTeam("i and j must differ");
    const auto ie = static_cast<Eigen::Index>(i);
    const auto je = static_cast<Eigen::Index>(j);
    MarginalSummary s;
    s.mean = post.mean[ie] - post.mean[je];
    const double var = post.covariance(ie, ie) + post.covariance(je, je) -
                       2.0 * post.covariance(ie, je);
    s.sd = std::sqrt(std::max(0.0, var));
    // Central 90% interval of a Gaussian: mean +/- 1.6448536... sd.
    constexpr double z90 = 1.6448536269514722;
    s.q05 = s.mean - z90 * s.sd;
    s.q95 = s.mean + z90 * s.sd;
    return s;
}

MarginalSummary marginal_gamma(const SampleSet& samples, std::size_t i, std::size_t j) {
    if (i == j) throw SameTeam("i and j must differ");
    const auto ie = static_cast<Eigen::Index>(i);
    const auto je = static_cast<Eigen::Index>(j);
    std::vector<double> g(static_cast<std::size_t>(samples.size()));
    for (Eigen::Index r = 0; r < samples.size(); ++r) {
        g[static_cast<std::size_t>(r)] = samples.draws(r, ie) - samples.draws(r, je);
    }
    return summary_from_draws(std::move(g));
}

}  // namespace btm
