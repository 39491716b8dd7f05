#include <doctest.h>

#include <cmath>
#include <random>

#include "btm/errors.hpp"
#include "btm/hmc.hpp"
#include "btm/ingest.hpp"
#include "btm/laplace.hpp"
#include "oracles.hpp"

using namespace btm;

namespace {

CountsMatrix ecac_counts() {
    return load_counts_json(oracles::read_file(oracles::data_path("ecac_2021_counts.json")));
}

}  // namespace

TEST_CASE("reduced log posterior") {
    const CountsMatrix four = ecac_counts();
    const auto& system = OutcomeSystem::four_outcome();

    SUBCASE("reparametrization identity at the Table 5 estimates") {
        ModelParams mle{Eigen::Vector4d(-0.74, 0.60, 0.93, -0.79), -0.49};
        Eigen::Vector3d omega(mle.lambda[0] - mle.lambda[1], mle.lambda[1] - mle.lambda[2],
                              mle.lambda[2] - mle.lambda[3]);
        const ReducedEval eval = log_posterior_reduced(system, four, omega, mle.tau);
        CHECK(eval.value ==
              doctest::Approx(log_likelihood(system, four, mle)).epsilon(1e-12));
    }

    SUBCASE("BT systems get a standard-normal prior on tau") {
        const CountsMatrix counts =
            collapse(four, collapse_to_wl(), OutcomeSystem::bradley_terry());
        const double tau = 0.8;
        Eigen::Vector3d omega(0.1, -0.2, 0.3);
        const ReducedEval with_tau =
            log_posterior_reduced(OutcomeSystem::bradley_terry(), counts, omega, tau);
        const ReducedEval at_zero =
            log_posterior_reduced(OutcomeSystem::bradley_terry(), counts, omega, 0.0);
        CHECK(with_tau.value - at_zero.value == doctest::Approx(-0.5 * tau * tau));
        CHECK(with_tau.grad[3] == doctest::Approx(-tau).epsilon(1e-12));
    }

    SUBCASE("gradient matches finite differences in (omega, tau)") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (int rep = 0; rep < 5; ++rep) {
            Eigen::Vector3d omega(dist(rng), dist(rng), dist(rng));
            const double tau = dist(rng);
            const ReducedEval eval = log_posterior_reduced(system, four, omega, tau);
            const double h = 1e-5;
            for (int k = 0; k < 4; ++k) {
                Eigen::Vector3d up = omega, down = omega;
                double tau_up = tau, tau_down = tau;
                if (k < 3) {
                    up[k] += h;
                    down[k] -= h;
                } else {
                    tau_up += h;
                    tau_down -= h;
                }
                const double fd =
                    (log_posterior_reduced(system, four, up, tau_up).value -
                     log_posterior_reduced(system, four, down, tau_down).value) /
                    (2.0 * h);
                CHECK(eval.grad[k] ==
                      doctest::Approx(fd).epsilon(1e-6).scale(std::abs(fd) + 1.0));
            }
        }
    }
}

TEST_CASE("leapfrog energy error scales as step^2") {
    const CountsMatrix four = ecac_counts();
    const auto& system = OutcomeSystem::four_outcome();
    const hmc_kernel::LogDensity target = [&](const Eigen::VectorXd& q,
                                              Eigen::VectorXd& grad) {
        const ReducedEval eval = log_posterior_reduced(system, four, q.head(3), q[3]);
        grad = eval.grad;
        return eval.value;
    };
    const Eigen::VectorXd q0 = Eigen::VectorXd::Zero(4);
    // Same path length: step / 10 with 10x the steps
    const double coarse = hmc_kernel::mean_abs_energy_error(target, q0, 0.2, 16, 64, 5);
    const double fine = hmc_kernel::mean_abs_energy_error(target, q0, 0.02, 160, 64, 5);
    CHECK(coarse / fine >= 50.0);
}

TEST_CASE("HMC matches quadrature on a proper 2-team posterior") {
    // gamma has a standard-normal prior so the posterior is proper even for
    // lopsided data; this makes the moments computable by quadrature.
    const int wins = 7, losses = 2;
    const hmc_kernel::LogDensity target = [&](const Eigen::VectorXd& q,
                                              Eigen::VectorXd& grad) {
        const double gamma = q[0];
        const double theta = 1.0 / (1.0 + std::exp(-gamma));
        grad.resize(1);
        grad[0] = wins * (1.0 - theta) - losses * theta - gamma;
        return wins * std::log(theta) + losses * std::log(1.0 - theta) -
               0.5 * gamma * gamma;
    };

    // Trapezoid-rule moments of the exact density
    const int grid_n = 4001;
    double z = 0.0, m1 = 0.0, m2 = 0.0;
    Eigen::VectorXd unused(1);
    for (int g = 0; g < grid_n; ++g) {
        const double x = -8.0 + 16.0 * g / double(grid_n - 1);
        const double w = (g == 0 || g == grid_n - 1) ? 0.5 : 1.0;
        const double f = w * std::exp(target(Eigen::VectorXd::Constant(1, x), unused));
        z += f;
        m1 += f * x;
        m2 += f * x * x;
    }
    const double exact_mean = m1 / z;
    const double exact_sd = std::sqrt(m2 / z - exact_mean * exact_mean);

    HmcConfig config;
    config.seed = 42;
    const hmc_kernel::RunResult result = hmc_kernel::run(target, 1, config);

    SampleSet samples;
    samples.draws.resize(config.chains * config.draws_per_chain, 1);
    Eigen::Index row = 0;
    for (int c = 0; c < config.chains; ++c) {
        for (Eigen::Index r = 0; r < result.chains[c].rows(); ++r, ++row) {
            samples.draws(row, 0) = result.chains[c](r, 0);
            samples.chain_ids.push_back(c);
        }
    }
    const HmcDiagnostics diag = diagnostics(samples);
    CHECK(diag.mixed());
    CHECK(result.divergences == 0);

    const double n_eff = diag.ess[0];
    REQUIRE(n_eff > 100.0);
    const double mc_mean = samples.draws.col(0).mean();
    const double mc_var =
        (samples.draws.col(0).array() - mc_mean).square().sum() /
        double(samples.draws.rows() - 1);
    const double se_mean = std::sqrt(mc_var / n_eff);
    CHECK(std::abs(mc_mean - exact_mean) < 3.0 * se_mean);
    const double se_sd = exact_sd / std::sqrt(2.0 * n_eff);
    CHECK(std::abs(std::sqrt(mc_var) - exact_sd) < 3.0 * se_sd);
}

TEST_CASE("hmc_sample on the ECAC four-outcome posterior") {
    const CountsMatrix four = ecac_counts();
    const auto& system = OutcomeSystem::four_outcome();

    HmcConfig config;
    config.seed = 2024;
    const HmcRun run = hmc_sample(system, four, config);

    CHECK(run.samples.source == SampleSource::hmc);
    CHECK(run.samples.size() == 4000);
    CHECK(run.diagnostics.mixed());
    for (double rate : run.diagnostics.accept_rate) {
        CHECK(rate > 0.5);
        CHECK(rate <= 1.0);
    }

    // every draw keeps sum(lambda) = 0
    for (Eigen::Index r = 0; r < run.samples.size(); r += 97) {
        CHECK(std::abs(run.samples.draws.row(r).head(4).sum()) < 1e-10);
    }

    // posterior mean of gamma(Qn, Cg) matches exact quadrature; the exact
    // posterior is right-skewed, so its mean sits a little above the MLE
    const MleFit fit = fit_mle(system, four);
    const GaussianPosterior post = gaussian_approximation(system, four, fit);
    const std::vector<double> exact =
        oracles::quad_gamma_means(system, four, fit.params, post.covariance, {{2, 0}});
    const MarginalSummary hmc_gamma = marginal_gamma(run.samples, 2, 0);
    const MarginalSummary gauss_gamma = marginal_gamma(post, 2, 0);
    CHECK(std::abs(hmc_gamma.mean - exact[0]) < 0.10);
    CHECK(exact[0] > gauss_gamma.mean);  // skew pulls the mean above the MLE
    CHECK(std::abs(hmc_gamma.mean - gauss_gamma.mean) < 0.35);

    // antisymmetry of gamma under swapping the pair
    const MarginalSummary reversed = marginal_gamma(run.samples, 0, 2);
    CHECK(reversed.mean == doctest::Approx(-hmc_gamma.mean).epsilon(1e-12));

    // Davidson: posterior mean of the even-match tie probability brackets
    // the MLE value 0.39
    const CountsMatrix wtl = collapse(four, collapse_to_wtl(), OutcomeSystem::davidson());
    const HmcRun dav = hmc_sample(OutcomeSystem::davidson(), wtl, config);
    double tie_prob = 0.0;
    for (Eigen::Index r = 0; r < dav.samples.size(); ++r) {
        const double nu = std::exp(dav.samples.draws(r, 4));
        tie_prob += nu / (2.0 + nu);
    }
    tie_prob /= double(dav.samples.size());
    CHECK(tie_prob > 0.30);
    CHECK(tie_prob < 0.48);
}

TEST_CASE("hmc rejects degenerate data") {
    const auto& bt = OutcomeSystem::bradley_terry();
    auto undefeated = CountsMatrix::create(
        bt, {"a", "b"},
        {(Eigen::MatrixXi(2, 2) << 0, 3, 0, 0).finished(),
         (Eigen::MatrixXi(2, 2) << 0, 0, 3, 0).finished()});
    HmcConfig config;
    CHECK_THROWS_AS(hmc_sample(bt, undefeated, config), DegenerateData);
}

TEST_CASE("diagnostics edge cases") {
    SUBCASE("needs two chains") {
        SampleSet one;
        one.draws = Eigen::MatrixXd::Random(100, 2);
        one.chain_ids.assign(100, 0);
        CHECK_THROWS_AS(diagnostics(one), TooFewChains);
    }

    SUBCASE("constant chains are flagged, not NaN") {
        SampleSet flat;
        flat.draws = Eigen::MatrixXd::Ones(200, 2);
        flat.chain_ids.assign(200, 0);
        for (int r = 100; r < 200; ++r) flat.chain_ids[r] = 1;
        const HmcDiagnostics diag = diagnostics(flat);
        CHECK_FALSE(diag.rhat_defined[0]);
        CHECK(std::isfinite(diag.rhat[0]));
    }

    SUBCASE("iid chains mix; shifted chains do not") {
        std::mt19937_64 rng(77);
        std::normal_distribution<double> normal(0.0, 1.0);
        const int n = 2000;
        SampleSet iid;
        iid.draws.resize(4 * n, 1);
        for (int c = 0; c < 4; ++c) {
            for (int r = 0; r < n; ++r) {
                iid.draws(c * n + r, 0) = normal(rng);
                iid.chain_ids.push_back(c);
            }
        }
        const HmcDiagnostics good = diagnostics(iid);
        CHECK(good.rhat[0] > 0.99);
        CHECK(good.rhat[0] < 1.01);
        CHECK(good.ess[0] >= 0.5 * 4 * n);

        SampleSet shifted = iid;
        for (int r = 0; r < n; ++r) shifted.draws(r, 0) += 10.0;
        CHECK(diagnostics(shifted).rhat[0] > 1.5);
    }
}
