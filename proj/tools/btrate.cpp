// btrate: fit, sample, predict and report for generalized Bradley-Terry
// models with multiple game outcomes.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "btm/errors.hpp"
#include "btm/hmc.hpp"
#include "btm/ingest.hpp"
#include "btm/laplace.hpp"
#include "btm/mle.hpp"
#include "btm/model.hpp"
#include "btm/report.hpp"

#include <json.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitDegenerate = 2;
constexpr int kExitNotConverged = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw btm::SchemaError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw btm::SchemaError("cannot write " + path);
    out << text;
}

btm::OutcomeSystem resolve_model(const std::string& model) {
    if (model.rfind("custom:", 0) == 0) {
        const std::string path = model.substr(7);
        return btm::load_system_json(read_file(path), "custom");
    }
    return btm::system_by_name(model);
}

struct InputFlags {
    std::string model = "bt";
    std::string games_path;
    std::string counts_path;
    std::string collapse;
};

void add_input_flags(CLI::App* cmd, InputFlags& flags) {
    cmd->add_option("--model", flags.model,
                    "bt | davidson | four-outcome | custom:<system.json>");
    auto* games = cmd->add_option("--games", flags.games_path, "games CSV");
    auto* counts = cmd->add_option("--counts", flags.counts_path, "counts JSON");
    games->excludes(counts);
    cmd->add_option("--collapse", flags.collapse,
                    "wl | wtl (collapse four-outcome input first)")
        ->check(CLI::IsMember({"wl", "wtl"}));
}

btm::CountsMatrix load_counts(const InputFlags& flags, const btm::OutcomeSystem& system) {
    if (flags.games_path.empty() && flags.counts_path.empty()) {
        throw btm::SchemaError("one of --games or --counts is required");
    }
    // With --collapse the raw input is four-outcome and gets mapped down.
    const btm::OutcomeSystem& raw_system =
        flags.collapse.empty() ? system : btm::OutcomeSystem::four_outcome();
    btm::CountsMatrix counts =
        !flags.games_path.empty()
            ? btm::aggregate(btm::parse_games_csv(read_file(flags.games_path)), raw_system)
            : btm::load_counts_json(read_file(flags.counts_path));
    if (flags.collapse.empty()) return counts;
    const btm::CollapseMap map =
        flags.collapse == "wl" ? btm::collapse_to_wl() : btm::collapse_to_wtl();
    return btm::collapse(counts, map, system);
}

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

void print_fit_tables(const btm::OutcomeSystem& system, const btm::CountsMatrix& counts,
                      const btm::MleFit& fit, const btm::GaussianPosterior& post) {
    const auto t = static_cast<Eigen::Index>(counts.team_count());
    const Eigen::MatrixXd rho = post.correlation();

    std::cout << "model: " << system.name() << "\n\n";
    std::cout << std::left << std::setw(16) << "team" << std::right << std::setw(9)
              << "lambda" << std::setw(9) << "sd" << '\n';
    for (Eigen::Index i = 0; i < t; ++i) {
        std::cout << std::left << std::setw(16) << counts.teams()[i] << std::right
                  << std::setw(9) << fmt2(fit.params.lambda[i]) << std::setw(9)
                  << fmt2(post.sd(i)) << '\n';
    }
    if (!system.tau_free()) {
        std::cout << std::left << std::setw(16) << "tau" << std::right << std::setw(9)
                  << fmt2(fit.params.tau) << std::setw(9) << fmt2(post.sd(t)) << '\n';
        std::cout << "even-match overtime/tie probability: "
                  << fmt2(btm::even_match_overtime_prob(system, fit.params.tau)) << '\n';
    }

    for (std::size_t k = 0; k < system.size(); ++k) {
        const auto& out = system.outcome(k);
        if (out.p < 0.5) continue;  // losses mirror the win columns
        if (out.p == 0.5 && system.opposite_index(k) == k) {
            // keep: tie probabilities are worth a table
        } else if (out.p == 0.5) {
            continue;
        }
        std::cout << "\ntheta^" << out.label << "(row beats col):\n";
        std::cout << std::left << std::setw(16) << "";
        for (Eigen::Index j = 0; j < t; ++j) {
            std::cout << std::right << std::setw(8) << counts.teams()[j].substr(0, 7);
        }
        std::cout << '\n';
        for (Eigen::Index i = 0; i < t; ++i) {
            std::cout << std::left << std::setw(16) << counts.teams()[i];
            for (Eigen::Index j = 0; j < t; ++j) {
                if (i == j) {
                    std::cout << std::right << std::setw(8) << "-";
                } else {
                    const Eigen::VectorXd theta = btm::outcome_probs(
                        system, fit.params, static_cast<std::size_t>(i),
                        static_cast<std::size_t>(j));
                    std::cout << std::right << std::setw(8)
                              << fmt2(theta[static_cast<Eigen::Index>(k)]);
                }
            }
            std::cout << '\n';
        }
    }

    std::cout << "\ncorrelation:\n";
    const Eigen::Index dim = system.tau_free() ? t : t + 1;
    std::cout << std::left << std::setw(16) << "";
    for (Eigen::Index j = 0; j < dim; ++j) {
        std::cout << std::right << std::setw(8)
                  << (j < t ? counts.teams()[j].substr(0, 7) : std::string("tau"));
    }
    std::cout << '\n';
    for (Eigen::Index i = 0; i < dim; ++i) {
        std::cout << std::left << std::setw(16)
                  << (i < t ? counts.teams()[i] : std::string("tau"));
        for (Eigen::Index j = 0; j < dim; ++j) {
            std::cout << std::right << std::setw(8) << fmt2(rho(i, j));
        }
        std::cout << '\n';
    }
    std::cout << "\nlog-likelihood: " << std::setprecision(10)
              << fit.log_likelihood_at_mle << "  iterations: " << fit.iterations << '\n';
}

int cmd_fit(const InputFlags& flags, const std::string& out_path, double tol, int max_iter) {
    const btm::OutcomeSystem system = resolve_model(flags.model);
    const btm::CountsMatrix counts = load_counts(flags, system);

    btm::FitOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    btm::MleFit fit;
    try {
        fit = btm::fit_mle(system, counts, opts);
    } catch (const btm::DegenerateData& e) {
        std::cerr << "degenerate data: " << e.what() << '\n';
        return kExitDegenerate;
    }
    if (!fit.converged) {
        std::cerr << "did not converge after " << fit.iterations
                  << " iterations (max residual " << fit.max_residual << ")\n";
        return kExitNotConverged;
    }
    const btm::GaussianPosterior post = btm::gaussian_approximation(system, counts, fit);
    print_fit_tables(system, counts, fit, post);

    if (!out_path.empty()) {
        btm::FittedModel model;
        model.system = system;
        model.teams = counts.teams();
        model.params = fit.params;
        model.covariance = post.covariance;
        model.converged = fit.converged;
        write_file(out_path, model.to_json());
    }
    return kExitOk;
}

int cmd_sample(const InputFlags& flags, const std::string& method, int draws,
               std::uint64_t seed, int chains, int warmup, const std::string& out_path,
               const std::string& diag_path) {
    const btm::OutcomeSystem system = resolve_model(flags.model);
    const btm::CountsMatrix counts = load_counts(flags, system);

    btm::SampleSet samples;
    std::optional<btm::HmcDiagnostics> diag;
    try {
        if (method == "gaussian") {
            const btm::MleFit fit = btm::fit_mle(system, counts);
            if (!fit.converged) {
                std::cerr << "fit did not converge\n";
                return kExitNotConverged;
            }
            samples = btm::sample_gaussian(
                btm::gaussian_approximation(system, counts, fit), draws, seed);
        } else {
            btm::HmcConfig config;
            config.chains = chains;
            config.warmup = warmup;
            config.draws_per_chain = draws;
            config.seed = seed;
            btm::HmcRun run = btm::hmc_sample(system, counts, config);
            samples = std::move(run.samples);
            diag = std::move(run.diagnostics);
        }
    } catch (const btm::DegenerateData& e) {
        std::cerr << "degenerate data: " << e.what() << '\n';
        return kExitDegenerate;
    }

    const std::string csv = samples_to_csv(samples, counts.teams());
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_file(out_path, csv);
    }

    if (diag) {
        nlohmann::json j;
        j["accept_rate"] = diag->accept_rate;
        j["divergences"] = diag->divergences;
        std::vector<std::string> names(counts.teams());
        names.push_back("tau");
        nlohmann::json rhat = nlohmann::json::object();
        nlohmann::json ess = nlohmann::json::object();
        for (Eigen::Index k = 0; k < diag->rhat.size(); ++k) {
            rhat[names[static_cast<std::size_t>(k)]] =
                diag->rhat_defined[static_cast<std::size_t>(k)]
                    ? nlohmann::json(diag->rhat[k])
                    : nlohmann::json(nullptr);
            ess[names[static_cast<std::size_t>(k)]] = diag->ess[k];
        }
        j["rhat"] = std::move(rhat);
        j["ess"] = std::move(ess);
        j["mixed"] = diag->mixed();
        const std::string path =
            diag_path.empty() ? (out_path.empty() ? "hmc_diagnostics.json"
                                                  : out_path + ".diag.json")
                              : diag_path;
        write_file(path, j.dump(2) + "\n");
        if (!diag->mixed()) {
            std::cerr << "warning: split R-hat above 1.05; samples may not have mixed\n";
        }
    }
    return kExitOk;
}

int cmd_predict(const std::string& fit_path, const std::string& pairs,
                const std::string& posterior_path, bool playoff) {
    const btm::FittedModel model = btm::FittedModel::from_json(read_file(fit_path));
    const auto t = static_cast<Eigen::Index>(model.teams.size());

    std::vector<std::pair<std::size_t, std::size_t>> selected;
    if (pairs == "all") {
        for (Eigen::Index i = 0; i < t; ++i) {
            for (Eigen::Index j = 0; j < t; ++j) {
                if (i != j) selected.emplace_back(i, j);
            }
        }
    } else {
        const auto comma = pairs.find(',');
        if (comma == std::string::npos) {
            throw btm::SchemaError("--pairs must be 'all' or '<team_i>,<team_j>'");
        }
        const std::string a = pairs.substr(0, comma);
        const std::string b = pairs.substr(comma + 1);
        const auto find = [&](const std::string& name) -> std::size_t {
            for (std::size_t k = 0; k < model.teams.size(); ++k) {
                if (model.teams[k] == name) return k;
            }
            throw btm::UnknownTeam("unknown team: " + name);
        };
        selected.emplace_back(find(a), find(b));
    }

    std::optional<btm::SampleSet> posterior;
    if (!posterior_path.empty()) {
        posterior = btm::samples_from_csv(read_file(posterior_path));
        if (posterior->dim() != t + 1) {
            throw btm::DimensionMismatch("samples do not match the fitted model");
        }
    }

    std::cout << "team_i,team_j";
    if (playoff) std::cout << ",playoff_win";
    for (const auto& out : model.system.outcomes()) std::cout << ",theta_" << out.label;
    std::cout << '\n';
    std::cout << std::setprecision(10);
    for (const auto& [i, j] : selected) {
        std::cout << model.teams[i] << ',' << model.teams[j];
        if (playoff) std::cout << ',' << btm::playoff_win_prob(model.params, i, j);
        Eigen::VectorXd theta;
        if (posterior) {
            // Posterior-mean probabilities over the supplied draws.
            theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.system.size()));
            for (Eigen::Index r = 0; r < posterior->size(); ++r) {
                btm::ModelParams draw{posterior->draws.row(r).head(t).transpose(),
                                      posterior->draws(r, t)};
                theta += btm::outcome_probs(model.system, draw, i, j);
            }
            theta /= double(posterior->size());
        } else {
            theta = btm::outcome_probs(model.system, model.params, i, j);
        }
        for (Eigen::Index k = 0; k < theta.size(); ++k) std::cout << ',' << theta[k];
        std::cout << '\n';
    }
    return kExitOk;
}

int cmd_report(const std::string& fit_path, const std::string& samples_path,
               const std::string& pair, const std::string& outdir) {
    const btm::FittedModel model = btm::FittedModel::from_json(read_file(fit_path));
    const auto t = static_cast<Eigen::Index>(model.teams.size());
    const btm::SampleSet samples = btm::samples_from_csv(read_file(samples_path));
    if (samples.dim() != t + 1) {
        throw btm::DimensionMismatch("samples do not match the fitted model");
    }
    std::filesystem::create_directories(outdir);
    const auto path = [&](const std::string& name) { return outdir + "/" + name; };

    const auto comma = pair.find(',');
    if (comma == std::string::npos) {
        throw btm::SchemaError("--pair must be '<team_i>,<team_j>'");
    }
    const auto find = [&](const std::string& name) -> Eigen::Index {
        for (std::size_t k = 0; k < model.teams.size(); ++k) {
            if (model.teams[k] == name) return static_cast<Eigen::Index>(k);
        }
        throw btm::UnknownTeam("unknown team: " + name);
    };
    const Eigen::Index i = find(pair.substr(0, comma));
    const Eigen::Index j = find(pair.substr(comma + 1));
    const std::string tag = model.teams[i] + "_vs_" + model.teams[j];

    const Eigen::VectorXd gamma = samples.draws.col(i) - samples.draws.col(j);
    write_file(path("gamma_" + tag + ".csv"), density_to_csv(btm::kde_1d(gamma)));

    if (!model.system.tau_free()) {
        const Eigen::VectorXd tau = samples.draws.col(t);
        write_file(path("tau.csv"), density_to_csv(btm::kde_1d(tau)));

        // Even-match overtime/tie probability m_o nu / (m_r + m_o nu).
        const double ratio = double(model.system.regulation_outcomes()) /
                             double(model.system.overtime_outcomes());
        Eigen::VectorXd prob(tau.size());
        for (Eigen::Index r = 0; r < tau.size(); ++r) {
            const double nu = std::exp(tau[r]);
            prob[r] = nu / (ratio + nu);
        }
        write_file(path("tau_transformed.csv"), density_to_csv(btm::kde_1d(prob)));
        write_file(path("gamma_tau_" + tag + ".csv"),
                   density_to_csv(btm::kde_2d(gamma, tau)));
    }

    if (model.system.name() == "davidson") {
        // Per-draw ternary coordinates (theta^W, theta^T, theta^L).
        std::ostringstream out;
        out.precision(12);
        out << "theta_W,theta_T,theta_L\n";
        for (Eigen::Index r = 0; r < samples.size(); ++r) {
            btm::ModelParams draw{samples.draws.row(r).head(t).transpose(),
                                  samples.draws(r, t)};
            const Eigen::VectorXd theta = btm::outcome_probs(
                model.system, draw, static_cast<std::size_t>(i),
                static_cast<std::size_t>(j));
            out << theta[0] << ',' << theta[1] << ',' << theta[2] << '\n';
        }
        write_file(path("ternary_" + tag + ".csv"), out.str());
    }

    if (model.system.name() == "four-outcome") {
        // (theta^W, theta^O) = (RW + OW, OW + OL) per draw, then a 2-D KDE.
        Eigen::VectorXd tw(samples.size()), to(samples.size());
        for (Eigen::Index r = 0; r < samples.size(); ++r) {
            btm::ModelParams draw{samples.draws.row(r).head(t).transpose(),
                                  samples.draws(r, t)};
            const Eigen::VectorXd theta = btm::outcome_probs(
                model.system, draw, static_cast<std::size_t>(i),
                static_cast<std::size_t>(j));
            tw[r] = theta[0] + theta[1];
            to[r] = theta[1] + theta[2];
        }
        write_file(path("win_overtime_" + tag + ".csv"),
                   density_to_csv(btm::kde_2d(tw, to)));
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Paired-comparison ratings for multi-outcome game systems"};
    app.require_subcommand(1);

    InputFlags fit_flags;
    std::string fit_out;
    double fit_tol = 1e-10;
    int fit_max_iter = 10000;
    auto* fit = app.add_subcommand("fit", "Maximum-likelihood fit + Gaussian posterior");
    add_input_flags(fit, fit_flags);
    fit->add_option("--out", fit_out, "fitted-model JSON output path");
    fit->add_option("--tol", fit_tol, "convergence tolerance");
    fit->add_option("--max-iter", fit_max_iter, "iteration budget");

    InputFlags sample_flags;
    std::string method = "gaussian";
    int draws = 1000;
    std::uint64_t seed = 0;
    int chains = 4;
    int warmup = 1000;
    std::string sample_out, diag_out;
    auto* sample = app.add_subcommand("sample", "Posterior draws (gaussian or hmc)");
    add_input_flags(sample, sample_flags);
    sample->add_option("--method", method, "gaussian | hmc")
        ->check(CLI::IsMember({"gaussian", "hmc"}));
    sample->add_option("--draws", draws, "draws (per chain for hmc)");
    sample->add_option("--seed", seed, "RNG seed")->required();
    sample->add_option("--chains", chains, "HMC chains");
    sample->add_option("--warmup", warmup, "HMC warmup iterations");
    sample->add_option("--out", sample_out, "samples CSV output path");
    sample->add_option("--diagnostics", diag_out, "HMC diagnostics JSON path");

    std::string predict_fit, predict_pairs = "all", predict_posterior;
    bool playoff = false;
    auto* predict = app.add_subcommand("predict", "Outcome probabilities per pair");
    predict->add_option("--fit", predict_fit, "fitted-model JSON")->required();
    predict->add_option("--pairs", predict_pairs, "all | <team_i>,<team_j>");
    predict->add_option("--posterior", predict_posterior,
                        "samples CSV; report posterior-mean probabilities");
    predict->add_flag("--playoff", playoff, "also report logistic(gamma) win probability");

    std::string report_fit, report_samples, report_pair, report_outdir = "report";
    auto* report = app.add_subcommand("report", "Density/contour grids from samples");
    report->add_option("--fit", report_fit, "fitted-model JSON")->required();
    report->add_option("--samples", report_samples, "samples CSV")->required();
    report->add_option("--pair", report_pair, "<team_i>,<team_j>")->required();
    report->add_option("--outdir", report_outdir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed()) return cmd_fit(fit_flags, fit_out, fit_tol, fit_max_iter);
        if (sample->parsed()) {
            return cmd_sample(sample_flags, method, draws, seed, chains, warmup,
                              sample_out, diag_out);
        }
        if (predict->parsed()) {
            return cmd_predict(predict_fit, predict_pairs, predict_posterior, playoff);
        }
        if (report->parsed()) {
            return cmd_report(report_fit, report_samples, report_pair, report_outdir);
        }
    } catch (const btm::DegenerateData& e) {
        std::cerr << "degenerate data: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const btm::NotConverged& e) {
        std::cerr << "not converged: " << e.what() << '\n';
        return kExitNotConverged;
    } catch (const btm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitOk;
}
