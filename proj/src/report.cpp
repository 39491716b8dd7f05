#include "btm/report.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "btm/errors.hpp"
#include "btm/ingest.hpp"

namespace btm {

namespace {

using nlohmann::json;

json system_to_json(const OutcomeSystem& system) {
    if (system.name() == "bt" || system.name() == "davidson" ||
        system.name() == "four-outcome") {
        return system.name();
    }
    json specs = json::array();
    for (const auto& out : system.outcomes()) {
        specs.push_back({{"label", out.label},
                         {"p", out.p},
                         {"o", out.o},
                         {"opposite", out.opposite}});
    }
    return specs;
}

}  // namespace

std::string FittedModel::to_json() const {
    json j;
    j["system"] = system_to_json(system);
    j["teams"] = teams;
    j["lambda"] = std::vector<double>(params.lambda.begin(), params.lambda.end());
    if (system.tau_free()) {
        j["tau"] = nullptr;
    } else {
        j["tau"] = params.tau;
    }
    json cov = json::array();
    for (Eigen::Index i = 0; i < covariance.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < covariance.cols(); ++k) row.push_back(covariance(i, k));
        cov.push_back(std::move(row));
    }
    j["covariance"] = std::move(cov);
    j["converged"] = converged;
    return j.dump(2) + "\n";
}

FittedModel FittedModel::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    try {
        FittedModel model;
        const auto& js = j.at("system");
        if (js.is_string()) {
            model.system = system_by_name(js.get<std::string>());
        } else {
            std::vector<OutcomeSpec> specs;
            for (const auto& item : js) {
                specs.push_back({item.at("label").get<std::string>(),
                                 item.at("p").get<double>(), item.at("o").get<int>(),
                                 item.at("opposite").get<std::string>()});
            }
            model.system = OutcomeSystem::create(std::move(specs), "custom");
        }
        model.teams = j.at("teams").get<std::vector<std::string>>();
        const auto lambda = j.at("lambda").get<std::vector<double>>();
        model.params.lambda = Eigen::Map<const Eigen::VectorXd>(
            lambda.data(), static_cast<Eigen::Index>(lambda.size()));
        model.params.tau = j.at("tau").is_null() ? 0.0 : j.at("tau").get<double>();
        const auto& cov = j.at("covariance");
        const auto n = static_cast<Eigen::Index>(cov.size());
        model.covariance.resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index k = 0; k < n; ++k) {
                model.covariance(i, k) =
                    cov.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k))
                        .get<double>();
            }
        }
        model.converged = j.at("converged").get<bool>();
        return model;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad fitted-model schema: ") + e.what());
    }
}

std::string samples_to_csv(const SampleSet& samples, const std::vector<std::string>& teams) {
    std::ostringstream out;
    out.precision(17);
    out << "chain,draw";
    for (const auto& team : teams) out << ",lambda_" << team;
    out << ",tau\n";
    std::map<int, int> next_draw;
    for (Eigen::Index r = 0; r < samples.size(); ++r) {
        const int chain = samples.chain_ids[static_cast<std::size_t>(r)];
        out << chain << ',' << next_draw[chain]++;
        for (Eigen::Index k = 0; k < samples.dim(); ++k) out << ',' << samples.draws(r, k);
        out << '\n';
    }
    return out.str();
}

SampleSet samples_from_csv(const std::string& text, std::vector<std::string>* teams) {
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line)) throw MissingSamples("empty samples file");
    {
        std::stringstream hs(line);
        std::string field;
        std::vector<std::string> header;
        while (std::getline(hs, field, ',')) {
            while (!field.empty() && (field.back() == '\r')) field.pop_back();
            header.push_back(field);
        }
        if (header.size() < 4 || header[0] != "chain" || header[1] != "draw" ||
            header.back() != "tau") {
            throw MissingSamples("bad samples header");
        }
        if (teams) {
            teams->clear();
            for (std::size_t k = 2; k + 1 < header.size(); ++k) {
                const std::string prefix = "lambda_";
                if (header[k].rfind(prefix, 0) != 0) {
                    throw MissingSamples("bad samples header column: " + header[k]);
                }
                teams->push_back(header[k].substr(prefix.size()));
            }
        }
    }
    std::vector<std::vector<double>> rows;
    std::vector<int> chains;
    while (std::getline(ss, line)) {
        if (line.empty() || line == "\r") continue;
        std::stringstream ls(line);
        std::string field;
        std::vector<double> row;
        int col = 0;
        int chain = 0;
        while (std::getline(ls, field, ',')) {
            if (col == 0) {
                chain = std::stoi(field);
            } else if (col >= 2) {
                row.push_back(std::stod(field));
            }
            ++col;
        }
        chains.push_back(chain);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw MissingSamples("samples file has no draws");

    SampleSet samples;
    samples.draws.resize(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size()) throw MissingSamples("ragged samples file");
        for (std::size_t k = 0; k < rows[r].size(); ++k) {
            samples.draws(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
                rows[r][k];
        }
    }
    samples.chain_ids = std::move(chains);
    return samples;
}

namespace {

double sample_sd(const Eigen::VectorXd& v) {
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / double(v.size() - 1));
}

double silverman(const Eigen::VectorXd& v) {
    return 1.06 * sample_sd(v) * std::pow(double(v.size()), -0.2);
}

}  // namespace

DensityGrid1D kde_1d(const Eigen::VectorXd& values, int grid_points) {
    DensityGrid1D grid;
    grid.bandwidth = silverman(values);
    const double h = std::max(grid.bandwidth, 1e-12);
    const double lo = values.minCoeff() - 4.0 * h;
    const double hi = values.maxCoeff() + 4.0 * h;
    grid.x = Eigen::VectorXd::LinSpaced(grid_points, lo, hi);
    grid.density.resize(grid_points);
    const double norm = 1.0 / (double(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    for (int g = 0; g < grid_points; ++g) {
        const double z = grid.x[g];
        grid.density[g] = norm * ((values.array() - z) / h).square().unaryExpr([](double u) {
                                       return std::exp(-0.5 * u);
                                   }).sum();
    }
    return grid;
}

double DensityGrid1D::trapezoid_mass() const {
    double mass = 0.0;
    for (Eigen::Index g = 1; g < x.size(); ++g) {
        mass += 0.5 * (density[g] + density[g - 1]) * (x[g] - x[g - 1]);
    }
    return mass;
}

DensityGrid2D kde_2d(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys, int grid_points) {
    DensityGrid2D grid;
    const double hx = std::max(silverman(xs), 1e-12);
    const double hy = std::max(silverman(ys), 1e-12);
    grid.x = Eigen::VectorXd::LinSpaced(grid_points, xs.minCoeff() - 4.0 * hx,
                                        xs.maxCoeff() + 4.0 * hx);
    grid.y = Eigen::VectorXd::LinSpaced(grid_points, ys.minCoeff() - 4.0 * hy,
                                        ys.maxCoeff() + 4.0 * hy);
    grid.density = Eigen::MatrixXd::Zero(grid_points, grid_points);
    const double norm =
        1.0 / (double(xs.size()) * 2.0 * std::numbers::pi * hx * hy);
    for (Eigen::Index n = 0; n < xs.size(); ++n) {
        // Separable kernel; accumulate the outer product of the two factors.
        Eigen::VectorXd kx = ((grid.x.array() - xs[n]) / hx).square();
        Eigen::VectorXd ky = ((grid.y.array() - ys[n]) / hy).square();
        kx = (-0.5 * kx.array()).exp();
        ky = (-0.5 * ky.array()).exp();
        grid.density.noalias() += kx * ky.transpose();
    }
    grid.density *= norm;
    return grid;
}

std::string density_to_csv(const DensityGrid1D& grid) {
    std::ostringstream out;
    out.precision(12);
    out << "x,density\n";
    for (Eigen::Index g = 0; g < grid.x.size(); ++g) {
        out << grid.x[g] << ',' << grid.density[g] << '\n';
    }
    return out.str();
}

std::string density_to_csv(const DensityGrid2D& grid) {
    std::ostringstream out;
    out.precision(12);
    out << "x,y,density\n";
    for (Eigen::Index i = 0; i < grid.x.size(); ++i) {
        for (Eigen::Index j = 0; j < grid.y.size(); ++j) {
            out << grid.x[i] << ',' << grid.y[j] << ',' << grid.density(i, j) << '\n';
        }
    }
    return out.str();
}

}  // namespace btm
