#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "btm/laplace.hpp"
#include "btm/model.hpp"
#include "btm/outcome_system.hpp"
#include "btm/samples.hpp"

namespace btm {

/// A fitted model plus its Gaussian posterior, as exchanged through the
/// fitted-model JSON file. tau is serialized as null for systems without an
/// overtime outcome.
struct FittedModel {
    OutcomeSystem system = OutcomeSystem::bradley_terry();
    std::vector<std::string> teams;
    ModelParams params;
    Eigen::MatrixXd covariance;  // (t+1) x (t+1)
    bool converged = false;

    std::string to_json() const;
    static FittedModel from_json(const std::string& text);
};

/// Samples CSV with header `chain,draw,lambda_<team>...,tau`.
std::string samples_to_csv(const SampleSet& samples, const std::vector<std::string>& teams);
SampleSet samples_from_csv(const std::string& text, std::vector<std::string>* teams = nullptr);

/// 1-D Gaussian KDE on an even grid, Silverman bandwidth 1.06 sigma n^{-1/5}.
struct DensityGrid1D {
    Eigen::VectorXd x;
    Eigen::VectorXd density;
    double bandwidth = 0.0;
    double trapezoid_mass() const;
};
DensityGrid1D kde_1d(const Eigen::VectorXd& values, int grid_points = 257);

/// 2-D Gaussian KDE with a diagonal bandwidth matrix.
struct DensityGrid2D {
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    Eigen::MatrixXd density;  // density(i, j) at (x[i], y[j])
};
DensityGrid2D kde_2d(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                     int grid_points = 65);

std::string density_to_csv(const DensityGrid1D& grid);
std::string density_to_csv(const DensityGrid2D& grid);

}  // namespace btm
