#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace btm {

enum class SampleSource { gaussian, hmc };

/// Posterior draws in (lambda_1..lambda_t, tau) coordinates, one row per draw.
struct SampleSet {
    Eigen::MatrixXd draws;           // n x (t+1), tau in the last column
    SampleSource source = SampleSource::gaussian;
    std::vector<int> chain_ids;      // one entry per draw
    std::uint64_t seed = 0;

    Eigen::Index size() const { return draws.rows(); }
    Eigen::Index dim() const { return draws.cols(); }
};

}  // namespace btm
