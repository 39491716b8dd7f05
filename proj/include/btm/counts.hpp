#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <vector>

#include "btm/outcome_system.hpp"

namespace btm {

/// Per-ordered-pair outcome counts n^I_ij over t teams. Stored redundantly
/// for both orderings with the mirror invariant n^{-I}_ji = n^I_ij enforced
/// on construction.
class CountsMatrix {
  public:
    /// Builds from per-outcome t x t matrices (outcome order matches the
    /// system). Throws SchemaError for negative or diagonal entries and
    /// InconsistentMirror when the two bookkeeping perspectives disagree.
    static CountsMatrix create(const OutcomeSystem& system, std::vector<std::string> teams,
                               std::vector<Eigen::MatrixXi> counts);

    /// All-zero counts for an explicit team list.
    static CountsMatrix zero(const OutcomeSystem& system, std::vector<std::string> teams);

    std::size_t team_count() const { return teams_.size(); }
    std::size_t outcome_count() const { return counts_.size(); }
    const std::vector<std::string>& teams() const { return teams_; }
    std::size_t team_index(const std::string& name) const;

    /// n^I_ij for outcome index k.
    int count(std::size_t k, std::size_t i, std::size_t j) const { return counts_[k](i, j); }
    const Eigen::MatrixXi& outcome_matrix(std::size_t k) const { return counts_[k]; }

    /// n_ij, total games between the ordered pair.
    int pair_games(std::size_t i, std::size_t j) const { return total_(i, j); }
    const Eigen::MatrixXi& pair_games() const { return total_; }
    int total_games() const;

    /// n^o, total number of tie/overtime games.
    double overtime_games() const;

    /// p_k, total points for team k; and the maximum attainable.
    double points(std::size_t k) const;
    double max_points(std::size_t k) const;

    const OutcomeSystem& system() const { return system_; }

  private:
    CountsMatrix(OutcomeSystem system, std::vector<std::string> teams,
                 std::vector<Eigen::MatrixXi> counts);

    OutcomeSystem system_;
    std::vector<std::string> teams_;
    std::vector<Eigen::MatrixXi> counts_;  // one t x t matrix per outcome
    Eigen::MatrixXi total_;
};

}  // namespace btm
