#include "btm/counts.hpp"

#include <utility>

#include "btm/errors.hpp"

namespace btm {

CountsMatrix::CountsMatrix(OutcomeSystem system, std::vector<std::string> teams,
                           std::vector<Eigen::MatrixXi> counts)
    : system_(std::move(system)), teams_(std::move(teams)), counts_(std::move(counts)) {
    const auto t = static_cast<Eigen::Index>(teams_.size());
    total_ = Eigen::MatrixXi::Zero(t, t);
    for (const auto& m : counts_) total_ += m;
}

CountsMatrix CountsMatrix::create(const OutcomeSystem& system, std::vector<std::string> teams,
                                  std::vector<Eigen::MatrixXi> counts) {
    const auto t = static_cast<Eigen::Index>(teams.size());
    if (counts.size() != system.size()) {
        throw SchemaError("count matrices do not match the outcome system");
    }
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const auto& m = counts[k];
        if (m.rows() != t || m.cols() != t) {
            throw SchemaError("count matrix for " + system.outcome(k).label +
                              " is not t x t");
        }
        if ((m.array() < 0).any()) {
            throw SchemaError("negative count for outcome " + system.outcome(k).label);
        }
        for (Eigen::Index i = 0; i < t; ++i) {
            if (m(i, i) != 0) {
                throw SchemaError("nonzero diagonal count for outcome " +
                                  system.outcome(k).label);
            }
        }
    }
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const auto opp = system.opposite_index(k);
        if (counts[k] != counts[opp].transpose()) {
            throw InconsistentMirror("n^" + system.outcome(k).label +
                                     "_ij != n^" + system.outcome(opp).label + "_ji");
        }
    }
    return CountsMatrix(system, std::move(teams), std::move(counts));
}

CountsMatrix CountsMatrix::zero(const OutcomeSystem& system, std::vector<std::string> teams) {
    const auto t = static_cast<Eigen::Index>(teams.size());
    std::vector<Eigen::MatrixXi> counts(system.size(), Eigen::MatrixXi::Zero(t, t));
    return CountsMatrix(system, std::move(teams), std::move(counts));
}

std::size_t CountsMatrix::team_index(const std::string& name) const {
    for (std::size_t i = 0; i < teams_.size(); ++i) {
        if (teams_[i] == name) return i;
    }
    throw UnknownTeam("unknown team: " + name);
}

int CountsMatrix::total_games() const { return total_.sum() / 2; }

double CountsMatrix::overtime_games() const {
    double n = 0.0;
    for (std::size_t k = 0; k < counts_.size(); ++k) {
        if (system_.outcome(k).o == 1) n += counts_[k].sum();
    }
    return 0.5 * n;
}

double CountsMatrix::points(std::size_t k) const {
    double p = 0.0;
    for (std::size_t c = 0; c < counts_.size(); ++c) {
        p += system_.outcome(c).p * counts_[c].row(static_cast<Eigen::Index>(k)).sum();
    }
    return p;
}

double CountsMatrix::max_points(std::size_t k) const {
    return total_.row(static_cast<Eigen::Index>(k)).sum();
}

}  // namespace btm
