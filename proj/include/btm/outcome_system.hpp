#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace btm {

/// One possible game outcome, seen from the first team's perspective.
/// p is the share of the points awarded for this outcome, o flags
/// overtime/tie outcomes, and opposite names the same result seen from
/// the other side.
struct OutcomeSpec {
    std::string label;
    double p = 0.0;
    int o = 0;
    std::string opposite;
};

/// A validated set of outcomes. The opposite pairing is an involution,
/// exponents lie in [0,1], paired outcomes satisfy p(-I) = 1 - p(I) and
/// o(-I) = o(I), and a self-opposite outcome must have p = 1/2.
class OutcomeSystem {
  public:
    /// Validates and builds a system; throws DuplicateLabel, MissingOpposite,
    /// BadExponent, BadPairing or SelfOppositeNotHalf on bad input.
    static OutcomeSystem create(std::vector<OutcomeSpec> outcomes, std::string name);

    static const OutcomeSystem& bradley_terry();
    static const OutcomeSystem& davidson();
    static const OutcomeSystem& four_outcome();

    const std::string& name() const { return name_; }
    std::size_t size() const { return outcomes_.size(); }
    const OutcomeSpec& outcome(std::size_t k) const { return outcomes_[k]; }
    const std::vector<OutcomeSpec>& outcomes() const { return outcomes_; }

    /// Index of outcome -I for outcome index k.
    std::size_t opposite_index(std::size_t k) const { return opposite_[k]; }

    /// Index of a label; throws UnknownOutcome if absent.
    std::size_t index_of(const std::string& label) const;
    bool has_label(const std::string& label) const;

    /// Number of outcomes with o = 1 (resp. o = 0).
    int overtime_outcomes() const { return m_o_; }
    int regulation_outcomes() const { return m_r_; }

    /// True when no outcome has o = 1; tau then drops out of the likelihood.
    bool tau_free() const { return m_o_ == 0; }

  private:
    OutcomeSystem() = default;

    std::vector<OutcomeSpec> outcomes_;
    std::vector<std::size_t> opposite_;
    std::string name_;
    int m_o_ = 0;
    int m_r_ = 0;
};

}  // namespace btm
