#include "btm/outcome_system.hpp"

#include <cmath>
#include <unordered_map>

#include "btm/errors.hpp"

namespace btm {

OutcomeSystem OutcomeSystem::create(std::vector<OutcomeSpec> outcomes, std::string name) {
    if (outcomes.size() < 2) {
        throw MissingOpposite("outcome system needs at least two outcomes");
    }

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        const auto& out = outcomes[k];
        if (!index.emplace(out.label, k).second) {
            throw DuplicateLabel("duplicate outcome label: " + out.label);
        }
        if (!(out.p >= 0.0 && out.p <= 1.0)) {
            throw BadExponent("outcome " + out.label + ": p must be in [0,1]");
        }
        if (out.o != 0 && out.o != 1) {
            throw BadExponent("outcome " + out.label + ": o must be 0 or 1");
        }
    }

    std::vector<std::size_t> opposite(outcomes.size());
    bool has_full_win = false;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        const auto& out = outcomes[k];
        auto it = index.find(out.opposite);
        if (it == index.end()) {
            throw MissingOpposite("outcome " + out.label + ": opposite '" + out.opposite +
                                  "' not in system");
        }
        const std::size_t opp = it->second;
        const auto& other = outcomes[opp];
        if (opp == k) {
            if (std::abs(out.p - 0.5) > 1e-12) {
                throw SelfOppositeNotHalf("self-opposite outcome " + out.label +
                                          " must have p = 1/2");
            }
        } else {
            if (std::abs(other.p - (1.0 - out.p)) > 1e-12) {
                throw BadPairing("outcomes " + out.label + "/" + other.label +
                                 ": p(-I) != 1 - p(I)");
            }
            if (other.o != out.o) {
                throw BadPairing("outcomes " + out.label + "/" + other.label +
                                 ": o(-I) != o(I)");
            }
            if (other.opposite != out.label) {
                throw BadPairing("outcome pairing is not an involution at " + out.label);
            }
        }
        opposite[k] = opp;
        if (out.p == 1.0 && outcomes[opp].p == 0.0) has_full_win = true;
    }
    if (!has_full_win) {
        throw BadPairing("system must contain a full win (p = 1) and its loss");
    }

    OutcomeSystem sys;
    sys.outcomes_ = std::move(outcomes);
    sys.opposite_ = std::move(opposite);
    sys.name_ = std::move(name);
    for (const auto& out : sys.outcomes_) {
        (out.o == 1 ? sys.m_o_ : sys.m_r_) += 1;
    }
    return sys;
}

const OutcomeSystem& OutcomeSystem::bradley_terry() {
    static const OutcomeSystem sys = create(
        {{"W", 1.0, 0, "L"}, {"L", 0.0, 0, "W"}}, "bt");
    return sys;
}

const OutcomeSystem& OutcomeSystem::davidson() {
    static const OutcomeSystem sys = create(
        {{"W", 1.0, 0, "L"}, {"T", 0.5, 1, "T"}, {"L", 0.0, 0, "W"}}, "davidson");
    return sys;
}

const OutcomeSystem& OutcomeSystem::four_outcome() {
    static const OutcomeSystem sys = create({{"RW", 1.0, 0, "RL"},
                                             {"OW", 2.0 / 3.0, 1, "OL"},
                                             {"OL", 1.0 / 3.0, 1, "OW"},
                                             {"RL", 0.0, 0, "RW"}},
                                            "four-outcome");
    return sys;
}

std::size_t OutcomeSystem::index_of(const std::string& label) const {
    for (std::size_t k = 0; k < outcomes_.size(); ++k) {
        if (outcomes_[k].label == label) return k;
    }
    throw UnknownOutcome("unknown outcome label: " + label);
}

bool OutcomeSystem::has_label(const std::string& label) const {
    for (const auto& out : outcomes_) {
        if (out.label == label) return true;
    }
    return false;
}

}  // namespace btm
