#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "btm/counts.hpp"
#include "btm/outcome_system.hpp"

namespace btm {

/// One game result, seen from team_i's perspective.
struct GameRecord {
    std::string team_i;
    std::string team_j;
    std::string outcome;
    std::optional<std::string> date;  // carried through, unused by inference
};

/// Parses a games CSV with header `team_i,team_j,outcome[,date]`.
/// Duplicate rows are distinct games. Throws BadHeader, SelfGame, EmptyFile.
std::vector<GameRecord> parse_games_csv(const std::string& text);

/// Accumulates records into a CountsMatrix, maintaining the mirror counts
/// n^{-I}_ji. Team order is first appearance unless an explicit list is given.
/// Throws UnknownOutcome for labels outside the system.
CountsMatrix aggregate(const std::vector<GameRecord>& records, const OutcomeSystem& system,
                       const std::vector<std::string>& teams = {});

/// Source-label to target-label mapping; must be total and commute with the
/// opposite involution.
using CollapseMap = std::map<std::string, std::string>;

/// Built-in maps for the four-outcome source system.
CollapseMap collapse_to_wl();   // RW,OW -> W; OL,RL -> L
CollapseMap collapse_to_wtl();  // RW -> W; OW,OL -> T; RL -> L

CountsMatrix collapse(const CountsMatrix& counts, const CollapseMap& map,
                      const OutcomeSystem& target);

/// Counts JSON: { "system": name or outcome list, "teams": [...],
/// "counts": { "<I>": [[t x t ints]] } }. Round-trip exact.
CountsMatrix load_counts_json(const std::string& text);
std::string save_counts_json(const CountsMatrix& counts);

/// Outcome-system JSON: [ { "label", "p", "o", "opposite" }, ... ].
OutcomeSystem load_system_json(const std::string& text, const std::string& name);

/// Resolves "bt", "davidson", "four-outcome" or an inline spec list.
OutcomeSystem system_by_name(const std::string& name);

}  // namespace btm
