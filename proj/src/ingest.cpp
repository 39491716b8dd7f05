#include "btm/ingest.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "btm/errors.hpp"

namespace btm {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace

std::vector<GameRecord> parse_games_csv(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    bool header_seen = false;
    bool has_date = false;
    std::vector<GameRecord> records;
    int row = 0;
    while (std::getline(ss, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (!header_seen) {
            if (fields.size() < 3 || fields[0] != "team_i" || fields[1] != "team_j" ||
                fields[2] != "outcome" || (fields.size() == 4 && fields[3] != "date") ||
                fields.size() > 4) {
                throw BadHeader("expected header team_i,team_j,outcome[,date]");
            }
            has_date = fields.size() == 4;
            header_seen = true;
            continue;
        }
        if (fields.size() < 3) {
            throw SchemaError("row " + std::to_string(row) + ": too few fields");
        }
        GameRecord rec;
        rec.team_i = fields[0];
        rec.team_j = fields[1];
        rec.outcome = fields[2];
        if (has_date && fields.size() >= 4 && !fields[3].empty()) rec.date = fields[3];
        if (rec.team_i == rec.team_j) {
            throw SelfGame("row " + std::to_string(row) + ": team plays itself (" +
                           rec.team_i + ")");
        }
        records.push_back(std::move(rec));
    }
    if (!header_seen) throw EmptyFile("no header row");
    return records;
}

CountsMatrix aggregate(const std::vector<GameRecord>& records, const OutcomeSystem& system,
                       const std::vector<std::string>& teams) {
    std::vector<std::string> order = teams;
    if (order.empty()) {
        for (const auto& rec : records) {
            if (std::find(order.begin(), order.end(), rec.team_i) == order.end()) {
                order.push_back(rec.team_i);
            }
            if (std::find(order.begin(), order.end(), rec.team_j) == order.end()) {
                order.push_back(rec.team_j);
            }
        }
    }
    const auto t = static_cast<Eigen::Index>(order.size());
    std::vector<Eigen::MatrixXi> counts(system.size(), Eigen::MatrixXi::Zero(t, t));
    int row = 0;
    for (const auto& rec : records) {
        ++row;
        if (!system.has_label(rec.outcome)) {
            throw UnknownOutcome("row " + std::to_string(row) + ": outcome '" +
                                 rec.outcome + "' not in system " + system.name());
        }
        const auto it_i = std::find(order.begin(), order.end(), rec.team_i);
        const auto it_j = std::find(order.begin(), order.end(), rec.team_j);
        if (it_i == order.end() || it_j == order.end()) {
            throw UnknownTeam("row " + std::to_string(row) + ": team not in explicit list");
        }
        const auto i = static_cast<Eigen::Index>(it_i - order.begin());
        const auto j = static_cast<Eigen::Index>(it_j - order.begin());
        const std::size_t k = system.index_of(rec.outcome);
        counts[k](i, j) += 1;
        counts[system.opposite_index(k)](j, i) += 1;
    }
    return CountsMatrix::create(system, std::move(order), std::move(counts));
}

CollapseMap collapse_to_wl() {
    return {{"RW", "W"}, {"OW", "W"}, {"OL", "L"}, {"RL", "L"}};
}

CollapseMap collapse_to_wtl() {
    return {{"RW", "W"}, {"OW", "T"}, {"OL", "T"}, {"RL", "L"}};
}

CountsMatrix collapse(const CountsMatrix& counts, const CollapseMap& map,
                      const OutcomeSystem& target) {
    const OutcomeSystem& source = counts.system();
    for (std::size_t k = 0; k < source.size(); ++k) {
        const auto& label = source.outcome(k).label;
        const auto it = map.find(label);
        if (it == map.end()) {
            throw IncompatibleMap("source outcome " + label + " is unmapped");
        }
        if (!target.has_label(it->second)) {
            throw IncompatibleMap("target outcome " + it->second + " not in system " +
                                  target.name());
        }
        // The map must commute with the opposite involution.
        const auto& opp_src = source.outcome(source.opposite_index(k)).label;
        const auto& mapped = target.outcome(target.index_of(it->second));
        const auto& mapped_opp = target.outcome(target.opposite_index(
            target.index_of(it->second)));
        const auto it_opp = map.find(opp_src);
        if (it_opp == map.end() || it_opp->second != mapped_opp.label) {
            throw IncompatibleMap("map does not commute with opposites at " + label);
        }
        (void)mapped;
    }

    const auto t = static_cast<Eigen::Index>(counts.team_count());
    std::vector<Eigen::MatrixXi> out(target.size(), Eigen::MatrixXi::Zero(t, t));
    for (std::size_t k = 0; k < source.size(); ++k) {
        const std::size_t tk = target.index_of(map.at(source.outcome(k).label));
        out[tk] += counts.outcome_matrix(k);
    }
    return CountsMatrix::create(target, counts.teams(), std::move(out));
}

namespace {

using nlohmann::json;

OutcomeSystem system_from_json(const json& j, const std::string& fallback_name) {
    if (j.is_string()) return system_by_name(j.get<std::string>());
    if (!j.is_array()) throw SchemaError("'system' must be a name or an outcome list");
    std::vector<OutcomeSpec> specs;
    for (const auto& item : j) {
        OutcomeSpec spec;
        spec.label = item.at("label").get<std::string>();
        spec.p = item.at("p").get<double>();
        spec.o = item.at("o").get<int>();
        spec.opposite = item.at("opposite").get<std::string>();
        specs.push_back(std::move(spec));
    }
    return OutcomeSystem::create(std::move(specs), fallback_name);
}

}  // namespace

CountsMatrix load_counts_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    try {
        const OutcomeSystem system = system_from_json(j.at("system"), "custom");
        std::vector<std::string> teams = j.at("teams").get<std::vector<std::string>>();
        const auto t = static_cast<Eigen::Index>(teams.size());
        std::vector<Eigen::MatrixXi> counts;
        const auto& jc = j.at("counts");
        for (std::size_t k = 0; k < system.size(); ++k) {
            const auto& label = system.outcome(k).label;
            if (!jc.contains(label)) {
                throw SchemaError("missing counts for outcome " + label);
            }
            Eigen::MatrixXi m(t, t);
            const auto& rows = jc.at(label);
            if (rows.size() != teams.size()) throw SchemaError("bad row count for " + label);
            for (Eigen::Index i = 0; i < t; ++i) {
                const auto& jrow = rows.at(static_cast<std::size_t>(i));
                if (jrow.size() != teams.size()) {
                    throw SchemaError("bad column count for " + label);
                }
                for (Eigen::Index col = 0; col < t; ++col) {
                    m(i, col) = jrow.at(static_cast<std::size_t>(col)).get<int>();
                }
            }
            counts.push_back(std::move(m));
        }
        return CountsMatrix::create(system, std::move(teams), std::move(counts));
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad counts schema: ") + e.what());
    }
}

std::string save_counts_json(const CountsMatrix& counts) {
    json j;
    const OutcomeSystem& system = counts.system();
    if (system.name() == "bt" || system.name() == "davidson" ||
        system.name() == "four-outcome") {
        j["system"] = system.name();
    } else {
        json specs = json::array();
        for (const auto& out : system.outcomes()) {
            specs.push_back({{"label", out.label},
                             {"p", out.p},
                             {"o", out.o},
                             {"opposite", out.opposite}});
        }
        j["system"] = specs;
    }
    j["teams"] = counts.teams();
    json jc = json::object();
    const auto t = static_cast<Eigen::Index>(counts.team_count());
    for (std::size_t k = 0; k < system.size(); ++k) {
        json rows = json::array();
        for (Eigen::Index i = 0; i < t; ++i) {
            json row = json::array();
            for (Eigen::Index col = 0; col < t; ++col) {
                row.push_back(counts.outcome_matrix(k)(i, col));
            }
            rows.push_back(std::move(row));
        }
        jc[system.outcome(k).label] = std::move(rows);
    }
    j["counts"] = std::move(jc);
    return j.dump(2) + "\n";
}

OutcomeSystem load_system_json(const std::string& text, const std::string& name) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    return system_from_json(j, name);
}

OutcomeSystem system_by_name(const std::string& name) {
    if (name == "bt") return OutcomeSystem::bradley_terry();
    if (name == "davidson") return OutcomeSystem::davidson();
    if (name == "four-outcome") return OutcomeSystem::four_outcome();
    throw SchemaError("unknown system name: " + name);
}

}  // namespace btm
