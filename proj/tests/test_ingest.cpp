#include <doctest.h>

#include "btm/errors.hpp"
#include "btm/ingest.hpp"
#include "oracles.hpp"

using namespace btm;

TEST_CASE("games CSV parsing") {
    SUBCASE("one record with a date") {
        const auto records =
            parse_games_csv("team_i,team_j,outcome,date\nAyr,Brampton,RW,2021-02-26\n");
        REQUIRE(records.size() == 1);
        CHECK(records[0].team_i == "Ayr");
        CHECK(records[0].team_j == "Brampton");
        CHECK(records[0].outcome == "RW");
        REQUIRE(records[0].date.has_value());
        CHECK(*records[0].date == "2021-02-26");
    }

    SUBCASE("date column is optional and fields are trimmed") {
        const auto records = parse_games_csv("team_i,team_j,outcome\n Ayr , Brampton , W \n");
        REQUIRE(records.size() == 1);
        CHECK(records[0].team_i == "Ayr");
        CHECK(records[0].outcome == "W");
        CHECK_FALSE(records[0].date.has_value());
    }

    SUBCASE("rejects bad input") {
        CHECK_THROWS_AS(parse_games_csv("home,away,outcome\nA,B,W\n"), BadHeader);
        CHECK_THROWS_AS(parse_games_csv("team_i,team_j,outcome\nA,A,W\n"), SelfGame);
        CHECK_THROWS_AS(parse_games_csv(""), EmptyFile);
    }

    SUBCASE("header-only file parses to zero records") {
        CHECK(parse_games_csv("team_i,team_j,outcome\n").empty());
    }
}

TEST_CASE("aggregation reproduces the season count matrices") {
    const auto records =
        parse_games_csv(oracles::read_file(oracles::data_path("ecac_2021_games.csv")));
    const CountsMatrix counts = aggregate(records, OutcomeSystem::four_outcome());

    REQUIRE(counts.team_count() == 4);
    CHECK(counts.teams()[0] == "Colgate");
    CHECK(counts.teams()[1] == "Clarkson");
    CHECK(counts.teams()[2] == "Quinnipiac");
    CHECK(counts.teams()[3] == "St. Lawrence");

    const std::size_t rw = counts.system().index_of("RW");
    const std::size_t ow = counts.system().index_of("OW");
    CHECK(counts.count(rw, 0, 1) == 1);
    CHECK(counts.count(ow, 0, 1) == 1);
    CHECK(counts.count(rw, 1, 0) == 3);
    CHECK(counts.count(ow, 1, 0) == 1);

    // Colgate row: 4 regulation wins, 2 overtime wins, 3 overtime losses,
    // 9 regulation losses
    CHECK(counts.outcome_matrix(rw).row(0).sum() == 4);
    CHECK(counts.outcome_matrix(ow).row(0).sum() == 2);
    CHECK(counts.outcome_matrix(counts.system().index_of("OL")).row(0).sum() == 3);
    CHECK(counts.outcome_matrix(counts.system().index_of("RL")).row(0).sum() == 9);

    // matches the JSON fixture exactly
    const CountsMatrix json =
        load_counts_json(oracles::read_file(oracles::data_path("ecac_2021_counts.json")));
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(counts.outcome_matrix(k) == json.outcome_matrix(k));
    }
}

TEST_CASE("aggregation details") {
    SUBCASE("empty record list with explicit teams") {
        const CountsMatrix counts =
            aggregate({}, OutcomeSystem::bradley_terry(), {"a", "b"});
        CHECK(counts.total_games() == 0);
        CHECK(counts.team_count() == 2);
    }

    SUBCASE("unknown outcome label names the row") {
        const std::vector<GameRecord> records = {{"a", "b", "W", {}}, {"a", "b", "X", {}}};
        CHECK_THROWS_AS(aggregate(records, OutcomeSystem::bradley_terry()), UnknownOutcome);
    }

    SUBCASE("explicit team list controls order and catches strangers") {
        const std::vector<GameRecord> records = {{"b", "a", "W", {}}};
        const CountsMatrix counts =
            aggregate(records, OutcomeSystem::bradley_terry(), {"a", "b"});
        CHECK(counts.count(0, 1, 0) == 1);
        CHECK(counts.count(1, 0, 1) == 1);
        CHECK_THROWS_AS(aggregate(records, OutcomeSystem::bradley_terry(), {"a", "c"}),
                        UnknownTeam);
    }
}

TEST_CASE("collapsing outcome systems") {
    const CountsMatrix four =
        load_counts_json(oracles::read_file(oracles::data_path("ecac_2021_counts.json")));

    SUBCASE("wins/losses") {
        const CountsMatrix wl =
            collapse(four, collapse_to_wl(), OutcomeSystem::bradley_terry());
        CHECK(wl.outcome_matrix(0).row(0).sum() == 6);   // Colgate wins
        CHECK(wl.outcome_matrix(1).row(0).sum() == 12);  // Colgate losses
        CHECK(wl.pair_games() == four.pair_games());
        CHECK(wl.total_games() == four.total_games());
    }

    SUBCASE("wins/ties/losses") {
        const CountsMatrix wtl = collapse(four, collapse_to_wtl(), OutcomeSystem::davidson());
        CHECK(wtl.outcome_matrix(0).row(0).sum() == 4);
        CHECK(wtl.outcome_matrix(wtl.system().index_of("T")).row(0).sum() == 5);
        CHECK(wtl.outcome_matrix(wtl.system().index_of("L")).row(0).sum() == 9);
        CHECK(wtl.pair_games() == four.pair_games());
    }

    SUBCASE("identity map") {
        CollapseMap identity;
        for (std::size_t k = 0; k < 4; ++k) {
            identity[four.system().outcome(k).label] = four.system().outcome(k).label;
        }
        const CountsMatrix same = collapse(four, identity, OutcomeSystem::four_outcome());
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK(same.outcome_matrix(k) == four.outcome_matrix(k));
        }
    }

    SUBCASE("rejects partial or opposite-breaking maps") {
        CollapseMap partial = collapse_to_wl();
        partial.erase("OL");
        CHECK_THROWS_AS(collapse(four, partial, OutcomeSystem::bradley_terry()),
                        IncompatibleMap);

        // maps RW -> W but its opposite RL -> W too, breaking the involution
        CollapseMap broken = {{"RW", "W"}, {"OW", "W"}, {"OL", "L"}, {"RL", "W"}};
        CHECK_THROWS_AS(collapse(four, broken, OutcomeSystem::bradley_terry()),
                        IncompatibleMap);

        // maps to a label the target system does not have
        CollapseMap stray = {{"RW", "W"}, {"OW", "T"}, {"OL", "T"}, {"RL", "L"}};
        CHECK_THROWS_AS(collapse(four, stray, OutcomeSystem::bradley_terry()),
                        IncompatibleMap);
    }
}

TEST_CASE("counts JSON round trip") {
    const std::string text = oracles::read_file(oracles::data_path("ecac_2021_counts.json"));
    const CountsMatrix counts = load_counts_json(text);
    const CountsMatrix again = load_counts_json(save_counts_json(counts));
    CHECK(again.teams() == counts.teams());
    REQUIRE(again.outcome_count() == counts.outcome_count());
    for (std::size_t k = 0; k < counts.outcome_count(); ++k) {
        CHECK(again.outcome_matrix(k) == counts.outcome_matrix(k));
    }

    // inline system specs survive the round trip too
    const OutcomeSystem ccha = OutcomeSystem::create({{"W", 1.0, 0, "L"},
                                                      {"SW", 0.6, 1, "SL"},
                                                      {"SL", 0.4, 1, "SW"},
                                                      {"L", 0.0, 0, "W"}},
                                                     "ccha");
    const CountsMatrix custom = CountsMatrix::zero(ccha, {"x", "y"});
    const CountsMatrix custom_again = load_counts_json(save_counts_json(custom));
    CHECK(custom_again.system().size() == 4);
    CHECK(custom_again.system().outcome(1).p == 0.6);
}

TEST_CASE("invalid counts are rejected") {
    const auto& bt = OutcomeSystem::bradley_terry();

    SUBCASE("mirror inconsistency") {
        CHECK_THROWS_AS(
            CountsMatrix::create(bt, {"a", "b"},
                                 {(Eigen::MatrixXi(2, 2) << 0, 2, 1, 0).finished(),
                                  (Eigen::MatrixXi(2, 2) << 0, 1, 1, 0).finished()}),
            InconsistentMirror);
    }

    SUBCASE("negative and diagonal entries") {
        CHECK_THROWS_AS(
            CountsMatrix::create(bt, {"a", "b"},
                                 {(Eigen::MatrixXi(2, 2) << 0, -1, 0, 0).finished(),
                                  (Eigen::MatrixXi(2, 2) << 0, 0, -1, 0).finished()}),
            SchemaError);
        CHECK_THROWS_AS(
            CountsMatrix::create(bt, {"a", "b"},
                                 {(Eigen::MatrixXi(2, 2) << 1, 0, 0, 0).finished(),
                                  (Eigen::MatrixXi(2, 2) << 1, 0, 0, 0).finished()}),
            SchemaError);
    }

    SUBCASE("system names") {
        CHECK(system_by_name("bt").size() == 2);
        CHECK(system_by_name("davidson").size() == 3);
        CHECK(system_by_name("four-outcome").size() == 4);
        CHECK_THROWS_AS(system_by_name("elo"), SchemaError);
    }
}
