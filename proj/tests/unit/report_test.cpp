#include "survbias/error.hpp"
#include "survbias/report.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>

using namespace survbias;
using json = nlohmann::json;

TEST(Report, TimelinesRoundTrip) {
    Date a(2020, 3, 31), b(2020, 6, 30), c(2020, 9, 30);
    std::vector<universe::MembershipTimeline> t(2);
    t[0] = {"AAA", a, c, {a, c}, universe::RemovalClass::Graduated, Date(2021, 1, 4)};
    t[1] = {"BBB", b, b, {b}, universe::RemovalClass::Delisted, std::nullopt};
    auto text = report::timelines_to_json(t);
    auto j = json::parse(text);
    ASSERT_TRUE(j.is_array());
    EXPECT_EQ(j[0]["symbol"], "AAA");
    EXPECT_EQ(j[0]["entry"], "2020-03-31");
    EXPECT_EQ(j[0]["exit"], "2020-09-30");
    EXPECT_EQ(j[0]["snapshots"].size(), 2u);
    EXPECT_EQ(j[0]["classification"], "Graduated");
    EXPECT_TRUE(j[1]["last_trade"].is_null());
    auto back = report::timelines_from_json(text);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].member_dates, t[0].member_dates);
    EXPECT_EQ(back[0].classification, t[0].classification);
    EXPECT_EQ(back[0].last_trade, t[0].last_trade);
    EXPECT_EQ(back[1].last_trade, std::nullopt);
    EXPECT_EQ(report::timelines_to_json(back), text);
}

TEST(Report, CsvHeaders) {
    universe::SnapshotRanking r{Date(2020, 3, 31), {{"B", 9.5}, {"A", 5}}};
    EXPECT_EQ(report::ranking_csv(r), "RANK,SYMBOL,PROXY\n1,B,9.5\n2,A,5\n");
    portfolio::ReturnSeries s{{Date(2020, 1, 2)}, {0.25}, {3}};
    EXPECT_EQ(report::series_csv(s), "DATE,RETURN,N_ACTIVE\n2020-01-02,0.25,3\n");
    std::vector<universe::ConstituentSnapshot> snaps = {{Date(2020, 3, 31), {"A", "B"}}, {Date(2020, 6, 30), {"B", "C"}}};
    EXPECT_EQ(report::snapshots_csv(snaps), "DATE,SYMBOL\n2020-03-31,A\n2020-03-31,B\n2020-06-30,B\n2020-06-30,C\n");
    EXPECT_EQ(report::membership_csv(snaps), "DATE,MEMBERS,ENTRANTS,EXITS\n2020-03-31,2,2,0\n2020-06-30,2,1,1\n");
}

TEST(Report, DecompositionCsv) {
    std::vector<bias::DecompositionRow> rows = {{universe::RemovalClass::Delisted, 2, 50.0, -0.1},
                                                {universe::RemovalClass::Survivor, 3, std::nullopt, std::nullopt}};
    EXPECT_EQ(report::decomposition_csv(rows), "CATEGORY,COUNT,PCT_REMOVED,MEAN_RETURN\nDelisted,2,50,-0.1\nSurvivor,3,,\n");
}

TEST(Report, MetricsJsonNullSharpe) {
    metrics::PerfMetrics m;
    m.sharpe = std::nan("");
    m.n_days = 4;
    auto j = json::parse(report::metrics_to_json(m));
    for (auto k : {"cumulative", "annual", "sharpe", "max_drawdown", "volatility", "n_days"}) EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_TRUE(j["sharpe"].is_null());
    EXPECT_EQ(j["n_days"], 4);
}

TEST(Report, CumulativeAndRollingCsv) {
    portfolio::ReturnSeries a{{Date(2020, 1, 2), Date(2020, 1, 3)}, {0.1, 0.1}, {1, 1}};
    auto b = a;
    b.returns = {0.0, -0.5};
    auto cum = report::cumulative_csv(a, b);
    EXPECT_EQ(cum.substr(0, cum.find('\n')), "DATE,SURVIVOR,COMPLETE");
    EXPECT_NE(cum.find("2020-01-03,1.21"), std::string::npos);
    b.dates[1] = Date(2020, 1, 6);
    EXPECT_THROW(report::cumulative_csv(a, b), Error);
    auto roll = report::rolling_sharpe_csv(a, a, 5);
    EXPECT_EQ(roll, "DATE,SURVIVOR,COMPLETE\n");
}

TEST(Report, ScenarioFileParsing) {
    auto s = report::scenarios_from_json(R"([{"label": "x", "band": [101, 350], "frequency": "semiannual",
        "weighting": "value", "clip": [-0.5, 1.0], "aggregation": "buy_and_hold", "delist_terminal": -0.75,
        "subperiod": ["2017-01-01", "2017-12-31"]}])");
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].label, "x");
    EXPECT_EQ(s[0].band, (universe::RankBand{101, 350}));
    EXPECT_EQ(s[0].frequency, universe::Frequency::SemiAnnual);
    EXPECT_EQ(s[0].weighting.kind, portfolio::WeightKind::ValueWeight);
    ASSERT_TRUE(s[0].weighting.clip);
    EXPECT_EQ(s[0].weighting.clip->upper, 1.0);
    EXPECT_EQ(s[0].aggregation, portfolio::Aggregation::BuyAndHold);
    EXPECT_EQ(s[0].delist_terminal_return, -0.75);
    ASSERT_TRUE(s[0].subperiod);
    EXPECT_EQ(s[0].subperiod->end, Date(2017, 12, 31));

    auto again = report::scenarios_from_json(report::scenarios_to_json(s));
    EXPECT_EQ(report::scenarios_to_json(again), report::scenarios_to_json(s));

    auto wrapped = report::scenarios_from_json(R"({"scenarios": [{"label": "a"}, {"label": "b", "clip": null}]})");
    EXPECT_EQ(wrapped.size(), 2u);
    EXPECT_EQ(wrapped[0].band, universe::RankBand{});

    for (auto bad : {"[]", R"({"scenarios": []})", R"([{"label": "a", "colour": 1}])",
                     R"([{"label": "a"}, {"label": "a"}])", R"([{"label": "a", "delist_terminal": -2}])",
                     R"([{"label": "a", "band": [10, 5]}])", "not json"}) {
        try {
            report::scenarios_from_json(bad);
            ADD_FAILURE() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidConfig) << bad;
        }
    }
}

TEST(Report, ShippedScenarioFileMatchesBuiltInSweep) {
    auto path = std::filesystem::path(SURVBIAS_SOURCE_DIR) / "config" / "default_scenarios.json";
    auto file = report::scenarios_from_json(report::read_text(path));
    auto built_in = robustness::default_sweep();
    EXPECT_EQ(report::scenarios_to_json(file), report::scenarios_to_json(built_in));
}

TEST(Report, WriteTextCreatesParents) {
    tsupport::TempDir dir;
    auto p = dir / "a/b/c.txt";
    report::write_text(p, "hello");
    EXPECT_EQ(report::read_text(p), "hello");
    EXPECT_THROW(report::read_text(dir / "missing"), Error);
}
