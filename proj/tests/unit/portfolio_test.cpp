#include "survbias/error.hpp"
#include "survbias/portfolio.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace survbias;
using namespace survbias::portfolio;
using survbias::tsupport::rec;

namespace {

// Random walks for `n` symbols over `days` weekdays; symbol k trades from
// day begin[k] to end[k] inclusive when provided.
struct Market {
    std::vector<Date> days;
    RecordStore store;
    std::vector<std::vector<double>> close;  // [symbol][day], NaN when absent
};

Market random_market(std::size_t n, std::size_t days, std::uint64_t seed, double gap_prob = 0.0) {
    Market m;
    m.days = tsupport::weekdays(Date(2021, 1, 4), days);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0, 0.02);
    std::uniform_real_distribution<double> u(0, 1);
    std::uniform_real_distribution<double> vol(1e3, 1e5);
    std::vector<ingest::TradingRecord> recs;
    m.close.assign(n, std::vector<double>(days, std::nan("")));
    for (std::size_t k = 0; k < n; ++k) {
        double p = 100;
        for (std::size_t d = 0; d < days; ++d) {
            p *= std::exp(z(rng));
            if (d > 0 && u(rng) < gap_prob) continue;
            m.close[k][d] = p;
            recs.push_back(rec(m.days[d], "S" + std::to_string(k), p, std::round(vol(rng))));
        }
    }
    m.store = tsupport::store_of(recs);
    return m;
}

std::vector<SymbolId> all_ids(const RecordStore& s) {
    std::vector<SymbolId> ids(s.symbol_count());
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
}

}  // namespace

TEST(StockReturn, Examples) {
    EXPECT_NEAR(stock_daily_return(110, 100), 0.10, 1e-15);
    EXPECT_EQ(stock_daily_return(100, 100), 0.0);
    EXPECT_EQ(stock_daily_return(50, 100), -0.5);
}

TEST(Aggregate, Examples) {
    std::vector<Contribution> sym = {{0.10, 1}, {-0.10, 1}};
    EXPECT_NEAR(aggregate(sym), 0.0, 1e-17);
    std::vector<Contribution> vw = {{0.10, 0.75}, {-0.10, 0.25}};
    EXPECT_NEAR(aggregate(vw), 0.05, 1e-15);
    std::vector<Contribution> zero = {{0.10, 0}, {0.30, 0}};
    EXPECT_NEAR(aggregate(zero), 0.20, 1e-15);
    EXPECT_EQ(aggregate({}), 0.0);
}

TEST(PortfolioReturn, EqualAndValueWeightOnStore) {
    auto days = tsupport::weekdays(Date(2021, 1, 4), 2);
    // Prior-day proxies 300 and 100 give weights 0.75 and 0.25.
    auto store = tsupport::store_of({rec(days[0], "A", 100, 3), rec(days[0], "B", 100, 1), rec(days[1], "A", 110, 1),
                                    rec(days[1], "B", 90, 100)});
    auto u = UniverseSpec::survivor_only(all_ids(store), {});
    auto ew = portfolio_return(1, u, {}, store);
    EXPECT_NEAR(ew.ret, 0.0, 1e-15);
    EXPECT_EQ(ew.n_active, 2);
    auto vw = portfolio_return(1, u, {WeightKind::ValueWeight, std::nullopt}, store);
    EXPECT_NEAR(vw.ret, 0.05, 1e-15);
}

TEST(PortfolioReturn, ClipCapsContribution) {
    auto days = tsupport::weekdays(Date(2021, 1, 4), 2);
    auto store = tsupport::store_of({rec(days[0], "A", 10), rec(days[1], "A", 40)});
    auto u = UniverseSpec::survivor_only(all_ids(store), {});
    EXPECT_NEAR(portfolio_return(1, u, {}, store).ret, 3.0, 1e-15);
    WeightScheme clipped{WeightKind::EqualWeight, ClipBounds{-0.5, 1.0}};
    EXPECT_EQ(portfolio_return(1, u, clipped, store).ret, 1.0);
}

TEST(PortfolioReturn, MissingPriceExcludedAndDegenerateFlagged) {
    auto days = tsupport::weekdays(Date(2021, 1, 4), 4);
    auto store = tsupport::store_of({rec(days[0], "A", 10), rec(days[1], "A", 11), rec(days[3], "A", 12),
                                    rec(days[0], "B", 10), rec(days[1], "B", 12), rec(days[2], "B", 12),
                                    rec(days[3], "B", 15)});
    auto u = UniverseSpec::survivor_only(std::vector<SymbolId>{*store.find_symbol("A")}, {});
    auto s = build_series(u, {}, days[0], days[3], store);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.n_active, (std::vector<int>{1, 0, 0}));
    // Day 3 has A but not on day 2: no return from a stale price.
    EXPECT_EQ(s.returns[2], 0.0);
    EXPECT_EQ(s.degenerate_dates(), (std::vector<Date>{days[2], days[3]}));
}

TEST(BuildSeries, SingleStockEqualsItsReturns) {
    auto m = random_market(1, 50, 1);
    auto u = UniverseSpec::survivor_only(all_ids(m.store), {});
    auto s = build_series(u, {}, m.days.front(), m.days.back(), m.store);
    ASSERT_EQ(s.size(), 49u);
    for (std::size_t d = 1; d < 50; ++d) {
        EXPECT_EQ(s.dates[d - 1], m.days[d]);
        EXPECT_EQ(s.returns[d - 1], stock_daily_return(m.close[0][d], m.close[0][d - 1]));
    }
}

TEST(BuildSeries, EmptyWindowThrows) {
    auto m = random_market(1, 5, 1);
    auto u = UniverseSpec::survivor_only(all_ids(m.store), {});
    try {
        build_series(u, {}, m.days[4], m.days[4], m.store);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyWindow);
    }
    EXPECT_THROW(build_series(u, {}, m.days[4].plus_days(10), m.days[4].plus_days(20), m.store), Error);
}

TEST(BuildSeries, KIdenticalCopiesEqualOneStock) {
    auto days = tsupport::weekdays(Date(2021, 1, 4), 40);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z(0, 0.03);
    std::vector<ingest::TradingRecord> one, many;
    double p = 50;
    for (auto d : days) {
        p *= std::exp(z(rng));
        one.push_back(rec(d, "X", p));
        for (int k = 0; k < 7; ++k) many.push_back(rec(d, "X" + std::to_string(k), p));
    }
    auto s1 = tsupport::store_of(one), sk = tsupport::store_of(many);
    for (auto kind : {WeightKind::EqualWeight, WeightKind::ValueWeight}) {
        auto a = build_series(UniverseSpec::survivor_only(all_ids(s1), {}), {kind, std::nullopt}, days.front(),
                              days.back(), s1);
        auto b = build_series(UniverseSpec::survivor_only(all_ids(sk), {}), {kind, std::nullopt}, days.front(),
                              days.back(), sk);
        EXPECT_EQ(a.returns, b.returns);
    }
}

// Weights sum to 1: the aggregated return of a constant shift c added to
// every member return is shifted by exactly c (up to rounding), which only
// holds when the weights sum to one. Checked directly via aggregate().
TEST(BuildSeries, WeightsSumToOneProperty) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> r(-0.2, 0.2), w(0, 10);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<Contribution> parts(1 + trial % 9);
        for (auto& c : parts) c = {r(rng), w(rng)};
        double total = 0;
        for (auto& c : parts) total += c.weight;
        long double expect = 0;
        for (auto& c : parts) expect += static_cast<long double>(c.ret) * c.weight / total;
        EXPECT_NEAR(aggregate(parts), static_cast<double>(expect), 1e-12);
        auto ones = parts;
        for (auto& c : ones) c.ret = 1.0;
        EXPECT_NEAR(aggregate(ones), 1.0, 1e-12);
    }
}

TEST(BuildSeries, ClippedReturnsStayInBounds) {
    auto days = tsupport::weekdays(Date(2021, 1, 4), 60);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> jump(-0.9, 4.0);
    std::vector<ingest::TradingRecord> recs;
    for (int k = 0; k < 10; ++k) {
        double p = 10;
        for (auto d : days) {
            p *= 1 + jump(rng);
            recs.push_back(rec(d, "J" + std::to_string(k), p, 1 + k));
        }
    }
    auto store = tsupport::store_of(recs);
    auto u = UniverseSpec::survivor_only(all_ids(store), {});
    for (auto kind : {WeightKind::EqualWeight, WeightKind::ValueWeight})
        for (auto agg : {Aggregation::DailyRebalanced, Aggregation::BuyAndHold}) {
            WeightScheme ws{kind, ClipBounds{-0.5, 1.0}};
            auto s = build_series(u, ws, days.front(), days.back(), store, {agg, nullptr});
            for (double x : s.returns) {
                EXPECT_GE(x, -0.5);
                EXPECT_LE(x, 1.0);
            }
        }
}

TEST(BuildSeries, NoChurnSurvivorEqualsComplete) {
    auto m = random_market(20, 130, 6, 0.05);
    std::vector<DayIndex> snaps = {0, 60, 120};
    auto ids = all_ids(m.store);
    auto surv = UniverseSpec::survivor_only(ids, snaps);
    auto comp = UniverseSpec::complete(snaps, {ids, ids, ids});
    for (auto kind : {WeightKind::EqualWeight, WeightKind::ValueWeight})
        for (auto agg : {Aggregation::DailyRebalanced, Aggregation::BuyAndHold}) {
            auto a = build_series(surv, {kind, std::nullopt}, m.days.front(), m.days.back(), m.store, {agg, nullptr});
            auto b = build_series(comp, {kind, std::nullopt}, m.days.front(), m.days.back(), m.store, {agg, nullptr});
            EXPECT_EQ(a.returns, b.returns);
            EXPECT_EQ(a.n_active, b.n_active);
        }
}

TEST(UniverseSpec, MembershipAppliesFromDayAfterSnapshot) {
    auto u = UniverseSpec::complete({2, 5}, {{1}, {2, 3}});
    EXPECT_TRUE(u.members_at(2).empty());
    EXPECT_EQ(u.members_at(3).size(), 1u);
    EXPECT_EQ(u.members_at(5).size(), 1u);
    EXPECT_EQ(u.members_at(6).size(), 2u);
    EXPECT_EQ(u.members_at(100).size(), 2u);
    auto s = UniverseSpec::survivor_only({4, 4, 1}, {});
    EXPECT_EQ(s.members_at(0).size(), 2u);
    EXPECT_EQ(s.members_at(1000).size(), 2u);
    EXPECT_THROW(UniverseSpec::complete({5, 2}, {{1}, {2}}), Error);
}

TEST(BuildSeries, CompleteUniverseMatchesHandComputedMembership) {
    // Oracle: equal-weight mean over members in force, computed directly.
    auto m = random_market(6, 30, 12);
    std::vector<DayIndex> snaps = {0, 10, 20};
    std::vector<std::vector<SymbolId>> members = {{0, 1, 2}, {2, 3}, {1, 4, 5}};
    auto u = UniverseSpec::complete(snaps, members);
    auto s = build_series(u, {}, m.days.front(), m.days.back(), m.store);
    for (std::size_t d = 1; d < 30; ++d) {
        std::size_t q = d <= 10 ? 0 : d <= 20 ? 1 : 2;
        long double sum = 0;
        for (auto k : members[q]) sum += m.close[k][d] / m.close[k][d - 1] - 1.0L;
        EXPECT_NEAR(s.returns[d - 1], static_cast<double>(sum / members[q].size()), 1e-15);
        EXPECT_EQ(s.n_active[d - 1], static_cast<int>(members[q].size()));
    }
}

TEST(BuildSeries, BuyAndHoldMatchesHoldingOracle) {
    auto m = random_market(4, 25, 21);
    std::vector<DayIndex> snaps = {0, 12};
    auto ids = all_ids(m.store);
    auto u = UniverseSpec::survivor_only(ids, snaps);
    auto s = build_series(u, {}, m.days.front(), m.days.back(), m.store, {Aggregation::BuyAndHold, nullptr});
    std::vector<long double> h(4, 1.0L);
    for (std::size_t d = 1; d < 25; ++d) {
        if (d == 13) std::fill(h.begin(), h.end(), 1.0L);
        long double num = 0, den = 0;
        for (std::size_t k = 0; k < 4; ++k) {
            long double r = m.close[k][d] / m.close[k][d - 1] - 1.0L;
            num += h[k] * r;
            den += h[k];
            h[k] *= 1 + r;
        }
        EXPECT_NEAR(s.returns[d - 1], static_cast<double>(num / den), 1e-14) << d;
    }
}

TEST(BuildSeries, TerminalOverrideAppliesOnDayAfterLastTrade) {
    auto days = tsupport::weekdays(Date(2021, 1, 4), 4);
    auto store = tsupport::store_of({rec(days[0], "A", 10), rec(days[1], "A", 10), rec(days[0], "B", 10),
                                    rec(days[1], "B", 10), rec(days[2], "B", 10), rec(days[3], "B", 10)});
    auto ids = all_ids(store);
    auto u = UniverseSpec::survivor_only(ids, {});
    TerminalOverrides t{{*store.find_symbol("A"), TerminalReturn{2, -1.0}}};
    auto s = build_series(u, {}, days[0], days[3], store, {Aggregation::DailyRebalanced, &t});
    EXPECT_EQ(s.returns, (std::vector<double>{0.0, -0.5, 0.0}));
    EXPECT_EQ(s.n_active, (std::vector<int>{2, 2, 1}));
}

TEST(WeightScheme, ClipValidation) {
    EXPECT_NO_THROW((WeightScheme{WeightKind::EqualWeight, ClipBounds{-0.5, 1.0}}.validate()));
    EXPECT_THROW((WeightScheme{WeightKind::EqualWeight, ClipBounds{0.0, 1.0}}.validate()), Error);
    EXPECT_THROW((WeightScheme{WeightKind::EqualWeight, ClipBounds{-0.5, -0.1}}.validate()), Error);
    EXPECT_EQ(parse_weight_kind("VW"), WeightKind::ValueWeight);
    EXPECT_EQ(parse_aggregation("buy_and_hold"), Aggregation::BuyAndHold);
    EXPECT_FALSE(parse_weight_kind("cap"));
}
