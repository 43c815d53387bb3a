// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 1) so ctest reports any failure.

#include "survbias/bias.hpp"
#include "survbias/metrics.hpp"
#include "survbias/robustness.hpp"
#include "survbias/store.hpp"
#include "survbias/synth.hpp"
#include "survbias/universe.hpp"

#include "metrics_oracle.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace survbias;

namespace {

struct Outcome {
    enum { Pass, Fail, Skip } status;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {Outcome::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Outcome::Pass ? "PASS" : o.status == Outcome::Fail ? "FAIL" : "SKIP";
    if (o.status == Outcome::Fail) ++failures;
    std::cout << tag << " [" << id << "] " << name << ": " << o.detail << std::endl;
}

Outcome verdict(bool ok, const std::string& detail) { return {ok ? Outcome::Pass : Outcome::Fail, detail}; }

std::string fmt(double x, int prec = 6) {
    std::ostringstream s;
    s.precision(prec);
    s << x;
    return s.str();
}

Outcome synthetic_round_trip() {
    auto t0 = std::chrono::steady_clock::now();
    synth::SynthConfig cfg;
    cfg.n_stocks = 500;
    cfg.n_quarters = 8;
    cfg.seed = 42;
    auto market = synth::generate(cfg);
    tsupport::TempDir dir;
    market.write_files(dir.path());
    auto ingested = ingest_directory(dir.path());
    auto recon = universe::reconstruct(ingested.store, cfg.band);
    synth::PipelineOutputs p;
    p.snapshots = recon.snapshots;
    auto rep = synth::score_pipeline(p, market.truth());
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = rep.membership_exact() && rep.quarters.size() == market.truth().snapshots.size() && secs < 60.0;
    return verdict(ok, std::to_string(rep.quarters.size()) + " quarters, min overlap " + fmt(rep.min_overlap_pct) +
                           "%, " + fmt(secs, 3) + " s");
}

Outcome no_churn_null() {
    auto market = synth::generate(synth::SynthConfig::no_churn());
    auto records = market.equity_records();
    auto store = RecordStore::from_records(records);
    robustness::AnalysisOptions o;
    o.bootstrap_n = 0;
    bool ok = true;
    std::string detail;
    for (auto kind : {portfolio::WeightKind::EqualWeight, portfolio::WeightKind::ValueWeight}) {
        robustness::ScenarioConfig c;
        c.weighting.kind = kind;
        auto r = robustness::run_scenario(c, store, {}, o);
        ok &= r.survivor_series.returns == r.complete_series.returns;
        ok &= r.survivor_series.n_active == r.complete_series.n_active;
        for (const auto& b : r.bias.metrics) {
            ok &= b.absolute_bias == 0.0;
            ok &= !b.relative_bias_pct || *b.relative_bias_pct == 0.0;
        }
        detail += std::string(portfolio::to_string(kind)) + " bias " + fmt(r.return_bias_pp()) + "pp; ";
    }
    ok &= market.truth().survivor_ew.returns == market.truth().complete_ew.returns;
    return verdict(ok, detail + "truth series identical: " +
                           (market.truth().survivor_ew.returns == market.truth().complete_ew.returns ? "yes" : "no"));
}

Outcome metrics_oracle() {
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> len(1, 20);
    std::uniform_real_distribution<double> r(-0.5, 0.5);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> s(static_cast<std::size_t>(len(rng)));
        for (auto& x : s) x = r(rng);
        // Deviation relative to max(1, |oracle|): annualizing a one-day
        // series raises it to the 252nd power, beyond absolute double range.
        auto dev = [&](double a, long double b) {
            const double ref = std::max(1.0, std::fabs(static_cast<double>(b)));
            worst = std::max(worst, std::fabs(a - static_cast<double>(b)) / ref);
        };
        const double cum = metrics::cumulative_return(s);
        dev(cum, oracle::cumulative(s));
        dev(metrics::annualized_return(cum, s.size()), oracle::annualized(s));
        dev(metrics::annualized_volatility(s), oracle::volatility(s));
        dev(metrics::max_drawdown(s), oracle::max_drawdown(s));
        if (s.size() >= 2) dev(metrics::sharpe(s), oracle::sharpe(s));
    }
    return verdict(worst < 1e-9, "1000 series, max scaled deviation " + fmt(worst, 3));
}

Outcome drawdown_identities() {
    std::vector<double> gains = {0.01, 0.0, 0.2, 0.05, 0.3};
    double a = metrics::max_drawdown(gains);
    double b = metrics::max_drawdown(std::vector<double>{1.0, -0.5});
    return verdict(a == 0.0 && b == -0.5, "monotone " + fmt(a) + ", [+1, -0.5] " + fmt(b));
}

metrics::PerfMetrics random_metrics(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 3.0);
    metrics::PerfMetrics m;
    m.cumulative_return = u(rng);
    m.annualized_return = u(rng);
    m.sharpe = u(rng);
    m.max_drawdown = -std::fabs(u(rng)) / 3.0;
    m.annualized_volatility = std::fabs(u(rng));
    m.n_days = 500;
    m.first_date = Date(2020, 1, 2);
    m.last_date = Date(2021, 12, 31);
    return m;
}

Outcome bias_identities() {
    std::mt19937_64 rng(77);
    bool ok = true;
    auto a = random_metrics(rng);
    for (const auto& b : bias::compute_bias(a, a)) ok &= b.absolute_bias == 0.0;
    for (int i = 0; i < 100; ++i) {
        auto x = random_metrics(rng), y = random_metrics(rng);
        auto xy = bias::compute_bias(x, y), yx = bias::compute_bias(y, x);
        for (std::size_t k = 0; k < xy.size(); ++k) ok &= xy[k].absolute_bias == -yx[k].absolute_bias;
    }
    return verdict(ok, "self-bias zero, antisymmetry over 100 random pairs");
}

Outcome bootstrap_calibration() {
    double lo = 1.0, hi = 0.0;
    bool deterministic = true;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed * 1000003);
        std::normal_distribution<double> z(0.0004, 0.012);
        std::vector<double> s(750);
        for (auto& x : s) x = z(rng);
        double point = bias::sample_statistic(s, bias::Statistic::AnnualReturn);
        double p = bias::bootstrap_test(s, point, bias::Statistic::AnnualReturn, 1000, seed);
        deterministic &= p == bias::bootstrap_test(s, point, bias::Statistic::AnnualReturn, 1000, seed);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    bool ok = lo >= 0.40 && hi <= 0.60 && deterministic;
    return verdict(ok, "p range [" + fmt(lo, 4) + ", " + fmt(hi, 4) + "] over 20 seeds, deterministic " +
                           (deterministic ? "yes" : "no"));
}

Outcome selection_arithmetic() {
    const std::size_t ns[] = {100, 300, 500, 1000};
    const std::size_t expect[] = {0, 150, 250, 250};
    std::string detail;
    bool ok = true;
    Date d(2020, 3, 31);
    for (int i = 0; i < 4; ++i) {
        std::vector<ingest::TradingRecord> recs;
        for (std::size_t k = 0; k < ns[i]; ++k)
            recs.push_back(tsupport::rec(d, "S" + std::to_string(k), 1.0 + static_cast<double>(k)));
        auto snap = universe::select_band(universe::rank_snapshot(d, recs), {151, 400});
        ok &= snap.members.size() == expect[i];
        detail += std::to_string(ns[i]) + "->" + std::to_string(snap.members.size()) + " ";
    }
    return verdict(ok, detail);
}

Outcome classification_partition() {
    bool ok = true;
    std::string detail;
    auto check = [&](const std::string& label, const synth::SynthConfig& cfg) {
        auto market = synth::generate(cfg);
        auto records = market.equity_records();
        auto store = RecordStore::from_records(records);
        auto state = robustness::build_universe(store, cfg.band, universe::Frequency::Quarterly);
        std::size_t n[4] = {};
        for (const auto& t : state.timelines) ++n[static_cast<int>(t.classification)];
        const std::size_t still = n[2] + n[3];
        const bool sums = n[0] + n[1] + n[2] + n[3] == state.timelines.size();
        const bool split = n[3] >= n[2] && n[3] - n[2] == still % 2;
        ok &= sums && split;
        detail += label + " S/D/G/M " + std::to_string(n[0]) + "/" + std::to_string(n[1]) + "/" + std::to_string(n[2]) +
                  "/" + std::to_string(n[3]) + " of " + std::to_string(state.timelines.size()) + "; ";
    };
    check("default", synth::SynthConfig{});
    synth::SynthConfig odd;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        odd.seed = seed;
        odd.n_quarters = 4 + seed % 3;
        odd.churn.delist_hazard = 0.03 * static_cast<double>(seed);
        check("seed" + std::to_string(seed), odd);
    }
    return verdict(ok, detail);
}

Outcome delist_monotonicity() {
    synth::SynthConfig cfg;
    cfg.churn.delist_hazard = 0.06;
    cfg.seed = 7;
    auto market = synth::generate(cfg);
    auto records = market.equity_records();
    auto store = RecordStore::from_records(records);
    robustness::AnalysisOptions o;
    o.bootstrap_n = 0;
    auto state = robustness::build_universe(store, cfg.band, universe::Frequency::Quarterly, o);
    std::size_t delisted = 0;
    for (const auto& t : state.timelines) delisted += t.classification == universe::RemovalClass::Delisted;
    bool ok = delisted >= 10;
    std::string detail = std::to_string(delisted) + " delisted; bias pp:";
    double prev = -1e300;
    for (double term : {0.0, -0.50, -0.75, -1.00}) {
        robustness::ScenarioConfig c;
        c.delist_terminal_return = term;
        double b = robustness::run_analysis(store, state, c, o).return_bias_pp();
        ok &= b >= prev;
        prev = b;
        detail += " " + fmt(term, 3) + "->" + fmt(b, 5);
    }
    return verdict(ok, detail);
}

// Real archive: SURVBIAS_ARCHIVE_DIR (daily files) and SURVBIAS_OFFICIAL_LIST.
Outcome real_archive() {
    const char* dir = std::getenv("SURVBIAS_ARCHIVE_DIR");
    const char* list = std::getenv("SURVBIAS_OFFICIAL_LIST");
    if (!dir || !list) return {Outcome::Skip, "set SURVBIAS_ARCHIVE_DIR and SURVBIAS_OFFICIAL_LIST to run"};
    auto ingested = ingest_directory(dir);
    const auto& s = ingested.stats;
    auto within = [](double got, double want, double tol) { return std::fabs(got - want) <= tol * want; };
    bool ok = within(static_cast<double>(s.raw_records), 3851244, 0.001) &&
              within(static_cast<double>(s.retained_records), 3846234, 0.001) &&
              within(static_cast<double>(s.trading_days), 2284, 0.001);
    auto official = universe::read_symbol_list(list);
    robustness::AnalysisOptions o;
    auto base = robustness::run_scenario({}, ingested.store, official, o);
    ok &= base.validation && base.validation->current_match_count == 252 && base.validation->current_list_size == 252;
    ok &= std::fabs(base.return_bias_pp() - 4.94) <= 0.5 && std::fabs(base.sharpe_bias() - 0.097) <= 0.02;
    robustness::ScenarioConfig semi;
    semi.label = "semi";
    semi.frequency = universe::Frequency::SemiAnnual;
    auto sr = robustness::run_scenario(semi, ingested.store, official, o);
    ok &= std::fabs(sr.return_bias_pp() - 4.82) <= 0.5;
    return verdict(ok, "raw " + std::to_string(s.raw_records) + ", retained " + std::to_string(s.retained_records) +
                           ", days " + std::to_string(s.trading_days) + ", bias " + fmt(base.return_bias_pp(), 4) +
                           "pp, sharpe bias " + fmt(base.sharpe_bias(), 4) + ", semi " + fmt(sr.return_bias_pp(), 4) + "pp");
}

}  // namespace

int main() {
    report(1, "synthetic round-trip", synthetic_round_trip);
    report(2, "no-churn null", no_churn_null);
    report(3, "metrics oracle", metrics_oracle);
    report(4, "drawdown identities", drawdown_identities);
    report(5, "bias identities", bias_identities);
    report(6, "bootstrap calibration", bootstrap_calibration);
    report(7, "selection arithmetic", selection_arithmetic);
    report(8, "classification partition", classification_partition);
    report(9, "delist-treatment monotonicity", delist_monotonicity);
    report(10, "real archive (optional)", real_archive);
    std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
    return failures == 0 ? 0 : 1;
}
