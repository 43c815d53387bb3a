#include "survbias/robustness.hpp"

#include "survbias/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace survbias::robustness {

namespace {

portfolio::ReturnSeries slice(const portfolio::ReturnSeries& s, const DateWindow& w) {
    portfolio::ReturnSeries out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.dates[i] < w.start || w.end < s.dates[i]) continue;
        out.dates.push_back(s.dates[i]);
        out.returns.push_back(s.returns[i]);
        out.n_active.push_back(s.n_active[i]);
    }
    return out;
}

struct FullSeries {
    portfolio::ReturnSeries survivor;
    portfolio::ReturnSeries complete;
    std::vector<std::string> survivor_members;
};

FullSeries build_full_series(const RecordStore& store, const UniverseState& state, const ScenarioConfig& config) {
    if (state.snapshots.empty()) throw Error(ErrorCode::EmptyWindow, "no snapshots to backtest");
    FullSeries out;
    for (const auto& t : state.timelines)
        if (t.classification == universe::RemovalClass::Survivor) out.survivor_members.push_back(t.symbol);

    auto complete = portfolio::UniverseSpec::complete(store, state.snapshots);
    auto survivor = portfolio::UniverseSpec::survivor_only(store, out.survivor_members, state.snapshots);

    portfolio::TerminalOverrides terminal;
    portfolio::SeriesOptions opts;
    opts.aggregation = config.aggregation;
    if (config.delist_terminal_return) {
        terminal = apply_delist_treatment(state.timelines, store, *config.delist_terminal_return);
        opts.terminal = &terminal;
    }
    const Date start = state.snapshots.front().date;
    const Date end = store.calendar().back();
    out.survivor = portfolio::build_series(survivor, config.weighting, start, end, store, opts);
    out.complete = portfolio::build_series(complete, config.weighting, start, end, store, opts);
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void ScenarioConfig::validate() const {
    if (band.low < 1 || band.high <= band.low) throw Error(ErrorCode::InvalidConfig, label + ": band needs 1 <= low < high");
    weighting.validate();
    if (delist_terminal_return && !(*delist_terminal_return >= -1.0 && *delist_terminal_return <= 0.0))
        throw Error(ErrorCode::InvalidConfig, label + ": delist terminal return must lie in [-1, 0]");
    if (subperiod && subperiod->end < subperiod->start)
        throw Error(ErrorCode::InvalidConfig, label + ": subperiod end precedes start");
}

UniverseState build_universe(const RecordStore& store, universe::RankBand band, universe::Frequency frequency,
                             const AnalysisOptions& options) {
    if (store.calendar().empty()) throw Error(ErrorCode::EmptyWindow, "record store is empty");
    UniverseState state;
    state.asof = options.asof.value_or(store.calendar().back());
    auto recon = universe::reconstruct(store, band, frequency);
    state.snapshots = std::move(recon.snapshots);
    state.timelines = universe::build_timeline(state.snapshots);
    universe::classify_removals(state.timelines, store, state.asof, state.snapshots.back().date, options.classification);
    return state;
}

std::vector<universe::ConstituentSnapshot> snapshots_from_timelines(
    std::span<const universe::MembershipTimeline> timelines) {
    std::map<Date, std::vector<std::string>> by_date;
    for (const auto& t : timelines)
        for (auto d : t.member_dates) by_date[d].push_back(t.symbol);
    std::vector<universe::ConstituentSnapshot> out;
    for (auto& [date, members] : by_date) {
        std::sort(members.begin(), members.end());
        out.push_back({date, std::move(members)});
    }
    return out;
}

portfolio::TerminalOverrides apply_delist_treatment(std::span<const universe::MembershipTimeline> timelines,
                                                    const RecordStore& store, double terminal) {
    if (!(terminal >= -1.0 && terminal <= 0.0))
        throw Error(ErrorCode::InvalidConfig, "delist terminal return must lie in [-1, 0]");
    portfolio::TerminalOverrides out;
    const auto n_days = static_cast<DayIndex>(store.calendar().size());
    for (const auto& t : timelines) {
        if (t.classification != universe::RemovalClass::Delisted) continue;
        auto id = store.find_symbol(t.symbol);
        if (!id) continue;
        auto last = store.last_trade_day(*id);
        if (!last || *last + 1 >= n_days) continue;
        out.emplace(*id, portfolio::TerminalReturn{*last + 1, terminal});
    }
    return out;
}

double ScenarioResult::return_bias_pp() const {
    return bias.get(bias::Metric::AnnualizedReturn).absolute_bias * 100.0;
}

double ScenarioResult::sharpe_bias() const { return bias.get(bias::Metric::Sharpe).absolute_bias; }

ScenarioResult run_analysis(const RecordStore& store, const UniverseState& state, const ScenarioConfig& config,
                            const AnalysisOptions& options) {
    config.validate();
    ScenarioResult result;
    result.config = config;
    result.snapshot_count = state.snapshots.size();
    result.ever_members = state.timelines.size();

    auto full = build_full_series(store, state, config);
    result.survivor_count = full.survivor_members.size();
    if (config.subperiod) {
        result.survivor_series = slice(full.survivor, *config.subperiod);
        result.complete_series = slice(full.complete, *config.subperiod);
        if (result.complete_series.size() == 0)
            throw Error(ErrorCode::EmptyWindow, config.label + ": subperiod holds no return dates");
    } else {
        result.survivor_series = std::move(full.survivor);
        result.complete_series = std::move(full.complete);
    }

    result.survivor = metrics::summarize(result.survivor_series);
    result.complete = metrics::summarize(result.complete_series);
    result.bias.metrics = bias::compute_bias(result.survivor, result.complete);

    if (options.bootstrap_n > 0 && result.complete_series.size() >= 2) {
        bias::BootstrapResult boot;
        boot.n_resamples = options.bootstrap_n;
        boot.seed = options.seed;
        boot.p_value_return = bias::bootstrap_test(result.complete_series.returns, result.survivor.annualized_return,
                                                   bias::Statistic::AnnualReturn, options.bootstrap_n, options.seed);
        if (std::isfinite(result.survivor.sharpe))
            boot.p_value_sharpe = bias::bootstrap_test(result.complete_series.returns, result.survivor.sharpe,
                                                       bias::Statistic::Sharpe, options.bootstrap_n, options.seed);
        result.bias.bootstrap = boot;
    }

    auto member_returns = bias::member_period_returns(state.timelines, store);
    result.bias.decomposition = bias::decompose(state.timelines, member_returns);
    return result;
}

ScenarioResult run_scenario(const ScenarioConfig& config, const RecordStore& store,
                            std::span<const std::string> official_list, const AnalysisOptions& options) {
    config.validate();
    auto state = build_universe(store, config.band, config.frequency, options);
    auto result = run_analysis(store, state, config, options);
    if (!official_list.empty()) {
        universe::ValidationOptions vopts;
        vopts.asof = state.asof;
        vopts.activity_window_days = options.activity_window_days;
        vopts.dead_threshold_days = options.classification.dead_threshold_days;
        vopts.seed = options.seed;
        result.validation =
            universe::validate_reconstruction(state.snapshots.back(), official_list, state.timelines, vopts);
    }
    return result;
}

std::vector<ScenarioConfig> default_sweep() {
    using portfolio::Aggregation;
    using portfolio::ClipBounds;
    using portfolio::WeightKind;
    std::vector<ScenarioConfig> out;
    ScenarioConfig base;
    out.push_back(base);

    for (auto [lo, hi] : {std::pair{101, 350}, std::pair{201, 450}}) {
        ScenarioConfig c;
        c.label = "band_" + std::to_string(lo) + "_" + std::to_string(hi);
        c.band = {lo, hi};
        out.push_back(c);
    }
    {
        ScenarioConfig c;
        c.label = "semiannual";
        c.frequency = universe::Frequency::SemiAnnual;
        out.push_back(c);
    }
    for (auto kind : {WeightKind::EqualWeight, WeightKind::ValueWeight}) {
        ScenarioConfig c;
        c.label = kind == WeightKind::EqualWeight ? "ew_clipped_per_stock" : "vw_clipped_per_stock";
        c.weighting = {kind, ClipBounds{-0.5, 1.0}};
        c.aggregation = Aggregation::BuyAndHold;
        out.push_back(c);
    }
    for (double t : {-0.50, -0.75, -1.00}) {
        ScenarioConfig c;
        c.label = "delist_" + std::to_string(static_cast<int>(std::lround(-t * 100)));
        c.delist_terminal_return = t;
        out.push_back(c);
    }
    return out;
}

std::vector<NamedWindow> default_regimes() {
    return {
        {"pre_covid_2016_2019", {Date(2016, 1, 1), Date(2019, 12, 31)}},
        {"covid_2020", {Date(2020, 1, 1), Date(2020, 12, 31)}},
        {"post_covid_2021_2023", {Date(2021, 1, 1), Date(2023, 12, 31)}},
        {"recent_2024_2025", {Date(2024, 1, 1), Date(2025, 12, 31)}},
    };
}

SubperiodTable subperiod_table(const RecordStore& store, const UniverseState& state, std::span<const NamedWindow> windows,
                               const ScenarioConfig& base) {
    base.validate();
    auto full = build_full_series(store, state, base);
    SubperiodTable table;
    const auto& cal = store.calendar();

    auto row_for = [&](const std::string& label, const DateWindow& w) -> std::optional<PeriodRow> {
        auto s = slice(full.survivor, w);
        auto c = slice(full.complete, w);
        if (c.size() == 0) return std::nullopt;
        auto sm = metrics::summarize(s);
        auto cm = metrics::summarize(c);
        PeriodRow row;
        row.label = label;
        row.window = w;
        row.survivor_return = sm.annualized_return;
        row.complete_return = cm.annualized_return;
        row.bias_pp = (sm.annualized_return - cm.annualized_return) * 100.0;
        row.survivor_volatility = sm.annualized_volatility;
        row.complete_volatility = cm.annualized_volatility;
        auto year_first = cal.ceil(w.start);
        auto year_last = cal.floor(w.end);
        row.partial = (year_first && c.dates.front() != cal.at(*year_first)) ||
                      (year_last && c.dates.back() != cal.at(*year_last)) ||
                      (cal.back() < w.end && days_between(cal.back(), w.end) > 7);
        return row;
    };

    for (const auto& nw : windows) {
        if (auto row = row_for(nw.label, nw.window))
            table.windows.push_back(*row);
        else
            table.skipped.push_back(nw.label);
    }
    if (full.complete.size() > 0) {
        for (int y = full.complete.dates.front().year(); y <= full.complete.dates.back().year(); ++y) {
            if (auto row = row_for(std::to_string(y), {Date(y, 1, 1), Date(y, 12, 31)})) table.years.push_back(*row);
        }
    }

    std::vector<double> biases;
    for (const auto& r : table.years) biases.push_back(r.bias_pp);
    auto& sum = table.summary;
    sum.years = biases.size();
    sum.positive_years = static_cast<std::size_t>(std::count_if(biases.begin(), biases.end(), [](double b) { return b > 0.0; }));
    if (!biases.empty()) {
        sum.median_bias_pp = median(biases);
        sum.mean_bias_pp = metrics::mean(biases);
        sum.std_bias_pp = metrics::sample_std(biases);
        sum.min_bias_pp = *std::min_element(biases.begin(), biases.end());
        sum.max_bias_pp = *std::max_element(biases.begin(), biases.end());
    }
    return table;
}

}  // namespace survbias::robustness
