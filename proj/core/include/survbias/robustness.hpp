#pragma once

#include "survbias/bias.hpp"
#include "survbias/metrics.hpp"
#include "survbias/portfolio.hpp"
#include "survbias/store.hpp"
#include "survbias/universe.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace survbias::robustness {

struct DateWindow {
    Date start;
    Date end;
};

struct ScenarioConfig {
    std::string label = "baseline";
    universe::RankBand band{};
    universe::Frequency frequency = universe::Frequency::Quarterly;
    portfolio::WeightScheme weighting{};
    portfolio::Aggregation aggregation = portfolio::Aggregation::DailyRebalanced;
    /// Forced return on the day after a Delisted stock's last trade, in [-1, 0];
    /// -1 writes the stock off entirely.
    std::optional<double> delist_terminal_return;
    /// Restricts the return dates to [start, end].
    std::optional<DateWindow> subperiod;

    /// Throws InvalidConfig on a bad band, clip or terminal return.
    void validate() const;
};

struct AnalysisOptions {
    std::size_t bootstrap_n = 1000;
    std::uint64_t seed = 42;
    /// Defaults to the last trading date of the store.
    std::optional<Date> asof;
    universe::ClassificationRule classification{};
    int activity_window_days = 90;
};

/// Reconstructed universe shared by every analysis on one band/frequency.
struct UniverseState {
    std::vector<universe::ConstituentSnapshot> snapshots;
    std::vector<universe::MembershipTimeline> timelines;
    Date asof;
};

UniverseState build_universe(const RecordStore& store, universe::RankBand band, universe::Frequency frequency,
                             const AnalysisOptions& options = {});

/// Rebuilds per-snapshot membership from timelines (snapshot dates are the
/// union of member dates).
std::vector<universe::ConstituentSnapshot> snapshots_from_timelines(
    std::span<const universe::MembershipTimeline> timelines);

/// Terminal return for every Delisted stock on the first trading day after
/// its last trade. Throws InvalidConfig unless terminal is in [-1, 0].
portfolio::TerminalOverrides apply_delist_treatment(std::span<const universe::MembershipTimeline> timelines,
                                                    const RecordStore& store, double terminal);

struct ScenarioResult {
    ScenarioConfig config;
    metrics::PerfMetrics survivor;
    metrics::PerfMetrics complete;
    bias::BiasReport bias;
    portfolio::ReturnSeries survivor_series;
    portfolio::ReturnSeries complete_series;
    std::optional<universe::ValidationReport> validation;
    std::size_t snapshot_count = 0;
    std::size_t ever_members = 0;
    std::size_t survivor_count = 0;

    /// Annualized return bias in percentage points.
    double return_bias_pp() const;
    double sharpe_bias() const;
};

/// Portfolios -> metrics -> bias (+bootstrap, decomposition) on an already
/// reconstructed universe. The backtest starts on the first snapshot date.
ScenarioResult run_analysis(const RecordStore& store, const UniverseState& state, const ScenarioConfig& config,
                            const AnalysisOptions& options = {});

/// Full pipeline under `config`. Validation runs when `official_list` is
/// non-empty.
ScenarioResult run_scenario(const ScenarioConfig& config, const RecordStore& store,
                            std::span<const std::string> official_list, const AnalysisOptions& options = {});

/// Bands {101-350, 151-400, 201-450}, semi-annual, EW/VW clipped buy-and-hold,
/// terminals {-0.50, -0.75, -1.00}.
std::vector<ScenarioConfig> default_sweep();

struct NamedWindow {
    std::string label;
    DateWindow window;
};

/// Pre-COVID 2016-2019, COVID 2020, Post-COVID 2021-2023, Recent 2024-2025.
std::vector<NamedWindow> default_regimes();

struct PeriodRow {
    std::string label;
    DateWindow window;
    bool partial = false;
    double survivor_return = 0.0;
    double complete_return = 0.0;
    double bias_pp = 0.0;
    double complete_volatility = 0.0;
    double survivor_volatility = 0.0;
};

struct SubperiodSummary {
    std::size_t years = 0;
    std::size_t positive_years = 0;
    double median_bias_pp = 0.0;
    double mean_bias_pp = 0.0;
    double std_bias_pp = 0.0;
    double min_bias_pp = 0.0;
    double max_bias_pp = 0.0;
};

struct SubperiodTable {
    std::vector<PeriodRow> windows;
    std::vector<PeriodRow> years;
    SubperiodSummary summary;
    std::vector<std::string> skipped;
};

/// Per-window rows plus calendar-year rows clipped to the backtest range.
/// Windows without any return date are listed in `skipped`.
SubperiodTable subperiod_table(const RecordStore& store, const UniverseState& state, std::span<const NamedWindow> windows,
                               const ScenarioConfig& base = {});

}  // namespace survbias::robustness
