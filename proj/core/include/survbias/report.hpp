#pragma once

#include "survbias/bias.hpp"
#include "survbias/metrics.hpp"
#include "survbias/portfolio.hpp"
#include "survbias/robustness.hpp"
#include "survbias/store.hpp"
#include "survbias/universe.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Serialisation of pipeline artefacts. JSON uses null for undefined numbers
// (NaN Sharpe, missing relative bias); CSV leaves such cells empty.
namespace survbias::report {

std::string read_text(const std::filesystem::path& path);
/// Creates parent directories. Throws FileUnreadable on failure.
void write_text(const std::filesystem::path& path, std::string_view content);

// Timelines: [{symbol, entry, exit, snapshots: [dates], classification, last_trade}]
std::string timelines_to_json(std::span<const universe::MembershipTimeline> timelines);
std::vector<universe::MembershipTimeline> timelines_from_json(std::string_view text);

/// RANK,SYMBOL,PROXY for every ranked symbol on one snapshot date.
std::string ranking_csv(const universe::SnapshotRanking& ranking);
/// DATE,SYMBOL: one row per member per snapshot.
std::string snapshots_csv(std::span<const universe::ConstituentSnapshot> snapshots);
std::string validation_to_json(const universe::ValidationReport& report);

/// DATE,RETURN,N_ACTIVE
std::string series_csv(const portfolio::ReturnSeries& series);
std::string metrics_to_json(const metrics::PerfMetrics& m);
std::string bias_to_json(const bias::BiasReport& report, const metrics::PerfMetrics& survivor,
                         const metrics::PerfMetrics& complete);
/// CATEGORY,COUNT,PCT_REMOVED,MEAN_RETURN
std::string decomposition_csv(std::span<const bias::DecompositionRow> rows);

/// DATE,SURVIVOR,COMPLETE wealth indices (start at 1 on the day before the
/// first return).
std::string cumulative_csv(const portfolio::ReturnSeries& survivor, const portfolio::ReturnSeries& complete);
/// DATE,SURVIVOR,COMPLETE trailing Sharpe; rows start once a full window exists.
std::string rolling_sharpe_csv(const portfolio::ReturnSeries& survivor, const portfolio::ReturnSeries& complete,
                               std::size_t window = metrics::kTradingDaysPerYear);
/// DATE,MEMBERS,ENTRANTS,EXITS per snapshot.
std::string membership_csv(std::span<const universe::ConstituentSnapshot> snapshots);

std::string ingest_stats_to_json(const IngestStats& stats, std::span<const FileIssue> issues);

/// Scenario file: a JSON array of objects, or {"scenarios": [...]}. Keys:
/// label, band [lo, hi], frequency, weighting, clip [lo, hi] or null,
/// aggregation, delist_terminal, subperiod [start, end]. Missing keys take
/// the baseline defaults. Throws InvalidConfig on an empty list, unknown
/// keys or invalid values.
std::vector<robustness::ScenarioConfig> scenarios_from_json(std::string_view text);
std::string scenarios_to_json(std::span<const robustness::ScenarioConfig> scenarios);

/// Config, counts, metrics and bias of one scenario.
std::string scenario_result_to_json(const robustness::ScenarioResult& result);
/// LABEL,SURV_RET,COMP_RET,BIAS_PP,SHARPE_BIAS (returns in percent).
std::string comparison_csv(std::span<const robustness::ScenarioResult> results);
/// LABEL,START,END,PARTIAL,SURV_RET,COMP_RET,BIAS_PP,SURV_VOL,COMP_VOL
std::string period_rows_csv(std::span<const robustness::PeriodRow> rows);
std::string subperiod_summary_to_json(const robustness::SubperiodTable& table);

}  // namespace survbias::report
