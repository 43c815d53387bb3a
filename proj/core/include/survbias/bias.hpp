#pragma once

#include "survbias/metrics.hpp"
#include "survbias/store.hpp"
#include "survbias/universe.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace survbias::bias {

enum class Metric { CumulativeReturn, AnnualizedReturn, Sharpe, MaxDrawdown, Volatility };
inline constexpr Metric kAllMetrics[] = {Metric::CumulativeReturn, Metric::AnnualizedReturn, Metric::Sharpe,
                                         Metric::MaxDrawdown, Metric::Volatility};

std::string_view to_string(Metric m);
double metric_value(const metrics::PerfMetrics& m, Metric which);

struct MetricBias {
    Metric metric;
    double survivor_value = 0.0;
    double complete_value = 0.0;
    /// survivor_value - complete_value
    double absolute_bias = 0.0;
    /// absolute_bias / complete_value x 100; nullopt when complete_value is
    /// zero or not finite.
    std::optional<double> relative_bias_pct;
};

/// One entry per metric in kAllMetrics order. Throws WindowMismatch when the
/// two metric sets cover different date windows or day counts.
std::vector<MetricBias> compute_bias(const metrics::PerfMetrics& survivor, const metrics::PerfMetrics& complete);

enum class Statistic { AnnualReturn, Sharpe };

/// Statistic of one sample; NaN when undefined (Sharpe of a flat sample).
double sample_statistic(std::span<const double> returns, Statistic statistic);

/// Deterministic index stream for resample `replicate` under `seed`. Each
/// replicate is seeded independently (SplitMix64 of seed and replicate id
/// into mt19937_64), and indices are drawn by rejection sampling, so serial
/// and parallel runs draw identical resamples.
class ResampleStream {
public:
    ResampleStream(std::uint64_t seed, std::uint64_t replicate);
    std::size_t next_index(std::size_t bound);

private:
    std::mt19937_64 engine_;
};

/// Statistic of every with-replacement resample of length T.
std::vector<double> bootstrap_distribution(std::span<const double> complete_returns, Statistic statistic,
                                           std::size_t n_resamples, std::uint64_t seed);

/// Fraction of resamples whose statistic is >= survivor_stat (one-sided
/// upper tail). NaN resample statistics never count. Throws InvalidInput for
/// n_resamples == 0 or fewer than two returns.
double bootstrap_test(std::span<const double> complete_returns, double survivor_stat, Statistic statistic,
                      std::size_t n_resamples, std::uint64_t seed);

struct BootstrapResult {
    std::size_t n_resamples = 0;
    std::uint64_t seed = 0;
    double p_value_return = 0.0;
    std::optional<double> p_value_sharpe;
};

/// Price return over each timeline's member period: entry snapshot close to
/// exit snapshot close, or to the last traded close for Delisted symbols.
/// nullopt when either price is unavailable. Parallel to `timelines`.
std::vector<std::optional<double>> member_period_returns(std::span<const universe::MembershipTimeline> timelines,
                                                         const RecordStore& store);

struct DecompositionRow {
    universe::RemovalClass category;
    std::size_t count = 0;
    /// Share of all removed symbols; nullopt for the Survivor row.
    std::optional<double> pct_of_removed;
    std::optional<double> mean_member_return;
};

/// Rows for Delisted, Graduated, Demoted, then Survivor.
std::vector<DecompositionRow> decompose(std::span<const universe::MembershipTimeline> timelines,
                                        std::span<const std::optional<double>> member_returns);

struct BiasReport {
    std::vector<MetricBias> metrics;
    std::optional<BootstrapResult> bootstrap;
    std::vector<DecompositionRow> decomposition;

    const MetricBias& get(Metric m) const;
};

}  // namespace survbias::bias
