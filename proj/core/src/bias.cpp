#include "survbias/bias.hpp"

#include "survbias/error.hpp"

#include <cmath>
#include <limits>

namespace survbias::bias {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::CumulativeReturn: return "cumulative";
        case Metric::AnnualizedReturn: return "annual";
        case Metric::Sharpe: return "sharpe";
        case Metric::MaxDrawdown: return "max_drawdown";
        case Metric::Volatility: return "volatility";
    }
    return "unknown";
}

double metric_value(const metrics::PerfMetrics& m, Metric which) {
    switch (which) {
        case Metric::CumulativeReturn: return m.cumulative_return;
        case Metric::AnnualizedReturn: return m.annualized_return;
        case Metric::Sharpe: return m.sharpe;
        case Metric::MaxDrawdown: return m.max_drawdown;
        case Metric::Volatility: return m.annualized_volatility;
    }
    return kNaN;
}

std::vector<MetricBias> compute_bias(const metrics::PerfMetrics& survivor, const metrics::PerfMetrics& complete) {
    if (survivor.n_days != complete.n_days || survivor.first_date != complete.first_date ||
        survivor.last_date != complete.last_date)
        throw Error(ErrorCode::WindowMismatch, "survivor and complete metrics cover different windows");
    std::vector<MetricBias> out;
    for (auto m : kAllMetrics) {
        MetricBias b{m, metric_value(survivor, m), metric_value(complete, m), 0.0, std::nullopt};
        b.absolute_bias = b.survivor_value - b.complete_value;
        if (std::isfinite(b.complete_value) && b.complete_value != 0.0)
            b.relative_bias_pct = b.absolute_bias / b.complete_value * 100.0;
        out.push_back(b);
    }
    return out;
}

double sample_statistic(std::span<const double> returns, Statistic statistic) {
    if (statistic == Statistic::AnnualReturn) {
        double cum = metrics::cumulative_return(returns);
        return metrics::annualized_return(cum, returns.size());
    }
    if (returns.size() < 2 || !(metrics::sample_std(returns) > 0.0)) return kNaN;
    return metrics::sharpe(returns);
}

ResampleStream::ResampleStream(std::uint64_t seed, std::uint64_t replicate)
    : engine_(splitmix64(splitmix64(seed) ^ splitmix64(replicate + 0x632BE59BD9B4E019ULL))) {}

std::size_t ResampleStream::next_index(std::size_t bound) {
    // Rejection keeps the draw unbiased for any bound.
    const std::uint64_t b = bound;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % b;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % b);
}

std::vector<double> bootstrap_distribution(std::span<const double> complete_returns, Statistic statistic,
                                           std::size_t n_resamples, std::uint64_t seed) {
    if (complete_returns.size() < 2) throw Error(ErrorCode::InvalidInput, "bootstrap needs at least two returns");
    const std::size_t t = complete_returns.size();
    std::vector<double> stats(n_resamples);
    std::vector<double> sample(t);
    for (std::size_t j = 0; j < n_resamples; ++j) {
        ResampleStream stream(seed, j);
        for (auto& x : sample) x = complete_returns[stream.next_index(t)];
        stats[j] = sample_statistic(sample, statistic);
    }
    return stats;
}

double bootstrap_test(std::span<const double> complete_returns, double survivor_stat, Statistic statistic,
                      std::size_t n_resamples, std::uint64_t seed) {
    if (n_resamples == 0) throw Error(ErrorCode::InvalidInput, "bootstrap needs at least one resample");
    auto stats = bootstrap_distribution(complete_returns, statistic, n_resamples, seed);
    std::size_t hits = 0;
    for (double s : stats)
        if (s >= survivor_stat) ++hits;
    return static_cast<double>(hits) / static_cast<double>(n_resamples);
}

std::vector<std::optional<double>> member_period_returns(std::span<const universe::MembershipTimeline> timelines,
                                                         const RecordStore& store) {
    std::vector<std::optional<double>> out(timelines.size());
    const auto& cal = store.calendar();
    for (std::size_t i = 0; i < timelines.size(); ++i) {
        const auto& t = timelines[i];
        auto id = store.find_symbol(t.symbol);
        if (!id) continue;
        auto entry_day = cal.index_of(t.entry);
        Date end = t.exit;
        if (t.classification == universe::RemovalClass::Delisted && t.last_trade) end = *t.last_trade;
        auto end_day = cal.index_of(end);
        if (!entry_day || !end_day) continue;
        const Bar* a = store.bar_at(*id, *entry_day);
        const Bar* b = store.bar_at(*id, *end_day);
        if (!a || !b) continue;
        out[i] = b->close / a->close - 1.0;
    }
    return out;
}

std::vector<DecompositionRow> decompose(std::span<const universe::MembershipTimeline> timelines,
                                        std::span<const std::optional<double>> member_returns) {
    if (member_returns.size() != timelines.size())
        throw Error(ErrorCode::InvalidInput, "member returns must be parallel to timelines");
    using universe::RemovalClass;
    const RemovalClass order[] = {RemovalClass::Delisted, RemovalClass::Graduated, RemovalClass::Demoted,
                                  RemovalClass::Survivor};
    std::size_t removed = 0;
    for (const auto& t : timelines)
        if (t.classification != RemovalClass::Survivor) ++removed;

    std::vector<DecompositionRow> rows;
    for (auto cat : order) {
        DecompositionRow row{cat, 0, std::nullopt, std::nullopt};
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < timelines.size(); ++i) {
            if (timelines[i].classification != cat) continue;
            ++row.count;
            if (member_returns[i]) {
                sum += *member_returns[i];
                ++n;
            }
        }
        if (cat != RemovalClass::Survivor && removed > 0)
            row.pct_of_removed = static_cast<double>(row.count) / static_cast<double>(removed) * 100.0;
        if (n > 0) row.mean_member_return = sum / static_cast<double>(n);
        rows.push_back(row);
    }
    return rows;
}

const MetricBias& BiasReport::get(Metric m) const {
    for (const auto& b : metrics)
        if (b.metric == m) return b;
    throw Error(ErrorCode::InvalidInput, "metric missing from report");
}

}  // namespace survbias::bias
