#pragma once

#include "survbias/date.hpp"
#include "survbias/store.hpp"
#include "survbias/universe.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace survbias::portfolio {

enum class UniverseKind { SurvivorOnly, Complete };

/// Membership as a function of the trading day. A snapshot taken on day s
/// governs days s+1 through the next snapshot day; SurvivorOnly returns the
/// same basket on every day.
class UniverseSpec {
public:
    /// `rebalance_days` only matter for buy-and-hold aggregation.
    static UniverseSpec survivor_only(std::vector<SymbolId> members, std::vector<DayIndex> rebalance_days);
    static UniverseSpec complete(std::vector<DayIndex> snapshot_days, std::vector<std::vector<SymbolId>> members);

    /// Complete universe from reconstructed snapshots. Symbols missing from
    /// the store are dropped; snapshot dates must be trading dates.
    static UniverseSpec complete(const RecordStore& store, std::span<const universe::ConstituentSnapshot> snapshots);
    /// Fixed basket `final_members`, rebalanced on the snapshot schedule.
    static UniverseSpec survivor_only(const RecordStore& store, std::span<const std::string> final_members,
                                      std::span<const universe::ConstituentSnapshot> schedule);

    UniverseKind kind() const { return kind_; }
    std::span<const SymbolId> members_at(DayIndex day) const;
    std::span<const DayIndex> rebalance_days() const { return days_; }

private:
    UniverseKind kind_ = UniverseKind::Complete;
    std::vector<DayIndex> days_;
    std::vector<std::vector<SymbolId>> members_;  // parallel to days_ (Complete) or one entry (SurvivorOnly)
};

enum class WeightKind { EqualWeight, ValueWeight };

struct ClipBounds {
    double lower = -0.5;
    double upper = 1.0;
};

struct WeightScheme {
    WeightKind kind = WeightKind::EqualWeight;
    std::optional<ClipBounds> clip;

    /// Throws InvalidConfig unless lower < 0 < upper.
    void validate() const;
};

std::string_view to_string(WeightKind k);
std::optional<WeightKind> parse_weight_kind(std::string_view text);

/// DailyRebalanced resets weights every day. BuyAndHold compounds each
/// stock's holding from the last rebalance day and weights by the drifted
/// holding.
enum class Aggregation { DailyRebalanced, BuyAndHold };

std::string_view to_string(Aggregation a);
std::optional<Aggregation> parse_aggregation(std::string_view text);

/// Forced one-day return for a stock that has stopped trading, applied on
/// `day` (the first trading day after its last trade).
struct TerminalReturn {
    DayIndex day = 0;
    double value = 0.0;
};
using TerminalOverrides = std::unordered_map<SymbolId, TerminalReturn>;

struct ReturnSeries {
    std::vector<Date> dates;
    std::vector<double> returns;
    std::vector<int> n_active;

    std::size_t size() const { return returns.size(); }
    /// Dates on which no member had a computable return (return set to 0).
    std::vector<Date> degenerate_dates() const;
};

constexpr double stock_daily_return(double p_today, double p_prev) { return (p_today - p_prev) / p_prev; }

struct Contribution {
    double ret = 0.0;
    double weight = 0.0;
};

/// Weighted mean of per-stock returns; weights normalize to 1. Falls back to
/// equal weights when every weight is zero. The result is clamped to the
/// range spanned by the inputs.
double aggregate(std::span<const Contribution> contributions);

struct DayReturn {
    double ret = 0.0;
    int n_active = 0;
};

/// One day of a daily-rebalanced portfolio. Requires day >= 1.
DayReturn portfolio_return(DayIndex day, const UniverseSpec& universe, const WeightScheme& scheme,
                           const RecordStore& store, const TerminalOverrides* terminal = nullptr);

struct SeriesOptions {
    Aggregation aggregation = Aggregation::DailyRebalanced;
    const TerminalOverrides* terminal = nullptr;
};

/// Returns for every trading day after the first trading day >= start, up to
/// the last trading day <= end. Throws EmptyWindow when that range is empty.
ReturnSeries build_series(const UniverseSpec& universe, const WeightScheme& scheme, Date start, Date end,
                          const RecordStore& store, const SeriesOptions& options = {});

}  // namespace survbias::portfolio
