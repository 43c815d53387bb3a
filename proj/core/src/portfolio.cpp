#include "survbias/portfolio.hpp"

#include "survbias/error.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace survbias::portfolio {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::vector<SymbolId> resolve(const RecordStore& store, std::span<const std::string> names) {
    std::vector<SymbolId> ids;
    ids.reserve(names.size());
    for (const auto& n : names)
        if (auto id = store.find_symbol(n)) ids.push_back(*id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

std::vector<DayIndex> snapshot_days(const RecordStore& store, std::span<const universe::ConstituentSnapshot> snaps) {
    std::vector<DayIndex> days;
    for (const auto& s : snaps) {
        auto d = store.calendar().index_of(s.date);
        if (!d) throw Error(ErrorCode::InvalidInput, "snapshot date " + s.date.iso() + " is not a trading date");
        days.push_back(*d);
    }
    return days;
}

double clip(double r, const WeightScheme& scheme) {
    if (!scheme.clip) return r;
    return std::clamp(r, scheme.clip->lower, scheme.clip->upper);
}

// Per-stock return on `day` plus the previous-day proxy, or nullopt when the
// stock has no computable return that day.
struct StockDay {
    double ret;
    double prev_proxy;
};

std::optional<StockDay> stock_day(SymbolId id, DayIndex day, const RecordStore& store,
                                  const TerminalOverrides* terminal) {
    const Bar* prev = store.bar_at(id, day - 1);
    if (!prev) return std::nullopt;
    const double prev_proxy = universe::market_cap_proxy(prev->close, prev->qty);
    if (const Bar* today = store.bar_at(id, day)) return StockDay{stock_daily_return(today->close, prev->close), prev_proxy};
    if (terminal) {
        auto it = terminal->find(id);
        if (it != terminal->end() && it->second.day == day) return StockDay{it->second.value, prev_proxy};
    }
    return std::nullopt;
}

}  // namespace

UniverseSpec UniverseSpec::survivor_only(std::vector<SymbolId> members, std::vector<DayIndex> rebalance_days) {
    UniverseSpec u;
    u.kind_ = UniverseKind::SurvivorOnly;
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    std::sort(rebalance_days.begin(), rebalance_days.end());
    u.days_ = std::move(rebalance_days);
    u.members_.push_back(std::move(members));
    return u;
}

UniverseSpec UniverseSpec::complete(std::vector<DayIndex> snapshot_days, std::vector<std::vector<SymbolId>> members) {
    if (snapshot_days.size() != members.size())
        throw Error(ErrorCode::InvalidInput, "snapshot days and member lists differ in length");
    for (std::size_t i = 1; i < snapshot_days.size(); ++i)
        if (snapshot_days[i] <= snapshot_days[i - 1])
            throw Error(ErrorCode::InvalidInput, "snapshot days must be strictly increasing");
    UniverseSpec u;
    u.kind_ = UniverseKind::Complete;
    for (auto& m : members) {
        std::sort(m.begin(), m.end());
        m.erase(std::unique(m.begin(), m.end()), m.end());
    }
    u.days_ = std::move(snapshot_days);
    u.members_ = std::move(members);
    return u;
}

UniverseSpec UniverseSpec::complete(const RecordStore& store, std::span<const universe::ConstituentSnapshot> snapshots) {
    std::vector<std::vector<SymbolId>> members;
    for (const auto& s : snapshots) members.push_back(resolve(store, s.members));
    return complete(snapshot_days(store, snapshots), std::move(members));
}

UniverseSpec UniverseSpec::survivor_only(const RecordStore& store, std::span<const std::string> final_members,
                                         std::span<const universe::ConstituentSnapshot> schedule) {
    return survivor_only(resolve(store, final_members), snapshot_days(store, schedule));
}

std::span<const SymbolId> UniverseSpec::members_at(DayIndex day) const {
    if (kind_ == UniverseKind::SurvivorOnly) return members_.front();
    auto it = std::upper_bound(days_.begin(), days_.end(), day - 1);
    if (it == days_.begin()) return {};
    return members_[static_cast<std::size_t>(it - days_.begin() - 1)];
}

void WeightScheme::validate() const {
    if (clip && !(clip->lower < 0.0 && 0.0 < clip->upper))
        throw Error(ErrorCode::InvalidConfig, "clip bounds must satisfy lower < 0 < upper");
}

std::string_view to_string(WeightKind k) { return k == WeightKind::EqualWeight ? "equal" : "value"; }

std::optional<WeightKind> parse_weight_kind(std::string_view text) {
    auto s = lower(text);
    if (s == "equal" || s == "ew" || s == "equal-weight") return WeightKind::EqualWeight;
    if (s == "value" || s == "vw" || s == "value-weight") return WeightKind::ValueWeight;
    return std::nullopt;
}

std::string_view to_string(Aggregation a) { return a == Aggregation::DailyRebalanced ? "daily" : "buy_and_hold"; }

std::optional<Aggregation> parse_aggregation(std::string_view text) {
    auto s = lower(text);
    if (s == "daily" || s == "daily_rebalanced") return Aggregation::DailyRebalanced;
    if (s == "buy_and_hold" || s == "per_stock" || s == "buyandhold") return Aggregation::BuyAndHold;
    return std::nullopt;
}

std::vector<Date> ReturnSeries::degenerate_dates() const {
    std::vector<Date> out;
    for (std::size_t i = 0; i < n_active.size(); ++i)
        if (n_active[i] == 0) out.push_back(dates[i]);
    return out;
}

double aggregate(std::span<const Contribution> contributions) {
    if (contributions.empty()) return 0.0;
    double total = 0.0;
    for (const auto& c : contributions) total += c.weight;
    const bool equal = !(total > 0.0);
    // Incremental weighted mean: exact when every return is identical.
    double mean = 0.0, seen = 0.0;
    double lo = contributions.front().ret, hi = lo;
    for (const auto& c : contributions) {
        lo = std::min(lo, c.ret);
        hi = std::max(hi, c.ret);
        const double w = equal ? 1.0 : c.weight;
        if (!(w > 0.0)) continue;
        seen += w;
        mean += (w / seen) * (c.ret - mean);
    }
    return std::clamp(mean, lo, hi);
}

DayReturn portfolio_return(DayIndex day, const UniverseSpec& universe, const WeightScheme& scheme,
                           const RecordStore& store, const TerminalOverrides* terminal) {
    if (day < 1 || static_cast<std::size_t>(day) >= store.calendar().size())
        throw Error(ErrorCode::InvalidInput, "portfolio_return needs a day with a previous trading day");
    std::vector<Contribution> parts;
    for (auto id : universe.members_at(day)) {
        auto sd = stock_day(id, day, store, terminal);
        if (!sd) continue;
        parts.push_back({clip(sd->ret, scheme), scheme.kind == WeightKind::EqualWeight ? 1.0 : sd->prev_proxy});
    }
    return DayReturn{aggregate(parts), static_cast<int>(parts.size())};
}

ReturnSeries build_series(const UniverseSpec& universe, const WeightScheme& scheme, Date start, Date end,
                          const RecordStore& store, const SeriesOptions& options) {
    scheme.validate();
    const auto& cal = store.calendar();
    auto first = cal.ceil(start);
    auto last = cal.floor(end);
    if (!first || !last || *last <= *first)
        throw Error(ErrorCode::EmptyWindow, "no trading days in window " + start.iso() + " .. " + end.iso());

    ReturnSeries series;
    const auto n = static_cast<std::size_t>(*last - *first);
    series.dates.reserve(n);
    series.returns.reserve(n);
    series.n_active.reserve(n);

    if (options.aggregation == Aggregation::DailyRebalanced) {
        for (DayIndex d = *first + 1; d <= *last; ++d) {
            auto r = portfolio_return(d, universe, scheme, store, options.terminal);
            series.dates.push_back(cal.at(d));
            series.returns.push_back(r.ret);
            series.n_active.push_back(r.n_active);
        }
        return series;
    }

    // Buy-and-hold between rebalance days.
    const auto rebalances = universe.rebalance_days();
    std::unordered_map<SymbolId, double> holding;
    std::vector<Contribution> parts;
    std::vector<std::pair<SymbolId, double>> moves;
    for (DayIndex d = *first + 1; d <= *last; ++d) {
        if (d == *first + 1 || std::binary_search(rebalances.begin(), rebalances.end(), d - 1)) holding.clear();
        parts.clear();
        moves.clear();
        for (auto id : universe.members_at(d)) {
            auto sd = stock_day(id, d, store, options.terminal);
            if (!sd) continue;
            auto [it, fresh] = holding.try_emplace(id, 0.0);
            if (fresh) it->second = scheme.kind == WeightKind::EqualWeight ? 1.0 : sd->prev_proxy;
            const double r = clip(sd->ret, scheme);
            parts.push_back({r, it->second});
            moves.emplace_back(id, r);
        }
        for (auto [id, r] : moves) holding[id] *= 1.0 + r;
        series.dates.push_back(cal.at(d));
        series.returns.push_back(aggregate(parts));
        series.n_active.push_back(static_cast<int>(parts.size()));
    }
    return series;
}

}  // namespace survbias::portfolio
