#include "survbias/universe.hpp"

#include "survbias/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <random>
#include <unordered_map>

namespace survbias::universe {

namespace {

void sort_ranking(std::vector<RankedEntry>& entries) {
    std::sort(entries.begin(), entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
        if (a.proxy != b.proxy) return a.proxy > b.proxy;
        return a.symbol < b.symbol;
    });
}

}  // namespace

SnapshotRanking rank_snapshot(Date date, std::span<const ingest::TradingRecord> records) {
    std::unordered_map<std::string, double> best;
    for (const auto& r : records) {
        if (r.date != date) continue;
        double proxy = market_cap_proxy(r.close, r.traded_qty);
        auto [it, inserted] = best.try_emplace(r.symbol, proxy);
        if (!inserted) it->second = std::max(it->second, proxy);
    }
    if (best.empty()) throw Error(ErrorCode::EmptyDate, "no records on " + date.iso());
    SnapshotRanking ranking{date, {}};
    ranking.entries.reserve(best.size());
    for (auto& [symbol, proxy] : best) ranking.entries.push_back({symbol, proxy});
    sort_ranking(ranking.entries);
    return ranking;
}

SnapshotRanking rank_snapshot(const RecordStore& store, DayIndex day) {
    if (day < 0 || static_cast<std::size_t>(day) >= store.calendar().size())
        throw Error(ErrorCode::EmptyDate, "day index outside calendar");
    auto on_day = store.bars_on_day(day);
    auto date = store.calendar().at(day);
    if (on_day.empty()) throw Error(ErrorCode::EmptyDate, "no records on " + date.iso());
    SnapshotRanking ranking{date, {}};
    ranking.entries.reserve(on_day.size());
    const auto bars = store.all_bars();
    for (auto idx : on_day) {
        const auto& b = bars[idx];
        ranking.entries.push_back({store.symbol(b.symbol), market_cap_proxy(b.close, b.qty)});
    }
    sort_ranking(ranking.entries);
    return ranking;
}

bool ConstituentSnapshot::contains(std::string_view symbol) const {
    return std::binary_search(members.begin(), members.end(), symbol);
}

ConstituentSnapshot select_band(const SnapshotRanking& ranking, RankBand band) {
    if (band.low < 1 || band.high < band.low) throw Error(ErrorCode::InvalidConfig, "rank band must satisfy 1 <= low <= high");
    ConstituentSnapshot snap{ranking.date, {}};
    const auto n = ranking.entries.size();
    for (auto rank = static_cast<std::size_t>(band.low); rank <= static_cast<std::size_t>(band.high) && rank <= n; ++rank)
        snap.members.push_back(ranking.entries[rank - 1].symbol);
    std::sort(snap.members.begin(), snap.members.end());
    return snap;
}

std::string_view to_string(Frequency f) { return f == Frequency::Quarterly ? "quarterly" : "semiannual"; }

std::optional<Frequency> parse_frequency(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "quarterly") return Frequency::Quarterly;
    if (s == "semiannual" || s == "semi-annual" || s == "semi_annual") return Frequency::SemiAnnual;
    return std::nullopt;
}

std::vector<Date> snapshot_dates(const TradingCalendar& calendar, Frequency frequency) {
    // Last trading date within each (year, quarter) bucket.
    std::map<std::pair<int, unsigned>, Date> last_in_quarter;
    for (auto d : calendar.dates()) {
        auto key = std::make_pair(d.year(), (d.month() - 1) / 3);
        last_in_quarter[key] = d;
    }
    std::vector<Date> out;
    for (const auto& [key, date] : last_in_quarter) {
        if (frequency == Frequency::SemiAnnual && key.second != 0 && key.second != 2) continue;
        out.push_back(date);
    }
    return out;
}

Reconstruction reconstruct(const RecordStore& store, RankBand band, Frequency frequency) {
    Reconstruction result;
    for (auto date : snapshot_dates(store.calendar(), frequency)) {
        auto day = *store.calendar().index_of(date);
        result.rankings.push_back(rank_snapshot(store, day));
        result.snapshots.push_back(select_band(result.rankings.back(), band));
    }
    return result;
}

std::string_view to_string(RemovalClass c) {
    switch (c) {
        case RemovalClass::Survivor: return "Survivor";
        case RemovalClass::Delisted: return "Delisted";
        case RemovalClass::Graduated: return "Graduated";
        case RemovalClass::Demoted: return "Demoted";
    }
    return "Unknown";
}

std::optional<RemovalClass> parse_removal_class(std::string_view text) {
    for (auto c : {RemovalClass::Survivor, RemovalClass::Delisted, RemovalClass::Graduated, RemovalClass::Demoted})
        if (to_string(c) == text) return c;
    return std::nullopt;
}

std::vector<MembershipTimeline> build_timeline(std::span<const ConstituentSnapshot> snapshots) {
    if (snapshots.empty()) throw Error(ErrorCode::InvalidInput, "build_timeline needs at least one snapshot");
    for (std::size_t i = 1; i < snapshots.size(); ++i)
        if (!(snapshots[i - 1].date < snapshots[i].date))
            throw Error(ErrorCode::InvalidInput, "snapshots must be strictly date-ordered");
    std::map<std::string, MembershipTimeline> by_symbol;
    for (const auto& snap : snapshots) {
        for (const auto& sym : snap.members) {
            auto [it, inserted] = by_symbol.try_emplace(sym);
            auto& t = it->second;
            if (inserted) {
                t.symbol = sym;
                t.entry = snap.date;
            }
            t.exit = snap.date;
            t.member_dates.push_back(snap.date);
        }
    }
    std::vector<MembershipTimeline> out;
    out.reserve(by_symbol.size());
    for (auto& [sym, t] : by_symbol) out.push_back(std::move(t));
    return out;
}

void classify_removals(std::span<MembershipTimeline> timelines, const RecordStore& store, Date asof,
                       Date final_snapshot, const ClassificationRule& rule) {
    struct Candidate {
        std::size_t index;
        double proxy;
    };
    std::vector<Candidate> still_trading;
    for (std::size_t i = 0; i < timelines.size(); ++i) {
        auto& t = timelines[i];
        t.last_trade.reset();
        double last_proxy = 0.0;
        if (auto id = store.find_symbol(t.symbol)) {
            auto bars = store.bars(*id);
            if (!bars.empty()) {
                t.last_trade = store.calendar().at(bars.back().day);
                last_proxy = market_cap_proxy(bars.back().close, bars.back().qty);
            }
        }
        if (t.exit == final_snapshot) {
            t.classification = RemovalClass::Survivor;
        } else if (!t.last_trade || days_between(*t.last_trade, asof) >= rule.dead_threshold_days) {
            t.classification = RemovalClass::Delisted;
        } else {
            still_trading.push_back({i, last_proxy});
        }
    }
    std::sort(still_trading.begin(), still_trading.end(), [&](const Candidate& a, const Candidate& b) {
        if (a.proxy != b.proxy) return a.proxy > b.proxy;
        return timelines[a.index].symbol < timelines[b.index].symbol;
    });
    const std::size_t graduated = still_trading.size() / 2;
    for (std::size_t k = 0; k < still_trading.size(); ++k)
        timelines[still_trading[k].index].classification = k < graduated ? RemovalClass::Graduated : RemovalClass::Demoted;
}

bool ValidationReport::all_passed() const {
    bool spots = std::all_of(spot_checks.begin(), spot_checks.end(), [](const SpotCheck& s) { return s.consistent; });
    return current_match_count == current_list_size && consistency.survivors_recently_active &&
           consistency.exits_after_entries && consistency.removed_exits_older && spots;
}

ValidationReport validate_reconstruction(const ConstituentSnapshot& final_snapshot,
                                         std::span<const std::string> official_list,
                                         std::span<const MembershipTimeline> timelines,
                                         const ValidationOptions& options) {
    if (official_list.empty()) throw Error(ErrorCode::InvalidInput, "official constituent list is empty");
    ValidationReport report;
    std::vector<std::string> official(official_list.begin(), official_list.end());
    std::sort(official.begin(), official.end());
    official.erase(std::unique(official.begin(), official.end()), official.end());
    report.current_list_size = official.size();
    for (const auto& s : official) {
        if (final_snapshot.contains(s))
            ++report.current_match_count;
        else
            report.missing_from_reconstruction.push_back(s);
    }
    for (const auto& s : final_snapshot.members)
        if (!std::binary_search(official.begin(), official.end(), s)) report.extra_in_reconstruction.push_back(s);
    report.match_fraction = static_cast<double>(report.current_match_count) / static_cast<double>(report.current_list_size);

    auto& c = report.consistency;
    double age_removed = 0.0, age_surv = 0.0;
    std::size_t n_removed = 0, n_surv = 0;
    std::vector<std::size_t> survivors, removed;
    for (std::size_t i = 0; i < timelines.size(); ++i) {
        const auto& t = timelines[i];
        if (t.exit < t.entry) ++c.exit_before_entry;
        double age = days_between(t.exit, options.asof);
        if (t.classification == RemovalClass::Survivor) {
            survivors.push_back(i);
            age_surv += age;
            ++n_surv;
            if (!t.last_trade || days_between(*t.last_trade, options.asof) > options.activity_window_days)
                ++c.inactive_survivors;
        } else {
            removed.push_back(i);
            age_removed += age;
            ++n_removed;
        }
    }
    c.survivors_recently_active = c.inactive_survivors == 0;
    c.exits_after_entries = c.exit_before_entry == 0;
    c.mean_exit_age_survivors = n_surv ? age_surv / static_cast<double>(n_surv) : 0.0;
    c.mean_exit_age_removed = n_removed ? age_removed / static_cast<double>(n_removed) : 0.0;
    // Vacuously true when either group is empty.
    c.removed_exits_older = n_removed == 0 || n_surv == 0 || c.mean_exit_age_removed > c.mean_exit_age_survivors;

    std::mt19937_64 rng(options.seed);
    auto spot = [&](std::vector<std::size_t> pool) {
        std::vector<std::size_t> picked;
        std::sample(pool.begin(), pool.end(), std::back_inserter(picked), options.spot_check_per_group, rng);
        for (auto i : picked) {
            const auto& t = timelines[i];
            bool ok = false;
            const bool in_final = t.exit == final_snapshot.date && final_snapshot.contains(t.symbol);
            const int idle = t.last_trade ? days_between(*t.last_trade, options.asof) : INT32_MAX;
            switch (t.classification) {
                case RemovalClass::Survivor: ok = in_final && idle <= options.activity_window_days; break;
                case RemovalClass::Delisted: ok = !in_final && idle >= options.dead_threshold_days; break;
                case RemovalClass::Graduated:
                case RemovalClass::Demoted: ok = !in_final && idle < options.dead_threshold_days; break;
            }
            report.spot_checks.push_back({t.symbol, t.classification, ok});
        }
    };
    spot(survivors);
    spot(removed);
    return report;
}

std::vector<std::string> read_symbol_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileUnreadable, "cannot open symbol list " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string sym;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c)) && c != ',') sym.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        if (!sym.empty()) out.push_back(std::move(sym));
    }
    return out;
}

}  // namespace survbias::universe
