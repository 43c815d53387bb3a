#pragma once

#include "survbias/date.hpp"
#include "survbias/ingest.hpp"
#include "survbias/store.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace survbias::universe {

/// Close price x traded quantity, the ranking stand-in for market cap.
constexpr double market_cap_proxy(double close, double traded_qty) { return close * traded_qty; }

struct RankedEntry {
    std::string symbol;
    double proxy = 0.0;

    friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

/// Descending proxy order; equal proxies ordered by ascending symbol.
struct SnapshotRanking {
    Date date;
    std::vector<RankedEntry> entries;
};

/// Ranks every symbol present in `records` (all dated `date`). A symbol
/// appearing more than once keeps its largest proxy. Throws EmptyDate when
/// no record carries `date`.
SnapshotRanking rank_snapshot(Date date, std::span<const ingest::TradingRecord> records);
SnapshotRanking rank_snapshot(const RecordStore& store, DayIndex day);

struct RankBand {
    int low = 151;
    int high = 400;

    friend bool operator==(const RankBand&, const RankBand&) = default;
};

struct ConstituentSnapshot {
    Date date;
    std::vector<std::string> members;  // sorted ascending

    bool contains(std::string_view symbol) const;
};

/// Members are the symbols at 1-based ranks [low, high], truncated when
/// fewer are ranked. Throws InvalidConfig on an invalid band.
ConstituentSnapshot select_band(const SnapshotRanking& ranking, RankBand band = {});

enum class Frequency { Quarterly, SemiAnnual };

std::string_view to_string(Frequency f);
std::optional<Frequency> parse_frequency(std::string_view text);

/// Snapshot dates: for every calendar quarter (Mar/Jun/Sep/Dec) holding at
/// least one trading date, the last trading date on or before the quarter
/// end. SemiAnnual keeps only the March and September quarters.
std::vector<Date> snapshot_dates(const TradingCalendar& calendar, Frequency frequency = Frequency::Quarterly);

struct Reconstruction {
    std::vector<SnapshotRanking> rankings;
    std::vector<ConstituentSnapshot> snapshots;
};

Reconstruction reconstruct(const RecordStore& store, RankBand band = {},
                           Frequency frequency = Frequency::Quarterly);

enum class RemovalClass { Survivor, Delisted, Graduated, Demoted };

std::string_view to_string(RemovalClass c);
std::optional<RemovalClass> parse_removal_class(std::string_view text);

struct MembershipTimeline {
    std::string symbol;
    Date entry;
    Date exit;
    std::vector<Date> member_dates;
    RemovalClass classification = RemovalClass::Survivor;
    std::optional<Date> last_trade;

    std::size_t snapshot_count() const { return member_dates.size(); }
};

/// One timeline per ever-member, sorted by symbol. Gaps between member
/// snapshots are kept in member_dates. Throws InvalidInput when snapshots
/// are empty or not strictly date-ordered.
std::vector<MembershipTimeline> build_timeline(std::span<const ConstituentSnapshot> snapshots);

struct ClassificationRule {
    int dead_threshold_days = 365;
};

/// Survivor iff a member on `final_snapshot`; otherwise Delisted iff
/// asof - last trade >= dead_threshold_days; the remaining (still-trading)
/// removed symbols are split at the median of their proxy on their last
/// trade date: the upper floor(n/2) by (proxy desc, symbol asc) are
/// Graduated, the rest Demoted. Also fills last_trade.
void classify_removals(std::span<MembershipTimeline> timelines, const RecordStore& store, Date asof,
                       Date final_snapshot, const ClassificationRule& rule = {});

struct ConsistencyChecks {
    bool survivors_recently_active = true;
    std::size_t inactive_survivors = 0;
    bool exits_after_entries = true;
    std::size_t exit_before_entry = 0;
    double mean_exit_age_removed = 0.0;
    double mean_exit_age_survivors = 0.0;
    bool removed_exits_older = true;
};

struct SpotCheck {
    std::string symbol;
    RemovalClass classification;
    bool consistent = false;
};

struct ValidationReport {
    std::size_t current_match_count = 0;
    std::size_t current_list_size = 0;
    double match_fraction = 0.0;
    std::vector<std::string> missing_from_reconstruction;
    std::vector<std::string> extra_in_reconstruction;
    ConsistencyChecks consistency;
    std::vector<SpotCheck> spot_checks;

    bool all_passed() const;
};

struct ValidationOptions {
    Date asof;
    int activity_window_days = 90;
    int dead_threshold_days = 365;
    std::size_t spot_check_per_group = 5;
    std::uint64_t seed = 42;
};

/// Compares the final snapshot with the official list and runs the
/// consistency checks. Throws InvalidInput on an empty official list.
ValidationReport validate_reconstruction(const ConstituentSnapshot& final_snapshot,
                                         std::span<const std::string> official_list,
                                         std::span<const MembershipTimeline> timelines,
                                         const ValidationOptions& options);

/// Plain text, one symbol per line; blank lines and '#' comments ignored.
std::vector<std::string> read_symbol_list(const std::filesystem::path& path);

}  // namespace survbias::universe
