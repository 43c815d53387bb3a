#pragma once

#include "survbias/date.hpp"
#include "survbias/ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace survbias {

using SymbolId = std::uint32_t;
/// Index into TradingCalendar::dates().
using DayIndex = std::int32_t;

class TradingCalendar {
public:
    TradingCalendar() = default;
    /// Sorts and deduplicates.
    explicit TradingCalendar(std::vector<Date> dates);

    std::span<const Date> dates() const { return dates_; }
    std::size_t size() const { return dates_.size(); }
    bool empty() const { return dates_.empty(); }
    Date at(DayIndex day) const { return dates_.at(static_cast<std::size_t>(day)); }
    Date front() const { return dates_.front(); }
    Date back() const { return dates_.back(); }

    std::optional<DayIndex> index_of(Date date) const;
    /// Last trading day on or before `date`.
    std::optional<DayIndex> floor(Date date) const;
    /// First trading day on or after `date`.
    std::optional<DayIndex> ceil(Date date) const;

private:
    std::vector<Date> dates_;
};

inline constexpr double kMissingPrice = std::numeric_limits<double>::quiet_NaN();

/// Compact form of one canonical record. Missing open/high/low are NaN.
struct Bar {
    DayIndex day = 0;
    SymbolId symbol = 0;
    double open = kMissingPrice;
    double high = kMissingPrice;
    double low = kMissingPrice;
    double close = 0.0;
    double qty = 0.0;
    double value = 0.0;
    std::uint32_t isin = 0;  // 0 = none
    std::uint16_t series = 0;
    bool outlier = false;
};

/// Immutable, deduplicated store of equity records with a per-symbol and a
/// per-day index. Holds at most one record per (symbol, day).
class RecordStore {
public:
    const TradingCalendar& calendar() const { return calendar_; }
    std::size_t size() const { return bars_.size(); }
    std::size_t symbol_count() const { return symbols_.size(); }

    const std::string& symbol(SymbolId id) const { return symbols_.at(id); }
    std::optional<SymbolId> find_symbol(std::string_view name) const;
    std::string_view series_name(std::uint16_t id) const { return series_.at(id); }
    std::string_view isin_name(std::uint32_t id) const { return isins_.at(id); }

    std::span<const Bar> all_bars() const { return bars_; }
    /// Bars of one symbol in day order.
    std::span<const Bar> bars(SymbolId id) const;
    const Bar* bar_at(SymbolId id, DayIndex day) const;
    /// Indices into all_bars() of every bar on `day`, ordered by symbol name.
    std::span<const std::uint32_t> bars_on_day(DayIndex day) const;
    std::optional<DayIndex> last_trade_day(SymbolId id) const;

    ingest::TradingRecord record(const Bar& bar) const;
    /// All records in canonical order (date, symbol, series).
    std::vector<ingest::TradingRecord> records() const;

    /// Builds a store from records that already satisfy key uniqueness.
    /// Outlier flags are taken as given. Throws InvalidInput on a duplicate
    /// (symbol, date).
    static RecordStore from_records(std::span<const ingest::TradingRecord> records);

private:
    friend class StoreBuilder;

    TradingCalendar calendar_;
    std::vector<std::string> symbols_;  // sorted
    std::unordered_map<std::string, SymbolId> symbol_ids_;
    std::vector<std::string> series_;
    std::vector<std::string> isins_;
    std::vector<Bar> bars_;  // sorted by (symbol, day)
    std::vector<std::uint32_t> symbol_offsets_;
    std::vector<std::uint32_t> day_bars_;
    std::vector<std::uint32_t> day_offsets_;
};

struct StoreBuildCounts {
    std::size_t duplicates = 0;
    std::size_t conflicts = 0;
    std::size_t outliers = 0;
};

/// Streams records in file order, then deduplicates (first occurrence wins),
/// optionally flags outliers and freezes the result into a RecordStore.
class StoreBuilder {
public:
    void add(const ingest::TradingRecord& record);
    std::size_t pending() const { return pending_.size(); }

    /// `outliers` = nullopt keeps the incoming flags.
    RecordStore finish(std::optional<ingest::OutlierRule> outliers, StoreBuildCounts* counts = nullptr);

private:
    struct Pending {
        std::int32_t date;
        std::uint32_t symbol;  // interned, insertion order
        std::uint16_t series;
        std::uint32_t isin;
        double open, high, low, close, qty, value;
        bool outlier;
    };
    std::uint32_t intern(std::unordered_map<std::string, std::uint32_t>& ids, std::vector<std::string>& names,
                         const std::string& name);

    std::vector<Pending> pending_;
    std::unordered_map<std::string, std::uint32_t> symbol_ids_, series_ids_, isin_ids_;
    std::vector<std::string> symbol_names_, series_names_, isin_names_{""};
};

struct IngestStats {
    std::size_t files_seen = 0;
    std::size_t files_parsed = 0;
    std::size_t files_schema_unrecognized = 0;
    std::size_t files_empty = 0;
    std::size_t files_unreadable = 0;
    std::size_t raw_records = 0;
    std::size_t skipped_records = 0;
    std::size_t non_equity_records = 0;
    std::size_t duplicate_records = 0;
    std::size_t conflicting_duplicates = 0;
    std::size_t retained_records = 0;
    std::size_t outlier_flags = 0;
    std::size_t unique_symbols = 0;
    std::size_t trading_days = 0;
    std::optional<Date> first_date;
    std::optional<Date> last_date;
};

struct FileIssue {
    std::filesystem::path path;
    std::string code;
    std::string message;
};

struct IngestOptions {
    ingest::OutlierRule outliers{};
    std::string equity_series = "EQ";
};

struct IngestResult {
    RecordStore store;
    IngestStats stats;
    std::vector<FileIssue> issues;
};

/// Full pipeline over an explicit file list, processed in the given order.
IngestResult ingest_files(std::span<const std::filesystem::path> files, const IngestOptions& options = {});

/// Collects *.csv files (case-insensitive) sorted by file name. Throws
/// FileUnreadable when the directory is missing and InvalidInput when it
/// holds no CSV file.
std::vector<std::filesystem::path> list_input_files(const std::filesystem::path& dir);

IngestResult ingest_directory(const std::filesystem::path& dir, const IngestOptions& options = {});

void write_canonical(const RecordStore& store, std::ostream& out);
void write_canonical(const RecordStore& store, const std::filesystem::path& path);
RecordStore read_canonical(std::istream& in);
RecordStore read_canonical(const std::filesystem::path& path);

}  // namespace survbias
