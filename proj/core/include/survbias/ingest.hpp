#pragma once

#include "survbias/date.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace survbias::ingest {

/// Canonical bhavcopy fields. Order matches the canonical store header.
enum class Field : std::uint8_t { Date, Symbol, Series, Open, High, Low, Close, TotTrdQty, TotTrdVal, Isin };
inline constexpr std::size_t kFieldCount = 10;

std::string_view field_name(Field field);

inline constexpr std::string_view kCanonicalHeader =
    "DATE,SYMBOL,SERIES,OPEN,HIGH,LOW,CLOSE,TOTTRDQTY,TOTTRDVAL,ISIN,OUTLIER";

struct RawFile {
    std::filesystem::path path;
    std::optional<Date> trade_date_hint;
    std::vector<std::string> header_fields;
};

/// Reads the header line of `path` and infers the trade date from the file
/// name. Throws FileUnreadable / EmptyFile.
RawFile open_raw_file(const std::filesystem::path& path);

struct ColumnMapping {
    std::array<std::optional<std::size_t>, kFieldCount> column{};
    /// Unit multiplier applied after parsing (turnover reported in lakhs).
    std::array<double, kFieldCount> scale{1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
    std::vector<std::string> source_names;

    bool has(Field f) const { return column[static_cast<std::size_t>(f)].has_value(); }
    std::optional<std::size_t> index(Field f) const { return column[static_cast<std::size_t>(f)]; }
    /// Header name the field was mapped from, empty when absent.
    std::string_view source(Field f) const;
};

/// Maps a header row onto the canonical fields through the alias table.
/// Matching ignores case and non-alphanumeric characters; unknown columns are
/// ignored. Throws SchemaUnrecognized when SYMBOL or CLOSE is missing.
ColumnMapping detect_schema(std::span<const std::string> header);

struct TradingRecord {
    Date date;
    std::string symbol;
    std::string series;
    std::optional<double> open;
    std::optional<double> high;
    std::optional<double> low;
    double close = 0.0;
    double traded_qty = 0.0;
    double traded_value = 0.0;
    std::optional<std::string> isin;
    bool outlier_flag = false;

    friend bool operator==(const TradingRecord&, const TradingRecord&) = default;
};

/// True when every field except the outlier flag matches.
bool same_values(const TradingRecord& a, const TradingRecord& b);

struct ParseResult {
    std::vector<TradingRecord> records;
    std::size_t raw_rows = 0;
    std::size_t skipped_rows = 0;
};

/// Parses the data rows of an in-memory file body (header line included).
/// Rows with a missing symbol, unparseable numbers or dates, a non-positive
/// close or inconsistent OHLC are skipped and counted.
ParseResult parse_text(std::string_view content, const ColumnMapping& mapping,
                       std::optional<Date> date_hint = std::nullopt);

/// Throws FileUnreadable on I/O failure, EmptyFile when no data row exists.
ParseResult parse_file(const RawFile& file, const ColumnMapping& mapping);

std::vector<TradingRecord> filter_equity(std::vector<TradingRecord> records, std::string_view series = "EQ");

struct DedupeResult {
    std::vector<TradingRecord> records;
    std::size_t duplicates = 0;
    /// Subset of duplicates whose values differ from the kept row.
    std::size_t conflicts = 0;
};

/// Keeps the first occurrence of every (date, symbol, series) key, preserving
/// the relative order of the survivors.
DedupeResult dedupe(std::vector<TradingRecord> records);

struct OutlierRule {
    std::size_t window = 30;
    double threshold_sd = 10.0;
};

/// Flags for one price series: true iff |close - trailing mean| exceeds
/// threshold x trailing sample std, computed over up to `window` preceding
/// observations. At least two preceding observations are required.
std::vector<bool> trailing_outliers(std::span<const double> closes, const OutlierRule& rule = {});

/// Sets outlier_flag per symbol run. Records must be sorted by (symbol, date);
/// throws InvalidInput otherwise. Flagged records are kept. Returns the
/// number of flagged records.
std::size_t flag_outliers(std::span<TradingRecord> records, const OutlierRule& rule = {});

}  // namespace survbias::ingest
