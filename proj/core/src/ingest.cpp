#include "survbias/ingest.hpp"

#include "survbias/csv.hpp"
#include "survbias/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

namespace survbias::ingest {

namespace {

struct Alias {
    std::string_view normalized;
    Field field;
    double scale = 1.0;
};

// Alias order is priority order within a field. Names cover the legacy
// cmDDMMMYYYYbhav layout, sec_bhavdata_full and the 2024 UDiFF layout.
constexpr Alias kAliases[] = {
    {"TIMESTAMP", Field::Date},
    {"DATE", Field::Date},
    {"TRADDT", Field::Date},
    {"DATE1", Field::Date},
    {"TRADEDATE", Field::Date},
    {"BIZDT", Field::Date},
    {"SYMBOL", Field::Symbol},
    {"TCKRSYMB", Field::Symbol},
    {"TICKER", Field::Symbol},
    {"SECURITYSYMBOL", Field::Symbol},
    {"SERIES", Field::Series},
    {"SCTYSRS", Field::Series},
    {"OPEN", Field::Open},
    {"OPNPRIC", Field::Open},
    {"OPENPRICE", Field::Open},
    {"HIGH", Field::High},
    {"HGHPRIC", Field::High},
    {"HIGHPRICE", Field::High},
    {"LOW", Field::Low},
    {"LWPRIC", Field::Low},
    {"LOWPRICE", Field::Low},
    {"CLOSE", Field::Close},
    {"CLSPRIC", Field::Close},
    {"CLOSEPRICE", Field::Close},
    {"TOTTRDQTY", Field::TotTrdQty},
    {"TTLTRADGVOL", Field::TotTrdQty},
    {"TTLTRDQNTY", Field::TotTrdQty},
    {"TOTALTRADEDQUANTITY", Field::TotTrdQty},
    {"VOLUME", Field::TotTrdQty},
    {"TOTTRDVAL", Field::TotTrdVal},
    {"TTLTRFVAL", Field::TotTrdVal},
    {"TOTALTRADEDVALUE", Field::TotTrdVal},
    {"TURNOVER", Field::TotTrdVal},
    {"TURNOVERLACS", Field::TotTrdVal, 1e5},
    {"ISIN", Field::Isin},
    {"ISINCODE", Field::Isin},
};

constexpr std::string_view kFieldNames[kFieldCount] = {"DATE",  "SYMBOL", "SERIES",    "OPEN",      "HIGH",
                                                       "LOW",   "CLOSE",  "TOTTRDQTY", "TOTTRDVAL", "ISIN"};

std::string normalize_header(std::string_view name) {
    std::string out;
    for (char c : name) {
        auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) out.push_back(static_cast<char>(std::toupper(uc)));
    }
    return out;
}

std::string upper_trimmed(std::string_view s) {
    s = csv::trim(s);
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string_view strip_bom(std::string_view s) {
    if (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xEF && static_cast<unsigned char>(s[1]) == 0xBB &&
        static_cast<unsigned char>(s[2]) == 0xBF)
        s.remove_prefix(3);
    return s;
}

bool valid_isin(std::string_view s) {
    if (s.size() != 12) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)); });
}

enum class Cell { Absent, Ok, Bad };

Cell numeric_cell(const std::vector<std::string>& row, const ColumnMapping& m, Field f, double& out) {
    auto idx = m.index(f);
    if (!idx) return Cell::Absent;
    if (*idx >= row.size()) return Cell::Bad;
    auto text = csv::trim(row[*idx]);
    if (text.empty()) return Cell::Absent;
    auto v = csv::parse_number(text);
    if (!v) return Cell::Bad;
    out = *v * m.scale[static_cast<std::size_t>(f)];
    return Cell::Ok;
}

std::optional<TradingRecord> parse_row(const std::vector<std::string>& row, const ColumnMapping& m,
                                       std::optional<Date> hint) {
    TradingRecord rec;
    auto sym_idx = *m.index(Field::Symbol);
    if (sym_idx >= row.size()) return std::nullopt;
    rec.symbol = upper_trimmed(row[sym_idx]);
    if (rec.symbol.empty()) return std::nullopt;

    if (auto idx = m.index(Field::Series); idx && *idx < row.size()) rec.series = upper_trimmed(row[*idx]);

    if (auto idx = m.index(Field::Date); idx && *idx < row.size() && !csv::trim(row[*idx]).empty()) {
        auto d = parse_date(row[*idx]);
        if (!d) return std::nullopt;
        rec.date = *d;
    } else if (hint) {
        rec.date = *hint;
    } else {
        return std::nullopt;
    }

    double close = 0.0;
    if (numeric_cell(row, m, Field::Close, close) != Cell::Ok || !(close > 0.0)) return std::nullopt;
    rec.close = close;

    double v = 0.0;
    switch (numeric_cell(row, m, Field::TotTrdQty, v)) {
        case Cell::Bad: return std::nullopt;
        case Cell::Ok:
            if (v < 0.0) return std::nullopt;
            rec.traded_qty = v;
            break;
        case Cell::Absent: break;
    }
    switch (numeric_cell(row, m, Field::TotTrdVal, v)) {
        case Cell::Bad: return std::nullopt;
        case Cell::Ok:
            if (v < 0.0) return std::nullopt;
            rec.traded_value = v;
            break;
        case Cell::Absent: break;
    }

    auto optional_price = [&](Field f, std::optional<double>& dst) {
        double p = 0.0;
        switch (numeric_cell(row, m, f, p)) {
            case Cell::Bad: return false;
            case Cell::Ok:
                if (p < 0.0) return false;
                dst = p;
                return true;
            case Cell::Absent: return true;
        }
        return true;
    };
    if (!optional_price(Field::Open, rec.open) || !optional_price(Field::High, rec.high) ||
        !optional_price(Field::Low, rec.low))
        return std::nullopt;
    if (rec.open && rec.high && rec.low) {
        if (*rec.low > std::min(*rec.open, rec.close) || *rec.high < std::max(*rec.open, rec.close))
            return std::nullopt;
    }

    if (auto idx = m.index(Field::Isin); idx && *idx < row.size()) {
        auto isin = upper_trimmed(row[*idx]);
        if (valid_isin(isin)) rec.isin = std::move(isin);
    }
    return rec;
}

}  // namespace

std::string_view field_name(Field field) { return kFieldNames[static_cast<std::size_t>(field)]; }

std::string_view ColumnMapping::source(Field f) const {
    auto idx = index(f);
    if (!idx || *idx >= source_names.size()) return {};
    return source_names[*idx];
}

ColumnMapping detect_schema(std::span<const std::string> header) {
    if (header.empty()) throw Error(ErrorCode::SchemaUnrecognized, "empty header");
    ColumnMapping mapping;
    mapping.source_names.assign(header.begin(), header.end());
    std::vector<std::string> normalized;
    normalized.reserve(header.size());
    for (const auto& h : header) normalized.push_back(normalize_header(strip_bom(h)));

    for (const auto& alias : kAliases) {
        auto slot = static_cast<std::size_t>(alias.field);
        if (mapping.column[slot]) continue;
        auto it = std::find(normalized.begin(), normalized.end(), alias.normalized);
        if (it != normalized.end()) {
            mapping.column[slot] = static_cast<std::size_t>(it - normalized.begin());
            mapping.scale[slot] = alias.scale;
        }
    }
    if (!mapping.has(Field::Symbol) || !mapping.has(Field::Close)) {
        std::string names;
        for (const auto& h : header) names += (names.empty() ? "" : ",") + h;
        throw Error(ErrorCode::SchemaUnrecognized, "no symbol/close column in header [" + names + "]");
    }
    return mapping;
}

RawFile open_raw_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileUnreadable, "cannot open " + path.string());
    RawFile file;
    file.path = path;
    file.trade_date_hint = date_from_filename(path.filename().string());
    std::string line;
    while (std::getline(in, line)) {
        auto body = csv::trim(strip_bom(line));
        if (body.empty()) continue;
        for (auto& f : csv::split_line(body)) file.header_fields.emplace_back(csv::trim(f));
        break;
    }
    if (in.bad()) throw Error(ErrorCode::FileUnreadable, "read error on " + path.string());
    if (file.header_fields.empty()) throw Error(ErrorCode::EmptyFile, "no header in " + path.string());
    return file;
}

ParseResult parse_text(std::string_view content, const ColumnMapping& mapping, std::optional<Date> date_hint) {
    if (!mapping.has(Field::Symbol) || !mapping.has(Field::Close))
        throw Error(ErrorCode::SchemaUnrecognized, "mapping lacks symbol/close");
    ParseResult result;
    std::vector<std::string> row;
    bool header_seen = false;
    std::size_t pos = 0;
    content = strip_bom(content);
    while (pos < content.size()) {
        auto end = content.find('\n', pos);
        if (end == std::string_view::npos) end = content.size();
        auto line = content.substr(pos, end - pos);
        pos = end + 1;
        if (csv::trim(line).empty()) continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        ++result.raw_rows;
        csv::split_line(line, row);
        if (auto rec = parse_row(row, mapping, date_hint))
            result.records.push_back(std::move(*rec));
        else
            ++result.skipped_rows;
    }
    return result;
}

ParseResult parse_file(const RawFile& file, const ColumnMapping& mapping) {
    std::ifstream in(file.path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileUnreadable, "cannot open " + file.path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::FileUnreadable, "read error on " + file.path.string());
    auto result = parse_text(buf.str(), mapping, file.trade_date_hint);
    if (result.raw_rows == 0) throw Error(ErrorCode::EmptyFile, "no data rows in " + file.path.string());
    return result;
}

std::vector<TradingRecord> filter_equity(std::vector<TradingRecord> records, std::string_view series) {
    std::erase_if(records, [&](const TradingRecord& r) { return r.series != series; });
    return records;
}

bool same_values(const TradingRecord& a, const TradingRecord& b) {
    return std::tie(a.date, a.symbol, a.series, a.open, a.high, a.low, a.close, a.traded_qty, a.traded_value,
                    a.isin) == std::tie(b.date, b.symbol, b.series, b.open, b.high, b.low, b.close, b.traded_qty,
                                        b.traded_value, b.isin);
}

DedupeResult dedupe(std::vector<TradingRecord> records) {
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto key = [&](std::size_t i) { return std::tie(records[i].date, records[i].symbol, records[i].series); };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

    DedupeResult result;
    std::vector<bool> keep(records.size(), false);
    std::size_t run_start = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k > 0 && key(order[k]) == key(order[k - 1])) {
            ++result.duplicates;
            // order[] is stable, so the first of each run is the earliest row.
            if (!same_values(records[order[run_start]], records[order[k]])) ++result.conflicts;
            continue;
        }
        run_start = k;
        keep[order[k]] = true;
    }
    result.records.reserve(records.size() - result.duplicates);
    for (std::size_t i = 0; i < records.size(); ++i)
        if (keep[i]) result.records.push_back(std::move(records[i]));
    return result;
}

std::vector<bool> trailing_outliers(std::span<const double> closes, const OutlierRule& rule) {
    std::vector<bool> flags(closes.size(), false);
    if (rule.window < 2) return flags;
    for (std::size_t i = 2; i < closes.size(); ++i) {
        std::size_t n = std::min(i, rule.window);
        auto window = closes.subspan(i - n, n);
        double mean = std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(n);
        double ss = 0.0;
        for (double x : window) ss += (x - mean) * (x - mean);
        double sd = std::sqrt(ss / static_cast<double>(n - 1));
        flags[i] = std::abs(closes[i] - mean) > rule.threshold_sd * sd;
    }
    return flags;
}

std::size_t flag_outliers(std::span<TradingRecord> records, const OutlierRule& rule) {
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& a = records[i - 1];
        const auto& b = records[i];
        if (std::tie(b.symbol, b.date) < std::tie(a.symbol, a.date))
            throw Error(ErrorCode::InvalidInput, "flag_outliers requires records sorted by (symbol, date)");
    }
    std::size_t flagged = 0;
    std::vector<double> closes;
    std::size_t start = 0;
    while (start < records.size()) {
        std::size_t end = start;
        closes.clear();
        while (end < records.size() && records[end].symbol == records[start].symbol) closes.push_back(records[end++].close);
        auto flags = trailing_outliers(closes, rule);
        for (std::size_t k = 0; k < flags.size(); ++k) {
            records[start + k].outlier_flag = flags[k];
            flagged += flags[k] ? 1 : 0;
        }
        start = end;
    }
    return flagged;
}

}  // namespace survbias::ingest
