#include "survbias/store.hpp"

#include "survbias/csv.hpp"
#include "survbias/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <tuple>

namespace survbias {

// ---------------------------------------------------------------------------
// TradingCalendar

TradingCalendar::TradingCalendar(std::vector<Date> dates) : dates_(std::move(dates)) {
    std::sort(dates_.begin(), dates_.end());
    dates_.erase(std::unique(dates_.begin(), dates_.end()), dates_.end());
}

std::optional<DayIndex> TradingCalendar::index_of(Date date) const {
    auto it = std::lower_bound(dates_.begin(), dates_.end(), date);
    if (it == dates_.end() || *it != date) return std::nullopt;
    return static_cast<DayIndex>(it - dates_.begin());
}

std::optional<DayIndex> TradingCalendar::floor(Date date) const {
    auto it = std::upper_bound(dates_.begin(), dates_.end(), date);
    if (it == dates_.begin()) return std::nullopt;
    return static_cast<DayIndex>(it - dates_.begin() - 1);
}

std::optional<DayIndex> TradingCalendar::ceil(Date date) const {
    auto it = std::lower_bound(dates_.begin(), dates_.end(), date);
    if (it == dates_.end()) return std::nullopt;
    return static_cast<DayIndex>(it - dates_.begin());
}

// ---------------------------------------------------------------------------
// RecordStore

std::optional<SymbolId> RecordStore::find_symbol(std::string_view name) const {
    auto it = symbol_ids_.find(std::string(name));
    if (it == symbol_ids_.end()) return std::nullopt;
    return it->second;
}

std::span<const Bar> RecordStore::bars(SymbolId id) const {
    auto b = symbol_offsets_.at(id), e = symbol_offsets_.at(id + 1);
    return std::span<const Bar>(bars_).subspan(b, e - b);
}

const Bar* RecordStore::bar_at(SymbolId id, DayIndex day) const {
    auto span = bars(id);
    auto it = std::lower_bound(span.begin(), span.end(), day, [](const Bar& b, DayIndex d) { return b.day < d; });
    if (it == span.end() || it->day != day) return nullptr;
    return &*it;
}

std::span<const std::uint32_t> RecordStore::bars_on_day(DayIndex day) const {
    auto d = static_cast<std::size_t>(day);
    auto b = day_offsets_.at(d), e = day_offsets_.at(d + 1);
    return std::span<const std::uint32_t>(day_bars_).subspan(b, e - b);
}

std::optional<DayIndex> RecordStore::last_trade_day(SymbolId id) const {
    auto span = bars(id);
    if (span.empty()) return std::nullopt;
    return span.back().day;
}

ingest::TradingRecord RecordStore::record(const Bar& bar) const {
    ingest::TradingRecord r;
    r.date = calendar_.at(bar.day);
    r.symbol = symbols_[bar.symbol];
    r.series = series_[bar.series];
    if (!std::isnan(bar.open)) r.open = bar.open;
    if (!std::isnan(bar.high)) r.high = bar.high;
    if (!std::isnan(bar.low)) r.low = bar.low;
    r.close = bar.close;
    r.traded_qty = bar.qty;
    r.traded_value = bar.value;
    if (bar.isin != 0) r.isin = isins_[bar.isin];
    r.outlier_flag = bar.outlier;
    return r;
}

std::vector<ingest::TradingRecord> RecordStore::records() const {
    std::vector<ingest::TradingRecord> out;
    out.reserve(bars_.size());
    for (DayIndex d = 0; d < static_cast<DayIndex>(calendar_.size()); ++d)
        for (auto idx : bars_on_day(d)) out.push_back(record(bars_[idx]));
    return out;
}

RecordStore RecordStore::from_records(std::span<const ingest::TradingRecord> records) {
    StoreBuilder builder;
    for (const auto& r : records) builder.add(r);
    StoreBuildCounts counts;
    auto store = builder.finish(std::nullopt, &counts);
    if (counts.duplicates != 0)
        throw Error(ErrorCode::InvalidInput, "duplicate (date, symbol, series) keys in record list");
    return store;
}

// ---------------------------------------------------------------------------
// StoreBuilder

std::uint32_t StoreBuilder::intern(std::unordered_map<std::string, std::uint32_t>& ids,
                                   std::vector<std::string>& names, const std::string& name) {
    auto [it, inserted] = ids.try_emplace(name, static_cast<std::uint32_t>(names.size()));
    if (inserted) names.push_back(name);
    return it->second;
}

void StoreBuilder::add(const ingest::TradingRecord& r) {
    Pending p{};
    p.date = r.date.serial();
    p.symbol = intern(symbol_ids_, symbol_names_, r.symbol);
    p.series = static_cast<std::uint16_t>(intern(series_ids_, series_names_, r.series));
    p.isin = r.isin ? intern(isin_ids_, isin_names_, *r.isin) : 0;
    p.open = r.open.value_or(kMissingPrice);
    p.high = r.high.value_or(kMissingPrice);
    p.low = r.low.value_or(kMissingPrice);
    p.close = r.close;
    p.qty = r.traded_qty;
    p.value = r.traded_value;
    p.outlier = r.outlier_flag;
    pending_.push_back(p);
}

namespace {

bool same_number(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

RecordStore StoreBuilder::finish(std::optional<ingest::OutlierRule> outliers, StoreBuildCounts* counts) {
    StoreBuildCounts local;
    auto key = [](const Pending& p) { return std::tie(p.date, p.symbol, p.series); };
    std::stable_sort(pending_.begin(), pending_.end(),
                     [&](const Pending& a, const Pending& b) { return key(a) < key(b); });

    std::vector<Pending> unique;
    unique.reserve(pending_.size());
    for (const auto& p : pending_) {
        if (!unique.empty() && key(unique.back()) == key(p)) {
            const auto& q = unique.back();
            ++local.duplicates;
            bool same = q.isin == p.isin && same_number(q.open, p.open) && same_number(q.high, p.high) &&
                        same_number(q.low, p.low) && q.close == p.close && q.qty == p.qty && q.value == p.value;
            if (!same) ++local.conflicts;
            continue;
        }
        unique.push_back(p);
    }
    pending_.clear();
    pending_.shrink_to_fit();

    RecordStore store;
    std::vector<Date> dates;
    for (const auto& p : unique)
        if (dates.empty() || dates.back().serial() != p.date) dates.push_back(Date::from_serial(p.date));
    store.calendar_ = TradingCalendar(std::move(dates));

    // Sorted symbol table; remap insertion-order ids.
    std::vector<std::uint32_t> order(symbol_names_.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return symbol_names_[a] < symbol_names_[b]; });
    std::vector<SymbolId> remap(symbol_names_.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) {
        remap[order[i]] = i;
        store.symbols_.push_back(symbol_names_[order[i]]);
        store.symbol_ids_.emplace(store.symbols_.back(), i);
    }
    store.series_ = series_names_;
    store.isins_ = isin_names_;

    store.bars_.reserve(unique.size());
    for (const auto& p : unique) {
        Bar b;
        b.day = *store.calendar_.index_of(Date::from_serial(p.date));
        b.symbol = remap[p.symbol];
        b.open = p.open;
        b.high = p.high;
        b.low = p.low;
        b.close = p.close;
        b.qty = p.qty;
        b.value = p.value;
        b.isin = p.isin;
        b.series = p.series;
        b.outlier = p.outlier;
        store.bars_.push_back(b);
    }
    std::sort(store.bars_.begin(), store.bars_.end(),
              [](const Bar& a, const Bar& b) { return std::tie(a.symbol, a.day) < std::tie(b.symbol, b.day); });
    for (std::size_t i = 1; i < store.bars_.size(); ++i) {
        const auto& a = store.bars_[i - 1];
        const auto& b = store.bars_[i];
        if (a.symbol == b.symbol && a.day == b.day)
            throw Error(ErrorCode::InvalidInput, "store holds two series for " + store.symbols_[a.symbol] + " on " +
                                                     store.calendar_.at(a.day).iso());
    }

    store.symbol_offsets_.assign(store.symbols_.size() + 1, 0);
    for (const auto& b : store.bars_) ++store.symbol_offsets_[b.symbol + 1];
    std::partial_sum(store.symbol_offsets_.begin(), store.symbol_offsets_.end(), store.symbol_offsets_.begin());

    if (outliers) {
        std::vector<double> closes;
        for (SymbolId s = 0; s < store.symbols_.size(); ++s) {
            auto b = store.symbol_offsets_[s], e = store.symbol_offsets_[s + 1];
            closes.clear();
            for (auto i = b; i < e; ++i) closes.push_back(store.bars_[i].close);
            auto flags = ingest::trailing_outliers(closes, *outliers);
            for (auto i = b; i < e; ++i) store.bars_[i].outlier = flags[i - b];
        }
    }
    for (const auto& b : store.bars_) local.outliers += b.outlier ? 1 : 0;

    store.day_offsets_.assign(store.calendar_.size() + 1, 0);
    for (const auto& b : store.bars_) ++store.day_offsets_[static_cast<std::size_t>(b.day) + 1];
    std::partial_sum(store.day_offsets_.begin(), store.day_offsets_.end(), store.day_offsets_.begin());
    store.day_bars_.resize(store.bars_.size());
    auto cursor = store.day_offsets_;
    for (std::uint32_t i = 0; i < store.bars_.size(); ++i)
        store.day_bars_[cursor[static_cast<std::size_t>(store.bars_[i].day)]++] = i;

    if (counts) *counts = local;
    return store;
}

// ---------------------------------------------------------------------------
// Pipeline

std::vector<std::filesystem::path> list_input_files(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec))
        throw Error(ErrorCode::FileUnreadable, "input directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".csv") files.push_back(entry.path());
    }
    if (files.empty()) throw Error(ErrorCode::InvalidInput, "no CSV files in " + dir.string());
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
    return files;
}

IngestResult ingest_files(std::span<const std::filesystem::path> files, const IngestOptions& options) {
    IngestStats stats;
    std::vector<FileIssue> issues;
    StoreBuilder builder;

    for (const auto& path : files) {
        ++stats.files_seen;
        try {
            auto raw = ingest::open_raw_file(path);
            auto mapping = ingest::detect_schema(raw.header_fields);
            auto parsed = ingest::parse_file(raw, mapping);
            stats.raw_records += parsed.raw_rows;
            stats.skipped_records += parsed.skipped_rows;
            auto before = parsed.records.size();
            auto equity = ingest::filter_equity(std::move(parsed.records), options.equity_series);
            stats.non_equity_records += before - equity.size();
            for (const auto& r : equity) builder.add(r);
            ++stats.files_parsed;
        } catch (const Error& e) {
            switch (e.code()) {
                case ErrorCode::SchemaUnrecognized: ++stats.files_schema_unrecognized; break;
                case ErrorCode::EmptyFile: ++stats.files_empty; break;
                default: ++stats.files_unreadable; break;
            }
            issues.push_back({path, std::string(to_string(e.code())), e.what()});
        }
    }

    StoreBuildCounts counts;
    auto store = builder.finish(options.outliers, &counts);
    stats.duplicate_records = counts.duplicates;
    stats.conflicting_duplicates = counts.conflicts;
    stats.outlier_flags = counts.outliers;
    stats.retained_records = store.size();
    stats.unique_symbols = store.symbol_count();
    stats.trading_days = store.calendar().size();
    if (!store.calendar().empty()) {
        stats.first_date = store.calendar().front();
        stats.last_date = store.calendar().back();
    }
    return IngestResult{std::move(store), stats, std::move(issues)};
}

IngestResult ingest_directory(const std::filesystem::path& dir, const IngestOptions& options) {
    auto files = list_input_files(dir);
    return ingest_files(files, options);
}

// ---------------------------------------------------------------------------
// Canonical file

namespace {

std::string optional_number(double v) { return std::isnan(v) ? std::string() : csv::format_number(v); }

}  // namespace

void write_canonical(const RecordStore& store, std::ostream& out) {
    out << ingest::kCanonicalHeader << '\n';
    const auto bars = store.all_bars();
    std::string line;
    for (DayIndex d = 0; d < static_cast<DayIndex>(store.calendar().size()); ++d) {
        auto date = store.calendar().at(d).iso();
        for (auto idx : store.bars_on_day(d)) {
            const auto& b = bars[idx];
            line.clear();
            line += date;
            line += ',';
            line += csv::escape(store.symbol(b.symbol));
            line += ',';
            line += csv::escape(store.series_name(b.series));
            line += ',';
            line += optional_number(b.open);
            line += ',';
            line += optional_number(b.high);
            line += ',';
            line += optional_number(b.low);
            line += ',';
            line += csv::format_number(b.close);
            line += ',';
            line += csv::format_number(b.qty);
            line += ',';
            line += csv::format_number(b.value);
            line += ',';
            line += store.isin_name(b.isin);
            line += ',';
            line += b.outlier ? '1' : '0';
            line += '\n';
            out << line;
        }
    }
}

void write_canonical(const RecordStore& store, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::FileUnreadable, "cannot write " + path.string());
    write_canonical(store, out);
}

RecordStore read_canonical(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::EmptyFile, "canonical store is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != ingest::kCanonicalHeader)
        throw Error(ErrorCode::InvalidInput, "unexpected canonical header: " + line);

    StoreBuilder builder;
    std::vector<std::string> row;
    std::size_t line_no = 1;
    auto bad = [&](const char* what) {
        return Error(ErrorCode::InvalidInput, "canonical line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        csv::split_line(line, row);
        if (row.size() != 11) throw bad("expected 11 fields");
        ingest::TradingRecord r;
        auto date = parse_iso_date(row[0]);
        if (!date) throw bad("bad DATE");
        r.date = *date;
        r.symbol = row[1];
        r.series = row[2];
        auto opt = [&](const std::string& s, std::optional<double>& dst) {
            if (s.empty()) return;
            auto v = csv::parse_number(s);
            if (!v) throw bad("bad price");
            dst = *v;
        };
        opt(row[3], r.open);
        opt(row[4], r.high);
        opt(row[5], r.low);
        auto close = csv::parse_number(row[6]);
        auto qty = csv::parse_number(row[7]);
        auto val = csv::parse_number(row[8]);
        if (!close || !qty || !val) throw bad("bad CLOSE/TOTTRDQTY/TOTTRDVAL");
        r.close = *close;
        r.traded_qty = *qty;
        r.traded_value = *val;
        if (!row[9].empty()) r.isin = row[9];
        if (row[10] != "0" && row[10] != "1") throw bad("bad OUTLIER");
        r.outlier_flag = row[10] == "1";
        builder.add(r);
    }
    StoreBuildCounts counts;
    auto store = builder.finish(std::nullopt, &counts);
    if (counts.duplicates != 0) throw Error(ErrorCode::InvalidInput, "canonical store contains duplicate keys");
    return store;
}

RecordStore read_canonical(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileUnreadable, "cannot open " + path.string());
    return read_canonical(in);
}

}  // namespace survbias
