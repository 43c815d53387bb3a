#include "survbias/synth.hpp"

#include "survbias/csv.hpp"
#include "survbias/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>

namespace survbias::synth {

namespace {

using json = nlohmann::json;
using universe::RemovalClass;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Proxy gap between adjacent intended ranks on snapshot days.
constexpr double kRankStep = 1e7;

std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix(mix(seed) ^ mix(a + 0x51ED27A3ULL) ^ mix(b + 0xC0FFEEULL));
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }
double floor2(double x) { return std::floor(x * 100.0) / 100.0; }
double ceil2(double x) { return std::ceil(x * 100.0) / 100.0; }

int quarter_key(Date d) { return d.year() * 4 + static_cast<int>((d.month() - 1) / 3); }

Date last_day_of_quarter_after(Date start, std::size_t quarters) {
    using namespace std::chrono;
    const int key = quarter_key(start) + static_cast<int>(quarters) - 1;
    const int y = key / 4;
    const unsigned m = static_cast<unsigned>(key % 4) * 3 + 3;
    return Date(sys_days{year_month_day_last{year{y}, month_day_last{month{m}}}});
}

std::vector<Date> weekday_calendar(const SynthConfig& c) {
    std::vector<Date> out;
    Date d = c.start;
    auto is_weekend = [](Date x) { return x.weekday() == 0 || x.weekday() == 6; };
    if (c.n_quarters > 0) {
        const Date end = last_day_of_quarter_after(c.start, c.n_quarters);
        for (; d <= end; d = d.plus_days(1))
            if (!is_weekend(d)) out.push_back(d);
    } else {
        while (out.size() < c.n_days) {
            if (!is_weekend(d)) out.push_back(d);
            d = d.plus_days(1);
        }
    }
    return out;
}

std::string pad_number(std::size_t value, std::size_t width) {
    auto s = std::to_string(value);
    if (s.size() < width) s.insert(0, width - s.size(), '0');
    return s;
}

std::string bhav_date(Date d) {
    static constexpr const char* kMonths[] = {"JAN", "FEB", "MAR", "APR", "MAY", "JUN",
                                             "JUL", "AUG", "SEP", "OCT", "NOV", "DEC"};
    return pad_number(d.day(), 2) + "-" + kMonths[d.month() - 1] + "-" + std::to_string(d.year());
}

bool is_udiff(const SynthConfig& c, Date d) { return c.udiff_from && *c.udiff_from <= d; }

constexpr const char* kLegacyHeader =
    "SYMBOL,SERIES,OPEN,HIGH,LOW,CLOSE,LAST,PREVCLOSE,TOTTRDQTY,TOTTRDVAL,TIMESTAMP,TOTALTRADES,ISIN,";
constexpr const char* kUdiffHeader =
    "TradDt,BizDt,Sgmt,Src,FinInstrmTp,FinInstrmId,ISIN,TckrSymb,SctySrs,XpryDt,FininstrmActlXpryDt,StrkPric,"
    "OptnTp,FinInstrmNm,OpnPric,HghPric,LwPric,ClsPric,LastPric,PrvsClsgPric,UndrlygPric,SttlmPric,OpnIntrst,"
    "ChngInOpnIntrst,TtlTradgVol,TtlTrfVal,TtlNbOfTxsExctd,SsnId,NewBrdLotQty,Rmks,Rsvd1,Rsvd2,Rsvd3,Rsvd4";

struct LineFields {
    std::string symbol, series, isin;
    double open, high, low, close, prev_close, qty, value;
    std::size_t trades;
    std::size_t instrument_id;
};

void append_line(std::string& out, const LineFields& f, Date date, bool udiff) {
    using csv::format_number;
    if (!udiff) {
        out += f.symbol + ',' + f.series + ',' + format_number(f.open) + ',' + format_number(f.high) + ',' +
               format_number(f.low) + ',' + format_number(f.close) + ',' + format_number(f.close) + ',' +
               format_number(f.prev_close) + ',' + format_number(f.qty) + ',' + format_number(f.value) + ',' +
               bhav_date(date) + ',' + std::to_string(f.trades) + ',' + f.isin + ",\n";
        return;
    }
    const auto iso = date.iso();
    out += iso + ',' + iso + ",CM,NSE,STK," + std::to_string(f.instrument_id) + ',' + f.isin + ',' + f.symbol + ',' +
           f.series + ",,,,," + f.symbol + " LTD," + format_number(f.open) + ',' + format_number(f.high) + ',' +
           format_number(f.low) + ',' + format_number(f.close) + ',' + format_number(f.close) + ',' +
           format_number(f.prev_close) + ",," + format_number(f.close) + ",,," + format_number(f.qty) + ',' +
           format_number(f.value) + ',' + std::to_string(f.trades) + ",F1,1,,,,,\n";
}

void check_rate(double r, const char* name) {
    if (!(r >= 0.0 && r <= 1.0)) throw Error(ErrorCode::InvalidConfig, std::string(name) + " must lie in [0, 1]");
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

void SynthConfig::validate() const {
    check_rate(churn.delist_hazard, "delist_hazard");
    check_rate(churn.graduation_rate, "graduation_rate");
    check_rate(churn.demotion_rate, "demotion_rate");
    check_rate(boundary_swap_prob, "boundary_swap_prob");
    if (churn.graduation_rate + churn.demotion_rate > 1.0)
        throw Error(ErrorCode::InvalidConfig, "graduation_rate + demotion_rate must not exceed 1");
    if (n_stocks <= 400) throw Error(ErrorCode::InvalidConfig, "n_stocks must exceed 400");
    if (band.low < 1 || band.high <= band.low || static_cast<std::size_t>(band.high) >= n_stocks)
        throw Error(ErrorCode::InvalidConfig, "band must satisfy 1 <= low < high < n_stocks");
    if (!(volatility > 0.0) || !std::isfinite(volatility))
        throw Error(ErrorCode::InvalidConfig, "volatility must be positive");
    if (!std::isfinite(drift) || !std::isfinite(survivor_premium) || !std::isfinite(predeath_drift))
        throw Error(ErrorCode::InvalidConfig, "drift terms must be finite");
    if (n_quarters == 0 && n_days < 2) throw Error(ErrorCode::InvalidConfig, "n_days must be at least 2");
}

SynthConfig SynthConfig::no_churn() {
    SynthConfig c;
    c.churn = {0.0, 0.0, 0.0};
    return c;
}

// ---------------------------------------------------------------------------
// Generation

bool SynthMarket::alive(std::size_t stock, std::size_t day) const { return day <= last_day_[stock]; }

double SynthMarket::qty(std::size_t stock, std::size_t day) const {
    auto it = std::lower_bound(snapshot_days_.begin(), snapshot_days_.end(), day);
    if (it != snapshot_days_.end() && *it == day)
        return snapshot_qty_[static_cast<std::size_t>(it - snapshot_days_.begin())][stock];
    std::mt19937_64 rng(stream_seed(config_.seed, stock, day * 2 + 1));
    std::uniform_real_distribution<double> u(std::log(1e3), std::log(1e6));
    return std::round(std::exp(u(rng)));
}

SynthMarket::Row SynthMarket::row(std::size_t stock, std::size_t day) const {
    std::mt19937_64 rng(stream_seed(config_.seed, stock, day * 2));
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double c = close(stock, day);
    const double prev = day > 0 ? close(stock, day - 1) : c;
    const double vol = config_.volatility;

    Row r{};
    r.close = c;
    r.open = std::max(0.05, round2(prev * (1.0 + 0.25 * vol * z(rng))));
    r.high = std::max(ceil2(std::max(r.open, c) * (1.0 + 0.5 * vol * u(rng))), std::max(r.open, c));
    r.low = std::min(std::max(0.01, floor2(std::min(r.open, c) * (1.0 - 0.5 * vol * u(rng)))), std::min(r.open, c));
    r.qty = qty(stock, day);
    r.value = round2(c * r.qty);
    r.trades = static_cast<std::size_t>(r.qty / 50.0) + 1;
    return r;
}

std::string SynthMarket::file_name(std::size_t day) const {
    const Date d = calendar_.at(day);
    if (is_udiff(config_, d)) {
        return "BhavCopy_NSE_CM_0_0_0_" + std::to_string(d.year()) + pad_number(d.month(), 2) + pad_number(d.day(), 2) +
               "_F_0000.csv";
    }
    auto b = bhav_date(d);
    b.erase(std::remove(b.begin(), b.end(), '-'), b.end());
    return "cm" + b + "bhav.csv";
}

std::string SynthMarket::file_content(std::size_t day) const {
    const Date d = calendar_.at(day);
    const bool udiff = is_udiff(config_, d);
    std::string out = udiff ? kUdiffHeader : kLegacyHeader;
    out += '\n';
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        if (!alive(i, day)) continue;
        const auto r = row(i, day);
        LineFields f{symbols_[i], "EQ",    isins_[i], r.open, r.high,  r.low, r.close,
                     day > 0 ? close(i, day - 1) : r.close, r.qty, r.value, r.trades, i + 1};
        append_line(out, f, d, udiff);
    }
    for (std::size_t j = 0; j < config_.non_equity_rows; ++j) {
        const bool bond = j % 2 == 0;
        const double px = bond ? 1000.0 + static_cast<double>(j) : 12.5 + static_cast<double>(j);
        LineFields f{(bond ? "SGB" : "NCD") + pad_number(j + 1, 3),
                     bond ? "GB" : "N1",
                     "INE" + pad_number(900000 + j, 6) + "08" + "1",
                     px,
                     px,
                     px,
                     px,
                     px,
                     10.0,
                     round2(px * 10.0),
                     1,
                     symbols_.size() + j + 1};
        append_line(out, f, d, udiff);
    }
    return out;
}

std::vector<ingest::TradingRecord> SynthMarket::equity_records() const {
    std::vector<ingest::TradingRecord> out;
    for (std::size_t day = 0; day < calendar_.size(); ++day) {
        for (std::size_t i = 0; i < symbols_.size(); ++i) {
            if (!alive(i, day)) continue;
            const auto r = row(i, day);
            ingest::TradingRecord rec;
            rec.date = calendar_[day];
            rec.symbol = symbols_[i];
            rec.series = "EQ";
            rec.open = r.open;
            rec.high = r.high;
            rec.low = r.low;
            rec.close = r.close;
            rec.traded_qty = r.qty;
            rec.traded_value = r.value;
            rec.isin = isins_[i];
            out.push_back(std::move(rec));
        }
    }
    return out;
}

std::vector<std::filesystem::path> SynthMarket::write_files(const std::filesystem::path& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::FileUnreadable, "cannot create " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> paths;
    for (std::size_t day = 0; day < calendar_.size(); ++day) {
        auto path = dir / file_name(day);
        std::ofstream out(path, std::ios::binary);
        out << file_content(day);
        if (!out) throw Error(ErrorCode::FileUnreadable, "cannot write " + path.string());
        paths.push_back(std::move(path));
    }
    return paths;
}

namespace {

// Bookkeeping oracle for the return series. Deliberately plain loops over
// the emitted prices rather than the portfolio module.
portfolio::ReturnSeries truth_series(const std::vector<Date>& cal, const std::vector<std::size_t>& snapshot_days,
                                     const std::vector<std::vector<std::size_t>>& members_by_snapshot,
                                     const std::vector<std::size_t>* fixed_members, bool value_weighted,
                                     const std::function<double(std::size_t, std::size_t)>& close,
                                     const std::function<double(std::size_t, std::size_t)>& qty,
                                     const std::vector<std::size_t>& last_day) {
    portfolio::ReturnSeries s;
    std::size_t k = 0;
    for (std::size_t d = snapshot_days.front() + 1; d < cal.size(); ++d) {
        while (k + 1 < snapshot_days.size() && snapshot_days[k + 1] < d) ++k;
        const auto& members = fixed_members ? *fixed_members : members_by_snapshot[k];
        double num = 0.0, den = 0.0;
        int active = 0;
        for (auto m : members) {
            if (d > last_day[m]) continue;
            const double p0 = close(m, d - 1);
            const double r = (close(m, d) - p0) / p0;
            const double w = value_weighted ? p0 * qty(m, d - 1) : 1.0;
            num += w * r;
            den += w;
            ++active;
        }
        s.dates.push_back(cal[d]);
        s.returns.push_back(active > 0 && den > 0.0 ? num / den : 0.0);
        s.n_active.push_back(active);
    }
    return s;
}

}  // namespace

SynthMarket generate(const SynthConfig& config) {
    config.validate();
    SynthMarket m;
    m.config_ = config;
    m.calendar_ = weekday_calendar(config);
    if (m.calendar_.size() < 2) throw Error(ErrorCode::InvalidConfig, "calendar needs at least two weekdays");
    const std::size_t n = config.n_stocks;
    const std::size_t days = m.calendar_.size();

    const std::size_t width = std::max<std::size_t>(4, std::to_string(n).size());
    for (std::size_t i = 0; i < n; ++i) {
        m.symbols_.push_back("SYN" + pad_number(i + 1, width));
        m.isins_.push_back("INE" + pad_number(i + 1, 6) + "01" + std::to_string(i % 10));
    }

    for (std::size_t d = 0; d < days; ++d)
        if (d + 1 == days || quarter_key(m.calendar_[d + 1]) != quarter_key(m.calendar_[d]))
            m.snapshot_days_.push_back(d);
    const std::size_t n_snap = m.snapshot_days_.size();

    // Latent scores and lifetimes.
    std::mt19937_64 events(stream_seed(config.seed, 0xE7E7));
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> score(n);
    for (auto& s : score) s = z(events);
    m.last_day_.assign(n, days - 1);

    const auto low = static_cast<std::size_t>(config.band.low);
    const auto high = static_cast<std::size_t>(config.band.high);
    std::vector<std::vector<std::size_t>> true_rank(n_snap, std::vector<std::size_t>(n, 0));
    std::vector<std::vector<std::size_t>> members(n_snap);
    auto& ev = m.truth_.events;

    for (std::size_t k = 0; k < n_snap; ++k) {
        const std::size_t snap = m.snapshot_days_[k];
        if (k > 0) {
            const std::size_t prev = m.snapshot_days_[k - 1];
            std::size_t alive_count = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (m.last_day_[i] >= prev) ++alive_count;
            std::uniform_int_distribution<std::size_t> when(prev, snap - 1);
            for (std::size_t i = 0; i < n; ++i) {
                if (m.last_day_[i] < prev) continue;
                const double draw = u(events);
                const std::size_t day = when(events);
                // Keep the population above the band so every snapshot fills it.
                if (draw < config.churn.delist_hazard && alive_count > high + 1) {
                    m.last_day_[i] = day;
                    --alive_count;
                    ++ev.deaths;
                }
            }
            double top = -std::numeric_limits<double>::infinity();
            double bottom = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                top = std::max(top, score[i]);
                bottom = std::min(bottom, score[i]);
            }
            for (auto i : members[k - 1]) {
                const double draw = u(events);
                const double jump = 1.0 + u(events);
                if (m.last_day_[i] < snap) continue;
                if (draw < config.churn.graduation_rate) {
                    score[i] = top + jump;
                    ++ev.graduations;
                } else if (draw < config.churn.graduation_rate + config.churn.demotion_rate) {
                    score[i] = bottom - jump;
                    ++ev.demotions;
                }
            }
        }
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < n; ++i)
            if (m.last_day_[i] >= snap) order.push_back(i);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return score[a] != score[b] ? score[a] > score[b] : a < b;
        });
        for (std::size_t r = 0; r < order.size(); ++r) {
            true_rank[k][order[r]] = r + 1;
            if (r + 1 >= low && r + 1 <= high) members[k].push_back(order[r]);
        }
        std::sort(members[k].begin(), members[k].end());
    }

    // Price paths on the 0.01 tick.
    std::vector<char> is_survivor(n, 0);
    for (auto i : members.back()) is_survivor[i] = 1;
    m.close_.assign(n * days, kNaN);
    for (std::size_t i = 0; i < n; ++i) {
        std::mt19937_64 rng(stream_seed(config.seed, 0x9A7B, i));
        std::normal_distribution<double> zi(0.0, 1.0);
        double p = 100.0 * std::exp(0.6 * zi(rng));
        const std::size_t last = m.last_day_[i];
        const bool dies = last + 1 < days;
        for (std::size_t d = 0; d <= last; ++d) {
            if (d > 0) {
                double r = config.drift + config.volatility * zi(rng);
                if (is_survivor[i]) r += config.survivor_premium;
                if (dies && last - d < config.predeath_days) r += config.predeath_drift;
                p = std::max(0.05, p * (1.0 + std::max(r, -0.5)));
            }
            m.close_[i * days + d] = std::max(0.05, round2(p));
        }
    }

    // Snapshot-day volumes: proxy = (N_alive - rank + 1) x step, rounded to whole shares.
    std::mt19937_64 noise(stream_seed(config.seed, 0x5A5A));
    m.snapshot_qty_.assign(n_snap, std::vector<double>(n, 0.0));
    for (std::size_t k = 0; k < n_snap; ++k) {
        auto emitted = true_rank[k];
        const std::size_t alive_count =
            static_cast<std::size_t>(std::count_if(emitted.begin(), emitted.end(), [](std::size_t r) { return r > 0; }));
        if (config.boundary_swap_prob > 0.0 && u(noise) < config.boundary_swap_prob && alive_count > high) {
            for (auto& r : emitted) {
                if (r == high)
                    r = high + 1;
                else if (r == high + 1)
                    r = high;
            }
            ++ev.boundary_swaps;
        }
        const std::size_t snap = m.snapshot_days_[k];
        for (std::size_t i = 0; i < n; ++i) {
            if (emitted[i] == 0) continue;
            const double target = static_cast<double>(alive_count - emitted[i] + 1) * kRankStep;
            m.snapshot_qty_[k][i] = std::max(1.0, std::round(target / m.close(i, snap)));
        }
    }

    // Ground truth.
    auto& t = m.truth_;
    for (std::size_t k = 0; k < n_snap; ++k) {
        universe::ConstituentSnapshot snap{m.calendar_[m.snapshot_days_[k]], {}};
        for (auto i : members[k]) snap.members.push_back(m.symbols_[i]);
        std::sort(snap.members.begin(), snap.members.end());
        t.snapshots.push_back(std::move(snap));
    }

    const Date asof = m.calendar_.back();
    std::set<std::size_t> ever;
    for (const auto& mem : members) ever.insert(mem.begin(), mem.end());
    std::vector<std::pair<double, std::size_t>> still_trading;
    for (auto i : ever) {
        if (is_survivor[i]) {
            t.classification[m.symbols_[i]] = RemovalClass::Survivor;
        } else if (days_between(m.calendar_[m.last_day_[i]], asof) >= 365) {
            t.classification[m.symbols_[i]] = RemovalClass::Delisted;
        } else {
            const auto ld = m.last_day_[i];
            still_trading.push_back({m.close(i, ld) * m.qty(i, ld), i});
        }
    }
    std::sort(still_trading.begin(), still_trading.end(), [&](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : m.symbols_[a.second] < m.symbols_[b.second];
    });
    for (std::size_t j = 0; j < still_trading.size(); ++j)
        t.classification[m.symbols_[still_trading[j].second]] =
            j < still_trading.size() / 2 ? RemovalClass::Graduated : RemovalClass::Demoted;

    auto close_fn = [&m](std::size_t i, std::size_t d) { return m.close(i, d); };
    auto qty_fn = [&m](std::size_t i, std::size_t d) { return m.qty(i, d); };
    const auto& fixed = members.back();
    t.survivor_ew = truth_series(m.calendar_, m.snapshot_days_, members, &fixed, false, close_fn, qty_fn, m.last_day_);
    t.complete_ew = truth_series(m.calendar_, m.snapshot_days_, members, nullptr, false, close_fn, qty_fn, m.last_day_);
    t.survivor_vw = truth_series(m.calendar_, m.snapshot_days_, members, &fixed, true, close_fn, qty_fn, m.last_day_);
    t.complete_vw = truth_series(m.calendar_, m.snapshot_days_, members, nullptr, true, close_fn, qty_fn, m.last_day_);

    for (std::size_t i = 0; i < n; ++i) t.equity_rows += m.last_day_[i] + 1;
    t.non_equity_rows = config.non_equity_rows * days;
    return m;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json series_json(const portfolio::ReturnSeries& s) {
    json dates = json::array();
    for (auto d : s.dates) dates.push_back(d.iso());
    return {{"dates", dates}, {"returns", s.returns}, {"n_active", s.n_active}};
}

Date iso_or_throw(const std::string& text) {
    auto d = parse_iso_date(text);
    if (!d) throw Error(ErrorCode::InvalidInput, "bad ISO date '" + text + "'");
    return *d;
}

portfolio::ReturnSeries series_from_json(const json& j) {
    portfolio::ReturnSeries s;
    for (const auto& d : j.at("dates")) s.dates.push_back(iso_or_throw(d.get<std::string>()));
    s.returns = j.at("returns").get<std::vector<double>>();
    s.n_active = j.at("n_active").get<std::vector<int>>();
    if (s.returns.size() != s.dates.size() || s.n_active.size() != s.dates.size())
        throw Error(ErrorCode::InvalidInput, "series arrays differ in length");
    return s;
}

}  // namespace

std::string truth_to_json(const GroundTruth& truth) {
    json snaps = json::array();
    for (const auto& s : truth.snapshots) snaps.push_back({{"date", s.date.iso()}, {"members", s.members}});
    json cls = json::object();
    for (const auto& [sym, c] : truth.classification) cls[sym] = std::string(universe::to_string(c));
    json j = {
        {"snapshots", snaps},
        {"classification", cls},
        {"series",
         {{"survivor_ew", series_json(truth.survivor_ew)},
          {"complete_ew", series_json(truth.complete_ew)},
          {"survivor_vw", series_json(truth.survivor_vw)},
          {"complete_vw", series_json(truth.complete_vw)}}},
        {"events",
         {{"deaths", truth.events.deaths},
          {"graduations", truth.events.graduations},
          {"demotions", truth.events.demotions},
          {"boundary_swaps", truth.events.boundary_swaps}}},
        {"equity_rows", truth.equity_rows},
        {"non_equity_rows", truth.non_equity_rows},
    };
    return j.dump(1) + "\n";
}

GroundTruth truth_from_json(std::string_view text) {
    GroundTruth t;
    try {
        auto j = json::parse(text);
        for (const auto& s : j.at("snapshots"))
            t.snapshots.push_back(
                {iso_or_throw(s.at("date").get<std::string>()), s.at("members").get<std::vector<std::string>>()});
        for (const auto& [sym, c] : j.at("classification").items()) {
            auto cls = universe::parse_removal_class(c.get<std::string>());
            if (!cls) throw Error(ErrorCode::InvalidInput, "unknown classification for " + sym);
            t.classification[sym] = *cls;
        }
        const auto& s = j.at("series");
        t.survivor_ew = series_from_json(s.at("survivor_ew"));
        t.complete_ew = series_from_json(s.at("complete_ew"));
        t.survivor_vw = series_from_json(s.at("survivor_vw"));
        t.complete_vw = series_from_json(s.at("complete_vw"));
        const auto& e = j.at("events");
        t.events = {e.at("deaths").get<std::size_t>(), e.at("graduations").get<std::size_t>(),
                    e.at("demotions").get<std::size_t>(), e.at("boundary_swaps").get<std::size_t>()};
        t.equity_rows = j.at("equity_rows").get<std::size_t>();
        t.non_equity_rows = j.at("non_equity_rows").get<std::size_t>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidInput, std::string("ground truth JSON: ") + e.what());
    }
    if (t.snapshots.empty()) throw Error(ErrorCode::InvalidInput, "ground truth holds no snapshots");
    return t;
}

SynthConfig config_from_json(std::string_view text) {
    SynthConfig c;
    try {
        auto j = json::parse(text);
        if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "synth config must be a JSON object");
        for (const auto& [key, v] : j.items()) {
            if (key == "n_stocks") c.n_stocks = v.get<std::size_t>();
            else if (key == "n_days") c.n_days = v.get<std::size_t>();
            else if (key == "n_quarters") c.n_quarters = v.get<std::size_t>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "start") c.start = iso_or_throw(v.get<std::string>());
            else if (key == "volatility") c.volatility = v.get<double>();
            else if (key == "drift") c.drift = v.get<double>();
            else if (key == "survivor_premium") c.survivor_premium = v.get<double>();
            else if (key == "predeath_drift") c.predeath_drift = v.get<double>();
            else if (key == "predeath_days") c.predeath_days = v.get<std::size_t>();
            else if (key == "boundary_swap_prob") c.boundary_swap_prob = v.get<double>();
            else if (key == "non_equity_rows") c.non_equity_rows = v.get<std::size_t>();
            else if (key == "udiff_from") c.udiff_from = iso_or_throw(v.get<std::string>());
            else if (key == "band") {
                auto b = v.get<std::vector<int>>();
                if (b.size() != 2) throw Error(ErrorCode::InvalidConfig, "band must be [low, high]");
                c.band = {b[0], b[1]};
            } else if (key == "churn") {
                for (const auto& [ck, cv] : v.items()) {
                    if (ck == "delist_hazard") c.churn.delist_hazard = cv.get<double>();
                    else if (ck == "graduation_rate") c.churn.graduation_rate = cv.get<double>();
                    else if (ck == "demotion_rate") c.churn.demotion_rate = cv.get<double>();
                    else throw Error(ErrorCode::InvalidConfig, "unknown churn key '" + ck + "'");
                }
            } else {
                throw Error(ErrorCode::InvalidConfig, "unknown synth config key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("synth config: ") + e.what());
    }
    c.validate();
    return c;
}

std::string config_to_json(const SynthConfig& c) {
    json j = {
        {"n_stocks", c.n_stocks},
        {"n_days", c.n_days},
        {"n_quarters", c.n_quarters},
        {"seed", c.seed},
        {"start", c.start.iso()},
        {"churn",
         {{"delist_hazard", c.churn.delist_hazard},
          {"graduation_rate", c.churn.graduation_rate},
          {"demotion_rate", c.churn.demotion_rate}}},
        {"volatility", c.volatility},
        {"drift", c.drift},
        {"survivor_premium", c.survivor_premium},
        {"predeath_drift", c.predeath_drift},
        {"predeath_days", c.predeath_days},
        {"band", {c.band.low, c.band.high}},
        {"boundary_swap_prob", c.boundary_swap_prob},
        {"non_equity_rows", c.non_equity_rows},
    };
    if (c.udiff_from) j["udiff_from"] = c.udiff_from->iso();
    return j.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// Scoring

bool AccuracyReport::membership_exact() const {
    return !quarters.empty() && std::all_of(quarters.begin(), quarters.end(), [](const QuarterOverlap& q) {
               return q.common == q.truth_size && q.common == q.pipeline_size;
           });
}

std::size_t AccuracyReport::classification_agreements() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < 4; ++i) n += confusion[i][i];
    return n;
}

AccuracyReport score_pipeline(const PipelineOutputs& pipeline, const GroundTruth& truth) {
    AccuracyReport rep;
    rep.min_overlap_pct = truth.snapshots.empty() ? 0.0 : 100.0;
    for (const auto& ts : truth.snapshots) {
        QuarterOverlap q;
        q.date = ts.date;
        q.truth_size = ts.members.size();
        auto it = std::find_if(pipeline.snapshots.begin(), pipeline.snapshots.end(),
                               [&](const universe::ConstituentSnapshot& p) { return p.date == ts.date; });
        if (it != pipeline.snapshots.end()) {
            q.pipeline_size = it->members.size();
            std::set<std::string> a(ts.members.begin(), ts.members.end());
            for (const auto& s : it->members) q.common += a.count(s);
        }
        if (q.truth_size == 0)
            q.overlap_pct = q.pipeline_size == 0 && it != pipeline.snapshots.end() ? 100.0 : 0.0;
        else
            q.overlap_pct = static_cast<double>(q.common) / static_cast<double>(q.truth_size) * 100.0;
        rep.min_overlap_pct = std::min(rep.min_overlap_pct, q.overlap_pct);
        rep.quarters.push_back(q);
    }

    std::map<std::string, RemovalClass> piped;
    for (const auto& t : pipeline.timelines) piped[t.symbol] = t.classification;
    for (const auto& [sym, cls] : truth.classification) {
        auto it = piped.find(sym);
        if (it == piped.end()) {
            ++rep.truth_only_symbols;
            continue;
        }
        ++rep.confusion[static_cast<std::size_t>(cls)][static_cast<std::size_t>(it->second)];
    }
    for (const auto& [sym, cls] : piped)
        if (!truth.classification.count(sym)) ++rep.pipeline_only_symbols;

    auto compare = [&](const char* name, const portfolio::ReturnSeries* p, const portfolio::ReturnSeries& t) {
        if (!p) return;
        SeriesDeviation dev{name, p->dates == t.dates, p->n_active == t.n_active, 0.0};
        if (!dev.dates_match) {
            dev.max_abs_deviation = std::numeric_limits<double>::infinity();
        } else {
            for (std::size_t i = 0; i < t.returns.size(); ++i)
                dev.max_abs_deviation = std::max(dev.max_abs_deviation, std::abs(p->returns[i] - t.returns[i]));
        }
        rep.series.push_back(dev);
    };
    compare("survivor_ew", pipeline.survivor_ew, truth.survivor_ew);
    compare("complete_ew", pipeline.complete_ew, truth.complete_ew);
    compare("survivor_vw", pipeline.survivor_vw, truth.survivor_vw);
    compare("complete_vw", pipeline.complete_vw, truth.complete_vw);
    return rep;
}

std::string report_to_json(const AccuracyReport& report) {
    json quarters = json::array();
    for (const auto& q : report.quarters)
        quarters.push_back({{"date", q.date.iso()},
                            {"truth_size", q.truth_size},
                            {"pipeline_size", q.pipeline_size},
                            {"common", q.common},
                            {"overlap_pct", q.overlap_pct}});
    json labels = json::array();
    for (std::size_t i = 0; i < 4; ++i) labels.push_back(std::string(universe::to_string(static_cast<RemovalClass>(i))));
    json matrix = json::array();
    for (const auto& row : report.confusion) matrix.push_back(row);
    json series = json::array();
    for (const auto& s : report.series) {
        json dev = std::isfinite(s.max_abs_deviation) ? json(s.max_abs_deviation) : json(nullptr);
        series.push_back({{"name", s.name},
                          {"dates_match", s.dates_match},
                          {"n_active_match", s.n_active_match},
                          {"max_abs_deviation", dev}});
    }
    json j = {{"quarters", quarters},
              {"min_overlap_pct", report.min_overlap_pct},
              {"membership_exact", report.membership_exact()},
              {"confusion",
               {{"labels", labels},
                {"rows_truth_cols_pipeline", matrix},
                {"agreements", report.classification_agreements()},
                {"truth_only", report.truth_only_symbols},
                {"pipeline_only", report.pipeline_only_symbols}}},
              {"series", series}};
    return j.dump(1) + "\n";
}

}  // namespace survbias::synth
