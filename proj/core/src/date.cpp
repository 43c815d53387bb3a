#include "survbias/date.hpp"

#include "survbias/error.hpp"

#include <array>
#include <cctype>
#include <cstdio>

namespace survbias {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::SchemaUnrecognized: return "SchemaUnrecognized";
        case ErrorCode::FileUnreadable: return "FileUnreadable";
        case ErrorCode::EmptyFile: return "EmptyFile";
        case ErrorCode::EmptyDate: return "EmptyDate";
        case ErrorCode::EmptyWindow: return "EmptyWindow";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::ZeroVolatility: return "ZeroVolatility";
        case ErrorCode::WindowMismatch: return "WindowMismatch";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::InvalidInput: return "InvalidInput";
    }
    return "Unknown";
}

namespace {

constexpr std::array<std::string_view, 12> kMonths = {"JAN", "FEB", "MAR", "APR", "MAY", "JUN",
                                                      "JUL", "AUG", "SEP", "OCT", "NOV", "DEC"};

std::optional<Date> make_date(int y, int m, int d) {
    if (y < 1900 || y > 2200 || m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date(std::chrono::sys_days{ymd});
}

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

int to_int(std::string_view s) {
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

int month_from_abbrev(std::string_view s) {
    if (s.size() != 3) return 0;
    char up[3];
    for (int i = 0; i < 3; ++i) up[i] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[i])));
    for (std::size_t i = 0; i < kMonths.size(); ++i)
        if (std::string_view(up, 3) == kMonths[i]) return static_cast<int>(i) + 1;
    return 0;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// DD-MMM-YYYY
std::optional<Date> parse_dmy_abbrev(std::string_view s) {
    if (s.size() != 11 || s[2] != '-' || s[6] != '-') return std::nullopt;
    if (!all_digits(s.substr(0, 2)) || !all_digits(s.substr(7, 4))) return std::nullopt;
    int m = month_from_abbrev(s.substr(3, 3));
    if (m == 0) return std::nullopt;
    return make_date(to_int(s.substr(7, 4)), m, to_int(s.substr(0, 2)));
}

// YYYYMMDD
std::optional<Date> parse_compact(std::string_view s) {
    if (s.size() != 8 || !all_digits(s)) return std::nullopt;
    return make_date(to_int(s.substr(0, 4)), to_int(s.substr(4, 2)), to_int(s.substr(6, 2)));
}

std::optional<Date> parse_iso(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    if (!all_digits(s.substr(0, 4)) || !all_digits(s.substr(5, 2)) || !all_digits(s.substr(8, 2)))
        return std::nullopt;
    return make_date(to_int(s.substr(0, 4)), to_int(s.substr(5, 2)), to_int(s.substr(8, 2)));
}

// DD/MM/YYYY, day first
std::optional<Date> parse_slashed(std::string_view s) {
    auto a = s.find('/');
    if (a == std::string_view::npos) return std::nullopt;
    auto b = s.find('/', a + 1);
    if (b == std::string_view::npos) return std::nullopt;
    auto dd = s.substr(0, a), mm = s.substr(a + 1, b - a - 1), yy = s.substr(b + 1);
    if (dd.empty() || dd.size() > 2 || mm.empty() || mm.size() > 2 || yy.size() != 4) return std::nullopt;
    if (!all_digits(dd) || !all_digits(mm) || !all_digits(yy)) return std::nullopt;
    return make_date(to_int(yy), to_int(mm), to_int(dd));
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
    auto d = make_date(year, static_cast<int>(month), static_cast<int>(day));
    if (!d) throw Error(ErrorCode::InvalidInput, "invalid calendar date");
    days_ = d->sys_days();
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
    return buf;
}

std::optional<Date> parse_iso_date(std::string_view text) { return parse_iso(trim(text)); }

std::optional<Date> parse_date(std::string_view text) {
    auto s = trim(text);
    if (auto d = parse_dmy_abbrev(s)) return d;
    if (auto d = parse_compact(s)) return d;
    if (auto d = parse_iso(s)) return d;
    if (auto d = parse_slashed(s)) return d;
    return std::nullopt;
}

std::optional<Date> date_from_filename(std::string_view name) {
    auto slash = name.find_last_of("/\\");
    if (slash != std::string_view::npos) name.remove_prefix(slash + 1);

    // DDMMMYYYY, e.g. cm01SEP2016bhav.csv
    for (std::size_t i = 0; i + 9 <= name.size(); ++i) {
        auto w = name.substr(i, 9);
        if (all_digits(w.substr(0, 2)) && all_digits(w.substr(5, 4))) {
            if (int m = month_from_abbrev(w.substr(2, 3)))
                if (auto d = make_date(to_int(w.substr(5, 4)), m, to_int(w.substr(0, 2)))) return d;
        }
    }
    // YYYY-MM-DD
    for (std::size_t i = 0; i + 10 <= name.size(); ++i)
        if (auto d = parse_iso(name.substr(i, 10))) return d;
    // Maximal 8-digit runs: YYYYMMDD first, then DDMMYYYY.
    std::size_t i = 0;
    while (i < name.size()) {
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < name.size() && std::isdigit(static_cast<unsigned char>(name[j]))) ++j;
        if (j - i == 8) {
            auto run = name.substr(i, 8);
            if (auto d = parse_compact(run)) return d;
            if (auto d = make_date(to_int(run.substr(4, 4)), to_int(run.substr(2, 2)), to_int(run.substr(0, 2))))
                return d;
        }
        i = j;
    }
    return std::nullopt;
}

}  // namespace survbias
