#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace survbias {

/// Calendar date with day resolution. Thin value wrapper over sys_days so
/// date arithmetic (days between, +n days) stays exact.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
    Date(int year, unsigned month, unsigned day);

    static Date from_serial(std::int32_t serial) {
        return Date(std::chrono::sys_days{std::chrono::days{serial}});
    }

    std::chrono::sys_days sys_days() const { return days_; }
    std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
    std::int32_t serial() const { return static_cast<std::int32_t>(days_.time_since_epoch().count()); }

    int year() const { return static_cast<int>(ymd().year()); }
    unsigned month() const { return static_cast<unsigned>(ymd().month()); }
    unsigned day() const { return static_cast<unsigned>(ymd().day()); }
    /// 0 = Sunday ... 6 = Saturday
    unsigned weekday() const { return std::chrono::weekday{days_}.c_encoding(); }

    Date plus_days(int n) const { return Date(days_ + std::chrono::days{n}); }

    /// YYYY-MM-DD
    std::string iso() const;

    friend constexpr auto operator<=>(const Date&, const Date&) = default;
    friend constexpr bool operator==(const Date&, const Date&) = default;

private:
    std::chrono::sys_days days_{};
};

/// Whole days from `from` to `to` (negative when `to` precedes `from`).
inline int days_between(Date from, Date to) { return to.serial() - from.serial(); }

/// Parses one of the supported textual layouts. Unambiguous layouts are
/// tried first: DD-MMM-YYYY, YYYYMMDD, YYYY-MM-DD, then DD/MM/YYYY
/// (day-first). Month abbreviations are case-insensitive.
std::optional<Date> parse_date(std::string_view text);

/// Strict ISO YYYY-MM-DD only.
std::optional<Date> parse_iso_date(std::string_view text);

/// Finds a trade date embedded in a bhavcopy-style file name such as
/// cm01SEP2016bhav.csv, BhavCopy_NSE_CM_0_0_0_20240708_F_0000.csv or
/// sec_bhavdata_full_01092016.csv.
std::optional<Date> date_from_filename(std::string_view name);

}  // namespace survbias
