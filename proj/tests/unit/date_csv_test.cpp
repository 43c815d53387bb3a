#include "survbias/csv.hpp"
#include "survbias/date.hpp"
#include "survbias/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace survbias;

TEST(Date, ParsesEverySupportedLayout) {
    EXPECT_EQ(parse_date("01-SEP-2016"), Date(2016, 9, 1));
    EXPECT_EQ(parse_date("01-Sep-2016"), Date(2016, 9, 1));
    EXPECT_EQ(parse_date("20160901"), Date(2016, 9, 1));
    EXPECT_EQ(parse_date("2016-09-01"), Date(2016, 9, 1));
    EXPECT_EQ(parse_date("01/09/2016"), Date(2016, 9, 1));
    EXPECT_EQ(parse_date("  2024-07-08 "), Date(2024, 7, 8));
}

TEST(Date, SlashedDatesAreDayFirst) { EXPECT_EQ(parse_date("02/03/2020"), Date(2020, 3, 2)); }

TEST(Date, RejectsJunkAndImpossibleDates) {
    EXPECT_FALSE(parse_date(""));
    EXPECT_FALSE(parse_date("-"));
    EXPECT_FALSE(parse_date("31-FEB-2020"));
    EXPECT_FALSE(parse_date("2020-13-01"));
    EXPECT_FALSE(parse_date("hello"));
    EXPECT_FALSE(parse_iso_date("01-SEP-2016"));
    EXPECT_THROW(Date(2021, 2, 29), Error);
}

TEST(Date, FileNameHints) {
    EXPECT_EQ(date_from_filename("cm01SEP2016bhav.csv"), Date(2016, 9, 1));
    EXPECT_EQ(date_from_filename("/a/b/BhavCopy_NSE_CM_0_0_0_20240708_F_0000.csv"), Date(2024, 7, 8));
    EXPECT_EQ(date_from_filename("sec_bhavdata_full_01092016.csv"), Date(2016, 9, 1));
    EXPECT_FALSE(date_from_filename("notes.csv"));
}

TEST(Date, ArithmeticAndIso) {
    Date d(2016, 9, 30);
    EXPECT_EQ(d.weekday(), 5u);
    EXPECT_EQ(d.plus_days(1), Date(2016, 10, 1));
    EXPECT_EQ(days_between(Date(2016, 1, 1), Date(2017, 1, 1)), 366);
    EXPECT_EQ(d.iso(), "2016-09-30");
    EXPECT_EQ(Date::from_serial(d.serial()), d);
}

TEST(Csv, SplitsQuotedFieldsAndStripsCarriageReturn) {
    auto f = csv::split_line("a,\"b,c\",\"d\"\"e\",\r");
    ASSERT_EQ(f.size(), 4u);
    EXPECT_EQ(f[0], "a");
    EXPECT_EQ(f[1], "b,c");
    EXPECT_EQ(f[2], "d\"e");
    EXPECT_EQ(f[3], "");
}

TEST(Csv, EscapeRoundTrips) {
    for (std::string s : {"plain", "with,comma", "with\"quote", ""}) {
        auto f = csv::split_line(csv::escape(s) + ",x");
        ASSERT_EQ(f.size(), 2u);
        EXPECT_EQ(f[0], s);
    }
}

TEST(Csv, ParseNumber) {
    EXPECT_EQ(csv::parse_number("10.5"), 10.5);
    EXPECT_EQ(csv::parse_number(" 1,234.5 "), 1234.5);
    EXPECT_EQ(csv::parse_number("+3"), 3.0);
    EXPECT_EQ(csv::parse_number("-2.5"), -2.5);
    EXPECT_FALSE(csv::parse_number("-"));
    EXPECT_FALSE(csv::parse_number(""));
    EXPECT_FALSE(csv::parse_number("NA"));
    EXPECT_FALSE(csv::parse_number("12abc"));
    EXPECT_FALSE(csv::parse_number("inf"));
}

TEST(Csv, FormatNumberRoundTripsExactly) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1e9, 1e9);
    for (int i = 0; i < 2000; ++i) {
        double x = u(rng);
        EXPECT_EQ(csv::parse_number(csv::format_number(x)), x);
    }
    EXPECT_EQ(csv::format_number(10000000.0), "10000000");
    EXPECT_EQ(csv::format_number(118.33), "118.33");
    EXPECT_EQ(csv::format_number(0.0), "0");
}

TEST(Error, MessageCarriesCode) {
    Error e(ErrorCode::EmptyWindow, "nothing here");
    EXPECT_EQ(e.code(), ErrorCode::EmptyWindow);
    EXPECT_NE(std::string(e.what()).find("EmptyWindow"), std::string::npos);
}
