#include <gtest/gtest.h>

#include <random>

#include "optree/value.hpp"

using namespace optree;

TEST(CivilCalendar, KnownWeekdays) {
    EXPECT_EQ(weekday_name(weekday_index(make_date(2024, 8, 19))), "Monday");
    EXPECT_EQ(weekday_name(weekday_index(make_date(1970, 1, 1))), "Thursday");
    EXPECT_EQ(weekday_name(weekday_index(make_date(2000, 2, 29))), "Tuesday");
}

TEST(CivilCalendar, DaysRoundTripOverFourCenturies) {
    for (int64_t d = days_from_civil(1800, 1, 1); d < days_from_civil(2200, 1, 1); d += 7) {
        CivilDate c = civil_from_days(d);
        ASSERT_TRUE(valid_civil(c.year, c.month, c.day));
        ASSERT_EQ(days_from_civil(c.year, c.month, c.day), d);
    }
}

TEST(CivilCalendar, AddMonthsClampsDay) {
    EXPECT_EQ(format_date(add_months(make_date(2024, 1, 31), 1)), "2024-02-29");
    EXPECT_EQ(format_date(add_months(make_date(2024, 3, 15), -14)), "2023-01-15");
}

TEST(IsoText, ParseAndFormat) {
    EXPECT_EQ(format_date(*parse_iso_date("2022-03-14")), "2022-03-14");
    EXPECT_FALSE(parse_iso_date("2022-02-30"));
    EXPECT_FALSE(parse_iso_date("not a date"));
    EXPECT_EQ(format_time(*parse_iso_time("07:05")), "07:05:00");
    EXPECT_FALSE(parse_iso_time("24:00:00"));
    EXPECT_EQ(format_datetime(*parse_iso_datetime("2024-08-19 12:30:05")), "2024-08-19T12:30:05");
    EXPECT_EQ(parse_iso_duration("PT7560S")->seconds, 7560);
    EXPECT_FALSE(parse_iso_duration("P1D"));
}

TEST(IsoText, RandomCalendarValuesRoundTripLosslessly) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int64_t> secs(-2'000'000'000LL, 4'000'000'000LL);
    for (int i = 0; i < 20000; ++i) {
        DateTime dt{secs(rng)};
        ASSERT_EQ(*parse_iso_datetime(format_datetime(dt)), dt);
        ASSERT_EQ(*parse_iso_date(format_date(date_of(dt))), date_of(dt));
        ASSERT_EQ(*parse_iso_time(format_time(time_of(dt))), time_of(dt));
        Value v(dt);
        ASSERT_EQ(infer_from_text(to_text(v)), v);
    }
}

TEST(ValueTest, NestedListsRejected) {
    Value::List inner{Value("a")};
    EXPECT_THROW(Value(Value::List{Value(inner)}), Error);
}

TEST(ValueTest, TextForms) {
    EXPECT_EQ(to_text(Value(2.0)), "2.0");
    EXPECT_EQ(to_text(Value(5.99)), "5.99");
    EXPECT_EQ(to_text(Value(int64_t{188})), "188");
    EXPECT_EQ(to_text(Value(Value::List{Value("A"), Value("B")})), "A, B");
    EXPECT_EQ(to_text(Value(Duration{60})), "PT60S");
    EXPECT_EQ(to_text(Value()), "");
}

TEST(ValueTest, CompareAcrossNumericAndTimeline) {
    EXPECT_EQ(*compare_values(Value(3), Value(3.0)), std::partial_ordering::equivalent);
    EXPECT_EQ(*compare_values(Value(make_date(2024, 1, 2)), Value(make_datetime(2024, 1, 1, 23))),
              std::partial_ordering::greater);
    EXPECT_FALSE(compare_values(Value("a"), Value(1)));
    EXPECT_FALSE(compare_values(Value(), Value()));
}

TEST(ValueTest, InferenceLeavesPlainTextAlone) {
    EXPECT_EQ(infer_from_text("soccer").kind(), Value::Kind::text);
    EXPECT_EQ(infer_from_text("2024-08-19").kind(), Value::Kind::date);
    EXPECT_EQ(infer_from_text("12:00:00").kind(), Value::Kind::time);
    EXPECT_EQ(infer_from_text(" 2024-08-19").kind(), Value::Kind::text);
    EXPECT_EQ(infer_from_text("PT60S").kind(), Value::Kind::duration);
}
