#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace optree {

/// Base class for every error raised by the library. `code()` is a stable
/// machine-readable identifier (e.g. "SyntaxError", "EmptyAggregate").
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Calendar primitives. All are timezone-naive.

struct Date {
    int64_t days = 0;  // days since 1970-01-01
    auto operator<=>(const Date&) const = default;
};

struct TimeOfDay {
    int32_t seconds = 0;  // seconds since midnight, [0, 86400)
    auto operator<=>(const TimeOfDay&) const = default;
};

struct DateTime {
    int64_t seconds = 0;  // seconds since 1970-01-01T00:00:00
    auto operator<=>(const DateTime&) const = default;
};

struct Duration {
    int64_t seconds = 0;
    auto operator<=>(const Duration&) const = default;
};

struct CivilDate {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;
};

int64_t days_from_civil(int y, unsigned m, unsigned d) noexcept;
CivilDate civil_from_days(int64_t days) noexcept;
bool valid_civil(int y, unsigned m, unsigned d) noexcept;
/// 0 = Monday ... 6 = Sunday.
int weekday_index(Date d) noexcept;
std::string_view weekday_name(int index) noexcept;

Date make_date(int y, unsigned m, unsigned d);
DateTime make_datetime(int y, unsigned m, unsigned d, int hh = 0, int mm = 0, int ss = 0);
inline Date date_of(DateTime dt) noexcept {
    int64_t d = dt.seconds >= 0 ? dt.seconds / 86400 : -((-dt.seconds + 86399) / 86400);
    return Date{d};
}
inline TimeOfDay time_of(DateTime dt) noexcept {
    return TimeOfDay{static_cast<int32_t>(dt.seconds - date_of(dt).days * 86400)};
}
inline DateTime at_midnight(Date d) noexcept { return DateTime{d.days * 86400}; }
inline DateTime combine(Date d, TimeOfDay t) noexcept { return DateTime{d.days * 86400 + t.seconds}; }

Date add_months(Date d, int months) noexcept;  // clamps day-of-month

std::optional<Date> parse_iso_date(std::string_view s);
std::optional<TimeOfDay> parse_iso_time(std::string_view s);
std::optional<DateTime> parse_iso_datetime(std::string_view s);
std::optional<Duration> parse_iso_duration(std::string_view s);

std::string format_date(Date d);
std::string format_time(TimeOfDay t);
std::string format_datetime(DateTime dt);
std::string format_duration(Duration d);

/// A dynamically typed attribute value. Lists hold scalars only.
class Value {
public:
    using List = std::vector<Value>;
    using Storage = std::variant<std::monostate, std::string, int64_t, double, Date, TimeOfDay,
                                 DateTime, Duration, List>;

    enum class Kind { null, text, integer, real, date, time, datetime, duration, list };

    Value() = default;
    Value(std::string s) : v_(std::move(s)) {}
    Value(const char* s) : v_(std::string(s)) {}
    Value(int64_t i) : v_(i) {}
    Value(int i) : v_(static_cast<int64_t>(i)) {}
    Value(double d) : v_(d) {}
    Value(Date d) : v_(d) {}
    Value(TimeOfDay t) : v_(t) {}
    Value(DateTime dt) : v_(dt) {}
    Value(Duration d) : v_(d) {}
    /// Throws Error("NestedList") if any member is itself a list.
    explicit Value(List items);

    Kind kind() const noexcept { return static_cast<Kind>(v_.index()); }
    bool is_null() const noexcept { return kind() == Kind::null; }
    bool is_numeric() const noexcept { return kind() == Kind::integer || kind() == Kind::real; }
    bool is_list() const noexcept { return kind() == Kind::list; }

    template <class T> const T* get_if() const noexcept { return std::get_if<T>(&v_); }
    const std::string& text() const { return std::get<std::string>(v_); }
    int64_t integer() const { return std::get<int64_t>(v_); }
    double real() const { return std::get<double>(v_); }
    Date date() const { return std::get<Date>(v_); }
    TimeOfDay time() const { return std::get<TimeOfDay>(v_); }
    DateTime datetime() const { return std::get<DateTime>(v_); }
    Duration duration() const { return std::get<Duration>(v_); }
    const List& list() const { return std::get<List>(v_); }

    /// Numeric view for integer/real; nullopt otherwise.
    std::optional<double> as_double() const noexcept;

    const Storage& storage() const noexcept { return v_; }

    bool operator==(const Value& other) const { return v_ == other.v_; }

private:
    Storage v_;
};

std::string_view kind_name(Value::Kind k) noexcept;

/// Canonical text form: ISO for calendar types, shortest round-trip form for
/// reals, comma-joined members for lists, empty string for null.
std::string to_text(const Value& v);

/// Ordering used by predicates. Integer/real compare numerically; date and
/// datetime compare on the time line (dates at midnight); other kinds compare
/// only with themselves. Returns nullopt when incomparable or either is null.
std::optional<std::partial_ordering> compare_values(const Value& a, const Value& b);

/// Infers a typed value from text the way event-lines ingestion does:
/// ISO datetime, date, time and "PT<n>S" durations are recognised, anything
/// else stays text.
Value infer_from_text(std::string s);

}  // namespace optree
