#include "optree/value.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace optree {

// Howard Hinnant's civil-calendar algorithms.
int64_t days_from_civil(int y, unsigned m, unsigned d) noexcept {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

CivilDate civil_from_days(int64_t z) noexcept {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t y = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return CivilDate{static_cast<int>(y + (m <= 2)), m, d};
}

static bool is_leap(int y) noexcept { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

static unsigned days_in_month(int y, unsigned m) noexcept {
    static constexpr unsigned table[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && is_leap(y) ? 29 : table[m - 1];
}

bool valid_civil(int y, unsigned m, unsigned d) noexcept {
    return y >= 1 && y <= 9999 && m >= 1 && m <= 12 && d >= 1 && d <= days_in_month(y, m);
}

int weekday_index(Date d) noexcept {
    // 1970-01-01 was a Thursday (index 3).
    int64_t w = (d.days + 3) % 7;
    return static_cast<int>(w < 0 ? w + 7 : w);
}

std::string_view weekday_name(int index) noexcept {
    static constexpr std::string_view names[] = {"Monday", "Tuesday",  "Wednesday", "Thursday",
                                                 "Friday", "Saturday", "Sunday"};
    return names[index % 7];
}

Date make_date(int y, unsigned m, unsigned d) {
    if (!valid_civil(y, m, d)) throw Error("InvalidDate", "invalid calendar date");
    return Date{days_from_civil(y, m, d)};
}

DateTime make_datetime(int y, unsigned m, unsigned d, int hh, int mm, int ss) {
    return DateTime{make_date(y, m, d).days * 86400 + hh * 3600 + mm * 60 + ss};
}

Date add_months(Date d, int months) noexcept {
    CivilDate c = civil_from_days(d.days);
    int64_t total = static_cast<int64_t>(c.year) * 12 + (c.month - 1) + months;
    int y = static_cast<int>(total >= 0 ? total / 12 : (total - 11) / 12);
    unsigned m = static_cast<unsigned>(total - static_cast<int64_t>(y) * 12) + 1;
    unsigned day = std::min(c.day, days_in_month(y, m));
    return Date{days_from_civil(y, m, day)};
}

namespace {

bool parse_fixed(std::string_view s, size_t pos, size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

std::string_view trim_view(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

std::optional<Date> parse_iso_date(std::string_view s) {
    s = trim_view(s);
    int y, m, d;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    if (!parse_fixed(s, 0, 4, y) || !parse_fixed(s, 5, 2, m) || !parse_fixed(s, 8, 2, d))
        return std::nullopt;
    if (!valid_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d))) return std::nullopt;
    return Date{days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d))};
}

std::optional<TimeOfDay> parse_iso_time(std::string_view s) {
    s = trim_view(s);
    int h, m, sec = 0;
    if (s.size() != 5 && s.size() != 8) return std::nullopt;
    if (s[2] != ':' || !parse_fixed(s, 0, 2, h) || !parse_fixed(s, 3, 2, m)) return std::nullopt;
    if (s.size() == 8 && (s[5] != ':' || !parse_fixed(s, 6, 2, sec))) return std::nullopt;
    if (h > 23 || m > 59 || sec > 59) return std::nullopt;
    return TimeOfDay{h * 3600 + m * 60 + sec};
}

std::optional<DateTime> parse_iso_datetime(std::string_view s) {
    s = trim_view(s);
    if (s.size() < 16) return std::nullopt;
    auto d = parse_iso_date(s.substr(0, 10));
    if (!d || (s[10] != 'T' && s[10] != ' ')) return std::nullopt;
    std::string_view rest = s.substr(11);
    if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
    auto t = parse_iso_time(rest);
    if (!t) return std::nullopt;
    return combine(*d, *t);
}

std::optional<Duration> parse_iso_duration(std::string_view s) {
    s = trim_view(s);
    if (s.size() < 4 || s.substr(0, 2) != "PT" || s.back() != 'S') return std::nullopt;
    std::string_view num = s.substr(2, s.size() - 3);
    bool neg = !num.empty() && num.front() == '-';
    if (neg) num.remove_prefix(1);
    if (num.empty()) return std::nullopt;
    int64_t v = 0;
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (ec != std::errc() || p != num.data() + num.size()) return std::nullopt;
    return Duration{neg ? -v : v};
}

std::string format_date(Date d) {
    CivilDate c = civil_from_days(d.days);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day);
    return buf;
}

std::string format_time(TimeOfDay t) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", t.seconds / 3600, (t.seconds / 60) % 60,
                  t.seconds % 60);
    return buf;
}

std::string format_datetime(DateTime dt) {
    return format_date(date_of(dt)) + "T" + format_time(time_of(dt));
}

std::string format_duration(Duration d) { return "PT" + std::to_string(d.seconds) + "S"; }

Value::Value(List items) {
    for (const auto& item : items)
        if (item.is_list()) throw Error("NestedList", "list values may not contain lists");
    v_ = std::move(items);
}

std::optional<double> Value::as_double() const noexcept {
    if (auto i = get_if<int64_t>()) return static_cast<double>(*i);
    if (auto d = get_if<double>()) return *d;
    return std::nullopt;
}

std::string_view kind_name(Value::Kind k) noexcept {
    switch (k) {
        case Value::Kind::null: return "null";
        case Value::Kind::text: return "text";
        case Value::Kind::integer: return "integer";
        case Value::Kind::real: return "real";
        case Value::Kind::date: return "date";
        case Value::Kind::time: return "time";
        case Value::Kind::datetime: return "datetime";
        case Value::Kind::duration: return "duration";
        case Value::Kind::list: return "list";
    }
    return "?";
}

static std::string format_real(double d) {
    if (std::isnan(d)) return "nan";
    if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
    std::string s(buf, p);
    // Keep reals visibly distinct from integers.
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

std::string to_text(const Value& v) {
    struct Visitor {
        std::string operator()(std::monostate) const { return {}; }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const { return format_real(d); }
        std::string operator()(Date d) const { return format_date(d); }
        std::string operator()(TimeOfDay t) const { return format_time(t); }
        std::string operator()(DateTime dt) const { return format_datetime(dt); }
        std::string operator()(Duration d) const { return format_duration(d); }
        std::string operator()(const Value::List& l) const {
            std::string out;
            for (size_t i = 0; i < l.size(); ++i) {
                if (i) out += ", ";
                out += to_text(l[i]);
            }
            return out;
        }
    };
    return std::visit(Visitor{}, v.storage());
}

std::optional<std::partial_ordering> compare_values(const Value& a, const Value& b) {
    using K = Value::Kind;
    if (a.is_null() || b.is_null()) return std::nullopt;
    if (a.is_numeric() && b.is_numeric()) {
        if (a.kind() == K::integer && b.kind() == K::integer) return a.integer() <=> b.integer();
        return *a.as_double() <=> *b.as_double();
    }
    auto timeline = [](const Value& v) -> std::optional<int64_t> {
        if (auto d = v.get_if<Date>()) return at_midnight(*d).seconds;
        if (auto dt = v.get_if<DateTime>()) return dt->seconds;
        return std::nullopt;
    };
    if (auto ta = timeline(a)) {
        if (auto tb = timeline(b)) return *ta <=> *tb;
        return std::nullopt;
    }
    if (a.kind() != b.kind()) return std::nullopt;
    switch (a.kind()) {
        case K::text: return a.text() <=> b.text();
        case K::time: return a.time() <=> b.time();
        case K::duration: return a.duration() <=> b.duration();
        case K::list:
            if (a == b) return std::partial_ordering::equivalent;
            return std::partial_ordering::unordered;
        default: return std::nullopt;
    }
}

Value infer_from_text(std::string s) {
    const bool padded = !s.empty() && (std::isspace(static_cast<unsigned char>(s.front())) ||
                                       std::isspace(static_cast<unsigned char>(s.back())));
    if (!padded && s.size() >= 5 && s.size() <= 20) {
        if (auto dt = parse_iso_datetime(s)) return *dt;
        if (auto d = parse_iso_date(s)) return *d;
        if (auto t = parse_iso_time(s); t && s.size() == 8) return *t;
        if (auto du = parse_iso_duration(s)) return *du;
    }
    return Value(std::move(s));
}

}  // namespace optree
