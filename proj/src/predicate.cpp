#include <algorithm>
#include <cctype>

#include "optree/exec.hpp"

namespace optree {

struct PredicateEvaluator::Val {
    enum class Kind { null, boolean, value, period };
    Kind kind = Kind::null;
    bool b = false;
    Value v;
    Period p;

    static Val null() { return {}; }
    static Val boolean(bool x) {
        Val r;
        r.kind = Kind::boolean;
        r.b = x;
        return r;
    }
    static Val of(Value x) {
        Val r;
        if (x.is_null()) return r;
        r.kind = Kind::value;
        r.v = std::move(x);
        return r;
    }
    static Val of(Period x) {
        Val r;
        r.kind = Kind::period;
        r.p = x;
        return r;
    }
};

namespace {

[[noreturn]] void type_error(const std::string& msg) { throw Error("PredicateTypeError", msg); }

std::string describe(const Value& v) { return std::string(kind_name(v.kind())); }

int64_t floor_div(int64_t a, int64_t b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

Date shift(Date d, const Period& p, int sign) {
    d = add_months(d, static_cast<int>(sign * (p.years * 12 + p.months)));
    d.days += sign * p.days + floor_div(sign * p.seconds, 86400);
    return d;
}

DateTime shift(DateTime dt, const Period& p, int sign) {
    Date d = add_months(date_of(dt), static_cast<int>(sign * (p.years * 12 + p.months)));
    return DateTime{combine(d, time_of(dt)).seconds + sign * (p.days * 86400 + p.seconds)};
}

bool equal_values(const Value& a, const Value& b) {
    if (a.is_list() || b.is_list()) return a == b;
    auto c = compare_values(a, b);
    return c && *c == 0;
}

std::string lower_ascii(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

size_t utf8_length(const std::string& s) {
    size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
}

}  // namespace

bool PredicateEvaluator::truthy(const Val& v) const {
    switch (v.kind) {
        case Val::Kind::null: return false;
        case Val::Kind::boolean: return v.b;
        case Val::Kind::period: return true;
        case Val::Kind::value: break;
    }
    const Value& x = v.v;
    switch (x.kind()) {
        case Value::Kind::text: return !x.text().empty();
        case Value::Kind::integer: return x.integer() != 0;
        case Value::Kind::real: return x.real() != 0;
        case Value::Kind::list: return !x.list().empty();
        case Value::Kind::duration: return x.duration().seconds != 0;
        default: return true;
    }
}

PredicateEvaluator::Val PredicateEvaluator::eval(const Expr& e, const Event* a, const Event* b) const {
    switch (e.kind) {
        case ExprKind::literal: return Val::of(e.value);
        case ExprKind::boolean: return Val::boolean(e.flag);
        case ExprKind::attr: {
            const Event* ev = e.side == 2 ? b : a;
            if (!ev) type_error("i2 is not bound here");
            auto v = ev->get(e.name);
            return v ? Val::of(*v) : Val::null();
        }
        case ExprKind::compare: {
            Val l = eval(e.args[0], a, b);
            Val r = eval(e.args[1], a, b);
            if (l.kind == Val::Kind::null || r.kind == Val::Kind::null) return Val::boolean(false);
            if (l.kind == Val::Kind::period || r.kind == Val::Kind::period)
                type_error("cannot compare a relativedelta");
            if (l.kind == Val::Kind::boolean || r.kind == Val::Kind::boolean) {
                bool same = l.kind == r.kind && l.b == r.b;
                if (e.cmp == CmpOp::eq) return Val::boolean(same);
                if (e.cmp == CmpOp::ne) return Val::boolean(!same);
                type_error("booleans only support == and !=");
            }
            if (e.cmp == CmpOp::in || e.cmp == CmpOp::not_in) {
                bool found = false;
                if (r.v.is_list()) {
                    for (const auto& m : r.v.list()) found |= equal_values(l.v, m);
                } else if (r.v.kind() == Value::Kind::text && l.v.kind() == Value::Kind::text) {
                    found = r.v.text().find(l.v.text()) != std::string::npos;
                } else {
                    type_error("'in' needs a list or two strings, got " + describe(l.v) + " in " + describe(r.v));
                }
                return Val::boolean(e.cmp == CmpOp::in ? found : !found);
            }
            if (e.cmp == CmpOp::eq) return Val::boolean(equal_values(l.v, r.v));
            if (e.cmp == CmpOp::ne) return Val::boolean(!equal_values(l.v, r.v));
            auto c = compare_values(l.v, r.v);
            if (!c) type_error("cannot order " + describe(l.v) + " against " + describe(r.v));
            switch (e.cmp) {
                case CmpOp::lt: return Val::boolean(*c < 0);
                case CmpOp::le: return Val::boolean(*c <= 0);
                case CmpOp::gt: return Val::boolean(*c > 0);
                default: return Val::boolean(*c >= 0);
            }
        }
        case ExprKind::logic_and:
            for (const auto& x : e.args)
                if (!truthy(eval(x, a, b))) return Val::boolean(false);
            return Val::boolean(true);
        case ExprKind::logic_or:
            for (const auto& x : e.args)
                if (truthy(eval(x, a, b))) return Val::boolean(true);
            return Val::boolean(false);
        case ExprKind::logic_not: return Val::boolean(!truthy(eval(e.args[0], a, b)));
        case ExprKind::arith: {
            Val l = eval(e.args[0], a, b);
            Val r = eval(e.args[1], a, b);
            if (l.kind == Val::Kind::null || r.kind == Val::Kind::null) return Val::null();
            const int sign = e.name == "-" ? -1 : 1;
            if (l.kind == Val::Kind::period && r.kind == Val::Kind::period) {
                Period p = l.p;
                p.years += sign * r.p.years;
                p.months += sign * r.p.months;
                p.days += sign * r.p.days;
                p.seconds += sign * r.p.seconds;
                return Val::of(p);
            }
            if (r.kind == Val::Kind::period && l.kind == Val::Kind::value) {
                if (l.v.kind() == Value::Kind::date) return Val::of(Value(shift(l.v.date(), r.p, sign)));
                if (l.v.kind() == Value::Kind::datetime) return Val::of(Value(shift(l.v.datetime(), r.p, sign)));
            }
            if (l.kind == Val::Kind::period && r.kind == Val::Kind::value && sign > 0) {
                if (r.v.kind() == Value::Kind::date) return Val::of(Value(shift(r.v.date(), l.p, 1)));
                if (r.v.kind() == Value::Kind::datetime) return Val::of(Value(shift(r.v.datetime(), l.p, 1)));
            }
            if (l.kind != Val::Kind::value || r.kind != Val::Kind::value)
                type_error("unsupported operands for " + e.name);
            const Value& x = l.v;
            const Value& y = r.v;
            using K = Value::Kind;
            if (x.kind() == K::integer && y.kind() == K::integer)
                return Val::of(Value(x.integer() + sign * y.integer()));
            if (x.is_numeric() && y.is_numeric()) return Val::of(Value(*x.as_double() + sign * *y.as_double()));
            if (x.kind() == K::duration && y.kind() == K::duration)
                return Val::of(Value(Duration{x.duration().seconds + sign * y.duration().seconds}));
            if (x.kind() == K::date && y.kind() == K::duration)
                return Val::of(Value(Date{x.date().days + floor_div(sign * y.duration().seconds, 86400)}));
            if (x.kind() == K::datetime && y.kind() == K::duration)
                return Val::of(Value(DateTime{x.datetime().seconds + sign * y.duration().seconds}));
            if (sign < 0 && (x.kind() == K::date || x.kind() == K::datetime) &&
                (y.kind() == K::date || y.kind() == K::datetime)) {
                auto secs = [](const Value& v) {
                    return v.kind() == K::date ? at_midnight(v.date()).seconds : v.datetime().seconds;
                };
                return Val::of(Value(Duration{secs(x) - secs(y)}));
            }
            if (sign > 0 && x.kind() == K::text && y.kind() == K::text) return Val::of(Value(x.text() + y.text()));
            type_error("unsupported operands for " + e.name + ": " + describe(x) + " and " + describe(y));
        }
        case ExprKind::negate: {
            Val v = eval(e.args[0], a, b);
            if (v.kind == Val::Kind::null) return v;
            if (v.kind == Val::Kind::period) {
                Period p{-v.p.years, -v.p.months, -v.p.days, -v.p.seconds};
                return Val::of(p);
            }
            if (v.kind == Val::Kind::value) {
                if (v.v.kind() == Value::Kind::integer) return Val::of(Value(-v.v.integer()));
                if (v.v.kind() == Value::Kind::real) return Val::of(Value(-v.v.real()));
                if (v.v.kind() == Value::Kind::duration) return Val::of(Value(Duration{-v.v.duration().seconds}));
            }
            type_error("cannot negate this operand");
        }
        case ExprKind::accessor: {
            Val v = eval(e.args[0], a, b);
            if (v.kind == Val::Kind::null) return v;
            if (v.kind != Val::Kind::value) type_error("." + e.name + " needs a date or time");
            using K = Value::Kind;
            const Value& x = v.v;
            const bool has_date = x.kind() == K::date || x.kind() == K::datetime;
            const bool has_time = x.kind() == K::time || x.kind() == K::datetime;
            if (e.name == "hour" || e.name == "minute") {
                if (!has_time) type_error("." + e.name + " on " + describe(x));
                int32_t s = x.kind() == K::time ? x.time().seconds : time_of(x.datetime()).seconds;
                return Val::of(Value(static_cast<int64_t>(e.name == "hour" ? s / 3600 : (s / 60) % 60)));
            }
            if (!has_date) type_error("." + e.name + " on " + describe(x));
            Date d = x.kind() == K::date ? x.date() : date_of(x.datetime());
            if (e.name == "weekday") return Val::of(Value(static_cast<int64_t>(weekday_index(d))));
            CivilDate c = civil_from_days(d.days);
            if (e.name == "year") return Val::of(Value(static_cast<int64_t>(c.year)));
            if (e.name == "month") return Val::of(Value(static_cast<int64_t>(c.month)));
            if (e.name == "day") return Val::of(Value(static_cast<int64_t>(c.day)));
            type_error("unknown accessor ." + e.name);
        }
        case ExprKind::lower: {
            Val v = eval(e.args[0], a, b);
            if (v.kind == Val::Kind::null) return v;
            if (v.kind != Val::Kind::value || v.v.kind() != Value::Kind::text) type_error(".lower() needs a string");
            return Val::of(Value(lower_ascii(v.v.text())));
        }
        case ExprKind::length: {
            Val v = eval(e.args[0], a, b);
            if (v.kind == Val::Kind::null) return v;
            if (v.kind == Val::Kind::value && v.v.kind() == Value::Kind::text)
                return Val::of(Value(static_cast<int64_t>(utf8_length(v.v.text()))));
            if (v.kind == Val::Kind::value && v.v.is_list())
                return Val::of(Value(static_cast<int64_t>(v.v.list().size())));
            type_error("len() needs a string or list");
        }
        case ExprKind::any_contains: {
            Val list = eval(e.args[0], a, b);
            Val needle = eval(e.args[1], a, b);
            if (list.kind == Val::Kind::null || needle.kind == Val::Kind::null) return Val::boolean(false);
            if (list.kind != Val::Kind::value || needle.kind != Val::Kind::value ||
                needle.v.kind() != Value::Kind::text)
                type_error("any(... in p ...) needs a string needle and a list");
            Value::List items = list.v.is_list() ? list.v.list() : Value::List{list.v};
            for (const auto& m : items) {
                std::string hay = to_text(m);
                if (e.flag) hay = lower_ascii(std::move(hay));
                if (hay.find(needle.v.text()) != std::string::npos) return Val::boolean(true);
            }
            return Val::boolean(false);
        }
        case ExprKind::today: return Val::of(Value(date_of(clock_)));
        case ExprKind::now: return Val::of(Value(clock_));
        case ExprKind::period: return Val::of(e.period);
        case ExprKind::subplan: {
            if (!subplans_) throw Error("UnresolvedSubplan", "sub-plan was not evaluated");
            auto it = subplans_->find(&e);
            if (it == subplans_->end()) throw Error("UnresolvedSubplan", "sub-plan was not evaluated");
            return Val::of(it->second);
        }
    }
    type_error("unsupported expression");
}

bool PredicateEvaluator::test(const Expr& pred, const Event& e) const { return truthy(eval(pred, &e, nullptr)); }

bool PredicateEvaluator::test_pair(const Expr& cond, const Event& left, const Event& right) const {
    return truthy(eval(cond, &left, &right));
}

Value PredicateEvaluator::value(const Expr& e, const Event& ev) const {
    Val v = eval(e, &ev, nullptr);
    switch (v.kind) {
        case Val::Kind::value: return v.v;
        case Val::Kind::boolean: return Value(static_cast<int64_t>(v.b));
        case Val::Kind::null: return Value();
        case Val::Kind::period: break;
    }
    type_error("a relativedelta is not a value");
}

}  // namespace optree
