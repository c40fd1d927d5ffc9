#include "optree/plan.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>

namespace optree {

bool Expr::operator==(const Expr&) const = default;
bool PlanNode::operator==(const PlanNode&) const = default;

namespace {

constexpr std::array<std::string_view, 7> kTagNames = {"str", "int", "float", "date", "time", "datetime", "list"};

constexpr std::array<std::string_view, 15> kOpNames = {
    "RETRIEVE", "EXTRACT", "JOIN", "GROUP_BY", "FILTER", "MAP", "APPLY", "UNNEST",
    "ARGMIN",   "ARGMAX",  "SUM",  "AVG",      "MIN",    "MAX", "QUD"};

constexpr std::array<std::string_view, 8> kFunctions = {
    "len", "weekday", "month", "year", "hour", "day", "duration_minutes", "date_diff_days"};

}  // namespace

std::string_view type_tag_name(TypeTag t) noexcept { return kTagNames[static_cast<size_t>(t)]; }

std::optional<TypeTag> parse_type_tag(std::string_view name) noexcept {
    for (size_t i = 0; i < kTagNames.size(); ++i)
        if (kTagNames[i] == name) return static_cast<TypeTag>(i);
    if (name == "date.fromisoformat") return TypeTag::date;
    if (name == "time.fromisoformat") return TypeTag::time;
    if (name == "datetime.fromisoformat" || name == "datetime.fromtimestamp") return TypeTag::datetime;
    if (name == "string" || name == "text") return TypeTag::str;
    if (name == "real") return TypeTag::float_;
    return std::nullopt;
}

std::string_view cmp_op_text(CmpOp op) noexcept {
    switch (op) {
        case CmpOp::eq: return "==";
        case CmpOp::ne: return "!=";
        case CmpOp::lt: return "<";
        case CmpOp::le: return "<=";
        case CmpOp::gt: return ">";
        case CmpOp::ge: return ">=";
        case CmpOp::in: return "in";
        case CmpOp::not_in: return "not in";
    }
    return "?";
}

std::string_view op_name(Op op) noexcept { return kOpNames[static_cast<size_t>(op)]; }

std::optional<Op> parse_op_name(std::string_view name) noexcept {
    for (size_t i = 0; i < kOpNames.size(); ++i)
        if (kOpNames[i] == name) return static_cast<Op>(i);
    return std::nullopt;
}

bool is_aggregate(Op op) noexcept { return op == Op::sum || op == Op::avg || op == Op::min || op == Op::max; }

bool is_known_function(std::string_view name) noexcept {
    for (auto f : kFunctions)
        if (f == name) return true;
    return false;
}

PlanNode make_retrieve(std::string query) {
    PlanNode n;
    n.op = Op::retrieve;
    n.text = std::move(query);
    return n;
}

PlanNode make_qud(std::string question) {
    PlanNode n;
    n.op = Op::qud;
    n.text = std::move(question);
    return n;
}

static PlanNode unary(Op op, PlanNode input) {
    PlanNode n;
    n.op = op;
    n.children.push_back(std::move(input));
    return n;
}

PlanNode make_extract(PlanNode input, std::vector<std::string> keys, std::vector<TypeTag> types) {
    auto n = unary(Op::extract, std::move(input));
    n.keys = std::move(keys);
    n.types = std::move(types);
    return n;
}

PlanNode make_join(PlanNode left, PlanNode right, Expr condition) {
    PlanNode n;
    n.op = Op::join;
    n.children.push_back(std::move(left));
    n.children.push_back(std::move(right));
    n.pred.push_back(std::move(condition));
    return n;
}

PlanNode make_group_by(PlanNode input, std::vector<std::string> keys) {
    auto n = unary(Op::group_by, std::move(input));
    n.keys = std::move(keys);
    return n;
}

PlanNode make_filter(PlanNode input, Expr predicate) {
    auto n = unary(Op::filter, std::move(input));
    n.pred.push_back(std::move(predicate));
    return n;
}

PlanNode make_map(PlanNode input, std::string fn, std::string res_name) {
    auto n = unary(Op::map, std::move(input));
    n.fn = std::move(fn);
    n.res_name = std::move(res_name);
    return n;
}

PlanNode make_apply(PlanNode input, std::string fn) {
    auto n = unary(Op::apply, std::move(input));
    n.fn = std::move(fn);
    return n;
}

PlanNode make_unnest(PlanNode input, std::string nested_key, std::string unnested_key) {
    auto n = unary(Op::unnest, std::move(input));
    n.nested_key = std::move(nested_key);
    n.unnested_key = std::move(unnested_key);
    return n;
}

PlanNode make_arg(Op op, PlanNode input, std::string arg_key, std::optional<std::string> val_key) {
    auto n = unary(op, std::move(input));
    n.keys = {std::move(arg_key)};
    n.val_key = std::move(val_key);
    return n;
}

PlanNode make_aggregate(Op op, PlanNode input, std::string key) {
    auto n = unary(op, std::move(input));
    n.keys = {std::move(key)};
    return n;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (c < 0x20 || c == 0x7f) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\x%02x", c);
                    out += buf;
                } else {
                    out += static_cast<char>(c);
                }
        }
    }
    out += '"';
    return out;
}

bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

std::string render_literal(const Value& v) {
    switch (v.kind()) {
        case Value::Kind::null: return "None";
        case Value::Kind::text: return quote(v.text());
        case Value::Kind::integer: return std::to_string(v.integer());
        case Value::Kind::real: return to_text(v);
        case Value::Kind::date: return "date.fromisoformat(" + quote(to_text(v)) + ")";
        case Value::Kind::time: return "time.fromisoformat(" + quote(to_text(v)) + ")";
        case Value::Kind::datetime: return "datetime.fromisoformat(" + quote(to_text(v)) + ")";
        case Value::Kind::duration: return "duration.fromisoformat(" + quote(to_text(v)) + ")";
        case Value::Kind::list: {
            std::string out = "[";
            const auto& l = v.list();
            for (size_t i = 0; i < l.size(); ++i) {
                if (i) out += ", ";
                out += render_literal(l[i]);
            }
            return out + "]";
        }
    }
    return "None";
}

// Binding strength; higher binds tighter.
enum Level { kOr = 1, kAnd, kNot, kCmp, kArith, kUnary, kPostfix, kAtom };

int level_of(const Expr& e) {
    switch (e.kind) {
        case ExprKind::logic_or: return kOr;
        case ExprKind::logic_and: return kAnd;
        case ExprKind::logic_not: return kNot;
        case ExprKind::compare: return kCmp;
        case ExprKind::arith: return kArith;
        case ExprKind::negate: return kUnary;
        case ExprKind::accessor:
        case ExprKind::lower:
        case ExprKind::subplan: return kPostfix;
        case ExprKind::literal:
            // A leading minus would otherwise fold into the literal on reparse.
            if (auto i = e.value.get_if<int64_t>(); i && *i < 0) return kUnary;
            if (auto d = e.value.get_if<double>(); d && std::signbit(*d)) return kUnary;
            return kAtom;
        default: return kAtom;
    }
}

std::string render_at(const Expr& e, int min_level);

std::string render_period(const Period& p) {
    std::string out = "relativedelta(";
    bool any = false;
    auto part = [&](const char* name, int64_t v) {
        if (v == 0) return;
        if (any) out += ", ";
        out += name;
        out += '=';
        out += std::to_string(v);
        any = true;
    };
    part("years", p.years);
    part("months", p.months);
    part("days", p.days);
    part("seconds", p.seconds);
    if (!any) out += "days=0";
    return out + ")";
}

std::string render_expr_raw(const Expr& e) {
    switch (e.kind) {
        case ExprKind::literal: return render_literal(e.value);
        case ExprKind::boolean: return e.flag ? "True" : "False";
        case ExprKind::attr:
            if (e.side == 0) return "attr[" + quote(e.name) + "]";
            if (is_identifier(e.name)) return "i" + std::to_string(e.side) + "." + e.name;
            return "i" + std::to_string(e.side) + "[" + quote(e.name) + "]";
        case ExprKind::compare:
            return render_at(e.args.at(0), kArith) + " " + std::string(cmp_op_text(e.cmp)) + " " +
                   render_at(e.args.at(1), kArith);
        case ExprKind::logic_and:
        case ExprKind::logic_or: {
            const bool is_and = e.kind == ExprKind::logic_and;
            std::string out;
            for (size_t i = 0; i < e.args.size(); ++i) {
                if (i) out += is_and ? " and " : " or ";
                // Same-kind children keep their own grouping.
                const int need = e.args[i].kind == e.kind ? kAtom : (is_and ? kNot : kAnd);
                out += render_at(e.args[i], need);
            }
            return out;
        }
        case ExprKind::logic_not: return "not " + render_at(e.args.at(0), kNot);
        case ExprKind::arith:
            return render_at(e.args.at(0), kArith) + " " + e.name + " " + render_at(e.args.at(1), kUnary);
        case ExprKind::negate: {
            const Expr& x = e.args.at(0);
            if (x.kind == ExprKind::literal && x.value.is_numeric()) return "-(" + render_expr_raw(x) + ")";
            return "-" + render_at(x, kUnary);
        }
        case ExprKind::accessor: {
            const Expr& x = e.args.at(0);
            const int need = x.kind == ExprKind::literal && x.value.is_numeric() ? 100 : kPostfix;
            return render_at(x, need) + "." + e.name;
        }
        case ExprKind::lower: {
            const Expr& x = e.args.at(0);
            const int need = x.kind == ExprKind::literal && x.value.is_numeric() ? 100 : kPostfix;
            return render_at(x, need) + ".lower()";
        }
        case ExprKind::length: return "len(" + render_at(e.args.at(0), kOr) + ")";
        case ExprKind::any_contains:
            return "any(" + render_at(e.args.at(1), kArith) + " in " + (e.flag ? "p.lower()" : "p") +
                   " for p in " + render_at(e.args.at(0), kArith) + ")";
        case ExprKind::today: return "date.today()";
        case ExprKind::now: return "datetime.now()";
        case ExprKind::period: return render_period(e.period);
        case ExprKind::subplan: return render_plan(e.sub.at(0)) + ".result";
    }
    return "None";
}

std::string render_at(const Expr& e, int min_level) {
    std::string s = render_expr_raw(e);
    if (level_of(e) < min_level) return "(" + s + ")";
    return s;
}

std::string render_string_list(const std::vector<std::string>& items) {
    std::string out = "[";
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += quote(items[i]);
    }
    return out + "]";
}

}  // namespace

std::string render_expr(const Expr& e) { return render_at(e, kOr); }

std::string render_plan(const PlanNode& p) {
    std::string out(op_name(p.op));
    out += '(';
    switch (p.op) {
        case Op::qud: out += quote(p.text); break;
        case Op::retrieve:
            out += "query=" + quote(p.text);
            if (!p.children.empty()) out += ", l=" + render_plan(p.child());
            break;
        case Op::extract: {
            out += "l=" + render_plan(p.child()) + ", attr_names=" + render_string_list(p.keys) + ", attr_types=[";
            for (size_t i = 0; i < p.types.size(); ++i) {
                if (i) out += ", ";
                out += type_tag_name(p.types[i]);
            }
            out += "]";
            break;
        }
        case Op::join:
            out += "l1=" + render_plan(p.child(0)) + ", l2=" + render_plan(p.child(1)) +
                   ", condition=" + quote(render_expr(p.predicate()));
            break;
        case Op::group_by: out += "l=" + render_plan(p.child()) + ", attr_names=" + render_string_list(p.keys); break;
        case Op::filter:
            out += "l=" + render_plan(p.child()) + ", filter=lambda attr: " + render_expr(p.predicate());
            break;
        case Op::map:
            out += "l=" + render_plan(p.child()) + ", fct=" + p.fn + ", res_name=" + quote(p.res_name);
            break;
        case Op::apply: out += "l=" + render_plan(p.child()) + ", fct=" + p.fn; break;
        case Op::unnest:
            out += "l=" + render_plan(p.child()) + ", nested_attr_name=" + quote(p.nested_key) +
                   ", unnested_attr_name=" + quote(p.unnested_key);
            break;
        case Op::argmin:
        case Op::argmax:
            out += "l=" + render_plan(p.child()) + ", arg_attr_name=" + quote(p.keys.at(0));
            if (p.val_key) out += ", val_attr_name=" + quote(*p.val_key);
            break;
        case Op::sum:
        case Op::avg:
        case Op::min:
        case Op::max: out += "l=" + render_plan(p.child()) + ", attr_name=" + quote(p.keys.at(0)); break;
    }
    out += ')';
    return out;
}

namespace {

void render_tree(const PlanNode& p, const std::string& label, int depth, std::string& out) {
    out.append(static_cast<size_t>(depth) * 2, ' ');
    out += "(" + label + ") ";
    PlanNode shallow = p;
    for (auto& c : shallow.children) c = make_qud("...");
    out += render_plan(shallow);
    out += '\n';
    for (size_t i = 0; i < p.children.size(); ++i) {
        std::string child_label = label + (p.children.size() > 1 ? "." + std::to_string(i + 1) : ".1");
        render_tree(p.children[i], child_label, depth + 1, out);
    }
}

}  // namespace

std::string render_plan_tree(const PlanNode& p) {
    std::string out;
    render_tree(p, "1", 0, out);
    return out;
}

static size_t count_expr_nodes(const Expr& e) {
    size_t n = 0;
    for (const auto& a : e.args) n += count_expr_nodes(a);
    for (const auto& s : e.sub) n += count_nodes(s);
    return n;
}

size_t count_nodes(const PlanNode& p) {
    size_t n = 1;
    for (const auto& c : p.children) n += count_nodes(c);
    for (const auto& e : p.pred) n += count_expr_nodes(e);
    return n;
}

static bool expr_resolved(const Expr& e) {
    for (const auto& a : e.args)
        if (!expr_resolved(a)) return false;
    for (const auto& s : e.sub)
        if (!is_resolved(s)) return false;
    return true;
}

bool is_resolved(const PlanNode& p) {
    if (p.op == Op::qud) return false;
    for (const auto& c : p.children)
        if (!is_resolved(c)) return false;
    for (const auto& e : p.pred)
        if (!expr_resolved(e)) return false;
    return true;
}

}  // namespace optree
