#include "optree/plan_validate.hpp"

#include <map>
#include <set>

#include "optree/event.hpp"

namespace optree {

namespace {

using KeyTypes = std::map<std::string, std::optional<TypeTag>, std::less<>>;

std::optional<TypeTag> builtin_type(std::string_view key) {
    if (key == "source") return TypeTag::str;
    if (key == "start_date" || key == "end_date") return TypeTag::date;
    if (key == "start_time" || key == "end_time") return TypeTag::time;
    if (key == "start_datetime" || key == "end_datetime") return TypeTag::datetime;
    return std::nullopt;
}

std::optional<TypeTag> function_type(std::string_view fn) {
    if (fn == "weekday") return TypeTag::str;
    if (fn == "date_diff_days") return TypeTag::int_;
    if (fn == "duration_minutes") return TypeTag::float_;
    return TypeTag::int_;
}

class Validator {
public:
    std::vector<Diagnostic> diags;

    /// Returns the keys (with known types) produced within the subtree.
    KeyTypes visit(const PlanNode& n) {
        if (n.op == Op::qud) {
            report(Severity::error, "UnresolvedQud", n.pos, "unresolved QUD(\"" + n.text + "\")");
            return {};
        }
        std::vector<KeyTypes> below;
        for (const auto& c : n.children) below.push_back(visit(c));
        KeyTypes produced;
        for (const auto& b : below) produced.insert(b.begin(), b.end());

        const std::string op(op_name(n.op));
        check_child_shapes(n, op);

        switch (n.op) {
            case Op::retrieve:
            case Op::qud: break;
            case Op::extract: {
                if (n.keys.size() != n.types.size())
                    report(Severity::error, "ArityMismatch", n.pos,
                           "EXTRACT has " + std::to_string(n.keys.size()) + " attr_names but " +
                               std::to_string(n.types.size()) + " attr_types");
                if (n.keys.empty()) report(Severity::warning, "EmptyExtract", n.pos, "EXTRACT requests no keys");
                std::set<std::string> seen;
                for (size_t i = 0; i < n.keys.size(); ++i) {
                    if (!seen.insert(n.keys[i]).second)
                        report(Severity::warning, "DuplicateKey", n.pos, "key '" + n.keys[i] + "' extracted twice");
                    produced[n.keys[i]] = i < n.types.size() ? std::optional(n.types[i]) : std::nullopt;
                }
                break;
            }
            case Op::join: {
                KeyTypes left = below.at(0), right = below.at(1);
                check_expr(n.predicate(), &left, &right, op);
                break;
            }
            case Op::group_by:
                if (n.keys.empty()) report(Severity::error, "ArityMismatch", n.pos, "GROUP_BY needs at least one key");
                for (const auto& k : n.keys) {
                    require_key(k, produced, n.pos, op);
                    if (!produced.count(k)) produced[k] = builtin_type(k);
                }
                break;
            case Op::filter: check_expr(n.predicate(), &produced, nullptr, op); break;
            case Op::map: produced[n.res_name] = function_type(n.fn); break;
            case Op::apply: break;
            case Op::unnest: {
                require_key(n.nested_key, produced, n.pos, op);
                auto it = produced.find(n.nested_key);
                if (it != produced.end() && it->second && *it->second != TypeTag::list)
                    report(Severity::warning, "TypeMismatch", n.pos,
                           "UNNEST over '" + n.nested_key + "' declared as " +
                               std::string(type_tag_name(*it->second)) + "; scalars act as singletons");
                produced[n.unnested_key] = std::nullopt;
                break;
            }
            case Op::argmin:
            case Op::argmax:
                require_key(n.keys.at(0), produced, n.pos, op);
                if (n.val_key) require_key(*n.val_key, produced, n.pos, op);
                if (auto t = type_of(n.keys.at(0), produced); t && (*t == TypeTag::str || *t == TypeTag::list))
                    report(Severity::error, "TypeMismatch", n.pos,
                           op + " over non-comparable key '" + n.keys.at(0) + "'");
                break;
            case Op::sum:
            case Op::avg:
            case Op::min:
            case Op::max: {
                const std::string& k = n.keys.at(0);
                require_key(k, produced, n.pos, op);
                auto t = type_of(k, produced);
                const bool numeric_only = n.op == Op::sum || n.op == Op::avg;
                if (t && (*t == TypeTag::str || *t == TypeTag::list ||
                          (numeric_only && *t != TypeTag::int_ && *t != TypeTag::float_)))
                    report(Severity::error, "NonNumeric", n.pos,
                           op + " over key '" + k + "' of type " + std::string(type_tag_name(*t)));
                break;
            }
        }
        return produced;
    }

private:
    void report(Severity s, std::string code, SourcePos pos, std::string msg) {
        diags.push_back(Diagnostic{s, std::move(code), pos, std::move(msg)});
    }

    static std::optional<TypeTag> type_of(std::string_view key, const KeyTypes& produced) {
        if (auto it = produced.find(key); it != produced.end()) return it->second;
        return builtin_type(key);
    }

    void require_key(const std::string& key, const KeyTypes& produced, SourcePos pos, const std::string& op) {
        if (is_builtin_key(key) || produced.count(key)) return;
        report(Severity::error, "UnproducedKey", pos,
               op + " consumes key '" + key + "' that no descendant EXTRACT, MAP, UNNEST or GROUP_BY produces");
    }

    void check_child_shapes(const PlanNode& n, const std::string& op) {
        for (const auto& c : n.children) {
            Shape s = infer_shape(c);
            if (s == Shape::scalar) {
                report(Severity::error, "AggregateOverScalar", n.pos,
                       op + " applied to the scalar result of " + std::string(op_name(c.op)));
                continue;
            }
            if (s != Shape::groups) continue;
            switch (n.op) {
                case Op::map:
                case Op::apply:
                case Op::argmin:
                case Op::argmax:
                case Op::sum:
                case Op::avg:
                case Op::min:
                case Op::max: break;
                default:
                    report(Severity::error, "TypeMismatch", n.pos, op + " expects an event list but gets groups");
            }
        }
    }

    // Returns the static type of the expression when it is an attribute reference.
    std::optional<TypeTag> check_expr(const Expr& e, const KeyTypes* side1, const KeyTypes* side2,
                                      const std::string& op) {
        switch (e.kind) {
            case ExprKind::attr: {
                const KeyTypes* scope = e.side == 2 ? side2 : side1;
                if (scope == nullptr) return std::nullopt;
                require_key(e.name, *scope, e.pos, op);
                return type_of(e.name, *scope);
            }
            case ExprKind::accessor: {
                auto t = check_expr(e.args.at(0), side1, side2, op);
                if (t) {
                    const bool calendar_part = e.name == "year" || e.name == "month" || e.name == "day" ||
                                               e.name == "weekday";
                    const bool ok = calendar_part ? (*t == TypeTag::date || *t == TypeTag::datetime)
                                                  : (*t == TypeTag::time || *t == TypeTag::datetime);
                    if (!ok)
                        report(Severity::error, "PredicateTypeError", e.pos,
                               "." + e.name + " is not defined on " + std::string(type_tag_name(*t)));
                }
                return TypeTag::int_;
            }
            case ExprKind::subplan: {
                const PlanNode& sub = e.sub.at(0);
                Validator nested;
                nested.visit(sub);
                diags.insert(diags.end(), nested.diags.begin(), nested.diags.end());
                Shape s = infer_shape(sub);
                if (s == Shape::events || s == Shape::groups)
                    report(Severity::error, "TypeMismatch", e.pos, "sub-plan in predicate must produce a scalar");
                return std::nullopt;
            }
            default:
                for (const auto& a : e.args) check_expr(a, side1, side2, op);
                return std::nullopt;
        }
    }
};

}  // namespace

Shape infer_shape(const PlanNode& n) {
    switch (n.op) {
        case Op::qud: return Shape::unknown;
        case Op::retrieve:
        case Op::extract:
        case Op::join:
        case Op::filter:
        case Op::unnest: return Shape::events;
        case Op::group_by: return Shape::groups;
        case Op::map: return infer_shape(n.child());
        case Op::apply: return Shape::scalar;
        case Op::argmin:
        case Op::argmax: return n.val_key ? Shape::scalar : infer_shape(n.child());
        case Op::sum:
        case Op::avg:
        case Op::min:
        case Op::max: return Shape::scalar;
    }
    return Shape::unknown;
}

std::vector<Diagnostic> validate_plan(const PlanNode& plan) {
    Validator v;
    v.visit(plan);
    return v.diags;
}

std::string format_diagnostic(const Diagnostic& d) {
    return std::string(d.level == Severity::error ? "ERROR" : "WARNING") + " " + d.code + " " +
           std::to_string(d.pos.line) + ":" + std::to_string(d.pos.col) + " " + d.message;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags)
        if (d.level == Severity::error) return true;
    return false;
}

}  // namespace optree
