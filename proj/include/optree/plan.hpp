#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "optree/value.hpp"

namespace optree {

/// 1-based line and column into the plan text.
struct SourcePos {
    int line = 1;
    int col = 1;
    // Positions never take part in structural equality.
    bool operator==(const SourcePos&) const { return true; }
};

/// Parse failure carrying the offending position. code() is one of
/// "SyntaxError", "ArityError" or "UnknownFunction".
class PlanError : public Error {
public:
    PlanError(std::string code, SourcePos pos, const std::string& message)
        : Error(std::move(code), std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": " + message),
          pos_(pos) {}
    SourcePos pos() const noexcept { return pos_; }

private:
    SourcePos pos_;
};

enum class TypeTag { str, int_, float_, date, time, datetime, list };

std::string_view type_tag_name(TypeTag t) noexcept;
/// Accepts canonical names and the host constructor spellings
/// (date.fromisoformat, datetime.fromtimestamp, ...).
std::optional<TypeTag> parse_type_tag(std::string_view name) noexcept;

enum class CmpOp { eq, ne, lt, le, gt, ge, in, not_in };
std::string_view cmp_op_text(CmpOp op) noexcept;

/// Calendar offset used by today() arithmetic.
struct Period {
    int64_t years = 0;
    int64_t months = 0;
    int64_t days = 0;
    int64_t seconds = 0;
    bool operator==(const Period&) const = default;
};

struct PlanNode;

enum class ExprKind {
    literal,       // value
    boolean,       // flag
    attr,          // attr["name"], or i<side>.name inside a join condition
    compare,       // args[0] <cmp> args[1]
    logic_and,     // args...
    logic_or,      // args...
    logic_not,     // args[0]
    arith,         // args[0] (+|-) args[1]; name holds the operator
    negate,        // -args[0]
    accessor,      // args[0].name for year/month/day/hour/minute/weekday
    lower,         // args[0].lower()
    length,        // len(args[0])
    any_contains,  // any(args[1] in p[.lower()] for p in args[0]); flag = case folded
    today,         // date.today()
    now,           // datetime.now()
    period,        // relativedelta(...)
    subplan,       // sub[0].result
};

struct Expr {
    ExprKind kind = ExprKind::literal;
    Value value;
    bool flag = false;
    std::string name;
    int side = 0;  // 0 inside FILTER, 1/2 inside JOIN conditions
    CmpOp cmp = CmpOp::eq;
    Period period;
    std::vector<Expr> args;
    std::vector<PlanNode> sub;  // exactly one entry for subplan
    SourcePos pos;

    bool operator==(const Expr&) const;
};

enum class Op {
    retrieve,
    extract,
    join,
    group_by,
    filter,
    map,
    apply,
    unnest,
    argmin,
    argmax,
    sum,
    avg,
    min,
    max,
    qud,
};

std::string_view op_name(Op op) noexcept;
std::optional<Op> parse_op_name(std::string_view name) noexcept;
bool is_aggregate(Op op) noexcept;  // sum/avg/min/max

/// Built-in functions usable in MAP/APPLY.
bool is_known_function(std::string_view name) noexcept;

struct PlanNode {
    Op op = Op::retrieve;
    /// Inputs. retrieve: 0 or 1; join: 2; qud: 0; every other operator: 1.
    std::vector<PlanNode> children;
    std::string text;                 // retrieve query, qud question
    std::vector<std::string> keys;    // extract/group_by keys; aggregate key; argmin/argmax arg key
    std::vector<TypeTag> types;       // extract
    std::vector<Expr> pred;           // filter predicate / join condition (exactly one entry)
    std::string fn;                   // map/apply function
    std::string res_name;             // map result key
    std::optional<std::string> val_key;  // argmin/argmax
    std::string nested_key;           // unnest
    std::string unnested_key;         // unnest
    SourcePos pos;

    bool operator==(const PlanNode&) const;

    const PlanNode& child(size_t i = 0) const { return children.at(i); }
    const Expr& predicate() const { return pred.at(0); }
};

// Construction helpers for code that builds plans directly.
PlanNode make_retrieve(std::string query);
PlanNode make_qud(std::string question);
PlanNode make_extract(PlanNode input, std::vector<std::string> keys, std::vector<TypeTag> types);
PlanNode make_join(PlanNode left, PlanNode right, Expr condition);
PlanNode make_group_by(PlanNode input, std::vector<std::string> keys);
PlanNode make_filter(PlanNode input, Expr predicate);
PlanNode make_map(PlanNode input, std::string fn, std::string res_name = "map_result");
PlanNode make_apply(PlanNode input, std::string fn);
PlanNode make_unnest(PlanNode input, std::string nested_key, std::string unnested_key);
PlanNode make_arg(Op op, PlanNode input, std::string arg_key, std::optional<std::string> val_key = {});
PlanNode make_aggregate(Op op, PlanNode input, std::string key);

/// Parses one plan expression. Throws PlanError.
PlanNode parse_plan(std::string_view text);
/// Parses a bare predicate, as found in a join condition or after `lambda attr:`.
Expr parse_predicate(std::string_view text, bool join_condition = false);

/// Canonical single-line text; parse_plan(render_plan(p)) == p.
std::string render_plan(const PlanNode& p);
std::string render_expr(const Expr& e);
/// Multi-line rendering with one operator per line, for traces.
std::string render_plan_tree(const PlanNode& p);

size_t count_nodes(const PlanNode& p);
/// True when no QUD placeholder remains, including inside predicates.
bool is_resolved(const PlanNode& p);

}  // namespace optree
