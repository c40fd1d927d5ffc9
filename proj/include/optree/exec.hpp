#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "optree/event.hpp"
#include "optree/extract.hpp"
#include "optree/plan.hpp"
#include "optree/retrieve.hpp"

namespace optree {

struct Group {
    Attrs key_values;  // grouping keys plus MAP results over the group
    std::vector<Event> members;
};

/// Result of one operator. Provenance holds the store ids that produced it,
/// sorted and unique.
struct ExecutionResult {
    enum class Kind { events, groups, scalar };
    Kind kind = Kind::events;
    std::vector<Event> events;
    std::vector<Group> groups;
    Value scalar;
    std::vector<std::string> provenance;

    static ExecutionResult of_events(std::vector<Event> events);
    static ExecutionResult of_groups(std::vector<Group> groups);
    static ExecutionResult of_scalar(Value v, std::vector<std::string> provenance);

    /// Element count for lists and groups, 1 for scalars.
    size_t size() const noexcept;
};

std::string_view result_kind_name(ExecutionResult::Kind k) noexcept;

/// Sorted union of the provenance of `events`.
std::vector<std::string> provenance_of(const std::vector<Event>& events);
void merge_provenance(std::vector<std::string>& into, const std::vector<std::string>& more);

/// Evaluates predicate expressions. Null operands make comparisons false;
/// ill-typed operations raise Error("PredicateTypeError").
class PredicateEvaluator {
public:
    /// `subplans` maps each subplan Expr to its pre-computed scalar.
    explicit PredicateEvaluator(DateTime clock, const std::map<const Expr*, Value>* subplans = nullptr)
        : clock_(clock), subplans_(subplans) {}

    bool test(const Expr& pred, const Event& e) const;
    bool test_pair(const Expr& cond, const Event& left, const Event& right) const;

    /// Scalar value of a non-boolean expression over one event.
    Value value(const Expr& e, const Event& ev) const;

private:
    struct Val;
    Val eval(const Expr& e, const Event* a, const Event* b) const;
    bool truthy(const Val& v) const;

    DateTime clock_;
    const std::map<const Expr*, Value>* subplans_;
};

// Operator kernels. Each is usable on its own; Executor wires them together.

/// Left attrs plus materialized span keys, then the right side's with
/// colliding keys suffixed "__r"; span is the enclosing span of the pair.
Event combine_events(const Event& left, const Event& right);

/// Sort-and-probe join: the leading top-level conjuncts comparing an i1 key
/// with the same i2 key fix a sort key for the right side; each left event
/// binary-searches the intersection of their ranges. Falls back to a nested
/// loop when the condition does not start with such a conjunct. Output ordered by (left start, right start, left id,
/// right id). `parallel` distributes left events over OpenMP threads.
std::vector<Event> join_events(const std::vector<Event>& left, const std::vector<Event>& right, const Expr& cond,
                               const PredicateEvaluator& eval, bool parallel = true);
/// Reference nested-loop join with the same output order.
std::vector<Event> join_nested_loop(const std::vector<Event>& left, const std::vector<Event>& right,
                                    const Expr& cond, const PredicateEvaluator& eval);

/// Hash partition in first-appearance order; absent keys group as null.
std::vector<Group> group_events(const std::vector<Event>& events, const std::vector<std::string>& keys);

std::vector<Event> filter_events(std::vector<Event> events, const Expr& pred, const PredicateEvaluator& eval);

/// fn applied to one event: weekday (name), month, year, day, hour of the
/// start; duration_minutes; date_diff_days. Throws FunctionDomainError.
Value map_function(std::string_view fn, const Event& e);

ExecutionResult map_result(ExecutionResult in, std::string_view fn, const std::string& res_name);
ExecutionResult apply_function(const ExecutionResult& in, std::string_view fn);
std::vector<Event> unnest_events(const std::vector<Event>& events, const std::string& nested_key,
                                 const std::string& unnested_key);

/// Extremal element by arg_key; ties go to the earliest start, then the
/// smallest id. With val_key the result is that key's value.
ExecutionResult arg_extreme(const ExecutionResult& in, Op op, const std::string& arg_key,
                            const std::optional<std::string>& val_key);
/// sum/avg/min/max over non-null values; sum of nothing is 0.
ExecutionResult aggregate(const ExecutionResult& in, Op op, const std::string& key);

struct TraceRecord {
    std::string node_id;  // "1", "1.2", "1.2.s1" for a predicate sub-plan
    Op op = Op::retrieve;
    std::vector<size_t> input_sizes;
    size_t output_size = 0;
    double elapsed_ms = 0;  // exclusive of child nodes
    std::vector<std::string> provenance_sample;
};

/// RETRIEVE override: (query, optional input list) -> events. Used to run
/// plans over stores where relevance is known, such as canonical events.
using RetrieveFn = std::function<std::vector<Event>(std::string_view query, const std::vector<Event>* input)>;

struct ExecContext {
    DateTime clock;
    const EventStore* store = nullptr;
    const Retriever* retriever = nullptr;
    const Extractor* extractor = nullptr;
    RetrieveFn retrieve_fn;  // takes precedence over retriever when set
};

/// Execution failure attributed to a plan node.
class ExecError : public Error {
public:
    ExecError(std::string code, std::string node_id, Op op, const std::string& message)
        : Error(std::move(code), "node " + node_id + " (" + std::string(op_name(op)) + "): " + message),
          node_id_(std::move(node_id)),
          op_(op) {}
    const std::string& node_id() const noexcept { return node_id_; }
    Op op() const noexcept { return op_; }

private:
    std::string node_id_;
    Op op_;
};

class Executor {
public:
    explicit Executor(ExecContext ctx) : ctx_(std::move(ctx)) {}

    /// Post-order evaluation of a resolved plan. Throws ExecError.
    ExecutionResult execute(const PlanNode& plan, std::vector<TraceRecord>* trace = nullptr) const;

private:
    ExecutionResult run(const PlanNode& n, const std::string& id, std::vector<TraceRecord>* trace,
                        double* child_ms) const;

    ExecContext ctx_;
};

}  // namespace optree
