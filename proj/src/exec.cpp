#include <chrono>

#include "optree/exec.hpp"

namespace optree {

namespace {

using Clock = std::chrono::steady_clock;

void collect_subplans(const Expr& e, std::vector<const Expr*>& out) {
    if (e.kind == ExprKind::subplan) {
        out.push_back(&e);
        return;
    }
    for (const auto& a : e.args) collect_subplans(a, out);
}

const std::vector<Event>& need_events(const ExecutionResult& r, Op op) {
    if (r.kind != ExecutionResult::Kind::events)
        throw Error("TypeMismatch", std::string(op_name(op)) + " expects EventList, got " +
                                        std::string(result_kind_name(r.kind)));
    return r.events;
}

}  // namespace

ExecutionResult Executor::execute(const PlanNode& plan, std::vector<TraceRecord>* trace) const {
    double child_ms = 0;
    return run(plan, "1", trace, &child_ms);
}

ExecutionResult Executor::run(const PlanNode& n, const std::string& id, std::vector<TraceRecord>* trace,
                              double* child_ms) const {
    std::vector<ExecutionResult> inputs;
    double below = 0;
    for (size_t i = 0; i < n.children.size(); ++i)
        inputs.push_back(run(n.children[i], id + "." + std::to_string(i + 1), trace, &below));

    // Predicate sub-plans are scalars computed once per node.
    std::map<const Expr*, Value> memo;
    std::vector<std::string> sub_prov;
    if (!n.pred.empty()) {
        std::vector<const Expr*> subs;
        collect_subplans(n.predicate(), subs);
        for (size_t k = 0; k < subs.size(); ++k) {
            const std::string sid = id + ".s" + std::to_string(k + 1);
            ExecutionResult r = run(subs[k]->sub.at(0), sid, trace, &below);
            if (r.kind != ExecutionResult::Kind::scalar)
                throw ExecError("TypeMismatch", sid, subs[k]->sub.at(0).op,
                                "predicate sub-plan must yield a Scalar, got " +
                                    std::string(result_kind_name(r.kind)));
            memo[subs[k]] = r.scalar;
            merge_provenance(sub_prov, r.provenance);
        }
    }

    std::vector<size_t> input_sizes;
    for (const auto& in : inputs) input_sizes.push_back(in.size());
    const auto t0 = Clock::now();
    ExecutionResult out;
    try {
        const PredicateEvaluator eval(ctx_.clock, &memo);
        switch (n.op) {
            case Op::retrieve: {
                const std::vector<Event>* in = inputs.empty() ? nullptr : &need_events(inputs[0], n.op);
                if (ctx_.retrieve_fn) {
                    out = ExecutionResult::of_events(ctx_.retrieve_fn(n.text, in));
                    break;
                }
                if (!ctx_.retriever || !ctx_.store) throw Error("ConfigError", "no retriever or store configured");
                out = ExecutionResult::of_events(ctx_.retriever->retrieve(n.text, *ctx_.store, in));
                break;
            }
            case Op::extract: {
                if (!ctx_.extractor) throw Error("ConfigError", "no extractor configured");
                out = ExecutionResult::of_events(
                    ctx_.extractor->extract(need_events(inputs[0], n.op), n.keys, n.types));
                break;
            }
            case Op::join:
                out = ExecutionResult::of_events(join_events(need_events(inputs[0], n.op),
                                                             need_events(inputs[1], n.op), n.predicate(), eval));
                break;
            case Op::group_by:
                out = ExecutionResult::of_groups(group_events(need_events(inputs[0], n.op), n.keys));
                break;
            case Op::filter:
                out = ExecutionResult::of_events(filter_events(need_events(inputs[0], n.op), n.predicate(), eval));
                break;
            case Op::map: out = map_result(std::move(inputs[0]), n.fn, n.res_name); break;
            case Op::apply: out = apply_function(inputs[0], n.fn); break;
            case Op::unnest:
                out = ExecutionResult::of_events(
                    unnest_events(need_events(inputs[0], n.op), n.nested_key, n.unnested_key));
                break;
            case Op::argmin:
            case Op::argmax: out = arg_extreme(inputs[0], n.op, n.keys.at(0), n.val_key); break;
            case Op::sum:
            case Op::avg:
            case Op::min:
            case Op::max: out = aggregate(inputs[0], n.op, n.keys.at(0)); break;
            case Op::qud: throw Error("UnresolvedQud", "plan still contains QUD(\"" + n.text + "\")");
        }
    } catch (const ExecError&) {
        throw;
    } catch (const Error& e) {
        throw ExecError(e.code(), id, n.op, e.what());
    }
    merge_provenance(out.provenance, sub_prov);

    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    *child_ms += ms + below;
    if (trace) {
        TraceRecord rec;
        rec.node_id = id;
        rec.op = n.op;
        rec.input_sizes = std::move(input_sizes);
        rec.output_size = out.size();
        rec.elapsed_ms = ms;
        rec.provenance_sample.assign(out.provenance.begin(),
                                     out.provenance.begin() + std::min<size_t>(5, out.provenance.size()));
        trace->push_back(std::move(rec));
    }
    return out;
}

}  // namespace optree
