#include <algorithm>
#include <exception>
#include <unordered_map>

#include "optree/exec.hpp"

namespace optree {

std::string_view result_kind_name(ExecutionResult::Kind k) noexcept {
    switch (k) {
        case ExecutionResult::Kind::events: return "EventList";
        case ExecutionResult::Kind::groups: return "Grouped";
        case ExecutionResult::Kind::scalar: return "Scalar";
    }
    return "?";
}

void merge_provenance(std::vector<std::string>& into, const std::vector<std::string>& more) {
    into.insert(into.end(), more.begin(), more.end());
    std::sort(into.begin(), into.end());
    into.erase(std::unique(into.begin(), into.end()), into.end());
}

std::vector<std::string> provenance_of(const std::vector<Event>& events) {
    std::vector<std::string> out;
    for (const auto& e : events) out.insert(out.end(), e.provenance.begin(), e.provenance.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

ExecutionResult ExecutionResult::of_events(std::vector<Event> events) {
    ExecutionResult r;
    r.kind = Kind::events;
    r.provenance = provenance_of(events);
    r.events = std::move(events);
    return r;
}

ExecutionResult ExecutionResult::of_groups(std::vector<Group> groups) {
    ExecutionResult r;
    r.kind = Kind::groups;
    for (const auto& g : groups)
        for (const auto& e : g.members) r.provenance.insert(r.provenance.end(), e.provenance.begin(), e.provenance.end());
    std::sort(r.provenance.begin(), r.provenance.end());
    r.provenance.erase(std::unique(r.provenance.begin(), r.provenance.end()), r.provenance.end());
    r.groups = std::move(groups);
    return r;
}

ExecutionResult ExecutionResult::of_scalar(Value v, std::vector<std::string> provenance) {
    ExecutionResult r;
    r.kind = Kind::scalar;
    r.scalar = std::move(v);
    std::sort(provenance.begin(), provenance.end());
    provenance.erase(std::unique(provenance.begin(), provenance.end()), provenance.end());
    r.provenance = std::move(provenance);
    return r;
}

size_t ExecutionResult::size() const noexcept {
    switch (kind) {
        case Kind::events: return events.size();
        case Kind::groups: return groups.size();
        case Kind::scalar: break;
    }
    return 1;
}

Event combine_events(const Event& left, const Event& right) {
    Event out;
    out.id = left.id + "|" + right.id;
    out.source = left.source;
    out.span = {std::min(left.span.start, right.span.start), std::max(left.span.end, right.span.end)};
    out.attrs = left.attrs;
    for (auto k : kSpanKeys) out.attrs.emplace(std::string(k), *span_value(left.span, k));
    auto put = [&](const std::string& key, const Value& v) {
        std::string k = key;
        while (out.attrs.count(k)) k += "__r";
        out.attrs.emplace(std::move(k), v);
    };
    for (const auto& [k, v] : right.attrs) put(k, v);
    for (auto k : kSpanKeys)
        if (!right.attrs.count(k)) put(std::string(k), *span_value(right.span, k));
    out.provenance = left.provenance;
    merge_provenance(out.provenance, right.provenance);
    out.source_mask = static_cast<uint16_t>((left.source_mask ? left.source_mask : source_bit(left.source)) |
                                            (right.source_mask ? right.source_mask : source_bit(right.source)));
    out.extraction_miss = left.extraction_miss || right.extraction_miss;
    return out;
}

namespace {

using Pair = std::pair<size_t, size_t>;

std::vector<Event> materialize(const std::vector<Event>& left, const std::vector<Event>& right,
                               std::vector<Pair> pairs) {
    std::sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
        const Event& la = left[a.first];
        const Event& lb = left[b.first];
        if (la.span.start != lb.span.start) return la.span.start < lb.span.start;
        const Event& ra = right[a.second];
        const Event& rb = right[b.second];
        if (ra.span.start != rb.span.start) return ra.span.start < rb.span.start;
        if (la.id != lb.id) return la.id < lb.id;
        if (ra.id != rb.id) return ra.id < rb.id;
        return a < b;
    });
    std::vector<Event> out;
    out.reserve(pairs.size());
    for (const auto& [l, r] : pairs) out.push_back(combine_events(left[l], right[r]));
    return out;
}

// Comparison family; values of different families never order.
int family(const Value& v) {
    switch (v.kind()) {
        case Value::Kind::integer:
        case Value::Kind::real: return 1;
        case Value::Kind::date:
        case Value::Kind::datetime: return 2;
        case Value::Kind::time: return 3;
        case Value::Kind::duration: return 4;
        case Value::Kind::text: return 5;
        default: return 0;
    }
}

struct ProbeKey {
    std::string left_key;
    std::string right_key;
    CmpOp op = CmpOp::eq;  // left <op> right
};

std::optional<ProbeKey> as_probe(const Expr& c) {
    if (c.kind != ExprKind::compare) return std::nullopt;
    if (c.cmp == CmpOp::ne || c.cmp == CmpOp::in || c.cmp == CmpOp::not_in) return std::nullopt;
    const Expr& x = c.args[0];
    const Expr& y = c.args[1];
    if (x.kind != ExprKind::attr || y.kind != ExprKind::attr) return std::nullopt;
    if (x.side == 1 && y.side == 2) return ProbeKey{x.name, y.name, c.cmp};
    if (x.side == 2 && y.side == 1) {
        CmpOp flipped = c.cmp;
        switch (c.cmp) {
            case CmpOp::lt: flipped = CmpOp::gt; break;
            case CmpOp::le: flipped = CmpOp::ge; break;
            case CmpOp::gt: flipped = CmpOp::lt; break;
            case CmpOp::ge: flipped = CmpOp::le; break;
            default: break;
        }
        return ProbeKey{y.name, x.name, flipped};
    }
    return std::nullopt;
}

/// The leading run of top-level i1/i2 comparisons sharing the first one's
/// right key; each narrows the candidate range. Only a prefix is safe: `and`
/// short-circuits, so a pair ruled out here never reaches later conjuncts
/// (which might raise) in the nested loop either.
std::vector<ProbeKey> find_probes(const Expr& cond) {
    std::vector<const Expr*> conjuncts;
    if (cond.kind == ExprKind::logic_and)
        for (const auto& a : cond.args) conjuncts.push_back(&a);
    else
        conjuncts.push_back(&cond);
    std::vector<ProbeKey> out;
    for (const Expr* c : conjuncts) {
        auto k = as_probe(*c);
        if (!k || (!out.empty() && k->right_key != out.front().right_key)) break;
        out.push_back(*k);
    }
    return out;
}

bool less_value(const Value& a, const Value& b) { return *compare_values(a, b) < 0; }

}  // namespace

std::vector<Event> join_nested_loop(const std::vector<Event>& left, const std::vector<Event>& right,
                                    const Expr& cond, const PredicateEvaluator& eval) {
    std::vector<Pair> pairs;
    for (size_t i = 0; i < left.size(); ++i)
        for (size_t j = 0; j < right.size(); ++j)
            if (eval.test_pair(cond, left[i], right[j])) pairs.emplace_back(i, j);
    return materialize(left, right, std::move(pairs));
}

std::vector<Event> join_events(const std::vector<Event>& left, const std::vector<Event>& right, const Expr& cond,
                               const PredicateEvaluator& eval, bool parallel) {
    if (left.empty() || right.empty()) return {};
    auto probes = find_probes(cond);
    // Sorted (value, index) view of the right side on the probe key.
    std::vector<std::pair<Value, size_t>> sorted;
    int fam = 0;
    if (!probes.empty()) {
        for (size_t j = 0; j < right.size(); ++j) {
            auto v = right[j].get(probes.front().right_key);
            if (!v || v->is_null()) continue;
            int f = family(*v);
            if (f == 0 || (fam != 0 && f != fam)) {
                probes.clear();
                break;
            }
            fam = f;
            sorted.emplace_back(std::move(*v), j);
        }
    }
    if (probes.empty()) return join_nested_loop(left, right, cond, eval);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return less_value(a.first, b.first); });

    std::vector<std::vector<size_t>> matches(left.size());
    std::exception_ptr failure;
    auto probe_one = [&](size_t i) {
        const Event& l = left[i];
        auto scan_all = [&] {
            for (size_t j = 0; j < right.size(); ++j)
                if (eval.test_pair(cond, l, right[j])) matches[i].push_back(j);
        };
        auto lo_cmp = [](const std::pair<Value, size_t>& a, const Value& v) { return less_value(a.first, v); };
        auto hi_cmp = [](const Value& v, const std::pair<Value, size_t>& a) { return less_value(v, a.first); };
        auto first = sorted.begin();
        auto last = sorted.end();
        for (const auto& probe : probes) {
            auto lv = l.get(probe.left_key);
            // A null or mismatched probe value makes its conjunct false, but
            // other conjuncts may still raise, so those events scan everything.
            if (!lv || lv->is_null() || family(*lv) != fam) return scan_all();
            switch (probe.op) {
                case CmpOp::eq:
                    first = std::max(first, std::lower_bound(sorted.begin(), sorted.end(), *lv, lo_cmp));
                    last = std::min(last, std::upper_bound(sorted.begin(), sorted.end(), *lv, hi_cmp));
                    break;
                case CmpOp::lt:
                    first = std::max(first, std::upper_bound(sorted.begin(), sorted.end(), *lv, hi_cmp));
                    break;
                case CmpOp::le:
                    first = std::max(first, std::lower_bound(sorted.begin(), sorted.end(), *lv, lo_cmp));
                    break;
                case CmpOp::gt:
                    last = std::min(last, std::lower_bound(sorted.begin(), sorted.end(), *lv, lo_cmp));
                    break;
                case CmpOp::ge:
                    last = std::min(last, std::upper_bound(sorted.begin(), sorted.end(), *lv, hi_cmp));
                    break;
                default: break;
            }
        }
        if (last < first) last = first;
        for (auto it = first; it != last; ++it)
            if (eval.test_pair(cond, l, right[it->second])) matches[i].push_back(it->second);
    };
    const auto n = static_cast<int64_t>(left.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 8)
        for (int64_t i = 0; i < n; ++i) {
            try {
                probe_one(static_cast<size_t>(i));
            } catch (...) {
#pragma omp critical(optree_join_failure)
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    } else {
        for (size_t i = 0; i < left.size(); ++i) probe_one(i);
    }
    std::vector<Pair> pairs;
    for (size_t i = 0; i < matches.size(); ++i)
        for (size_t j : matches[i]) pairs.emplace_back(i, j);
    return materialize(left, right, std::move(pairs));
}

std::vector<Group> group_events(const std::vector<Event>& events, const std::vector<std::string>& keys) {
    std::vector<Group> groups;
    std::unordered_map<std::string, size_t> index;
    for (const auto& e : events) {
        Attrs kv;
        std::string sig;
        for (const auto& k : keys) {
            auto v = e.get(k);
            Value val = v ? *v : Value();
            sig += std::to_string(static_cast<int>(val.kind()));
            sig += ':';
            sig += to_text(val);
            sig += '\x1f';
            kv[k] = std::move(val);
        }
        auto [it, fresh] = index.try_emplace(sig, groups.size());
        if (fresh) groups.push_back({std::move(kv), {}});
        groups[it->second].members.push_back(e);
    }
    return groups;
}

std::vector<Event> filter_events(std::vector<Event> events, const Expr& pred, const PredicateEvaluator& eval) {
    std::vector<Event> out;
    for (auto& e : events)
        if (eval.test(pred, e)) out.push_back(std::move(e));
    return out;
}

Value map_function(std::string_view fn, const Event& e) {
    const Date d = date_of(e.span.start);
    const CivilDate c = civil_from_days(d.days);
    if (fn == "weekday") return Value(std::string(weekday_name(weekday_index(d))));
    if (fn == "month") return Value(static_cast<int64_t>(c.month));
    if (fn == "year") return Value(static_cast<int64_t>(c.year));
    if (fn == "day") return Value(static_cast<int64_t>(c.day));
    if (fn == "hour") return Value(static_cast<int64_t>(time_of(e.span.start).seconds / 3600));
    if (fn == "duration_minutes") {
        int64_t s = e.span.length();
        if (s % 60 == 0) return Value(s / 60);
        return Value(static_cast<double>(s) / 60.0);
    }
    if (fn == "date_diff_days") return Value(date_of(e.span.end).days - d.days);
    if (fn == "len") throw Error("FunctionDomainError", "len is defined on lists and groups, not on one event");
    throw Error("UnknownFunction", "unknown function '" + std::string(fn) + "'");
}

ExecutionResult map_result(ExecutionResult in, std::string_view fn, const std::string& res_name) {
    switch (in.kind) {
        case ExecutionResult::Kind::events:
            for (auto& e : in.events) e.attrs[res_name] = map_function(fn, e);
            return in;
        case ExecutionResult::Kind::groups:
            if (fn != "len")
                throw Error(is_known_function(fn) ? "FunctionDomainError" : "UnknownFunction",
                            "MAP over groups supports len only, got '" + std::string(fn) + "'");
            for (auto& g : in.groups) g.key_values[res_name] = Value(static_cast<int64_t>(g.members.size()));
            return in;
        case ExecutionResult::Kind::scalar: break;
    }
    throw Error("TypeMismatch", "MAP expects EventList or Grouped, got Scalar");
}

ExecutionResult apply_function(const ExecutionResult& in, std::string_view fn) {
    if (in.kind == ExecutionResult::Kind::scalar) throw Error("TypeMismatch", "APPLY expects a list, got Scalar");
    if (fn != "len")
        throw Error(is_known_function(fn) ? "FunctionDomainError" : "UnknownFunction",
                    "APPLY supports len only, got '" + std::string(fn) + "'");
    return ExecutionResult::of_scalar(Value(static_cast<int64_t>(in.size())), in.provenance);
}

std::vector<Event> unnest_events(const std::vector<Event>& events, const std::string& nested_key,
                                 const std::string& unnested_key) {
    std::vector<Event> out;
    for (const auto& e : events) {
        auto v = e.get(nested_key);
        if (!v || v->is_null()) continue;
        Value::List items = v->is_list() ? v->list() : Value::List{*v};
        for (size_t k = 0; k < items.size(); ++k) {
            Event copy = e;
            copy.id = e.id + "#" + std::to_string(k + 1);
            copy.attrs[unnested_key] = items[k];
            out.push_back(std::move(copy));
        }
    }
    return out;
}

namespace {

struct Candidate {
    Value value;
    DateTime start;
    std::string id;
    size_t index;
};

void check_orderable(const Value& v, const std::string& key) {
    if (v.is_list() || v.kind() == Value::Kind::text || family(v) == 0)
        throw Error("NonNumeric", "'" + key + "' holds " + std::string(kind_name(v.kind())) +
                                      " values, which cannot be ranked");
}

int order(const Value& a, const Value& b) {
    auto c = compare_values(a, b);
    if (!c) throw Error("TypeMismatch", "cannot compare " + std::string(kind_name(a.kind())) + " with " +
                                            std::string(kind_name(b.kind())));
    return *c < 0 ? -1 : (*c > 0 ? 1 : 0);
}

// Index of the extremal candidate under the (value, start, id) tie-break.
size_t pick_extreme(const std::vector<Candidate>& cs, bool want_max) {
    size_t best = 0;
    for (size_t i = 1; i < cs.size(); ++i) {
        int c = order(cs[i].value, cs[best].value);
        if (want_max) c = -c;
        if (c < 0 || (c == 0 && (cs[i].start < cs[best].start ||
                                 (cs[i].start == cs[best].start && cs[i].id < cs[best].id))))
            best = i;
    }
    return best;
}

const Value* group_value(const Group& g, const std::string& key) {
    auto it = g.key_values.find(key);
    return it == g.key_values.end() ? nullptr : &it->second;
}

std::vector<std::string> group_provenance(const Group& g) { return provenance_of(g.members); }

}  // namespace

ExecutionResult arg_extreme(const ExecutionResult& in, Op op, const std::string& arg_key,
                            const std::optional<std::string>& val_key) {
    const bool want_max = op == Op::argmax;
    std::vector<Candidate> cs;
    if (in.kind == ExecutionResult::Kind::events) {
        for (size_t i = 0; i < in.events.size(); ++i) {
            const Event& e = in.events[i];
            auto v = e.get(arg_key);
            if (!v || v->is_null()) continue;
            if (v->is_list() || family(*v) == 0)
                throw Error("NonNumeric", "'" + arg_key + "' holds " + std::string(kind_name(v->kind())) + " values");
            cs.push_back({*v, e.span.start, e.id, i});
        }
    } else if (in.kind == ExecutionResult::Kind::groups) {
        for (size_t i = 0; i < in.groups.size(); ++i) {
            const Group& g = in.groups[i];
            const Value* v = group_value(g, arg_key);
            if (!v) throw Error("TypeMismatch", "groups carry no '" + arg_key + "'");
            if (v->is_null() || g.members.empty()) continue;
            if (v->is_list() || family(*v) == 0)
                throw Error("NonNumeric", "'" + arg_key + "' holds " + std::string(kind_name(v->kind())) + " values");
            DateTime start = g.members.front().span.start;
            std::string id = g.members.front().id;
            for (const auto& m : g.members) {
                start = std::min(start, m.span.start);
                id = std::min(id, m.id);
            }
            cs.push_back({*v, start, id, i});
        }
    } else {
        throw Error("TypeMismatch", std::string(op_name(op)) + " expects EventList or Grouped, got Scalar");
    }
    if (cs.empty()) throw Error("EmptyAggregate", "no non-null '" + arg_key + "' values");
    const Candidate& best = cs[pick_extreme(cs, want_max)];
    if (in.kind == ExecutionResult::Kind::events) {
        const Event& e = in.events[best.index];
        if (val_key) {
            auto v = e.get(*val_key);
            return ExecutionResult::of_scalar(v ? *v : Value(), e.provenance);
        }
        return ExecutionResult::of_events({e});
    }
    const Group& g = in.groups[best.index];
    if (val_key) {
        const Value* v = group_value(g, *val_key);
        return ExecutionResult::of_scalar(v ? *v : Value(), group_provenance(g));
    }
    return ExecutionResult::of_groups({g});
}

ExecutionResult aggregate(const ExecutionResult& in, Op op, const std::string& key) {
    struct Item {
        Value value;
        const std::vector<std::string>* prov;
        std::vector<std::string> owned;
    };
    std::vector<Item> items;
    if (in.kind == ExecutionResult::Kind::events) {
        for (const auto& e : in.events) {
            auto v = e.get(key);
            if (v && !v->is_null()) items.push_back({*v, &e.provenance, {}});
        }
    } else if (in.kind == ExecutionResult::Kind::groups) {
        for (const auto& g : in.groups) {
            const Value* v = group_value(g, key);
            if (!v)
                throw Error("TypeMismatch", std::string(op_name(op)) + " over Grouped needs '" + key +
                                                "' on the groups (group by it or MAP it first)");
            if (!v->is_null()) items.push_back({*v, nullptr, group_provenance(g)});
        }
    } else {
        throw Error("TypeMismatch", std::string(op_name(op)) + " expects EventList or Grouped, got Scalar");
    }
    auto prov = [](const Item& it) -> const std::vector<std::string>& { return it.prov ? *it.prov : it.owned; };

    if (op == Op::sum || op == Op::avg) {
        bool all_int = true;
        for (const auto& it : items) {
            if (!it.value.is_numeric())
                throw Error("NonNumeric", "'" + key + "' holds " + std::string(kind_name(it.value.kind())) +
                                              " values");
            all_int &= it.value.kind() == Value::Kind::integer;
        }
        std::vector<std::string> p;
        for (const auto& it : items) p.insert(p.end(), prov(it).begin(), prov(it).end());
        if (items.empty()) {
            if (op == Op::sum) return ExecutionResult::of_scalar(Value(int64_t{0}), {});
            throw Error("EmptyAggregate", "AVG over no '" + key + "' values");
        }
        const auto n = static_cast<long double>(items.size());
        if (all_int) {
            __int128 s = 0;
            for (const auto& it : items) s += it.value.integer();
            if (op == Op::sum && s >= INT64_MIN && s <= INT64_MAX)
                return ExecutionResult::of_scalar(Value(static_cast<int64_t>(s)), std::move(p));
            long double total = static_cast<long double>(s);
            return ExecutionResult::of_scalar(Value(static_cast<double>(op == Op::sum ? total : total / n)),
                                              std::move(p));
        }
        // Neumaier compensation keeps the result independent of input order
        // far below the comparison tolerance.
        long double sum = 0, comp = 0;
        for (const auto& it : items) {
            long double x = *it.value.as_double();
            long double t = sum + x;
            if (std::abs(sum) >= std::abs(x))
                comp += (sum - t) + x;
            else
                comp += (x - t) + sum;
            sum = t;
        }
        long double total = sum + comp;
        return ExecutionResult::of_scalar(Value(static_cast<double>(op == Op::sum ? total : total / n)),
                                          std::move(p));
    }

    if (op != Op::min && op != Op::max)
        throw Error("TypeMismatch", std::string(op_name(op)) + " is not an aggregate");
    if (items.empty()) throw Error("EmptyAggregate", std::string(op_name(op)) + " over no '" + key + "' values");
    for (const auto& it : items) check_orderable(it.value, key);
    size_t best = 0;
    for (size_t i = 1; i < items.size(); ++i) {
        int c = order(items[i].value, items[best].value);
        if (op == Op::max ? c > 0 : c < 0) best = i;
    }
    std::vector<std::string> p;
    for (const auto& it : items)
        if (order(it.value, items[best].value) == 0) p.insert(p.end(), prov(it).begin(), prov(it).end());
    return ExecutionResult::of_scalar(items[best].value, std::move(p));
}

}  // namespace optree
