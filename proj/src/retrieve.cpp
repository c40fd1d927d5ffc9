#include "optree/retrieve.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>

#include "optree/decomposer.hpp"
#include "optree/text.hpp"

namespace optree {

std::vector<double> Bm25Scorer::score(std::string_view query, std::span<const std::string> docs) const {
    std::shared_ptr<const LexicalIndex> index;
    {
        std::lock_guard lock(mu_);
        if (!cached_ || cached_data_ != docs.data() || cached_size_ != docs.size()) {
            cached_ = std::make_shared<const LexicalIndex>(LexicalIndex::build(docs));
            cached_data_ = docs.data();
            cached_size_ = docs.size();
        }
        index = cached_;
    }
    std::vector<double> out(docs.size(), 0.0);
    auto q = prepare_query(*index, query);
    if (q.terms.empty()) return out;
    if (parallel_)
        bm25_scores(*index, q, out, params_);
    else
        bm25_scores_serial(*index, q, out, params_);
    return out;
}

void RetrievalConfig::validate() const {
    if (!(score_threshold > 0 && score_threshold <= 1))
        throw Error("ConfigError", "score_threshold must lie in (0, 1]");
    if (!(pattern_freq_threshold > 0 && pattern_freq_threshold <= 1))
        throw Error("ConfigError", "pattern_freq_threshold must lie in (0, 1]");
}

std::vector<ScoredEvent> sparse_retrieve(std::string_view query, std::span<const Event> pool,
                                         std::span<const std::string> texts, const RetrievalConfig& cfg,
                                         const Scorer& scorer) {
    if (content_tokens(query).empty()) throw Error("EmptyQuery", "query has no content tokens");
    auto raw = scorer.score(query, texts);
    double max = 0;
    for (double s : raw) max = std::max(max, s);
    std::vector<ScoredEvent> out;
    if (max <= 0) return out;
    for (size_t i = 0; i < raw.size(); ++i) {
        double s = raw[i] / max;
        if (raw[i] > 0 && s > cfg.score_threshold) out.push_back({i, s});
    }
    std::sort(out.begin(), out.end(), [&](const ScoredEvent& a, const ScoredEvent& b) {
        if (a.score != b.score) return a.score > b.score;
        return pool[a.index].id < pool[b.index].id;
    });
    return out;
}

std::string_view pattern_label_name(PatternLabel l) noexcept {
    switch (l) {
        case PatternLabel::relevant: return "relevant";
        case PatternLabel::irrelevant: return "irrelevant";
        case PatternLabel::partial: return "partial";
        case PatternLabel::unlabeled: break;
    }
    return "unlabeled";
}

bool Pattern::covers(const Event& e) const {
    if (kind == Kind::whole_source) return e.source == source;
    auto it = e.attrs.find(key);
    return it != e.attrs.end() && it->second == value;
}

std::string Pattern::describe() const {
    if (kind == Kind::whole_source) return "source: " + std::string(source_name(source));
    return key + ": " + to_text(value);
}

namespace {

bool value_less(const Value& a, const Value& b) {
    if (a.kind() != b.kind()) return a.kind() < b.kind();
    return to_text(a) < to_text(b);
}

}  // namespace

std::vector<Pattern> mine_patterns(std::span<const Event> candidates, const RetrievalConfig& cfg) {
    const auto min_support =
        static_cast<size_t>(std::ceil(cfg.pattern_freq_threshold * static_cast<double>(candidates.size()) - 1e-9));
    std::map<std::string, std::vector<std::pair<Value, size_t>>> counts;
    std::array<size_t, kSourceCount> per_source{};
    for (const auto& e : candidates) {
        ++per_source[static_cast<size_t>(e.source)];
        for (const auto& [k, v] : e.attrs) {
            if (k == "source" || v.is_null() || v.is_list()) continue;
            auto& bucket = counts[k];
            auto it = std::find_if(bucket.begin(), bucket.end(), [&](const auto& p) { return p.first == v; });
            if (it == bucket.end())
                bucket.emplace_back(v, 1);
            else
                ++it->second;
        }
    }
    std::vector<Pattern> kv;
    for (auto& [k, bucket] : counts) {
        for (auto& [v, n] : bucket) {
            if (n < std::max<size_t>(min_support, 1)) continue;
            Pattern p;
            p.kind = Pattern::Kind::key_value;
            p.key = k;
            p.value = v;
            p.support = n;
            kv.push_back(std::move(p));
        }
    }
    std::sort(kv.begin(), kv.end(), [](const Pattern& a, const Pattern& b) {
        if (a.support != b.support) return a.support > b.support;
        if (a.key != b.key) return a.key < b.key;
        return value_less(a.value, b.value);
    });
    std::vector<Pattern> ws;
    for (Source s : kAllSources) {
        size_t n = per_source[static_cast<size_t>(s)];
        if (n == 0) continue;
        Pattern p;
        p.kind = Pattern::Kind::whole_source;
        p.key = "source";
        p.value = Value(std::string(source_name(s)));
        p.source = s;
        p.support = n;
        ws.push_back(std::move(p));
    }
    std::stable_sort(ws.begin(), ws.end(), [](const Pattern& a, const Pattern& b) {
        if (a.support != b.support) return a.support > b.support;
        return a.source < b.source;
    });
    kv.insert(kv.end(), std::make_move_iterator(ws.begin()), std::make_move_iterator(ws.end()));
    return kv;
}

LabelOutcome apply_pattern_labels(std::vector<Event> candidates, const std::vector<Pattern>& patterns) {
    for (const auto& p : patterns)
        if (p.label == PatternLabel::unlabeled) throw Error("UnlabeledPattern", "pattern " + p.describe());
    LabelOutcome out;
    for (auto& e : candidates) {
        bool relevant = false, irrelevant = false;
        for (const auto& p : patterns) {
            if (!p.covers(e)) continue;
            relevant |= p.label == PatternLabel::relevant;
            irrelevant |= p.label == PatternLabel::irrelevant;
        }
        if (relevant)
            out.kept.push_back(std::move(e));
        else if (irrelevant)
            ++out.dropped;
        else
            out.partial.push_back(std::move(e));
    }
    return out;
}

namespace {

size_t shared_tokens(const std::vector<std::string>& a_sorted, std::vector<std::string> b) {
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    size_t n = 0;
    for (const auto& t : b) n += std::binary_search(a_sorted.begin(), a_sorted.end(), t);
    return n;
}

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

PatternLabel LexicalClassifier::classify_pattern(std::string_view query, const Pattern& p,
                                                 std::span<const Event* const>) {
    if (p.kind == Pattern::Kind::whole_source) return PatternLabel::partial;
    auto q = sorted_unique(content_tokens(query));
    return shared_tokens(q, content_tokens(to_text(p.value))) > 0 ? PatternLabel::relevant : PatternLabel::partial;
}

bool LexicalClassifier::keep(std::string_view query, const Event&, std::string_view text) {
    auto q = sorted_unique(content_tokens(query));
    return shared_tokens(q, content_tokens(text)) >= min_overlap_;
}

OracleClassifier::OracleClassifier(std::unordered_map<std::string, std::set<std::string>> gold) {
    for (auto& [q, ids] : gold) add(q, std::move(ids));
}

OracleClassifier OracleClassifier::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("ConfigError", "cannot open oracle labels " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("ConfigError", "oracle labels: " + std::string(e.what()));
    }
    if (!j.is_object()) throw Error("ConfigError", "oracle labels must be a JSON object");
    OracleClassifier c;
    for (auto& [q, ids] : j.items()) {
        if (!ids.is_array()) throw Error("ConfigError", "oracle labels for '" + q + "' must be an array");
        std::set<std::string> s;
        for (const auto& id : ids) s.insert(id.get<std::string>());
        c.add(q, std::move(s));
    }
    return c;
}

void OracleClassifier::add(const std::string& query, std::set<std::string> relevant_ids) {
    auto& slot = gold_[normalize_question(query)];
    slot.insert(relevant_ids.begin(), relevant_ids.end());
}

const std::set<std::string>& OracleClassifier::gold(std::string_view query) const {
    auto it = gold_.find(normalize_question(query));
    if (it == gold_.end()) throw Error("OracleMiss", "no gold labels for query '" + std::string(query) + "'");
    return it->second;
}

bool OracleClassifier::relevant(std::string_view query, const Event& e) const {
    const auto& ids = gold(query);
    for (const auto& id : e.provenance)
        if (ids.count(id)) return true;
    return false;
}

PatternLabel OracleClassifier::classify_pattern(std::string_view query, const Pattern&,
                                                std::span<const Event* const> covered) {
    size_t hits = 0;
    for (const Event* e : covered) hits += relevant(query, *e);
    if (hits == covered.size()) return PatternLabel::relevant;
    if (hits == 0) return PatternLabel::irrelevant;
    return PatternLabel::partial;
}

bool OracleClassifier::keep(std::string_view query, const Event& e, std::string_view) { return relevant(query, e); }

ExternalClassifier::ExternalClassifier(const std::string& url) : endpoint_(url) {}

PatternLabel ExternalClassifier::classify_pattern(std::string_view query, const Pattern& p,
                                                  std::span<const Event* const>) {
    auto r = endpoint_.post({{"query", query}, {"candidate", p.describe()}});
    std::string label = r.value("label", "");
    if (label == "relevant") return PatternLabel::relevant;
    if (label == "irrelevant") return PatternLabel::irrelevant;
    if (label == "partial") return PatternLabel::partial;
    throw Error("PluginError", "unexpected pattern label '" + label + "'");
}

bool ExternalClassifier::keep(std::string_view query, const Event&, std::string_view text) {
    auto r = endpoint_.post({{"query", query}, {"candidate", text}});
    std::string label = r.value("label", "");
    if (label == "keep") return true;
    if (label == "drop") return false;
    throw Error("PluginError", "unexpected event label '" + label + "'");
}

std::vector<Event> classify_remaining(std::string_view query, std::vector<Event> events,
                                      EventClassifier& classifier) {
    std::vector<std::string> texts(events.size());
    std::vector<char> keep(events.size(), 0);
    std::exception_ptr failure;
    const auto n = static_cast<int64_t>(events.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (int64_t i = 0; i < n; ++i) {
        try {
            auto k = static_cast<size_t>(i);
            texts[k] = verbalize_event(events[k]);
            keep[k] = classifier.keep(query, events[k], texts[k]);
        } catch (...) {
#pragma omp critical(optree_classify_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<Event> out;
    for (size_t i = 0; i < events.size(); ++i)
        if (keep[i]) out.push_back(std::move(events[i]));
    return out;
}

namespace {

struct UnionFind {
    std::vector<size_t> parent;
    explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), size_t{0}); }
    size_t find(size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

bool start_id_less(const Event& a, const Event& b) {
    if (a.span.start != b.span.start) return a.span.start < b.span.start;
    return a.id < b.id;
}

uint16_t mask_of(const Event& e) { return e.source_mask ? e.source_mask : source_bit(e.source); }

Event merge_group(std::vector<Event*> members) {
    std::sort(members.begin(), members.end(), [](const Event* a, const Event* b) {
        if (a->span.length() != b->span.length()) return a->span.length() > b->span.length();
        return start_id_less(*a, *b);
    });
    Event out = *members.front();
    out.source_mask = mask_of(out);
    for (size_t i = 1; i < members.size(); ++i) {
        const Event& m = *members[i];
        out.span.start = std::min(out.span.start, m.span.start);
        out.span.end = std::max(out.span.end, m.span.end);
        out.source_mask |= mask_of(m);
        out.extraction_miss |= m.extraction_miss;
        out.provenance.insert(out.provenance.end(), m.provenance.begin(), m.provenance.end());
        for (const auto& [k, v] : m.attrs) {
            auto it = out.attrs.find(k);
            if (it == out.attrs.end())
                out.attrs.emplace(k, v);
            else if (!(it->second == v))
                out.attrs.emplace(k + "__" + std::string(source_name(m.source)), v);
        }
    }
    std::sort(out.provenance.begin(), out.provenance.end());
    out.provenance.erase(std::unique(out.provenance.begin(), out.provenance.end()), out.provenance.end());
    return out;
}

}  // namespace

std::vector<Event> deduplicate(std::vector<Event> events) {
    std::sort(events.begin(), events.end(), start_id_less);
    for (;;) {
        UnionFind uf(events.size());
        bool merged = false;
        for (size_t i = 0; i < events.size(); ++i) {
            for (size_t j = i + 1; j < events.size() && events[j].span.start <= events[i].span.end; ++j) {
                if ((mask_of(events[i]) & mask_of(events[j])) == 0) merged |= uf.unite(i, j);
            }
        }
        if (!merged) return events;
        std::map<size_t, std::vector<Event*>> groups;
        for (size_t i = 0; i < events.size(); ++i) groups[uf.find(i)].push_back(&events[i]);
        std::vector<Event> next;
        next.reserve(groups.size());
        for (auto& [root, members] : groups) next.push_back(members.size() == 1 ? *members[0] : merge_group(members));
        std::sort(next.begin(), next.end(), start_id_less);
        events = std::move(next);
    }
}

Retriever::Retriever(const Scorer& scorer, PatternClassifier& patterns, EventClassifier& events, RetrievalConfig cfg)
    : scorer_(scorer), patterns_(patterns), events_(events), cfg_(cfg) {
    cfg_.validate();
}

std::vector<Event> Retriever::retrieve(std::string_view query, const EventStore& store,
                                       const std::vector<Event>* input, RetrieveStats* stats) const {
    if (!input) return run(query, store.events(), store.verbalizations(), stats);
    std::vector<std::string> texts;
    texts.reserve(input->size());
    for (const auto& e : *input) texts.push_back(verbalize_event(e));
    return run(query, *input, texts, stats);
}

std::vector<Event> Retriever::run(std::string_view query, std::span<const Event> pool,
                                  std::span<const std::string> texts, RetrieveStats* stats) const {
    RetrieveStats local;
    RetrieveStats& st = stats ? *stats : local;
    st = {};
    st.pool = pool.size();
    if (pool.empty()) return {};
    auto scored = sparse_retrieve(query, pool, texts, cfg_, scorer_);
    st.candidates = scored.size();
    std::vector<Event> candidates;
    candidates.reserve(scored.size());
    for (const auto& s : scored) candidates.push_back(pool[s.index]);

    LabelOutcome routed;
    if (cfg_.use_patterns && !candidates.empty()) {
        auto patterns = mine_patterns(candidates, cfg_);
        std::vector<const Event*> covered;
        for (auto& p : patterns) {
            covered.clear();
            for (const auto& e : candidates)
                if (p.covers(e)) covered.push_back(&e);
            p.label = patterns_.classify_pattern(query, p, covered);
        }
        st.patterns = patterns.size();
        routed = apply_pattern_labels(std::move(candidates), patterns);
    } else {
        routed.partial = std::move(candidates);
    }
    st.kept_by_pattern = routed.kept.size();
    st.dropped_by_pattern = routed.dropped;
    st.classified = routed.partial.size();
    auto survivors = classify_remaining(query, std::move(routed.partial), events_);
    st.kept_by_classifier = survivors.size();

    std::vector<Event> out = std::move(routed.kept);
    out.insert(out.end(), std::make_move_iterator(survivors.begin()), std::make_move_iterator(survivors.end()));
    if (cfg_.deduplicate)
        out = deduplicate(std::move(out));
    else
        std::sort(out.begin(), out.end(), start_id_less);
    st.output = out.size();
    return out;
}

}  // namespace optree
