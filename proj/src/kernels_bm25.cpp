#include <algorithm>
#include <cmath>
#include <map>

#include "optree/kernels.hpp"
#include "optree/text.hpp"

namespace optree {

LexicalIndex LexicalIndex::build(std::span<const std::string> docs) {
    LexicalIndex ix;
    ix.offsets_.reserve(docs.size() + 1);
    ix.doc_len_.reserve(docs.size());
    uint64_t total = 0;
    std::map<uint32_t, uint32_t> counts;
    for (const auto& doc : docs) {
        counts.clear();
        auto toks = content_tokens(doc);
        for (auto& t : toks) {
            auto [it, fresh] = ix.vocab_.try_emplace(std::move(t), static_cast<uint32_t>(ix.df_.size()));
            if (fresh) ix.df_.push_back(0);
            ++counts[it->second];
        }
        for (auto [term, tf] : counts) {
            ix.terms_.push_back(term);
            ix.tfs_.push_back(tf);
            ++ix.df_[term];
        }
        ix.offsets_.push_back(ix.terms_.size());
        ix.doc_len_.push_back(static_cast<uint32_t>(toks.size()));
        total += toks.size();
    }
    ix.avg_len_ = docs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs.size());
    return ix;
}

int64_t LexicalIndex::term_id(std::string_view term) const {
    auto it = vocab_.find(std::string(term));
    return it == vocab_.end() ? -1 : static_cast<int64_t>(it->second);
}

WeightedQuery prepare_query(const LexicalIndex& index, std::string_view query) {
    auto toks = content_tokens(query);
    std::vector<uint32_t> ids;
    for (const auto& t : toks) {
        int64_t id = index.term_id(t);
        if (id >= 0) ids.push_back(static_cast<uint32_t>(id));
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    WeightedQuery q;
    const double n = static_cast<double>(index.size());
    for (uint32_t id : ids) {
        const double df = index.df(id);
        q.terms.push_back(id);
        q.idf.push_back(std::log(1.0 + (n - df + 0.5) / (df + 0.5)));
    }
    return q;
}

namespace {

// Merge-intersects the sorted query terms with the document's sorted terms.
// Terms are summed in ascending id order in both kernels.
inline double score_doc(const LexicalIndex& ix, const WeightedQuery& q, size_t d, const Bm25Params& p) {
    auto terms = ix.terms(d);
    auto tfs = ix.freqs(d);
    const double norm = p.k1 * (1.0 - p.b + p.b * ix.doc_len(d) / (ix.avg_len() > 0 ? ix.avg_len() : 1.0));
    double s = 0.0;
    size_t i = 0, j = 0;
    while (i < q.terms.size() && j < terms.size()) {
        if (q.terms[i] < terms[j]) {
            ++i;
        } else if (terms[j] < q.terms[i]) {
            ++j;
        } else {
            const double tf = tfs[j];
            s += q.idf[i] * tf * (p.k1 + 1.0) / (tf + norm);
            ++i;
            ++j;
        }
    }
    return s;
}

}  // namespace

void bm25_scores(const LexicalIndex& index, const WeightedQuery& q, std::span<double> out, Bm25Params p) {
    const auto n = static_cast<int64_t>(index.size());
#pragma omp parallel for schedule(static)
    for (int64_t d = 0; d < n; ++d) out[static_cast<size_t>(d)] = score_doc(index, q, static_cast<size_t>(d), p);
}

void bm25_scores_serial(const LexicalIndex& index, const WeightedQuery& q, std::span<double> out, Bm25Params p) {
    for (size_t d = 0; d < index.size(); ++d) out[d] = score_doc(index, q, d, p);
}

}  // namespace optree
