#pragma once

// Data-parallel kernels. Each OpenMP kernel has a serial reference with the
// same signature and bit-identical output; tests and bench/ compare the two.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace optree {

/// Inverted-free forward index over a document pool: per document, the
/// sorted distinct term ids and their frequencies (CSR layout).
class LexicalIndex {
public:
    LexicalIndex() = default;
    static LexicalIndex build(std::span<const std::string> docs);

    size_t size() const noexcept { return doc_len_.size(); }
    double avg_len() const noexcept { return avg_len_; }
    /// Term id, or -1 when the term never occurs.
    int64_t term_id(std::string_view term) const;
    uint32_t df(uint32_t term) const { return df_.at(term); }

    std::span<const uint32_t> terms(size_t doc) const {
        return {terms_.data() + offsets_[doc], offsets_[doc + 1] - offsets_[doc]};
    }
    std::span<const uint32_t> freqs(size_t doc) const {
        return {tfs_.data() + offsets_[doc], offsets_[doc + 1] - offsets_[doc]};
    }
    uint32_t doc_len(size_t doc) const { return doc_len_[doc]; }

private:
    std::unordered_map<std::string, uint32_t> vocab_;
    std::vector<uint32_t> df_;
    std::vector<size_t> offsets_{0};
    std::vector<uint32_t> terms_;
    std::vector<uint32_t> tfs_;
    std::vector<uint32_t> doc_len_;
    double avg_len_ = 0;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Distinct in-vocabulary content terms of a query with their idf weights.
struct WeightedQuery {
    std::vector<uint32_t> terms;  // ascending
    std::vector<double> idf;
};

WeightedQuery prepare_query(const LexicalIndex& index, std::string_view query);

/// out[d] = BM25(query, doc d); out.size() must equal index.size().
void bm25_scores(const LexicalIndex& index, const WeightedQuery& q, std::span<double> out, Bm25Params p = {});
void bm25_scores_serial(const LexicalIndex& index, const WeightedQuery& q, std::span<double> out,
                        Bm25Params p = {});

}  // namespace optree
