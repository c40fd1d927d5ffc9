#pragma once

#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "optree/event.hpp"
#include "optree/kernels.hpp"
#include "optree/plugin_client.hpp"

namespace optree {

/// Scores a query against a document pool. Scores are non-negative and zero
/// when query and document share no content token.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual std::vector<double> score(std::string_view query, std::span<const std::string> docs) const = 0;
};

/// BM25 over content tokens. The index of the most recent pool is cached,
/// keyed by the pool's address and size, so repeated queries against one
/// store tokenize it once.
class Bm25Scorer : public Scorer {
public:
    explicit Bm25Scorer(Bm25Params params = {}, bool parallel = true) : params_(params), parallel_(parallel) {}
    std::vector<double> score(std::string_view query, std::span<const std::string> docs) const override;

private:
    Bm25Params params_;
    bool parallel_;
    mutable std::mutex mu_;
    mutable const std::string* cached_data_ = nullptr;
    mutable size_t cached_size_ = 0;
    mutable std::shared_ptr<const LexicalIndex> cached_;
};

struct RetrievalConfig {
    double score_threshold = 0.1;          // fraction of the pool-maximum score
    double pattern_freq_threshold = 0.05;  // fraction of the candidate pool
    bool use_patterns = true;
    bool deduplicate = true;
    /// Throws Error("ConfigError") when a threshold is outside (0, 1].
    void validate() const;
};

struct ScoredEvent {
    size_t index = 0;  // position in the pool
    double score = 0;  // normalized to [0, 1]
};

/// Step 1. Pool members whose max-normalized score exceeds the threshold,
/// by descending score then id. Throws Error("EmptyQuery").
std::vector<ScoredEvent> sparse_retrieve(std::string_view query, std::span<const Event> pool,
                                         std::span<const std::string> texts, const RetrievalConfig& cfg,
                                         const Scorer& scorer);

enum class PatternLabel { unlabeled, relevant, irrelevant, partial };
std::string_view pattern_label_name(PatternLabel l) noexcept;

struct Pattern {
    enum class Kind { key_value, whole_source };
    Kind kind = Kind::key_value;
    std::string key;
    Value value;
    Source source = Source::note;
    size_t support = 0;
    PatternLabel label = PatternLabel::unlabeled;

    bool covers(const Event& e) const;
    /// "key: value" or "source: name"; the text sent to external classifiers.
    std::string describe() const;
};

/// Step 2. Key-value patterns over scalar attributes (excluding "source")
/// with support >= ceil(threshold * n), then one whole-source pattern per
/// represented source; each group ordered by (support desc, key, value).
std::vector<Pattern> mine_patterns(std::span<const Event> candidates, const RetrievalConfig& cfg);

struct LabelOutcome {
    std::vector<Event> kept;     // covered by a relevant pattern
    std::vector<Event> partial;  // covered by neither a relevant nor an irrelevant pattern
    size_t dropped = 0;          // covered by an irrelevant pattern and no relevant one
};

/// Step 3 routing. Relevant wins over irrelevant, which wins over partial;
/// events with no covering pattern go to the partial pool. Throws Error("UnlabeledPattern").
LabelOutcome apply_pattern_labels(std::vector<Event> candidates, const std::vector<Pattern>& patterns);

class PatternClassifier {
public:
    virtual ~PatternClassifier() = default;
    virtual PatternLabel classify_pattern(std::string_view query, const Pattern& p,
                                          std::span<const Event* const> covered) = 0;
};

class EventClassifier {
public:
    virtual ~EventClassifier() = default;
    /// Must be safe to call concurrently.
    virtual bool keep(std::string_view query, const Event& e, std::string_view text) = 0;
};

/// Lexical heuristic. A key-value pattern whose value shares a content token
/// with the query is relevant; every other pattern is partial. An event is
/// kept when it shares at least `min_overlap` distinct content tokens with
/// the query.
class LexicalClassifier : public PatternClassifier, public EventClassifier {
public:
    explicit LexicalClassifier(size_t min_overlap = 1) : min_overlap_(min_overlap) {}
    PatternLabel classify_pattern(std::string_view query, const Pattern& p,
                                  std::span<const Event* const> covered) override;
    bool keep(std::string_view query, const Event& e, std::string_view text) override;

private:
    size_t min_overlap_;
};

/// Test-only classifier backed by gold relevance: per normalized query, the
/// set of relevant store ids. An event is relevant when any id in its
/// provenance is. Unknown queries raise Error("OracleMiss").
class OracleClassifier : public PatternClassifier, public EventClassifier {
public:
    OracleClassifier() = default;
    explicit OracleClassifier(std::unordered_map<std::string, std::set<std::string>> gold);
    /// JSON object {query: [id, ...]}. Throws Error("ConfigError").
    static OracleClassifier from_file(const std::filesystem::path& path);

    void add(const std::string& query, std::set<std::string> relevant_ids);
    bool relevant(std::string_view query, const Event& e) const;
    const std::set<std::string>& gold(std::string_view query) const;

    PatternLabel classify_pattern(std::string_view query, const Pattern& p,
                                  std::span<const Event* const> covered) override;
    bool keep(std::string_view query, const Event& e, std::string_view text) override;

private:
    std::unordered_map<std::string, std::set<std::string>> gold_;
};

/// HTTP plug-in: POST {query, candidate} -> {label, score}. Pattern labels
/// are "relevant" | "irrelevant" | "partial"; event labels "keep" | "drop".
class ExternalClassifier : public PatternClassifier, public EventClassifier {
public:
    explicit ExternalClassifier(const std::string& url);
    PatternLabel classify_pattern(std::string_view query, const Pattern& p,
                                  std::span<const Event* const> covered) override;
    bool keep(std::string_view query, const Event& e, std::string_view text) override;

private:
    JsonEndpoint endpoint_;
};

/// Step 4. Order-preserving; classification runs in parallel.
std::vector<Event> classify_remaining(std::string_view query, std::vector<Event> events,
                                      EventClassifier& classifier);

/// Step 5. Merges overlapping events of differing sources to a fixpoint.
/// The longest-span member wins key conflicts (then earliest start, then
/// smallest id); a losing value is kept as "<key>__<source>". Output is
/// ordered by (start, id).
std::vector<Event> deduplicate(std::vector<Event> events);

struct RetrieveStats {
    size_t pool = 0;
    size_t candidates = 0;
    size_t patterns = 0;
    size_t kept_by_pattern = 0;
    size_t dropped_by_pattern = 0;
    size_t classified = 0;
    size_t kept_by_classifier = 0;
    size_t output = 0;
};

/// Steps 1-5 with fixed components.
class Retriever {
public:
    Retriever(const Scorer& scorer, PatternClassifier& patterns, EventClassifier& events, RetrievalConfig cfg = {});

    /// Runs over the whole store, or over `input` when given.
    std::vector<Event> retrieve(std::string_view query, const EventStore& store,
                                const std::vector<Event>* input = nullptr, RetrieveStats* stats = nullptr) const;

    const RetrievalConfig& config() const noexcept { return cfg_; }

private:
    std::vector<Event> run(std::string_view query, std::span<const Event> pool, std::span<const std::string> texts,
                           RetrieveStats* stats) const;

    const Scorer& scorer_;
    PatternClassifier& patterns_;
    EventClassifier& events_;
    RetrievalConfig cfg_;
};

}  // namespace optree
