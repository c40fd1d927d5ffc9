#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "optree/decomposer.hpp"
#include "optree/exec.hpp"
#include "optree/extract.hpp"
#include "optree/json_codec.hpp"
#include "optree/retrieve.hpp"

namespace optree::bench {

// Answer comparison

struct MatchOptions {
    double abs_tolerance = 1e-9;  // strict numeric equality
    double relaxed_slack = 0.1;   // relative, for non-zero numeric gold
};

/// Normalized equality: numbers as reals within abs_tolerance (numeric text
/// counts as a number), text lowercased and trimmed, calendar values by ISO
/// text, lists as multisets of normalized members. Null never matches a
/// non-null value.
bool hit_at_1(const Value& pred, const Value& gold, const MatchOptions& opt = {});
/// Numeric gold g != 0: |pred - g| <= slack * |g|; g == 0: pred == 0;
/// otherwise the strict verdict. Always true when hit_at_1 is.
bool rlx_hit_at_1(const Value& pred, const Value& gold, const MatchOptions& opt = {});

/// Exact two-sided binomial McNemar test on discordant counts, capped at 1.
/// Throws Error("NoDiscordantPairs") when b + c == 0.
double mcnemar_exact(size_t b, size_t c);
/// Pairs of (method A correct, method B correct).
double mcnemar(const std::vector<std::pair<bool, bool>>& pairs);

// Engine

enum class ClassifierMode { lexical, oracle, external };

/// Per-persona inputs. The decomposer, classifiers and value generator must
/// tolerate concurrent calls.
struct PersonaContext {
    std::string name;
    EventStore store;
    std::string user_info;
    std::shared_ptr<Decomposer> decomposer;
    std::shared_ptr<PatternClassifier> pattern_classifier;
    std::shared_ptr<EventClassifier> event_classifier;
    std::shared_ptr<ValueGenerator> generator;
};

struct EngineOptions {
    DateTime clock;
    RetrievalConfig retrieval;
    ExtractOptions extract;
    int max_depth = kDefaultMaxDepth;
};

struct Answer {
    Resolution resolution;
    ExecutionResult result;
    std::vector<TraceRecord> trace;
};

/// Question -> answer over one persona's store: resolve, then execute.
class Engine {
public:
    Engine(const PersonaContext& ctx, EngineOptions options);
    /// Throws whatever resolution or execution raises.
    Answer ask(const std::string& question) const;
    Answer run_plan(const PlanNode& plan) const;

private:
    const PersonaContext& ctx_;
    EngineOptions options_;
    Bm25Scorer scorer_;
    std::unique_ptr<Retriever> retriever_;
    std::unique_ptr<Extractor> extractor_;
};

/// Scalar view of a result: the scalar itself, else null.
Value answer_value(const ExecutionResult& r);

// Benchmark

struct BenchQuestion {
    std::string id;
    size_t persona = 0;  // index into the persona contexts
    std::string template_id;
    std::string question;
    Value gold;
    std::vector<std::string> tags;
    bool structured_only = false;
};

struct QuestionOutcome {
    std::string id;
    std::string persona;
    std::string template_id;
    std::string question;
    std::vector<std::string> tags;
    bool structured_only = false;
    Value gold;
    Value prediction;
    bool strict = false;
    bool relaxed = false;
    std::string error;  // "Code: message" when the question failed
    double latency_ms = 0;
    std::string plan;
    std::vector<std::string> provenance;
    std::vector<TraceRecord> trace;
};

struct TagRow {
    std::string tag;
    size_t n = 0;
    double hit_at_1 = 0;
    double rlx_hit_at_1 = 0;
};

struct OperatorTiming {
    std::string op;
    size_t calls = 0;
    double mean_ms = 0;
    double median_ms = 0;
};

struct BenchReport {
    size_t n = 0;
    double hit_at_1 = 0;
    double rlx_hit_at_1 = 0;
    size_t failures = 0;
    size_t structured_n = 0;
    double structured_hit_at_1 = 0;
    std::vector<TagRow> tags;             // sorted by tag
    std::vector<OperatorTiming> operators;  // sorted by operator name
    double median_latency_ms = 0;
    double mean_latency_ms = 0;
    std::vector<QuestionOutcome> outcomes;  // input order

    /// Timings are excluded so that equal inputs give byte-identical output.
    json to_json(bool with_timings = true) const;
    std::string table(bool with_timings = true) const;
};

/// Per-tag and overall averages recomputed from outcomes.
void summarize(BenchReport& r);

/// Runs every question on `workers` threads; failures count as misses.
BenchReport run_benchmark(const std::vector<BenchQuestion>& questions, const std::vector<PersonaContext>& personas,
                          const EngineOptions& options, size_t workers = 1, const MatchOptions& match = {});

/// report.json, report.txt and traces/<question id>.json under `dir`.
void write_report(const BenchReport& r, const std::filesystem::path& dir);

// Generated datasets

struct DatasetSelection {
    ClassifierMode classifier = ClassifierMode::oracle;
    std::string classifier_url;   // external classifier
    std::string extractor_url;    // empty: rule-based generator
    std::string decomposer_url;   // empty: the persona's script.tsv
    std::optional<std::string> split;  // keep personas of this split only
};

struct LoadedDataset {
    std::vector<PersonaContext> personas;
    std::vector<BenchQuestion> questions;
    DateTime clock;
};

/// Reads a directory written by persona::write_dataset.
LoadedDataset load_dataset(const std::filesystem::path& dir, const DatasetSelection& sel);

}  // namespace optree::bench
