#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "optree/plan.hpp"
#include "optree/plugin_client.hpp"

namespace optree {

struct HistoryEntry {
    std::string question;
    std::string plan_text;
    bool operator==(const HistoryEntry&) const = default;
};

/// Maps one (sub-)question to partial-plan text that may contain QUD leaves.
class Decomposer {
public:
    virtual ~Decomposer() = default;
    virtual std::string step(const std::string& question, const std::vector<HistoryEntry>& history) = 0;
};

/// Trims, collapses internal whitespace and lowercases.
std::string normalize_question(std::string_view q);

class ScriptedDecomposer : public Decomposer {
public:
    ScriptedDecomposer() = default;
    explicit ScriptedDecomposer(const std::vector<std::pair<std::string, std::string>>& entries);

    /// Lines of `question<TAB>plan`; blank lines and lines starting with '#'
    /// are ignored. Throws Error("ConfigError") on malformed lines.
    static ScriptedDecomposer from_file(const std::filesystem::path& path);

    /// Later entries for the same normalized question replace earlier ones.
    void add(const std::string& question, std::string plan_text);
    size_t size() const noexcept { return script_.size(); }

    /// Throws Error("DecomposerMiss") for unknown questions.
    std::string step(const std::string& question, const std::vector<HistoryEntry>& history) override;

private:
    std::map<std::string, std::string> script_;
};

/// HTTP plan generator: POST {question, history:[{q, plan}]} -> {plan_text}.
/// A response that does not parse is retried up to max_retries times, then
/// raises Error("UnparseablePlan").
class GeneratorClient : public Decomposer {
public:
    explicit GeneratorClient(const std::string& url, std::chrono::milliseconds timeout = std::chrono::seconds(30),
                             int max_retries = 1);
    std::string step(const std::string& question, const std::vector<HistoryEntry>& history) override;

private:
    JsonEndpoint endpoint_;
    int max_retries_;
};

struct ResolutionStep {
    std::string question;
    std::vector<HistoryEntry> history;
    std::string plan_text;
    int depth = 1;
};

struct Resolution {
    PlanNode plan;
    std::vector<ResolutionStep> steps;
    int depth = 0;  // deepest branch
};

inline constexpr int kDefaultMaxDepth = 12;

/// Expands QUD leaves breadth-first, leftmost-outermost first, until none
/// remain. History for a step is the chain of its ancestors only.
/// Throws Error("DepthExceeded"), Error("UnparseablePlan") or whatever the
/// decomposer raises (e.g. "DecomposerMiss").
Resolution resolve(const std::string& question, Decomposer& d, int max_depth = kDefaultMaxDepth);

struct RunRecord {
    std::string question;
    Resolution resolution;
    bool correct = false;
};

struct TrainingPair {
    std::string question;
    std::vector<HistoryEntry> history;
    std::string plan_text;
    bool operator==(const TrainingPair&) const = default;
};

/// Step-wise pairs from correct runs only, at most `max_plans_per_question`
/// distinct resolved plans per question, duplicates removed, input order kept.
std::vector<TrainingPair> harvest_training_pairs(const std::vector<RunRecord>& runs,
                                                 size_t max_plans_per_question = 3);

}  // namespace optree
