#include "optree/decomposer.hpp"

#include <cctype>
#include <deque>
#include <fstream>
#include <set>

namespace optree {

std::string normalize_question(std::string_view q) {
    std::string out;
    bool pending_space = false;
    for (char c : q) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

ScriptedDecomposer::ScriptedDecomposer(const std::vector<std::pair<std::string, std::string>>& entries) {
    for (const auto& [q, plan] : entries) add(q, plan);
}

void ScriptedDecomposer::add(const std::string& question, std::string plan_text) {
    script_[normalize_question(question)] = std::move(plan_text);
}

ScriptedDecomposer ScriptedDecomposer::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("ConfigError", "cannot open script file '" + path.string() + "'");
    ScriptedDecomposer d;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw Error("ConfigError", path.string() + ":" + std::to_string(line_no) + ": expected question<TAB>plan");
        d.add(line.substr(0, tab), line.substr(tab + 1));
    }
    return d;
}

std::string ScriptedDecomposer::step(const std::string& question, const std::vector<HistoryEntry>&) {
    auto it = script_.find(normalize_question(question));
    if (it == script_.end()) throw Error("DecomposerMiss", "no scripted plan for question \"" + question + "\"");
    return it->second;
}

GeneratorClient::GeneratorClient(const std::string& url, std::chrono::milliseconds timeout, int max_retries)
    : endpoint_(url, timeout), max_retries_(max_retries) {}

std::string GeneratorClient::step(const std::string& question, const std::vector<HistoryEntry>& history) {
    json body;
    body["question"] = question;
    body["history"] = json::array();
    for (const auto& h : history) body["history"].push_back({{"q", h.question}, {"plan", h.plan_text}});
    std::string last_error;
    for (int attempt = 0; attempt <= max_retries_; ++attempt) {
        json res = endpoint_.post(body);
        auto it = res.find("plan_text");
        if (it == res.end() || !it->is_string()) {
            last_error = "response lacks plan_text";
            continue;
        }
        std::string text = it->get<std::string>();
        try {
            parse_plan(text);
            return text;
        } catch (const PlanError& e) {
            last_error = e.what();
        }
    }
    throw Error("UnparseablePlan", "generator returned no parseable plan for \"" + question + "\": " + last_error);
}

namespace {

struct Job {
    PlanNode* slot;
    std::string question;
    std::vector<HistoryEntry> history;
    int depth;
};

void collect_in_expr(Expr& e, std::vector<PlanNode*>& out);

// Pre-order, children before predicate sub-plans (their textual order).
void collect_quds(PlanNode& n, std::vector<PlanNode*>& out) {
    if (n.op == Op::qud) {
        out.push_back(&n);
        return;
    }
    for (auto& c : n.children) collect_quds(c, out);
    for (auto& e : n.pred) collect_in_expr(e, out);
}

void collect_in_expr(Expr& e, std::vector<PlanNode*>& out) {
    for (auto& a : e.args) collect_in_expr(a, out);
    for (auto& s : e.sub) collect_quds(s, out);
}

}  // namespace

Resolution resolve(const std::string& question, Decomposer& d, int max_depth) {
    if (max_depth < 1) throw Error("ConfigError", "max_depth must be at least 1");
    Resolution r;
    r.plan = make_qud(question);
    std::deque<Job> queue;
    queue.push_back(Job{&r.plan, question, {}, 1});
    while (!queue.empty()) {
        Job job = std::move(queue.front());
        queue.pop_front();
        if (job.depth > max_depth)
            throw Error("DepthExceeded", "decomposition of \"" + question + "\" exceeded max depth " +
                                             std::to_string(max_depth) + " at sub-question \"" + job.question + "\"");
        std::string text = d.step(job.question, job.history);
        PlanNode parsed;
        try {
            parsed = parse_plan(text);
        } catch (const PlanError& e) {
            throw Error("UnparseablePlan", "plan for \"" + job.question + "\" does not parse (" + e.what() +
                                               "): " + text);
        }
        r.steps.push_back(ResolutionStep{job.question, job.history, text, job.depth});
        r.depth = std::max(r.depth, job.depth);
        *job.slot = std::move(parsed);
        std::vector<PlanNode*> pending;
        collect_quds(*job.slot, pending);
        auto history = job.history;
        history.push_back(HistoryEntry{job.question, text});
        for (PlanNode* p : pending) queue.push_back(Job{p, p->text, history, job.depth + 1});
    }
    return r;
}

std::vector<TrainingPair> harvest_training_pairs(const std::vector<RunRecord>& runs, size_t max_plans_per_question) {
    std::vector<TrainingPair> out;
    std::map<std::string, std::set<std::string>> plans_per_question;
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (const auto& run : runs) {
        if (!run.correct) continue;
        auto& plans = plans_per_question[normalize_question(run.question)];
        const std::string rendered = render_plan(run.resolution.plan);
        if (!plans.count(rendered)) {
            if (plans.size() >= max_plans_per_question) continue;
            plans.insert(rendered);
        }
        for (const auto& s : run.resolution.steps) {
            std::string hist;
            for (const auto& h : s.history) hist += h.question + '\x1f' + h.plan_text + '\x1e';
            if (!seen.emplace(s.question, hist, s.plan_text).second) continue;
            out.push_back(TrainingPair{s.question, s.history, s.plan_text});
        }
    }
    return out;
}

}  // namespace optree
