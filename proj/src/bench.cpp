#include "optree/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "optree/ingest.hpp"

namespace optree::bench {

// ------------------------------------------------------------ comparison

namespace {

std::string norm_text(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::optional<double> numeric(const Value& v) {
    if (auto d = v.as_double()) return d;
    if (v.kind() != Value::Kind::text) return std::nullopt;
    std::string t = norm_text(v.text());
    double out = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty()) return std::nullopt;
    return out;
}

std::string norm_scalar(const Value& v) {
    if (auto d = numeric(v)) {
        std::ostringstream o;
        o << std::setprecision(12) << *d;
        return o.str();
    }
    return norm_text(to_text(v));
}

}  // namespace

bool hit_at_1(const Value& pred, const Value& gold, const MatchOptions& opt) {
    if (pred.is_null() || gold.is_null()) return pred.is_null() && gold.is_null();
    if (pred.is_list() || gold.is_list()) {
        if (!pred.is_list() || !gold.is_list() || pred.list().size() != gold.list().size()) return false;
        std::vector<std::string> a, b;
        for (const auto& x : pred.list()) a.push_back(norm_scalar(x));
        for (const auto& x : gold.list()) b.push_back(norm_scalar(x));
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        return a == b;
    }
    auto p = numeric(pred), g = numeric(gold);
    if (p && g) return std::abs(*p - *g) <= opt.abs_tolerance;
    if (p || g) return false;
    return norm_text(to_text(pred)) == norm_text(to_text(gold));
}

bool rlx_hit_at_1(const Value& pred, const Value& gold, const MatchOptions& opt) {
    if (hit_at_1(pred, gold, opt)) return true;
    auto p = numeric(pred), g = numeric(gold);
    if (!p || !g || pred.is_list() || gold.is_list()) return false;
    if (std::abs(*g) <= opt.abs_tolerance) return std::abs(*p) <= opt.abs_tolerance;
    // The slack bound gets a relative epsilon so that exact boundary cases (110 vs 100) count.
    return std::abs(*p - *g) <= opt.relaxed_slack * std::abs(*g) * (1 + 1e-12);
}

double mcnemar_exact(size_t b, size_t c) {
    const size_t n = b + c;
    if (n == 0) throw Error("NoDiscordantPairs", "McNemar needs at least one discordant pair");
    const size_t k_max = std::min(b, c);
    // Sum of C(n, k) / 2^n in log space.
    long double tail = 0;
    for (size_t k = 0; k <= k_max; ++k) {
        long double log_term = std::lgamma(static_cast<long double>(n) + 1) -
                               std::lgamma(static_cast<long double>(k) + 1) -
                               std::lgamma(static_cast<long double>(n - k) + 1) - n * std::log(2.0L);
        tail += std::exp(log_term);
    }
    return static_cast<double>(std::min<long double>(1, 2 * tail));
}

double mcnemar(const std::vector<std::pair<bool, bool>>& pairs) {
    size_t b = 0, c = 0;
    for (auto [a, bb] : pairs) {
        if (a && !bb) ++b;
        if (!a && bb) ++c;
    }
    return mcnemar_exact(b, c);
}

// ---------------------------------------------------------------- engine

Engine::Engine(const PersonaContext& ctx, EngineOptions options) : ctx_(ctx), options_(std::move(options)) {
    if (!ctx_.decomposer || !ctx_.pattern_classifier || !ctx_.event_classifier || !ctx_.generator)
        throw Error("ConfigError", "persona " + ctx_.name + " is missing a component");
    options_.retrieval.validate();
    retriever_ = std::make_unique<Retriever>(scorer_, *ctx_.pattern_classifier, *ctx_.event_classifier,
                                             options_.retrieval);
    extractor_ = std::make_unique<Extractor>(*ctx_.generator, ctx_.user_info, SynonymTable::defaults(),
                                             options_.extract);
}

Answer Engine::run_plan(const PlanNode& plan) const {
    ExecContext ec;
    ec.clock = options_.clock;
    ec.store = &ctx_.store;
    ec.retriever = retriever_.get();
    ec.extractor = extractor_.get();
    Answer a;
    a.result = Executor(std::move(ec)).execute(plan, &a.trace);
    return a;
}

Answer Engine::ask(const std::string& question) const {
    Resolution res = resolve(question, *ctx_.decomposer, options_.max_depth);
    Answer a = run_plan(res.plan);
    a.resolution = std::move(res);
    return a;
}

Value answer_value(const ExecutionResult& r) {
    return r.kind == ExecutionResult::Kind::scalar ? r.scalar : Value();
}

// ---------------------------------------------------------------- report

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
}

json trace_json(const std::vector<TraceRecord>& trace, bool with_timings) {
    json out = json::array();
    for (const auto& t : trace) {
        json j = {{"node", t.node_id},
                  {"op", op_name(t.op)},
                  {"input_sizes", t.input_sizes},
                  {"output_size", t.output_size},
                  {"provenance_sample", t.provenance_sample}};
        if (with_timings) j["elapsed_ms"] = t.elapsed_ms;
        out.push_back(std::move(j));
    }
    return out;
}

json outcome_json(const QuestionOutcome& o, bool with_timings, bool with_trace) {
    json j = {{"id", o.id},
              {"persona", o.persona},
              {"template_id", o.template_id},
              {"question", o.question},
              {"tags", o.tags},
              {"structured_only", o.structured_only},
              {"gold", value_to_json(o.gold)},
              {"prediction", value_to_json(o.prediction)},
              {"hit_at_1", o.strict},
              {"rlx_hit_at_1", o.relaxed},
              {"error", o.error},
              {"plan", o.plan},
              {"provenance", o.provenance}};
    if (with_timings) j["latency_ms"] = o.latency_ms;
    if (with_trace) j["trace"] = trace_json(o.trace, with_timings);
    return j;
}

std::string fixed(double v, int digits) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(digits) << v;
    return o.str();
}

}  // namespace

void summarize(BenchReport& r) {
    r.n = r.outcomes.size();
    r.failures = 0;
    size_t hit = 0, rlx = 0, s_n = 0, s_hit = 0;
    std::map<std::string, TagRow> tags;
    std::map<std::string, std::vector<double>> op_ms;
    std::vector<double> lat;
    for (const auto& o : r.outcomes) {
        hit += o.strict;
        rlx += o.relaxed;
        r.failures += !o.error.empty();
        if (o.structured_only) {
            ++s_n;
            s_hit += o.strict;
        }
        for (const auto& t : o.tags) {
            auto& row = tags[t];
            row.tag = t;
            ++row.n;
            row.hit_at_1 += o.strict;
            row.rlx_hit_at_1 += o.relaxed;
        }
        for (const auto& tr : o.trace) op_ms[std::string(op_name(tr.op))].push_back(tr.elapsed_ms);
        lat.push_back(o.latency_ms);
    }
    r.hit_at_1 = r.n ? static_cast<double>(hit) / r.n : 0;
    r.rlx_hit_at_1 = r.n ? static_cast<double>(rlx) / r.n : 0;
    r.structured_n = s_n;
    r.structured_hit_at_1 = s_n ? static_cast<double>(s_hit) / s_n : 0;
    r.tags.clear();
    for (auto& [name, row] : tags) {
        row.hit_at_1 /= row.n;
        row.rlx_hit_at_1 /= row.n;
        r.tags.push_back(row);
    }
    r.operators.clear();
    for (auto& [name, v] : op_ms) {
        double sum = 0;
        for (double x : v) sum += x;
        r.operators.push_back({name, v.size(), sum / v.size(), median(v)});
    }
    r.median_latency_ms = median(lat);
    double sum = 0;
    for (double x : lat) sum += x;
    r.mean_latency_ms = lat.empty() ? 0 : sum / lat.size();
}

json BenchReport::to_json(bool with_timings) const {
    json j = {{"questions", n},
              {"hit_at_1", hit_at_1},
              {"rlx_hit_at_1", rlx_hit_at_1},
              {"failures", failures},
              {"structured_only_questions", structured_n},
              {"structured_only_hit_at_1", structured_hit_at_1}};
    j["by_tag"] = json::array();
    for (const auto& t : tags)
        j["by_tag"].push_back({{"tag", t.tag}, {"n", t.n}, {"hit_at_1", t.hit_at_1}, {"rlx_hit_at_1", t.rlx_hit_at_1}});
    if (with_timings) {
        j["operators"] = json::array();
        for (const auto& o : operators)
            j["operators"].push_back(
                {{"op", o.op}, {"calls", o.calls}, {"mean_ms", o.mean_ms}, {"median_ms", o.median_ms}});
        j["median_latency_ms"] = median_latency_ms;
        j["mean_latency_ms"] = mean_latency_ms;
    }
    j["outcomes"] = json::array();
    for (const auto& o : outcomes) j["outcomes"].push_back(outcome_json(o, with_timings, false));
    return j;
}

std::string BenchReport::table(bool with_timings) const {
    std::ostringstream o;
    o << "questions " << n << "  Hit@1 " << fixed(hit_at_1, 3) << "  Rlx-Hit@1 " << fixed(rlx_hit_at_1, 3)
      << "  failures " << failures << "\n";
    o << "structured-only " << structured_n << "  Hit@1 " << fixed(structured_hit_at_1, 3) << "\n\n";
    o << std::left << std::setw(14) << "tag" << std::right << std::setw(6) << "n" << std::setw(9) << "Hit@1"
      << std::setw(11) << "Rlx-Hit@1" << "\n";
    for (const auto& t : tags)
        o << std::left << std::setw(14) << t.tag << std::right << std::setw(6) << t.n << std::setw(9)
          << fixed(t.hit_at_1, 3) << std::setw(11) << fixed(t.rlx_hit_at_1, 3) << "\n";
    if (with_timings) {
        o << "\n"
          << std::left << std::setw(10) << "operator" << std::right << std::setw(8) << "calls" << std::setw(12)
          << "mean ms" << std::setw(12) << "median ms" << "\n";
        for (const auto& op : operators)
            o << std::left << std::setw(10) << op.op << std::right << std::setw(8) << op.calls << std::setw(12)
              << fixed(op.mean_ms, 3) << std::setw(12) << fixed(op.median_ms, 3) << "\n";
        o << "\nper-question latency: median " << fixed(median_latency_ms, 2) << " ms, mean "
          << fixed(mean_latency_ms, 2) << " ms\n";
    }
    return o.str();
}

BenchReport run_benchmark(const std::vector<BenchQuestion>& questions, const std::vector<PersonaContext>& personas,
                          const EngineOptions& options, size_t workers, const MatchOptions& match) {
    std::vector<std::unique_ptr<Engine>> engines;
    for (const auto& p : personas) engines.push_back(std::make_unique<Engine>(p, options));

    BenchReport r;
    r.outcomes.resize(questions.size());
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t i = next++; i < questions.size(); i = next++) {
            const auto& q = questions[i];
            auto& o = r.outcomes[i];
            o.id = q.id;
            o.persona = q.persona < personas.size() ? personas[q.persona].name : "?";
            o.template_id = q.template_id;
            o.question = q.question;
            o.tags = q.tags;
            o.structured_only = q.structured_only;
            o.gold = q.gold;
            auto t0 = std::chrono::steady_clock::now();
            try {
                if (q.persona >= engines.size()) throw Error("ConfigError", "unknown persona index");
                Answer a = engines[q.persona]->ask(q.question);
                o.prediction = answer_value(a.result);
                o.plan = render_plan(a.resolution.plan);
                o.provenance = a.result.provenance;
                o.trace = std::move(a.trace);
            } catch (const Error& e) {
                o.error = e.code() + ": " + e.what();
            } catch (const std::exception& e) {
                o.error = std::string("InternalError: ") + e.what();
            }
            o.latency_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            o.strict = o.error.empty() && hit_at_1(o.prediction, o.gold, match);
            o.relaxed = o.error.empty() && rlx_hit_at_1(o.prediction, o.gold, match);
        }
    };
    std::vector<std::thread> pool;
    for (size_t w = 1; w < std::max<size_t>(1, workers); ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    summarize(r);
    return r;
}

void write_report(const BenchReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "traces");
    auto open = [](const std::filesystem::path& p) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw Error("IoError", "cannot write " + p.string());
        return out;
    };
    open(dir / "report.json") << r.to_json().dump(2) << "\n";
    open(dir / "report.txt") << r.table();
    for (const auto& o : r.outcomes) open(dir / "traces" / (o.id + ".json")) << outcome_json(o, true, true).dump(2) << "\n";
}

// --------------------------------------------------------------- dataset

namespace {

json read_json(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error("ConfigError", "cannot read " + p.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error("ConfigError", p.string() + ": " + e.what());
    }
}

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error("ConfigError", "cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

LoadedDataset load_dataset(const std::filesystem::path& dir, const DatasetSelection& sel) {
    json cfg = read_json(dir / "config.json");
    LoadedDataset out;
    auto clock = parse_iso_datetime(cfg.at("clock").get<std::string>());
    if (!clock) throw Error("ConfigError", "config.json has a bad clock");
    out.clock = *clock;

    std::vector<std::filesystem::path> pdirs;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_directory() && std::filesystem::exists(e.path() / "persona.json")) pdirs.push_back(e.path());
    std::sort(pdirs.begin(), pdirs.end(), [](const auto& a, const auto& b) {
        auto num = [](const std::filesystem::path& p) { return std::stoul(p.filename().string().substr(1)); };
        return num(a) < num(b);
    });

    for (const auto& pdir : pdirs) {
        json pj = read_json(pdir / "persona.json");
        if (sel.split && pj.value("split", "") != *sel.split) continue;
        PersonaContext ctx;
        ctx.name = pdir.filename().string();
        ctx.store = load_store(pdir / "store.jsonl");
        ctx.user_info = read_text(pdir / "user_info.txt");
        if (sel.decomposer_url.empty())
            ctx.decomposer = std::make_shared<ScriptedDecomposer>(ScriptedDecomposer::from_file(pdir / "script.tsv"));
        else
            ctx.decomposer = std::make_shared<GeneratorClient>(sel.decomposer_url);
        switch (sel.classifier) {
            case ClassifierMode::oracle: {
                auto c = std::make_shared<OracleClassifier>(OracleClassifier::from_file(pdir / "gold_retrieval.json"));
                ctx.pattern_classifier = c;
                ctx.event_classifier = c;
                break;
            }
            case ClassifierMode::lexical: {
                auto c = std::make_shared<LexicalClassifier>();
                ctx.pattern_classifier = c;
                ctx.event_classifier = c;
                break;
            }
            case ClassifierMode::external: {
                auto c = std::make_shared<ExternalClassifier>(sel.classifier_url);
                ctx.pattern_classifier = c;
                ctx.event_classifier = c;
                break;
            }
        }
        if (sel.extractor_url.empty())
            ctx.generator = std::make_shared<RuleValueGenerator>();
        else
            ctx.generator = std::make_shared<ExternalValueGenerator>(sel.extractor_url);

        const size_t index = out.personas.size();
        std::ifstream qin(pdir / "questions.jsonl");
        if (!qin) throw Error("ConfigError", "cannot read " + (pdir / "questions.jsonl").string());
        std::string line;
        size_t k = 0;
        while (std::getline(qin, line)) {
            if (line.empty()) continue;
            json j = json::parse(line);
            BenchQuestion q;
            q.id = ctx.name + "-q" + std::to_string(++k);
            q.persona = index;
            q.template_id = j.value("template_id", "");
            q.question = j.at("question").get<std::string>();
            q.gold = value_from_json(j.at("gold"));
            q.tags = j.value("tags", std::vector<std::string>{});
            q.structured_only = j.value("structured_only", false);
            out.questions.push_back(std::move(q));
        }
        out.personas.push_back(std::move(ctx));
    }
    return out;
}

}  // namespace optree::bench
