// optree: command-line surface over the engine.
//
// Exit codes: 0 success, 1 execution error (the failing plan node is named),
// 2 configuration error.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "optree/bench.hpp"
#include "optree/ingest.hpp"
#include "optree/persona.hpp"
#include "optree/plan_validate.hpp"

using namespace optree;

namespace {

struct CliConfig {
    std::string store;
    std::string decomposer;          // scripted:<path> | external:<url>
    std::string classifier;          // lexical | oracle[:<path>] | external:<url>; empty: per command
    std::string extractor = "rules";     // rules | external:<url>
    std::string user_info;           // file with "relation: Full Name" lines
    std::string clock;               // ISO datetime
    uint64_t seed = 1;
    double score_threshold = RetrievalConfig{}.score_threshold;
    double pattern_threshold = RetrievalConfig{}.pattern_freq_threshold;
    bool freezing = true;
    int max_depth = kDefaultMaxDepth;
};

class ConfigFailure : public Error {
public:
    explicit ConfigFailure(const std::string& msg) : Error("ConfigError", msg) {}
};

bool is_config_code(const std::string& code) {
    return code == "ConfigError" || code == "UnknownFormat" || code == "UnreadableFile" || code == "UnknownMode";
}

std::string read_file(const std::string& path) {
    if (path == "-") {
        std::stringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in) throw ConfigFailure("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Values present in the file replace the flag values.
void apply_config_file(CliConfig& c, const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigFailure(path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigFailure(path + ": expected a JSON object");
    static const std::set<std::string> known = {"store",     "decomposer",      "classifier",        "extractor",
                                                "user_info", "clock",           "seed",              "score_threshold",
                                                "pattern_threshold", "freezing", "max_depth"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ConfigFailure(path + ": unknown key '" + it.key() + "'");
    try {
        c.store = j.value("store", c.store);
        c.decomposer = j.value("decomposer", c.decomposer);
        c.classifier = j.value("classifier", c.classifier);
        c.extractor = j.value("extractor", c.extractor);
        c.user_info = j.value("user_info", c.user_info);
        c.clock = j.value("clock", c.clock);
        c.seed = j.value("seed", c.seed);
        c.score_threshold = j.value("score_threshold", c.score_threshold);
        c.pattern_threshold = j.value("pattern_threshold", c.pattern_threshold);
        c.freezing = j.value("freezing", c.freezing);
        c.max_depth = j.value("max_depth", c.max_depth);
    } catch (const json::exception& e) {
        throw ConfigFailure(path + ": " + e.what());
    }
}

std::pair<std::string, std::string> split_mode(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) return {spec, ""};
    return {spec.substr(0, colon), spec.substr(colon + 1)};
}

RetrievalConfig retrieval_config(const CliConfig& c) {
    RetrievalConfig r;
    r.score_threshold = c.score_threshold;
    r.pattern_freq_threshold = c.pattern_threshold;
    r.validate();
    return r;
}

ExtractOptions extract_options(const CliConfig& c) {
    ExtractOptions o;
    o.freezing = c.freezing;
    return o;
}

/// Fixed clock, else the latest event end in the store so output never
/// depends on the wall clock.
DateTime resolve_clock(const CliConfig& c, const EventStore* store) {
    if (!c.clock.empty()) {
        auto t = parse_iso_datetime(c.clock);
        if (!t) throw ConfigFailure("--clock expects YYYY-MM-DDTHH:MM:SS, got '" + c.clock + "'");
        return *t;
    }
    if (!store || store->size() == 0) throw ConfigFailure("--clock is required without a store");
    DateTime latest = store->at(0).span.end;
    for (const auto& e : store->events()) latest = std::max(latest, e.span.end);
    return latest;
}

bench::PersonaContext persona_context(const CliConfig& c, bool need_decomposer) {
    if (c.store.empty()) throw ConfigFailure("--store is required");
    bench::PersonaContext ctx;
    ctx.name = "store";
    ctx.store = load_store(c.store);
    if (!c.user_info.empty()) ctx.user_info = read_file(c.user_info);

    auto [dmode, darg] = split_mode(c.decomposer);
    if (dmode == "scripted" && !darg.empty())
        ctx.decomposer = std::make_shared<ScriptedDecomposer>(ScriptedDecomposer::from_file(darg));
    else if (dmode == "external" && !darg.empty())
        ctx.decomposer = std::make_shared<GeneratorClient>(darg);
    else if (dmode.empty() && !need_decomposer)
        ctx.decomposer = std::make_shared<ScriptedDecomposer>();
    else
        throw ConfigFailure("--decomposer expects scripted:<path> or external:<url>");

    auto [cmode, carg] = split_mode(c.classifier.empty() ? "lexical" : c.classifier);
    if (cmode == "lexical" && carg.empty()) {
        auto l = std::make_shared<LexicalClassifier>();
        ctx.pattern_classifier = l;
        ctx.event_classifier = l;
    } else if (cmode == "oracle" && !carg.empty()) {
        auto o = std::make_shared<OracleClassifier>(OracleClassifier::from_file(carg));
        ctx.pattern_classifier = o;
        ctx.event_classifier = o;
    } else if (cmode == "external" && !carg.empty()) {
        auto x = std::make_shared<ExternalClassifier>(carg);
        ctx.pattern_classifier = x;
        ctx.event_classifier = x;
    } else {
        throw ConfigFailure("--classifier expects lexical, oracle:<path> or external:<url>");
    }

    auto [emode, earg] = split_mode(c.extractor);
    if (emode == "rules" && earg.empty())
        ctx.generator = std::make_shared<RuleValueGenerator>();
    else if (emode == "external" && !earg.empty())
        ctx.generator = std::make_shared<ExternalValueGenerator>(earg);
    else
        throw ConfigFailure("--extractor expects rules or external:<url>");
    return ctx;
}

bench::EngineOptions engine_options(const CliConfig& c, const EventStore& store) {
    bench::EngineOptions o;
    o.clock = resolve_clock(c, &store);
    o.retrieval = retrieval_config(c);
    o.extract = extract_options(c);
    o.max_depth = c.max_depth;
    return o;
}

void print_event_line(std::ostream& out, const Event& e) {
    out << "  " << e.id << "  " << verbalize_event(e) << "\n";
}

void print_answer(std::ostream& out, const bench::Answer& a, const PlanNode& plan, const EventStore& store) {
    const auto& r = a.result;
    switch (r.kind) {
        case ExecutionResult::Kind::scalar:
            out << "answer: " << (r.scalar.is_null() ? "null" : to_text(r.scalar)) << "\n";
            break;
        case ExecutionResult::Kind::events:
            out << "answer: " << r.events.size() << " events\n";
            for (const auto& e : r.events) print_event_line(out, e);
            break;
        case ExecutionResult::Kind::groups:
            out << "answer: " << r.groups.size() << " groups\n";
            for (const auto& g : r.groups) {
                Event key = Event::make("group", Source::note, {}, g.key_values);
                out << "  " << verbalize_event(key) << " (" << g.members.size() << " events)\n";
            }
            break;
    }
    out << "plan:\n" << render_plan_tree(plan);
    if (!render_plan_tree(plan).ends_with('\n')) out << "\n";
    out << "provenance: " << r.provenance.size() << " events\n";
    for (const auto& id : r.provenance) {
        if (const Event* e = store.find(id))
            print_event_line(out, *e);
        else
            out << "  " << id << "\n";
    }
}

int fail(const Error& e) {
    if (e.code() == "EmptyAggregate") {
        std::cerr << "no matching events: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return is_config_code(e.code()) ? 2 : 1;
}

// ------------------------------------------------------------ commands

int cmd_ingest(const std::vector<std::string>& paths, const std::string& format, const std::string& out_path) {
    if (out_path.empty()) throw ConfigFailure("ingest needs --out");
    StoreBuilder builder;
    for (const auto& p : paths) {
        ExportFormat f = format.empty() ? format_from_extension(p) : parse_export_format(format);
        size_t n = ingest_export(builder, p, f);
        std::cout << p << ": " << n << " events\n";
    }
    const size_t skipped = builder.skipped();
    for (const auto& why : builder.skip_reasons()) std::cerr << "skipped: " << why << "\n";
    EventStore store = builder.finalize();
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigFailure("cannot write " + out_path);
    write_store(store, out);
    std::cout << "store: " << store.size() << " events, " << skipped << " skipped -> " << out_path << "\n";
    return 0;
}

struct GenerateArgs {
    size_t personas = 2;
    size_t per_template = 4;
    std::string first = "2022-01-01";
    std::string last = "2023-12-31";
    double rate_scale = 1.0;
    bool split_by_template = false;
    std::string out;
};

int cmd_generate(const CliConfig& c, const GenerateArgs& g) {
    if (g.out.empty()) throw ConfigFailure("generate needs --out");
    persona::DatasetConfig cfg;
    cfg.seed = c.seed;
    cfg.personas = g.personas;
    cfg.questions_per_template = g.per_template;
    cfg.split_by_template = g.split_by_template;
    auto first = parse_iso_date(g.first), last = parse_iso_date(g.last);
    if (!first || !last) throw ConfigFailure("--from/--to expect YYYY-MM-DD");
    cfg.generation.period = {*first, *last};
    cfg.generation.rate_scale = g.rate_scale;
    if (!c.clock.empty()) cfg.clock = resolve_clock(c, nullptr);
    auto qs = persona::write_dataset(g.out, cfg);
    std::cout << "dataset: " << cfg.personas << " personas, " << qs.size() << " questions -> " << g.out << "\n";
    return 0;
}

int cmd_exec(const CliConfig& c, const std::string& plan_path) {
    auto ctx = persona_context(c, false);
    PlanNode plan = parse_plan(read_file(plan_path));
    bench::Engine engine(ctx, engine_options(c, ctx.store));
    bench::Answer a = engine.run_plan(plan);
    print_answer(std::cout, a, plan, ctx.store);
    return 0;
}

int cmd_ask(const CliConfig& c, const std::string& question) {
    auto ctx = persona_context(c, true);
    bench::Engine engine(ctx, engine_options(c, ctx.store));
    bench::Answer a = engine.ask(question);
    print_answer(std::cout, a, a.resolution.plan, ctx.store);
    return 0;
}

int cmd_validate(const std::string& plan_path) {
    PlanNode plan = parse_plan(read_file(plan_path));
    auto diags = validate_plan(plan);
    for (const auto& d : diags) std::cout << format_diagnostic(d) << "\n";
    std::cout << render_plan(plan) << "\n";
    return has_errors(diags) ? 1 : 0;
}

struct BenchArgs {
    std::string split;
    size_t workers = 1;
    std::string out;
    bool timings = true;
};

int cmd_bench(const CliConfig& c, const std::string& dir, const BenchArgs& b) {
    bench::DatasetSelection sel;
    // Generated datasets carry their own retrieval labels, so oracle is the default.
    auto [cmode, carg] = split_mode(c.classifier.empty() ? "oracle" : c.classifier);
    if (cmode == "oracle" && carg.empty())
        sel.classifier = bench::ClassifierMode::oracle;
    else if (cmode == "lexical" && carg.empty())
        sel.classifier = bench::ClassifierMode::lexical;
    else if (cmode == "external" && !carg.empty()) {
        sel.classifier = bench::ClassifierMode::external;
        sel.classifier_url = carg;
    } else {
        throw ConfigFailure("bench --classifier expects oracle, lexical or external:<url>");
    }
    auto [emode, earg] = split_mode(c.extractor);
    if (emode == "external") sel.extractor_url = earg;
    auto [dmode, darg] = split_mode(c.decomposer);
    if (dmode == "external") sel.decomposer_url = darg;
    if (!b.split.empty()) sel.split = b.split;

    auto ds = bench::load_dataset(dir, sel);
    if (ds.questions.empty()) throw ConfigFailure("no questions selected in " + dir);
    bench::EngineOptions eo;
    eo.clock = c.clock.empty() ? ds.clock : resolve_clock(c, nullptr);
    eo.retrieval = retrieval_config(c);
    eo.extract = extract_options(c);
    eo.max_depth = c.max_depth;
    auto report = bench::run_benchmark(ds.questions, ds.personas, eo, b.workers);
    std::cout << report.table(b.timings);
    if (!b.out.empty()) bench::write_report(report, b.out);
    return 0;
}

int cmd_repl(const CliConfig& c) {
    auto ctx = persona_context(c, false);
    bench::Engine engine(ctx, engine_options(c, ctx.store));
    std::cout << "optree repl: a question per line, ':plan <plan>' to run a plan, ':quit' to leave\n";
    std::string line;
    while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
        if (line == ":quit" || line == ":q") break;
        if (line.empty()) continue;
        try {
            if (line.rfind(":plan ", 0) == 0) {
                PlanNode plan = parse_plan(line.substr(6));
                print_answer(std::cout, engine.run_plan(plan), plan, ctx.store);
            } else {
                auto a = engine.ask(line);
                print_answer(std::cout, a, a.resolution.plan, ctx.store);
            }
        } catch (const Error& e) {
            std::cout << "error: " << e.code() << ": " << e.what() << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"optree: question answering over personal event data with operator trees"};
    app.require_subcommand(1);
    CliConfig cfg;
    std::string config_path;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--store", cfg.store, "event store (.jsonl)");
        sub->add_option("--decomposer", cfg.decomposer, "scripted:<path> | external:<url>");
        sub->add_option("--classifier", cfg.classifier, "lexical | oracle:<path> | external:<url>");
        sub->add_option("--extractor", cfg.extractor, "rules | external:<url>");
        sub->add_option("--user-info", cfg.user_info, "file of 'relation: Full Name' lines");
        sub->add_option("--clock", cfg.clock, "fixed 'now' as YYYY-MM-DDTHH:MM:SS");
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--score-threshold", cfg.score_threshold, "sparse retrieval cut-off in (0, 1]");
        sub->add_option("--pattern-threshold", cfg.pattern_threshold, "pattern frequency cut-off in (0, 1]");
        sub->add_flag("!--no-freeze", cfg.freezing, "disable frozen extraction mappings");
        sub->add_option("--max-depth", cfg.max_depth, "decomposition depth limit");
        sub->add_option("--config", config_path, "JSON config; its values override flags (env REQAP_CONFIG)");
    };

    std::vector<std::string> ingest_paths;
    std::string ingest_format, ingest_out;
    auto* ingest = app.add_subcommand("ingest", "parse export files into a store");
    ingest->add_option("paths", ingest_paths, "export files")->required();
    ingest->add_option("--format", ingest_format, "event-lines | calendar-file | mailbox-file (default: by extension)");
    ingest->add_option("-o,--out", ingest_out, "store file to write");
    add_common(ingest);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "write a synthetic persona dataset");
    generate->add_option("--personas", gen.personas, "number of personas");
    generate->add_option("--per-template", gen.per_template, "question instances per template and persona");
    generate->add_option("--from", gen.first, "first day (YYYY-MM-DD)");
    generate->add_option("--to", gen.last, "last day (YYYY-MM-DD)");
    generate->add_option("--rate-scale", gen.rate_scale, "multiplier on every event frequency");
    generate->add_flag("--split-by-template", gen.split_by_template, "restrict templates by persona split");
    generate->add_option("-o,--out", gen.out, "dataset directory");
    add_common(generate);

    std::string plan_path;
    auto* exec = app.add_subcommand("exec", "execute a plan over the store");
    exec->add_option("plan", plan_path, "plan file, '-' for stdin")->required();
    add_common(exec);

    std::string question;
    auto* ask = app.add_subcommand("ask", "decompose a question and answer it");
    ask->add_option("question", question)->required();
    add_common(ask);

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "parse and statically check a plan");
    validate->add_option("plan", validate_path, "plan file, '-' for stdin")->required();

    BenchArgs bargs;
    std::string bench_dir;
    auto* benchc = app.add_subcommand("bench", "run the benchmark over a generated dataset");
    benchc->add_option("dataset", bench_dir, "dataset directory")->required();
    benchc->add_option("--split", bargs.split, "train | dev | test");
    benchc->add_option("--workers", bargs.workers, "worker threads");
    benchc->add_option("-o,--out", bargs.out, "report directory");
    benchc->add_flag("!--no-timings", bargs.timings, "omit timings from the printed table");
    add_common(benchc);

    auto* repl = app.add_subcommand("repl", "interactive question answering");
    add_common(repl);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (config_path.empty())
            if (const char* env = std::getenv("REQAP_CONFIG"); env && *env) config_path = env;
        if (!config_path.empty()) apply_config_file(cfg, config_path);

        if (ingest->parsed()) return cmd_ingest(ingest_paths, ingest_format, ingest_out);
        if (generate->parsed()) return cmd_generate(cfg, gen);
        if (exec->parsed()) return cmd_exec(cfg, plan_path);
        if (ask->parsed()) return cmd_ask(cfg, question);
        if (validate->parsed()) return cmd_validate(validate_path);
        if (benchc->parsed()) return cmd_bench(cfg, bench_dir, bargs);
        if (repl->parsed()) return cmd_repl(cfg);
    } catch (const Error& e) {
        return fail(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
