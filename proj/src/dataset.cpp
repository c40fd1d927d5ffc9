#include <fstream>

#include "optree/ingest.hpp"
#include "optree/persona.hpp"
#include "persona_internal.hpp"

namespace optree::persona {

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("IoError", "cannot write " + p.string());
    return out;
}

json canonical_json(const CanonicalEvent& c) {
    json attrs = json::object();
    for (const auto& [k, v] : c.attrs) attrs[k] = value_to_json(v);
    return {{"id", c.id},
            {"type", event_type_name(c.type)},
            {"subtype", c.subtype},
            {"start", format_datetime(c.span.start)},
            {"end", format_datetime(c.span.end)},
            {"attrs", attrs}};
}

}  // namespace

std::vector<QuestionInstance> write_dataset(const std::filesystem::path& dir, const DatasetConfig& cfg) {
    std::filesystem::create_directories(dir);
    const auto& templates = question_templates();
    const auto template_split = split_templates(templates, cfg.seed);
    {
        json c = {{"seed", cfg.seed},
                  {"personas", cfg.personas},
                  {"questions_per_template", cfg.questions_per_template},
                  {"generation", cfg.generation.to_json()},
                  {"clock", format_datetime(cfg.clock)},
                  {"split_by_template", cfg.split_by_template}};
        json splits = json::object();
        for (const auto& [id, s] : template_split) splits[id] = split_name(s);
        c["template_splits"] = splits;
        open_out(dir / "config.json") << c.dump(2) << "\n";
    }

    std::vector<QuestionInstance> all;
    for (size_t k = 0; k < cfg.personas; ++k) {
        const std::string name = "p" + std::to_string(k + 1);
        const auto pdir = dir / name;
        std::filesystem::create_directories(pdir);
        const uint64_t seed = detail::mix(cfg.seed, k + 1);
        PersonaData d = generate_persona_data(seed, cfg.generation);
        const Split psplit = persona_split(k, cfg.personas);

        json pj = persona_to_json(d.persona);
        pj["split"] = split_name(psplit);
        open_out(pdir / "persona.json") << pj.dump(2) << "\n";
        {
            auto out = open_out(pdir / "store.jsonl");
            write_store(d.store, out);
        }
        {
            auto out = open_out(pdir / "canonical.jsonl");
            for (const auto& c : d.canonical) out << canonical_json(c).dump() << "\n";
        }
        open_out(pdir / "links.json") << json(d.link).dump() << "\n";
        {
            json gold = json::object();
            for (const auto& q : known_queries(d.persona)) {
                auto ids = gold_observables(d, q);
                gold[q] = std::vector<std::string>(ids.begin(), ids.end());
            }
            open_out(pdir / "gold_retrieval.json") << gold.dump() << "\n";
        }
        open_out(pdir / "user_info.txt") << d.persona.user_info();

        std::vector<QuestionTemplate> usable;
        for (const auto& t : templates)
            if (!cfg.split_by_template || template_split.at(t.id) == psplit) usable.push_back(t);
        auto qs = instantiate_questions(usable, d, cfg.questions_per_template, detail::mix(seed, "questions"),
                                        cfg.clock);
        auto qout = open_out(pdir / "questions.jsonl");
        auto sout = open_out(pdir / "script.tsv");
        for (auto& q : qs) {
            q.persona = name;
            qout << question_to_json(q).dump() << "\n";
            for (const auto& [question, plan] : decomposition_script(q)) sout << question << "\t" << plan << "\n";
            all.push_back(q);
        }
    }
    return all;
}

}  // namespace optree::persona
