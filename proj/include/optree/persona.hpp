#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "optree/event.hpp"
#include "optree/json_codec.hpp"
#include "optree/plan.hpp"

namespace optree::persona {

struct Relative {
    std::string name;
    Date birth;
};

struct Pet {
    std::string name;
    std::string kind;  // dog, cat, ...
    Date start;
    std::optional<Date> end;
};

/// One dated stage of a life: a school, a job or a home.
struct Stage {
    std::string what;  // institution, role or street
    std::string organization;  // school or company; empty for residences
    std::string city;
    Date start;
    std::optional<Date> end;  // absent while ongoing
};

/// Average frequencies that drive event generation.
struct Frequencies {
    double songs_per_day = 8;
    double movies_per_week = 1.5;
    double episodes_per_week = 3;
    double workouts_per_week = 3;
    double purchases_per_month = 4;
    double meetings_per_month = 5;
    double doctor_visits_per_year = 5;
    double trips_per_year = 2;
};

struct Persona {
    uint64_t seed = 0;
    std::string name;
    std::string gender;
    Date birth_date;
    std::string birth_city;
    std::string mother;
    std::string father;
    std::optional<std::string> partner;
    std::optional<Date> wedding_date;
    std::vector<std::string> siblings;
    std::vector<Relative> kids;
    std::vector<Pet> pets;
    std::vector<std::string> friends;
    std::vector<Stage> education;
    std::vector<Stage> career;
    std::vector<Stage> residences;
    std::vector<std::string> music_genres;
    std::vector<std::string> movie_genres;
    std::vector<std::string> tv_genres;
    std::vector<std::string> shopping_categories;
    std::vector<std::string> travel_countries;
    std::vector<std::string> cuisines;
    std::vector<std::string> hobbies;
    std::vector<std::string> workouts;
    std::vector<std::string> favorite_artists;
    std::vector<std::string> favorite_songs;
    std::vector<std::string> favorite_series;
    Frequencies frequencies;

    /// Everyone the persona meets, in a fixed order: parents, partner,
    /// siblings, kids, friends.
    std::vector<std::string> people() const;
    /// "relation: Full Name" lines consumed by the extractor.
    std::string user_info() const;
};

/// Deterministic for a seed; every field is populated.
Persona generate_persona(uint64_t seed);
json persona_to_json(const Persona& p);

enum class EventType { anniversary, doctor, milestone, travel, meeting, music, movie, tvseries, purchase, workout };
inline constexpr std::array<EventType, 10> kAllEventTypes = {
    EventType::anniversary, EventType::doctor, EventType::milestone, EventType::travel, EventType::meeting,
    EventType::music,       EventType::movie,  EventType::tvseries,  EventType::purchase, EventType::workout};

std::string_view event_type_name(EventType t) noexcept;
std::optional<EventType> parse_event_type(std::string_view s) noexcept;
/// Streams, purchases and workouts have a structured export.
bool is_structured(EventType t) noexcept;
Source structured_source(EventType t);
/// Keys every canonical event of the type carries (values may be null).
const std::vector<std::string>& schema_keys(EventType t);

struct CanonicalEvent {
    std::string id;
    EventType type = EventType::meeting;
    std::string subtype;
    TimeSpan span;
    Attrs attrs;
};

struct DateRange {
    Date first;
    Date last;  // inclusive
    int64_t days() const noexcept { return last.days - first.days + 1; }
};

struct GenerationConfig {
    DateRange period{*parse_iso_date("2022-01-01"), *parse_iso_date("2023-12-31")};
    /// Multiplies every persona frequency; 0 leaves only dated life events.
    double rate_scale = 1.0;
    double p_struct = 0.85;
    double p_extra_verbalization = 0.1;

    json to_json() const;
    static GenerationConfig from_json(const json& j);
};

/// Events ordered by (start, id); ids are "c<n>" in that order. Same-type
/// events never overlap, music streams are at least one second apart.
/// Throws Error("ConfigError") when the period is shorter than a year.
std::vector<CanonicalEvent> generate_canonical_events(const Persona& p, const GenerationConfig& cfg, uint64_t seed);

enum class VerbalMode { structured, calendar, mail, social, mixed };
/// Throws Error("UnknownMode").
VerbalMode parse_verbal_mode(std::string_view s);

/// An engine-visible event plus its hidden link to the canonical source.
struct Observable {
    Event event;
    std::string canonical_id;
};

/// Observable forms of one canonical event. `mixed` applies the configured
/// probabilities: structured types stay structured with p_struct and then
/// also verbalize with p_extra_verbalization, otherwise they verbalize only;
/// other types verbalize once. Forced modes produce exactly that form and
/// throw Error("UnknownMode") when the type has no such form. Ids are left
/// empty for the caller to assign.
std::vector<Observable> verbalize(const CanonicalEvent& c, const Persona& p, VerbalMode mode,
                                  const GenerationConfig& cfg, uint64_t seed);

/// One persona's generated data.
struct PersonaData {
    Persona persona;
    std::vector<CanonicalEvent> canonical;
    std::vector<Observable> observable;  // ids "o<n>" in (start, canonical id) order
    EventStore store;                    // observable events only
    std::map<std::string, std::string> link;  // observable id -> canonical id
};

PersonaData generate_persona_data(uint64_t seed, const GenerationConfig& cfg);

/// Canonical events as an engine store; ids are the canonical ids and the
/// source is the type's structured source, or calendar.
EventStore canonical_store(const std::vector<CanonicalEvent>& canonical);

// Retrieval sub-queries understood by the generator. Each names the
// canonical events it is about; relevance labels follow from the links.

struct Selector {
    EventType type;
    std::optional<std::pair<std::string, std::string>> attr_equals;
    std::string subtype;  // empty matches any
    bool matches(const CanonicalEvent& c) const;
};

/// Throws Error("UnknownQuery") for queries outside the generator's vocabulary.
Selector selector_for_query(std::string_view query);
/// Every sub-query the question templates can emit for `p`.
std::vector<std::string> known_queries(const Persona& p);
/// Observable ids relevant to `query`.
std::set<std::string> gold_observables(const PersonaData& d, std::string_view query);

// Questions

struct QuestionTemplate {
    std::string id;
    std::string text;  // with {slot} placeholders
    std::string plan;  // plan text with {slot} placeholders
    std::vector<std::string> tags;
    bool structured_only = false;
};

const std::vector<QuestionTemplate>& question_templates();

struct QuestionInstance {
    std::string persona;
    std::string template_id;
    std::string question;
    std::string plan_text;
    Value gold;
    std::vector<std::string> gold_provenance;  // canonical ids
    std::vector<std::string> tags;
    bool structured_only = false;
};

json question_to_json(const QuestionInstance& q);
QuestionInstance question_from_json(const json& j);

/// Gold answer of a resolved plan over canonical events with the fixed clock.
/// Throws whatever execution raises.
std::pair<Value, std::vector<std::string>> oracle_answer(const PlanNode& plan,
                                                        const std::vector<CanonicalEvent>& canonical,
                                                        DateTime clock);

/// Up to `per_template` fillings per template. Instances whose oracle plan
/// fails or draws on no canonical event are discarded. Throws
/// Error("NoValidFilling") only when `strict` and a template has no filling.
std::vector<QuestionInstance> instantiate_questions(const std::vector<QuestionTemplate>& templates,
                                                    const PersonaData& d, size_t per_template, uint64_t seed,
                                                    DateTime clock, bool strict = false);

/// Script lines (question, partial plan) that decompose each instance
/// step-wise: every operator input becomes a QUD naming its sub-question.
std::vector<std::pair<std::string, std::string>> decomposition_script(const QuestionInstance& q);

enum class Split { train, dev, test };
std::string_view split_name(Split s) noexcept;
/// Deterministic assignment of template ids to splits; no id in two splits.
std::map<std::string, Split> split_templates(const std::vector<QuestionTemplate>& templates, uint64_t seed);
/// Persona i of n: 60% train, 10% dev, 30% test, at least one dev and test
/// persona once n >= 3.
Split persona_split(size_t index, size_t count);

// Dataset on disk

struct DatasetConfig {
    uint64_t seed = 1;
    size_t personas = 2;
    size_t questions_per_template = 4;
    GenerationConfig generation;
    DateTime clock = *parse_iso_datetime("2024-01-01T12:00:00");
    /// Restrict templates per persona split; off gives every persona every template.
    bool split_by_template = false;
};

/// Writes config.json, and per persona p<k>/: persona.json, store.jsonl,
/// canonical.jsonl, links.json, gold_retrieval.json, user_info.txt,
/// questions.jsonl, script.tsv. Returns the instances written.
std::vector<QuestionInstance> write_dataset(const std::filesystem::path& dir, const DatasetConfig& cfg);

}  // namespace optree::persona
