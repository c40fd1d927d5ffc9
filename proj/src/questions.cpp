#include <algorithm>
#include <set>

#include "optree/exec.hpp"
#include "optree/persona.hpp"
#include "persona_internal.hpp"

namespace optree::persona {

using detail::fill;
using detail::Rng;
using Slots = std::vector<std::pair<std::string, std::string>>;

// ------------------------------------------------------------- selectors

bool Selector::matches(const CanonicalEvent& c) const {
    if (c.type != type) return false;
    if (!subtype.empty() && c.subtype != subtype) return false;
    if (attr_equals) {
        auto it = c.attrs.find(attr_equals->first);
        if (it == c.attrs.end() || it->second.is_null() || to_text(it->second) != attr_equals->second) return false;
    }
    return true;
}

Selector selector_for_query(std::string_view query) {
    if (query == "music I streamed") return {EventType::music, {}, ""};
    if (query == "movies I streamed") return {EventType::movie, {}, ""};
    if (query == "episodes I streamed") return {EventType::tvseries, {}, ""};
    if (query == "my online purchases") return {EventType::purchase, {}, ""};
    if (query == "my workouts") return {EventType::workout, {}, ""};
    if (query == "my meetings") return {EventType::meeting, {}, ""};
    if (query == "my doctor appointments") return {EventType::doctor, {}, ""};
    if (query == "my trips") return {EventType::travel, {}, "trip"};
    constexpr std::string_view pre = "my ", post = " workouts";
    if (query.size() > pre.size() + post.size() && query.starts_with(pre) && query.ends_with(post)) {
        std::string w(query.substr(pre.size(), query.size() - pre.size() - post.size()));
        return {EventType::workout, std::pair{std::string("workout_type"), w}, ""};
    }
    throw Error("UnknownQuery", "query outside the generator vocabulary: " + std::string(query));
}

std::vector<std::string> known_queries(const Persona& p) {
    std::vector<std::string> q{"music I streamed", "movies I streamed", "episodes I streamed", "my online purchases",
                               "my workouts",      "my meetings",       "my doctor appointments", "my trips"};
    for (const auto& w : p.workouts) q.push_back("my " + w + " workouts");
    return q;
}

std::set<std::string> gold_observables(const PersonaData& d, std::string_view query) {
    Selector sel = selector_for_query(query);
    std::set<std::string> relevant;
    for (const auto& c : d.canonical)
        if (sel.matches(c)) relevant.insert(c.id);
    std::set<std::string> out;
    for (const auto& [obs, can] : d.link)
        if (relevant.count(can)) out.insert(obs);
    return out;
}

// ------------------------------------------------------------- templates

namespace {

const char* kMusic = R"(RETRIEVE(query="music I streamed"))";

std::string per_year(const std::string& input) {
    return "FILTER(l=" + input + R"(, filter=lambda attr: attr["start_datetime"].year == {year}))";
}

std::string count_of(const std::string& input) { return "APPLY(l=" + input + ", fct=len)"; }

std::string extract(const std::string& input, const std::string& keys, const std::string& types) {
    return "EXTRACT(l=" + input + ", attr_names=[" + keys + "], attr_types=[" + types + "])";
}

std::string most_frequent(const std::string& input, const std::string& key) {
    return R"(ARGMAX(l=MAP(l=GROUP_BY(l=)" + input + R"(, attr_names=[")" + key +
           R"("]), fct=len, res_name="count"), arg_attr_name="count", val_attr_name=")" + key + R"("))";
}

std::vector<QuestionTemplate> build_templates() {
    const std::string music = kMusic;
    const std::string movies = R"(RETRIEVE(query="movies I streamed"))";
    const std::string episodes = R"(RETRIEVE(query="episodes I streamed"))";
    const std::string purchases = R"(RETRIEVE(query="my online purchases"))";
    const std::string workouts = R"(RETRIEVE(query="my workouts"))";
    const std::string typed_workouts = R"(RETRIEVE(query="my {workout} workouts"))";
    const std::string meetings = R"(RETRIEVE(query="my meetings"))";
    const std::string doctors = R"(RETRIEVE(query="my doctor appointments"))";
    const std::string trips = R"(RETRIEVE(query="my trips"))";
    const std::string with_participants = extract(meetings, R"("participants")", "list");
    const std::string month_filter =
        R"(filter=lambda attr: attr["start_datetime"].year == {year} and attr["start_datetime"].month == {month_num})";

    std::vector<QuestionTemplate> t;
    auto add = [&](std::string id, std::string text, std::string plan, std::vector<std::string> tags, bool s) {
        t.push_back({std::move(id), std::move(text), std::move(plan), std::move(tags), s});
    };

    add("music_artist_year", "How many songs by {artist} did I listen to in {year}?",
        count_of("FILTER(l=" + extract(music, R"("artist")", "str") +
                 R"(, filter=lambda attr: attr["artist"] == "{artist}" and attr["start_datetime"].year == {year}))"),
        {"aggregation", "temporal"}, true);
    add("music_top_artist_year", "Which artist did I listen to most in {year}?",
        most_frequent(extract(per_year(music), R"("artist")", "str"), "artist"),
        {"grouping", "ordering", "temporal"}, true);
    add("music_genre_month", "How many {music_genre} songs did I stream in {month} {year}?",
        count_of("FILTER(l=" + extract(music, R"("genre")", "str") +
                 R"(, filter=lambda attr: attr["genre"] == "{music_genre}" and attr["start_datetime"].year == {year} and attr["start_datetime"].month == {month_num}))"),
        {"aggregation", "temporal"}, true);
    add("music_first_song_day", "What was the first song I listened to on {day}?",
        R"(ARGMIN(l=)" +
            extract("FILTER(l=" + music +
                        R"(, filter=lambda attr: attr["start_datetime"].year == {day_y} and attr["start_datetime"].month == {day_m} and attr["start_datetime"].day == {day_d}))",
                    R"("song_title")", "str") +
            R"(, arg_attr_name="start_datetime", val_attr_name="song_title"))",
        {"ordering", "temporal"}, true);
    add("music_weekday_year", "On which weekday did I listen to the most music in {year}?",
        most_frequent(R"(MAP(l=)" + per_year(music) + R"(, fct=weekday, res_name="weekday"))", "weekday"),
        {"grouping", "ordering", "temporal"}, true);
    add("movies_year", "How many movies did I watch in {year}?", count_of(per_year(movies)),
        {"aggregation", "temporal"}, true);
    add("movies_genre", "How many {movie_genre} movies did I watch?",
        count_of("FILTER(l=" + extract(movies, R"("genre")", "str") +
                 R"(, filter=lambda attr: attr["genre"] == "{movie_genre}"))"),
        {"aggregation"}, true);
    add("series_episodes", "How many episodes of {series} did I watch?",
        count_of("FILTER(l=" + extract(episodes, R"("tvseries_title")", "str") +
                 R"(, filter=lambda attr: attr["tvseries_title"] == "{series}"))"),
        {"aggregation"}, true);
    add("series_top_year", "Which TV series did I watch most in {year}?",
        most_frequent(extract(per_year(episodes), R"("tvseries_title")", "str"), "tvseries_title"),
        {"grouping", "ordering", "temporal"}, true);
    add("purchase_spend_year", "How much money did I spend on online purchases in {year}?",
        R"(SUM(l=)" + extract(per_year(purchases), R"("price")", "float") + R"(, attr_name="price"))",
        {"aggregation", "temporal"}, true);
    add("purchase_items_category", "How many {category} items did I buy online?",
        R"(SUM(l=FILTER(l=)" + extract(purchases, R"("category", "quantity")", "str, int") +
            R"(, filter=lambda attr: attr["category"] == "{category}"), attr_name="quantity"))",
        {"aggregation"}, true);
    add("purchase_most_expensive_year", "What was the most expensive product I bought online in {year}?",
        R"(ARGMAX(l=)" + extract(per_year(purchases), R"("product", "price")", "str, float") +
            R"(, arg_attr_name="price", val_attr_name="product"))",
        {"ordering", "temporal"}, true);
    add("workout_count_year", "How many {workout} workouts did I do in {year}?", count_of(per_year(typed_workouts)),
        {"aggregation", "temporal"}, true);
    add("workout_longest", "How long was my longest {workout} workout in minutes?",
        R"(MAX(l=)" + extract(typed_workouts, R"("duration_minutes")", "int") + R"(, attr_name="duration_minutes"))",
        {"aggregation", "ordering"}, true);
    add("workout_max_heart_rate", "What was my highest heart rate during {workout}?",
        R"(MAX(l=)" + extract(typed_workouts, R"("max_heart_rate")", "int") + R"(, attr_name="max_heart_rate"))",
        {"aggregation", "ordering"}, true);
    add("workout_calories_month", "How many calories did I burn in workouts in {month} {year}?",
        R"(SUM(l=)" + extract("FILTER(l=" + workouts + ", " + month_filter + ")", R"("calories")", "int") +
            R"(, attr_name="calories"))",
        {"aggregation", "temporal"}, true);
    add("workout_avg_duration", "How long did my {workout} workouts take on average in minutes?",
        R"(AVG(l=)" + extract(typed_workouts, R"("duration_minutes")", "int") + R"(, attr_name="duration_minutes"))",
        {"aggregation"}, true);
    add("music_during_workout_year", "How many songs did I listen to during {workout} workouts in {year}?",
        count_of("JOIN(l1=" + per_year(typed_workouts) + ", l2=" + music +
                 R"(, condition="i2.start_datetime >= i1.start_datetime and i2.start_datetime <= i1.end_datetime"))"),
        {"join", "temporal", "aggregation", "multi-source"}, true);

    add("meet_person", "How many times did I meet with {person}?",
        count_of("FILTER(l=" + with_participants + R"(, filter=lambda attr: "{person}" in attr["participants"]))"),
        {"aggregation", "multi-source"}, false);
    add("meet_person_venue", "How many times did I meet with {person} at a {venue}?",
        count_of("FILTER(l=" + extract(meetings, R"("participants", "venue_type")", "list, str") +
                 R"(, filter=lambda attr: "{person}" in attr["participants"] and attr["venue_type"] == "{venue}"))"),
        {"aggregation", "multi-source"}, false);
    add("meet_person_year", "How often did I meet {person} in {year}?",
        count_of("FILTER(l=" + with_participants +
                 R"(, filter=lambda attr: "{person}" in attr["participants"] and attr["start_datetime"].year == {year}))"),
        {"aggregation", "temporal", "multi-source"}, false);
    add("meet_kid", "How many times did I meet with my child {kid}?",
        count_of("FILTER(l=" + with_participants + R"(, filter=lambda attr: "{kid}" in attr["participants"]))"),
        {"aggregation", "multi-source"}, false);
    add("meal_cuisine", "How often did I have {cuisine} food with friends or family?",
        count_of("FILTER(l=" + extract(meetings, R"("cuisine")", "str") +
                 R"(, filter=lambda attr: attr["cuisine"] == "{cuisine}"))"),
        {"aggregation", "multi-source"}, false);
    add("meet_top_location", "Where did I meet people most often?",
        most_frequent(extract(meetings, R"("location")", "str"), "location"), {"grouping", "ordering", "multi-source"},
        false);
    add("doctor_count_year", "How many doctor appointments did I have in {year}?", count_of(per_year(doctors)),
        {"aggregation", "temporal", "multi-source"}, false);
    add("doctor_top_weekday", "On which weekday did I most often see a doctor?",
        most_frequent(R"(MAP(l=)" + doctors + R"(, fct=weekday, res_name="weekday"))", "weekday"),
        {"grouping", "ordering", "multi-source"}, false);
    add("trips_country", "How many trips did I take to {country}?",
        count_of("FILTER(l=" + extract(trips, R"("country")", "str") +
                 R"(, filter=lambda attr: attr["country"] == "{country}"))"),
        {"aggregation", "multi-source"}, false);
    add("meal_after_workout", "How many times did I have {cuisine} food after a workout on the same day?",
        count_of("JOIN(l1=" + workouts + ", l2=FILTER(l=" + extract(meetings, R"("cuisine")", "str") +
                 R"(, filter=lambda attr: attr["cuisine"] == "{cuisine}"), condition="i2.start_datetime >= i1.end_datetime and i2.start_date == i1.start_date"))"),
        {"join", "temporal", "aggregation", "multi-source"}, false);
    return t;
}

}  // namespace

const std::vector<QuestionTemplate>& question_templates() {
    static const std::vector<QuestionTemplate> t = build_templates();
    return t;
}

json question_to_json(const QuestionInstance& q) {
    return {{"persona", q.persona},
            {"template_id", q.template_id},
            {"question", q.question},
            {"plan", q.plan_text},
            {"gold", value_to_json(q.gold)},
            {"gold_provenance", q.gold_provenance},
            {"tags", q.tags},
            {"structured_only", q.structured_only}};
}

QuestionInstance question_from_json(const json& j) {
    QuestionInstance q;
    q.persona = j.value("persona", "");
    q.template_id = j.value("template_id", "");
    q.question = j.at("question").get<std::string>();
    q.plan_text = j.value("plan", "");
    q.gold = value_from_json(j.at("gold"));
    q.gold_provenance = j.value("gold_provenance", std::vector<std::string>{});
    q.tags = j.value("tags", std::vector<std::string>{});
    q.structured_only = j.value("structured_only", false);
    return q;
}

// ---------------------------------------------------------------- oracle

namespace {

// Canonical events carry every schema key, so nothing is ever generated.
class NoValueGenerator : public ValueGenerator {
public:
    std::optional<std::string> generate(std::string_view, std::string_view, std::string_view) override {
        return std::nullopt;
    }
};

}  // namespace

std::pair<Value, std::vector<std::string>> oracle_answer(const PlanNode& plan,
                                                        const std::vector<CanonicalEvent>& canonical,
                                                        DateTime clock) {
    EventStore store = canonical_store(canonical);
    std::map<std::string, const CanonicalEvent*, std::less<>> by_id;
    for (const auto& c : canonical) by_id[c.id] = &c;
    NoValueGenerator none;
    Extractor extractor(none);
    ExecContext ctx;
    ctx.clock = clock;
    ctx.store = &store;
    ctx.extractor = &extractor;
    ctx.retrieve_fn = [&](std::string_view query, const std::vector<Event>* input) {
        Selector sel = selector_for_query(query);
        std::vector<Event> out;
        auto consider = [&](const Event& e) {
            auto it = by_id.find(e.id);
            if (it != by_id.end() && sel.matches(*it->second)) out.push_back(e);
        };
        if (input) {
            for (const auto& e : *input) consider(e);
        } else {
            for (const auto& e : store.events()) consider(e);
        }
        return out;
    };
    ExecutionResult r = Executor(std::move(ctx)).execute(plan);
    if (r.kind != ExecutionResult::Kind::scalar)
        throw Error("NonScalarAnswer", "oracle plans must end in a scalar, got " +
                                           std::string(result_kind_name(r.kind)));
    return {r.scalar, r.provenance};
}

namespace {

struct Filling {
    Slots slots;
};

std::vector<Filling> candidate_fillings(const QuestionTemplate& t, const PersonaData& d, Rng& r) {
    static const char* const kMonths[] = {"January", "February", "March",     "April",   "May",      "June",
                                          "July",    "August",   "September", "October", "November", "December"};
    const Persona& p = d.persona;
    auto uses = [&](std::string_view slot) {
        std::string tok = "{" + std::string(slot) + "}";
        return t.text.find(tok) != std::string::npos || t.plan.find(tok) != std::string::npos;
    };
    int y0 = 9999, y1 = 0;
    for (const auto& c : d.canonical) {
        int y = civil_from_days(date_of(c.span.start).days).year;
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }

    std::vector<Slots> out{{}};
    auto expand = [&](std::vector<Slots> choices) {
        std::vector<Slots> next;
        for (const auto& base : out)
            for (const auto& c : choices) {
                Slots s = base;
                s.insert(s.end(), c.begin(), c.end());
                next.push_back(std::move(s));
            }
        out = std::move(next);
    };
    auto simple = [&](const char* slot, const std::vector<std::string>& values) {
        std::vector<Slots> c;
        for (const auto& v : values) c.push_back({{slot, v}});
        expand(std::move(c));
    };

    if (uses("month")) {
        std::vector<Slots> c;
        for (int y = y0; y <= y1; ++y)
            for (int m = 1; m <= 12; ++m)
                c.push_back({{"month", kMonths[m - 1]}, {"month_num", std::to_string(m)}, {"year", std::to_string(y)}});
        expand(std::move(c));
    } else if (uses("year")) {
        std::vector<std::string> ys;
        for (int y = y0; y <= y1; ++y) ys.push_back(std::to_string(y));
        simple("year", ys);
    }
    if (uses("day")) {
        std::set<int64_t> days;
        for (const auto& c : d.canonical)
            if (c.type == EventType::music) days.insert(date_of(c.span.start).days);
        std::vector<int64_t> v(days.begin(), days.end());
        r.shuffle(v);
        v.resize(std::min<size_t>(v.size(), 24));
        std::vector<Slots> c;
        for (int64_t dd : v) {
            auto cd = civil_from_days(dd);
            c.push_back({{"day", std::string(kMonths[cd.month - 1]) + " " + std::to_string(cd.day) + ", " +
                                     std::to_string(cd.year)},
                         {"day_y", std::to_string(cd.year)},
                         {"day_m", std::to_string(cd.month)},
                         {"day_d", std::to_string(cd.day)}});
        }
        expand(std::move(c));
    }
    if (uses("artist")) simple("artist", p.favorite_artists);
    if (uses("music_genre")) simple("music_genre", p.music_genres);
    if (uses("movie_genre")) simple("movie_genre", p.movie_genres);
    if (uses("series")) simple("series", p.favorite_series);
    if (uses("category")) simple("category", p.shopping_categories);
    if (uses("workout")) simple("workout", p.workouts);
    if (uses("person")) simple("person", p.people());
    if (uses("venue")) simple("venue", {"restaurant", "cafe", "park"});
    if (uses("cuisine")) simple("cuisine", p.cuisines);
    if (uses("country")) simple("country", p.travel_countries);
    if (uses("kid")) {
        std::vector<std::string> kids;
        for (const auto& k : p.kids) kids.push_back(k.name);
        simple("kid", kids);
    }
    r.shuffle(out);
    std::vector<Filling> res;
    for (auto& s : out) res.push_back({std::move(s)});
    return res;
}

}  // namespace

std::vector<QuestionInstance> instantiate_questions(const std::vector<QuestionTemplate>& templates,
                                                    const PersonaData& d, size_t per_template, uint64_t seed,
                                                    DateTime clock, bool strict) {
    std::vector<QuestionInstance> out;
    for (const auto& t : templates) {
        Rng r(detail::mix(seed, t.id));
        auto fillings = candidate_fillings(t, d, r);
        size_t made = 0, tried = 0;
        const size_t budget = 4 * per_template + 8;
        for (const auto& f : fillings) {
            if (made >= per_template || tried >= budget) break;
            ++tried;
            QuestionInstance q;
            q.persona = d.persona.name;
            q.template_id = t.id;
            q.question = fill(t.text, f.slots);
            q.plan_text = fill(t.plan, f.slots);
            q.tags = t.tags;
            q.structured_only = t.structured_only;
            try {
                auto [gold, prov] = oracle_answer(parse_plan(q.plan_text), d.canonical, clock);
                // Empty answers are discarded: nothing in the persona's life supports them.
                if (gold.is_null() || prov.empty()) continue;
                q.gold = std::move(gold);
                q.gold_provenance = std::move(prov);
            } catch (const Error&) {
                continue;
            }
            out.push_back(std::move(q));
            ++made;
        }
        if (strict && made == 0) throw Error("NoValidFilling", "template " + t.id + " has no valid filling");
    }
    return out;
}

// --------------------------------------------------------- decomposition

namespace {

std::string quote_safe(std::string s) {
    std::replace(s.begin(), s.end(), '"', '\'');
    return s;
}

std::string join(const std::vector<std::string>& xs, const char* sep) {
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
    return out;
}

std::string label(const PlanNode& n) {
    switch (n.op) {
        case Op::retrieve: return n.text;
        case Op::qud: return n.text;
        case Op::extract: return label(n.child()) + " with " + join(n.keys, " and ");
        case Op::filter: return label(n.child()) + " where " + quote_safe(render_expr(n.predicate()));
        case Op::group_by: return label(n.child()) + " grouped by " + join(n.keys, " and ");
        case Op::map: return label(n.child()) + " with " + n.fn + " as " + n.res_name;
        case Op::apply: return n.fn + " of " + label(n.child());
        case Op::unnest: return label(n.child()) + " unnested by " + n.nested_key;
        case Op::join:
            return label(n.child(0)) + " joined with " + label(n.child(1)) + " where " +
                   quote_safe(render_expr(n.predicate()));
        case Op::argmin:
        case Op::argmax:
            return std::string(op_name(n.op)) + " " + n.keys.at(0) + (n.val_key ? " giving " + *n.val_key : "") +
                   " of " + label(n.child());
        default: return std::string(op_name(n.op)) + " " + n.keys.at(0) + " of " + label(n.child());
    }
}

void script_of(const PlanNode& n, const std::string& question, std::vector<std::pair<std::string, std::string>>& out) {
    PlanNode partial = n;
    for (auto& c : partial.children) c = make_qud(label(c));
    out.emplace_back(question, render_plan(partial));
    for (const auto& c : n.children) script_of(c, label(c), out);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> decomposition_script(const QuestionInstance& q) {
    std::vector<std::pair<std::string, std::string>> out;
    script_of(parse_plan(q.plan_text), q.question, out);
    return out;
}

// ---------------------------------------------------------------- splits

std::string_view split_name(Split s) noexcept {
    switch (s) {
        case Split::train: return "train";
        case Split::dev: return "dev";
        case Split::test: return "test";
    }
    return "?";
}

std::map<std::string, Split> split_templates(const std::vector<QuestionTemplate>& templates, uint64_t seed) {
    std::vector<std::string> ids;
    for (const auto& t : templates) ids.push_back(t.id);
    std::sort(ids.begin(), ids.end());
    Rng r(detail::mix(seed, "template-split"));
    r.shuffle(ids);
    const size_t n = ids.size();
    const size_t n_test = std::max<size_t>(1, (n * 3 + 9) / 10), n_dev = std::max<size_t>(1, n / 10);
    std::map<std::string, Split> out;
    for (size_t i = 0; i < n; ++i)
        out[ids[i]] = i < n_test ? Split::test : i < n_test + n_dev ? Split::dev : Split::train;
    return out;
}

Split persona_split(size_t index, size_t count) {
    if (count < 3) return index + 1 == count && count == 2 ? Split::test : Split::train;
    const size_t n_test = std::max<size_t>(1, (count * 3 + 9) / 10), n_dev = std::max<size_t>(1, count / 10);
    if (index >= count - n_test) return Split::test;
    if (index >= count - n_test - n_dev) return Split::dev;
    return Split::train;
}

}  // namespace optree::persona
