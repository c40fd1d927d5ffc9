#include <algorithm>
#include <cstdio>

#include "optree/persona.hpp"
#include "persona_internal.hpp"
#include "persona_pools.hpp"

namespace optree::persona {

using detail::and_list;
using detail::capitalize;
using detail::fill;
using detail::first_name;
using detail::Rng;
using Slots = std::vector<std::pair<std::string, std::string>>;

VerbalMode parse_verbal_mode(std::string_view s) {
    if (s == "structured") return VerbalMode::structured;
    if (s == "calendar") return VerbalMode::calendar;
    if (s == "mail") return VerbalMode::mail;
    if (s == "social") return VerbalMode::social;
    if (s == "mixed") return VerbalMode::mixed;
    throw Error("UnknownMode", "unknown verbalization mode: " + std::string(s));
}

namespace {

std::string text_of(const Attrs& a, const char* key) {
    auto it = a.find(key);
    return it == a.end() || it->second.is_null() ? std::string() : to_text(it->second);
}

std::string money(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

TimeSpan point(const TimeSpan& s) { return {s.start, s.start}; }

// How the persona refers to someone in their own text.
std::string mention(const Persona& p, const std::string& who, Rng& r) {
    if (who == p.mother && r.chance(0.5)) return "Mum";
    if (who == p.father && r.chance(0.5)) return "Dad";
    return first_name(who);
}

std::string occasion_text(const CanonicalEvent& c, const Persona& p) {
    std::string occ = text_of(c.attrs, "occasion"), who = text_of(c.attrs, "person");
    if (occ == "birthday") return who == p.name ? "my birthday" : first_name(who) + "'s birthday";
    if (occ == "adoption day") return who + "'s adoption day";
    return "our " + occ;
}

std::string milestone_text(const CanonicalEvent& c) {
    std::string kind = text_of(c.attrs, "milestone"), detail = text_of(c.attrs, "detail");
    std::string head = detail.substr(0, detail.find(", "));
    std::string tail = detail.find(", ") == std::string::npos ? "" : detail.substr(detail.find(", ") + 2);
    if (kind == "new job") return "starting my new job as " + head + " for " + tail;
    if (kind == "moved") return "moving into our new home on " + head + " in " + tail;
    if (kind == "started studies") return "my first day of studies, " + detail;
    if (kind == "graduation") return "graduating from " + detail;
    if (kind == "wedding") return "marrying " + first_name(detail);
    if (kind == "birth") return "welcoming baby " + first_name(detail) + " to the family";
    if (kind == "new pet") return "adopting " + head + ", our new " + tail;
    return kind;
}

class Verbalizer {
public:
    Verbalizer(const CanonicalEvent& c, const Persona& p, const GenerationConfig& cfg, uint64_t seed)
        : c_(c), p_(p), cfg_(cfg), r_(detail::mix(seed, c.id)) {}

    std::vector<Observable> run(VerbalMode mode) {
        if (mode == VerbalMode::mixed) {
            mixed();
        } else if (!form(mode)) {
            throw Error("UnknownMode", std::string(event_type_name(c_.type)) + " events have no such form");
        }
        return std::move(out_);
    }

private:
    void emit(Source s, TimeSpan span, Attrs a) { out_.push_back({Event::make("", s, span, std::move(a)), c_.id}); }

    void mixed() {
        switch (c_.type) {
            case EventType::music:
            case EventType::movie:
            case EventType::tvseries:
            case EventType::purchase:
            case EventType::workout: {
                VerbalMode text_form = c_.type == EventType::purchase ? VerbalMode::mail : VerbalMode::social;
                if (r_.chance(cfg_.p_struct)) {
                    structured();
                    if (r_.chance(cfg_.p_extra_verbalization)) form(text_form);
                } else {
                    // A workout known only from text keeps its span through the calendar.
                    form(c_.type == EventType::workout ? VerbalMode::calendar : text_form);
                }
                return;
            }
            case EventType::meeting: {
                double u = r_.real();
                form(u < 0.6 ? VerbalMode::calendar : u < 0.8 ? VerbalMode::mail : VerbalMode::social);
                return;
            }
            case EventType::doctor: form(r_.chance(0.8) ? VerbalMode::calendar : VerbalMode::mail); return;
            case EventType::anniversary: form(r_.chance(0.5) ? VerbalMode::calendar : VerbalMode::social); return;
            case EventType::milestone: form(r_.chance(0.5) ? VerbalMode::mail : VerbalMode::social); return;
            case EventType::travel: form(c_.subtype == "trip" ? VerbalMode::calendar : VerbalMode::social); return;
        }
    }

    bool form(VerbalMode m) {
        switch (m) {
            case VerbalMode::structured:
                if (!is_structured(c_.type)) return false;
                structured();
                return true;
            case VerbalMode::calendar: return calendar();
            case VerbalMode::mail: return mail();
            case VerbalMode::social: return social();
            case VerbalMode::mixed: return false;
        }
        return false;
    }

    void structured() {
        Attrs a = c_.attrs;
        if (c_.type == EventType::purchase) {
            a["price"] = Value(money(c_.attrs.at("price").real()) + " EUR");
            a["order"] = Value(text_of(c_.attrs, "quantity") + " x " + text_of(c_.attrs, "product"));
        }
        emit(structured_source(c_.type), c_.span, std::move(a));
    }

    std::string pick(std::initializer_list<const char*> variants) {
        return std::vector<const char*>(variants)[r_.index(variants.size())];
    }

    // ---------------------------------------------------------- calendar

    bool calendar() {
        const Attrs& a = c_.attrs;
        switch (c_.type) {
            case EventType::workout: {
                Slots s{{"w", text_of(a, "workout_type")},
                        {"W", capitalize(text_of(a, "workout_type"))},
                        {"d", text_of(a, "duration_minutes")},
                        {"c", text_of(a, "calories")},
                        {"h", text_of(a, "max_heart_rate")}};
                emit(Source::calendar, c_.span,
                     {{"summary", Value(fill(pick({"{W} workout", "{W} workout session", "Workout: {w}",
                                                   "{W} (workout)", "Evening {w} workout"}),
                                             s))},
                      {"description", Value(fill(pick({"{d} minutes, {c} kcal burned, max heart rate {h} bpm",
                                                       "Logged {d} minutes and {c} kcal, peak {h} bpm",
                                                       "Duration {d} minutes. Energy {c} kcal. Max {h} bpm.",
                                                       "{c} kcal in {d} minutes, heart up to {h} bpm",
                                                       "Tracked: {d} minutes / {c} kcal / {h} bpm max"}),
                                                 s))}});
                return true;
            }
            case EventType::meeting: {
                auto s = meeting_slots();
                emit(Source::calendar, c_.span,
                     {{"summary", Value(fill(pick({"{Act} with {people}", "{Act} meeting with {people}",
                                                   "Meet {people} for {act}", "{people}: {act}",
                                                   "{Act} and catch-up with {people}"}),
                                             s))},
                      {"description", Value(fill(pick({"Meeting point: {loc}. {venue}", "We meet there. {venue}",
                                                       "Meeting, {venue}", "{venue} Meet up on time.",
                                                       "Meeting reminder. {venue}"}),
                                                 s))},
                      {"location", Value(text_of(a, "location"))}});
                return true;
            }
            case EventType::doctor: {
                auto s = doctor_slots();
                emit(Source::calendar, c_.span,
                     {{"summary", Value(fill(pick({"{Title} appointment", "Doctor appointment ({title})",
                                                   "Appointment: {dr}", "{Title} check-up appointment",
                                                   "See {dr}"}),
                                             s))},
                      {"description", Value(fill(pick({"Doctor appointment with {dr}",
                                                       "{Title} doctor appointment, bring the insurance card",
                                                       "Regular doctor appointment ({title})",
                                                       "Doctor appointment, {dr}",
                                                       "Appointment with the doctor, {dr}"}),
                                                 s))},
                      {"location", Value(text_of(a, "clinic"))}});
                return true;
            }
            case EventType::anniversary: {
                Slots s{{"occ", occasion_text(c_, p_)}, {"Occ", capitalize(occasion_text(c_, p_))}};
                emit(Source::calendar, c_.span,
                     {{"summary", Value(fill(pick({"{Occ}", "{Occ}!", "{Occ} celebration", "Celebrate {occ}",
                                                   "{Occ} (do not forget)"}),
                                             s))}});
                return true;
            }
            case EventType::travel: {
                if (c_.subtype != "trip") return false;
                Slots s{{"city", text_of(a, "destination")}, {"country", text_of(a, "country")}};
                emit(Source::calendar, c_.span,
                     {{"summary", Value(fill(pick({"Trip to {city}", "{city} trip", "Trip: {city}, {country}",
                                                   "Holiday trip to {city}", "Our trip to {city}"}),
                                             s))},
                      {"description", Value(pick({"Flights and hotel booked", "Pack the day before",
                                                  "Check in online", "Hotel near the centre",
                                                  "Remember passports"}))},
                      {"location", Value(text_of(a, "destination"))}});
                return true;
            }
            default: return false;
        }
    }

    // -------------------------------------------------------------- mail

    bool mail() {
        const Attrs& a = c_.attrs;
        switch (c_.type) {
            case EventType::purchase: {
                Slots s{{"product", text_of(a, "product")},
                        {"cat", text_of(a, "category")},
                        {"q", text_of(a, "quantity")},
                        {"price", money(a.at("price").real())}};
                emit(Source::mail, point(c_.span),
                     {{"sender", Value(std::string("orders@shopnow.example"))},
                      {"recipient", Value(p_.name)},
                      {"subject", Value(pick({"Your online purchase", "Order confirmation: online purchase",
                                              "Thanks for your online purchase", "Online purchase receipt",
                                              "Your online purchase has shipped"}))},
                      {"text",
                       Value(fill(pick({"Thank you for your online purchase! Item: \"{product}\", quantity: {q}, "
                                        "category: {cat}, price: {price} EUR",
                                        "Your online purchase of \"{product}\" ({cat}) is confirmed. quantity: {q}; "
                                        "total {price} EUR",
                                        "Order summary for your online purchase: \"{product}\" in {cat} (quantity: "
                                        "{q}) for {price} EUR",
                                        "We received your online purchase. \"{product}\", category: {cat}, "
                                        "quantity: {q}, amount: {price} EUR",
                                        "Good news, your online purchase has shipped: \"{product}\" ({cat}), "
                                        "quantity: {q}, paid {price} EUR"}),
                                  s))}});
                return true;
            }
            case EventType::meeting: {
                auto s = meeting_slots();
                const auto& who = a.at("participants").list();
                std::string recipient = who.empty() ? p_.name : who.front().text();
                s.push_back({"to", mention(p_, recipient, r_)});
                std::vector<std::string> others;
                for (size_t i = 1; i < who.size(); ++i) others.push_back(mention(p_, who[i].text(), r_));
                s.push_back({"others", others.empty() ? "" : " together with " + and_list(others)});
                emit(Source::mail, point(c_.span),
                     {{"sender", Value(p_.name)},
                      {"recipient", Value(recipient)},
                      {"subject", Value(fill(pick({"{Act} meeting", "Meeting up", "Shall we meet?", "{Act} plans",
                                                   "Our meeting"}),
                                             s))},
                      {"text", Value(fill(pick({"Hi {to}, looking forward to meeting you{others} at {loc} for "
                                                "{act}. {mvenue}",
                                                "Hi {to}, shall we meet{others} at {loc} for {act}? {mvenue}",
                                                "Dear {to}, confirming our {act} meeting{others} at {loc}. {mvenue}",
                                                "Hello {to}! Let us meet{others} at {loc}, {act} is on me. {mvenue}",
                                                "Hi {to}, quick reminder about our meeting{others} at {loc} for "
                                                "{act}. {mvenue}"}),
                                          s))}});
                return true;
            }
            case EventType::doctor: {
                auto s = doctor_slots();
                s.push_back({"clinic", text_of(a, "clinic")});
                s.push_back({"time", format_time(time_of(c_.span.start)).substr(0, 5)});
                emit(Source::mail, point(c_.span),
                     {{"sender", Value(std::string("reception@clinic.example"))},
                      {"recipient", Value(p_.name)},
                      {"subject", Value(pick({"Appointment reminder", "Your upcoming appointment",
                                              "Doctor appointment confirmation", "Reminder from your doctor",
                                              "Appointment details"}))},
                      {"text", Value(fill(pick({"This is a reminder of your {title} appointment with {dr} at "
                                                "{clinic}, scheduled for {time}. Your doctor's office.",
                                                "Dear patient, your doctor appointment with {dr} ({title}) is "
                                                "confirmed for {time}.",
                                                "Please arrive early for your {title} appointment, {dr} will see "
                                                "you. Doctor's office, {clinic}.",
                                                "Your appointment with the doctor ({dr}) starts {time} sharp.",
                                                "Reminder: {Title} appointment, {dr}, {time}. Doctor's office."}),
                                          s))}});
                return true;
            }
            case EventType::milestone: {
                Slots s{{"m", milestone_text(c_)}, {"M", capitalize(milestone_text(c_))}};
                const std::string& to = p_.friends.empty() ? p_.mother : p_.friends.front();
                emit(Source::mail, point(c_.span),
                     {{"sender", Value(p_.name)},
                      {"recipient", Value(to)},
                      {"subject", Value(pick({"Big news", "Life update", "Some news", "Guess what", "News"}))},
                      {"text", Value(fill(pick({"Hi, big news: {m}.", "{M}! Thought you should know.",
                                                "Just a quick note, today means {m}.", "Finally happening: {m}.",
                                                "Life update, {m}."}),
                                          s))}});
                return true;
            }
            default: return false;
        }
    }

    // ------------------------------------------------------------ social

    bool social() {
        const Attrs& a = c_.attrs;
        switch (c_.type) {
            case EventType::music: {
                Slots s{{"title", text_of(a, "song_title")},
                        {"artist", text_of(a, "artist")},
                        {"genre", text_of(a, "genre")},
                        {"Genre", capitalize(text_of(a, "genre"))}};
                emit(Source::social_media, point(c_.span),
                     {{"text", Value(fill(pick({"Streaming some {genre} music: \"{title}\" by {artist}. #music",
                                                "Now streaming \"{title}\" by {artist}, {genre} music on repeat.",
                                                "{Genre} music all day. Just streamed \"{title}\" by {artist}!",
                                                "Loving this {genre} music I streamed today: \"{title}\" by {artist}",
                                                "Streamed \"{title}\" by {artist} twice in a row. Best {genre} "
                                                "music ever."}),
                                          s))}});
                return true;
            }
            case EventType::movie: {
                Slots s{{"title", text_of(a, "movie_title")},
                        {"genre", text_of(a, "genre")},
                        {"Genre", capitalize(text_of(a, "genre"))}};
                emit(Source::social_media, point(c_.span),
                     {{"text", Value(fill(pick({"Streamed the {genre} movie \"{title}\" tonight. Loved it.",
                                                "Movie night! Streaming \"{title}\", a great {genre} pick.",
                                                "Just streamed \"{title}\". Not bad for a {genre} movie.",
                                                "{Genre} movie marathon starts with \"{title}\", streaming now.",
                                                "Finally streamed \"{title}\", what a {genre} movie!"}),
                                          s))}});
                return true;
            }
            case EventType::tvseries: {
                Slots s{{"title", text_of(a, "tvseries_title")},
                        {"genre", text_of(a, "genre")},
                        {"Genre", capitalize(text_of(a, "genre"))},
                        {"s", text_of(a, "season")},
                        {"e", text_of(a, "episode_number")}};
                emit(Source::social_media, point(c_.span),
                     {{"text",
                       Value(fill(pick({"Streamed another episode of \"{title}\" (season: {s}, episode number: {e}). "
                                        "Great {genre} series.",
                                        "Binge streaming \"{title}\" tonight (season: {s}, episode number: {e}), "
                                        "{genre} at its best.",
                                        "{Genre} evening: streamed an episode of \"{title}\" (season: {s}, episode "
                                        "number: {e})",
                                        "One more episode! \"{title}\" (season: {s}, episode number: {e}) is my "
                                        "favourite {genre} show, streaming it every night.",
                                        "Streamed \"{title}\" (season: {s}, episode number: {e}), what an episode. "
                                        "Top {genre} series."}),
                                  s))}});
                return true;
            }
            case EventType::workout: {
                Slots s{{"w", text_of(a, "workout_type")},
                        {"W", capitalize(text_of(a, "workout_type"))},
                        {"d", text_of(a, "duration_minutes")},
                        {"c", text_of(a, "calories")},
                        {"h", text_of(a, "max_heart_rate")}};
                emit(Source::social_media, point(c_.span),
                     {{"text", Value(fill(pick({"Great {w} workout today: {d} minutes, {c} kcal, max heart rate "
                                                "{h} bpm.",
                                                "{d}-minute {w} workout done! Burned {c} kcal, heart peaked with "
                                                "{h} bpm.",
                                                "Finished a {d} minute {w} workout, {c} kcal and max {h} bpm",
                                                "Workout log: {w}, {d} minutes, {c} kcal, max {h} bpm",
                                                "Another {w} workout done. {d} minutes, {c} kcal, max {h} bpm."}),
                                          s))}});
                return true;
            }
            case EventType::meeting: {
                auto s = meeting_slots();
                emit(Source::social_media, point(c_.span),
                     {{"text", Value(fill(pick({"Lovely {act} meeting with {people} at {loc}. {svenue}",
                                                "Great to meet {people} at {loc} for {act}. {svenue}",
                                                "{Act} meeting with {people} at {loc}! {svenue}",
                                                "Caught up with {people} at {loc} over {act}, such a nice "
                                                "meeting. {svenue}",
                                                "Meeting {people} at {loc} made my day. {svenue}"}),
                                          s))}});
                return true;
            }
            case EventType::anniversary: {
                Slots s{{"occ", occasion_text(c_, p_)}, {"Occ", capitalize(occasion_text(c_, p_))}};
                emit(Source::social_media, point(c_.span),
                     {{"text", Value(fill(pick({"Happy {occ}!", "Celebrating {occ} today.",
                                                "{Occ}, what a wonderful day.", "Cake and candles for {occ}.",
                                                "Another year, another {occ}."}),
                                          s))}});
                return true;
            }
            case EventType::milestone: {
                Slots s{{"m", milestone_text(c_)}, {"M", capitalize(milestone_text(c_))}};
                emit(Source::social_media, point(c_.span),
                     {{"text", Value(fill(pick({"Big day: {m}.", "{M}!", "Today is all about {m}.",
                                                "Grateful for this moment, {m}.", "New chapter: {m}."}),
                                          s))}});
                return true;
            }
            case EventType::travel: {
                if (c_.subtype != "activity") return false;
                Slots s{{"city", text_of(a, "destination")}, {"sight", text_of(a, "activity")}};
                emit(Source::social_media, point(c_.span),
                     {{"text", Value(fill(pick({"Visited {sight} in {city} today!", "{city} views: {sight}.",
                                                "Spent the afternoon exploring {sight}, {city}.",
                                                "Highlight in {city}: {sight}.",
                                                "Could not skip {sight} while in {city}."}),
                                          s))}});
                return true;
            }
            default: return false;
        }
    }

    // ------------------------------------------------------------ slots

    Slots meeting_slots() {
        const Attrs& a = c_.attrs;
        std::vector<std::string> names;
        for (const auto& v : a.at("participants").list()) names.push_back(mention(p_, v.text(), r_));
        std::string act = c_.subtype, venue = text_of(a, "venue_type"), cuisine = text_of(a, "cuisine");
        std::string cal, mv, sv;
        if (venue == "restaurant") {
            cal = "Table booked, " + cuisine + " food at the restaurant.";
            mv = "I hear their " + cuisine + " food is great, a lovely restaurant.";
            sv = "The " + cuisine + " food at this restaurant was amazing.";
        } else if (venue == "cafe") {
            cal = "Coffee and cake at the cafe.";
            mv = "It is a cosy cafe.";
            sv = "Best cafe in town.";
        } else {
            cal = "A walk in the park.";
            mv = "Nice walk in the park afterwards.";
            sv = "Sunshine in the park.";
        }
        return {{"people", and_list(names)}, {"act", act},           {"Act", capitalize(act)},
                {"loc", text_of(a, "location")}, {"venue", cal},     {"mvenue", mv},
                {"svenue", sv}};
    }

    Slots doctor_slots() {
        std::string kind = text_of(c_.attrs, "doctor_type"), title = kind;
        for (const auto& d : pools::kDoctors)
            if (d.kind == kind) title = std::string(d.title);
        return {{"title", kind == "gp" ? "GP" : kind}, {"Title", title}, {"dr", text_of(c_.attrs, "doctor_name")}};
    }

    const CanonicalEvent& c_;
    const Persona& p_;
    const GenerationConfig& cfg_;
    Rng r_;
    std::vector<Observable> out_;
};

}  // namespace

std::vector<Observable> verbalize(const CanonicalEvent& c, const Persona& p, VerbalMode mode,
                                  const GenerationConfig& cfg, uint64_t seed) {
    return Verbalizer(c, p, cfg, seed).run(mode);
}

PersonaData generate_persona_data(uint64_t seed, const GenerationConfig& cfg) {
    PersonaData d;
    d.persona = generate_persona(seed);
    d.canonical = generate_canonical_events(d.persona, cfg, detail::mix(seed, "events"));
    const uint64_t vseed = detail::mix(seed, "verbalize");
    for (const auto& c : d.canonical)
        for (auto& o : verbalize(c, d.persona, VerbalMode::mixed, cfg, vseed)) d.observable.push_back(std::move(o));
    std::stable_sort(d.observable.begin(), d.observable.end(), [](const Observable& a, const Observable& b) {
        return std::tie(a.event.span.start, a.canonical_id) < std::tie(b.event.span.start, b.canonical_id);
    });
    StoreBuilder b;
    char buf[32];
    for (size_t i = 0; i < d.observable.size(); ++i) {
        std::snprintf(buf, sizeof buf, "o%07zu", i + 1);
        auto& o = d.observable[i];
        o.event.id = buf;
        o.event.provenance = {o.event.id};
        d.link[o.event.id] = o.canonical_id;
        if (!b.add(o.event)) throw Error("ConfigError", std::string("observable ") + buf + " violates store invariants");
    }
    d.store = b.finalize();
    return d;
}

}  // namespace optree::persona
