#include "optree/extract.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <exception>
#include <regex>
#include <sstream>

#include "optree/vocab.hpp"

namespace optree {
namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80; }

// Position of `term` in `hay` as a whole word (both already lowercase).
size_t find_word(std::string_view hay, std::string_view term) {
    for (size_t at = hay.find(term); at != std::string_view::npos; at = hay.find(term, at + 1)) {
        bool left = at == 0 || !word_char(hay[at - 1]);
        size_t end = at + term.size();
        bool right = end >= hay.size() || !word_char(hay[end]);
        if (left && right) return at;
    }
    return std::string_view::npos;
}

// Lowercased text with double-quoted spans blanked out.
std::string unquoted_lower(std::string_view text) {
    std::string out = lower(text);
    bool in = false;
    for (auto& c : out) {
        if (c == '"') {
            in = !in;
            c = ' ';
        } else if (in) {
            c = ' ';
        }
    }
    return out;
}

template <class Range>
std::optional<std::string> earliest_term(std::string_view hay, const Range& terms) {
    size_t best = std::string_view::npos;
    std::string_view found;
    for (std::string_view t : terms) {
        size_t at = find_word(hay, lower(t));
        if (at < best) {
            best = at;
            found = t;
        }
    }
    if (best == std::string_view::npos) return std::nullopt;
    return std::string(found);
}

bool key_has(std::string_view key, std::initializer_list<std::string_view> parts) {
    return std::any_of(parts.begin(), parts.end(), [&](std::string_view p) { return key.find(p) != key.npos; });
}

std::optional<std::string> number_before(const std::string& text, const char* units) {
    std::regex re(std::string("([0-9]+(?:\\.[0-9]+)?)\\s*-?\\s*(?:") + units + ")(?![A-Za-z])", std::regex::icase);
    std::smatch m;
    if (std::regex_search(text, m, re)) return m[1].str();
    return std::nullopt;
}

std::optional<std::string> literal_fragment(const std::string& text, std::string_view key) {
    std::string spaced(key);
    std::replace(spaced.begin(), spaced.end(), '_', ' ');
    std::string hay = lower(text);
    for (const std::string& k : {std::string(key), spaced}) {
        std::string needle = k + ": ";
        size_t at = find_word(hay, k);
        while (at != std::string::npos && hay.compare(at, needle.size(), needle) != 0) {
            at = hay.find(k, at + 1);
        }
        if (at == std::string::npos) continue;
        size_t from = at + needle.size();
        size_t to = text.find_first_of("|,;)", from);
        auto v = trim(std::string_view(text).substr(from, to == std::string::npos ? std::string::npos : to - from));
        if (!v.empty()) return std::string(v);
    }
    return std::nullopt;
}

// Capitalized phrase right after `lead` (e.g. "by ", "at ").
std::optional<std::string> phrase_after(const std::string& text, const char* lead) {
    std::regex re(std::string("\\b") + lead +
                  "\\s+((?:[A-Z0-9][^\\s,.;:!?()|#\"]*)(?:\\s+(?:&|[A-Z0-9][^\\s,.;:!?()|#\"]*))*)");
    std::smatch m;
    if (std::regex_search(text, m, re)) return m[1].str();
    return std::nullopt;
}

std::optional<std::string> first_quoted(std::string_view text) {
    size_t a = text.find('"');
    if (a == std::string_view::npos) return std::nullopt;
    size_t b = text.find('"', a + 1);
    if (b == std::string_view::npos || b == a + 1) return std::nullopt;
    return std::string(text.substr(a + 1, b - a - 1));
}

struct Person {
    std::string relation;
    std::string name;
};

std::vector<Person> parse_user_info(std::string_view info) {
    std::vector<Person> out;
    std::istringstream in{std::string(info)};
    std::string line;
    while (std::getline(in, line)) {
        auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        auto rel = trim(std::string_view(line).substr(0, colon));
        auto name = trim(std::string_view(line).substr(colon + 1));
        if (!rel.empty() && !name.empty()) out.push_back({lower(rel), std::string(name)});
    }
    return out;
}

std::optional<std::string> people_in(std::string_view text, std::string_view user_info) {
    std::string hay = lower(text);
    std::vector<std::string> found;
    auto add = [&](const std::string& n) {
        if (std::find(found.begin(), found.end(), n) == found.end()) found.push_back(n);
    };
    for (const auto& p : parse_user_info(user_info)) {
        std::string full = lower(p.name);
        std::string first = full.substr(0, full.find(' '));
        bool hit = find_word(hay, full) != std::string::npos || find_word(hay, first) != std::string::npos;
        if (!hit && (p.relation == "mother" || p.relation == "mum"))
            hit = find_word(hay, "mum") != std::string::npos || find_word(hay, "mom") != std::string::npos ||
                  find_word(hay, "mother") != std::string::npos;
        if (!hit && (p.relation == "father" || p.relation == "dad"))
            hit = find_word(hay, "dad") != std::string::npos || find_word(hay, "father") != std::string::npos;
        if (hit) add(p.name);
    }
    if (found.empty()) return std::nullopt;
    std::string out;
    for (const auto& n : found) out += (out.empty() ? "" : ", ") + n;
    return out;
}

std::optional<std::string> cuisine_in(std::string_view text) {
    std::string hay = unquoted_lower(text);
    std::vector<std::string_view> names;
    for (const auto& c : vocab::kCuisines) names.push_back(c.name);
    if (auto n = earliest_term(hay, names)) return n;
    size_t best = std::string::npos;
    std::optional<std::string> out;
    for (const auto& c : vocab::kCuisines)
        for (auto dish : c.dishes) {
            size_t at = find_word(hay, dish);
            if (at < best) {
                best = at;
                out = std::string(c.name);
            }
        }
    return out;
}

bool parse_number(std::string_view s, double& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

std::optional<std::string> RuleValueGenerator::generate(std::string_view key_in, std::string_view verbalized,
                                                        std::string_view user_info) {
    const std::string key = lower(key_in);
    const std::string text(verbalized);
    if (auto v = literal_fragment(text, key)) return v;

    if (key_has(key, {"price", "amount", "cost", "spent"})) {
        if (auto v = number_before(text, "EUR|USD|GBP|€|\\$")) return v;
        std::smatch m;
        if (std::regex_search(text, m, std::regex("[€$]\\s*([0-9]+(?:\\.[0-9]+)?)"))) return m[1].str();
        return std::nullopt;
    }
    if (key_has(key, {"distance"})) return number_before(text, "km");
    if (key_has(key, {"heart"})) return number_before(text, "bpm");
    if (key_has(key, {"calorie"})) return number_before(text, "kcal");
    if (key_has(key, {"minute", "duration"})) return number_before(text, "minutes|minute|min");
    if (key_has(key, {"cuisine", "food"})) return cuisine_in(text);
    if (key_has(key, {"genre"})) {
        std::vector<std::string_view> terms(vocab::kMusicGenres.begin(), vocab::kMusicGenres.end());
        terms.insert(terms.end(), vocab::kScreenGenres.begin(), vocab::kScreenGenres.end());
        return earliest_term(unquoted_lower(text), terms);
    }
    if (key_has(key, {"category"})) return earliest_term(unquoted_lower(text), vocab::kShoppingCategories);
    if (key_has(key, {"workout", "sport", "exercise"}))
        return earliest_term(unquoted_lower(text), vocab::kWorkoutTypes);
    if (key_has(key, {"country"})) {
        std::string hay = unquoted_lower(text);
        size_t best = std::string::npos;
        std::optional<std::string> out;
        for (const auto& c : vocab::kCities) {
            size_t at = std::min(find_word(hay, lower(c.name)), find_word(hay, lower(c.country)));
            if (at < best) {
                best = at;
                out = std::string(c.country);
            }
        }
        return out;
    }
    if (key_has(key, {"city", "destination"})) {
        std::vector<std::string_view> names;
        for (const auto& c : vocab::kCities) names.push_back(c.name);
        return earliest_term(unquoted_lower(text), names);
    }
    if (key_has(key, {"artist", "author", "director", "band", "singer"})) return phrase_after(text, "by");
    if (key_has(key, {"song", "title", "track", "product", "item", "movie", "film", "series", "show", "episode"}))
        return first_quoted(text);
    if (key_has(key, {"venue_type", "place_type"})) return earliest_term(unquoted_lower(text), vocab::kVenueTypes);
    if (key_has(key, {"location", "place", "venue", "restaurant"})) return phrase_after(text, "at");
    if (key_has(key, {"participant", "people", "person", "friend", "attendee", "companion", "with"}))
        return people_in(text, user_info);
    return std::nullopt;
}

ExternalValueGenerator::ExternalValueGenerator(const std::string& url) : endpoint_(url) {}

std::optional<std::string> ExternalValueGenerator::generate(std::string_view key, std::string_view verbalized,
                                                            std::string_view user_info) {
    auto r = endpoint_.post({{"key", key}, {"event", verbalized}, {"user_info", user_info}});
    auto it = r.find("value");
    if (it == r.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) return it->dump();
    return it->get<std::string>();
}

SynonymTable SynonymTable::defaults() {
    SynonymTable t;
    t.add("day", {"start_date"});
    t.add("date", {"start_date"});
    t.add("time", {"start_time"});
    t.add("datetime", {"start_datetime"});
    t.add("participants", {"attendees", "recipients"});
    t.add("people", {"participants", "attendees", "recipients"});
    t.add("location", {"place", "venue"});
    t.add("price", {"amount_spent", "amount", "cost"});
    t.add("amount_spent", {"price", "amount", "cost"});
    t.add("title", {"summary", "subject"});
    return t;
}

void SynonymTable::add(std::string key, std::vector<std::string> event_keys) {
    table_[std::move(key)] = std::move(event_keys);
}

const std::vector<std::string>* SynonymTable::lookup(std::string_view key) const {
    auto it = table_.find(key);
    return it == table_.end() ? nullptr : &it->second;
}

std::optional<Value> parse_typed(std::string_view raw_in, TypeTag tag) {
    auto raw = trim(raw_in);
    if (raw.empty()) return std::nullopt;
    switch (tag) {
        case TypeTag::str: return Value(std::string(raw));
        case TypeTag::int_:
        case TypeTag::float_: {
            static const std::regex re("^(?:[€$]\\s*)?([+-]?[0-9]+(?:\\.[0-9]+)?)\\s*(?:[A-Za-z%€$]+)?$");
            std::cmatch m;
            if (!std::regex_match(raw.data(), raw.data() + raw.size(), m, re)) return std::nullopt;
            double d = 0;
            if (!parse_number(std::string_view(m[1].first, static_cast<size_t>(m[1].length())), d)) {
                std::string s = m[1].str();
                if (s.front() == '+') s.erase(0, 1);
                if (!parse_number(s, d)) return std::nullopt;
            }
            if (tag == TypeTag::float_) return Value(d);
            if (d != static_cast<double>(static_cast<int64_t>(d))) return std::nullopt;
            return Value(static_cast<int64_t>(d));
        }
        case TypeTag::date:
            if (auto d = parse_iso_date(raw)) return Value(*d);
            if (auto dt = parse_iso_datetime(raw)) return Value(date_of(*dt));
            return std::nullopt;
        case TypeTag::time:
            if (auto t = parse_iso_time(raw)) return Value(*t);
            if (auto dt = parse_iso_datetime(raw)) return Value(time_of(*dt));
            return std::nullopt;
        case TypeTag::datetime:
            if (auto dt = parse_iso_datetime(raw)) return Value(*dt);
            if (auto d = parse_iso_date(raw)) return Value(at_midnight(*d));
            return std::nullopt;
        case TypeTag::list: {
            Value::List items;
            size_t from = 0;
            while (from <= raw.size()) {
                size_t comma = raw.find(',', from);
                auto item = trim(raw.substr(from, comma == std::string_view::npos ? raw.npos : comma - from));
                if (!item.empty()) items.emplace_back(std::string(item));
                if (comma == std::string_view::npos) break;
                from = comma + 1;
            }
            if (items.empty()) return std::nullopt;
            return Value(std::move(items));
        }
    }
    return std::nullopt;
}

std::optional<Value> coerce_value(const Value& v, TypeTag tag) {
    using K = Value::Kind;
    if (v.is_null()) return std::nullopt;
    if (v.kind() == K::text) return parse_typed(v.text(), tag);
    switch (tag) {
        case TypeTag::str:
            if (v.is_list()) {
                std::string s;
                for (const auto& m : v.list()) s += (s.empty() ? "" : ", ") + to_text(m);
                return Value(s);
            }
            return Value(to_text(v));
        case TypeTag::int_:
            if (v.kind() == K::integer) return v;
            if (v.kind() == K::real && v.real() == static_cast<double>(static_cast<int64_t>(v.real())))
                return Value(static_cast<int64_t>(v.real()));
            return std::nullopt;
        case TypeTag::float_:
            if (auto d = v.as_double()) return Value(*d);
            return std::nullopt;
        case TypeTag::date:
            if (v.kind() == K::date) return v;
            if (v.kind() == K::datetime) return Value(date_of(v.datetime()));
            return std::nullopt;
        case TypeTag::time:
            if (v.kind() == K::time) return v;
            if (v.kind() == K::datetime) return Value(time_of(v.datetime()));
            return std::nullopt;
        case TypeTag::datetime:
            if (v.kind() == K::datetime) return v;
            if (v.kind() == K::date) return Value(at_midnight(v.date()));
            return std::nullopt;
        case TypeTag::list:
            if (v.is_list()) return v;
            return Value(Value::List{v});
    }
    return std::nullopt;
}

void FrozenMapping::observe(const std::string& event_key) {
    if (state_ != State::observing) return;
    ++seen_;
    if (!event_key.empty()) ++tally_[event_key];
    if (seen_ < window_) return;
    size_t best = 0;
    for (const auto& [k, n] : tally_) {
        if (n > best) {
            best = n;
            frozen_key_ = k;
        }
    }
    if (static_cast<double>(best) + 1e-9 >= threshold_ * static_cast<double>(window_)) {
        state_ = State::frozen;
    } else {
        state_ = State::unfrozen;
        frozen_key_.clear();
    }
}

Extractor::Extractor(ValueGenerator& generator, std::string user_info, SynonymTable synonyms, ExtractOptions options)
    : generator_(generator), user_info_(std::move(user_info)), synonyms_(std::move(synonyms)), options_(options) {}

namespace {

enum class Path : uint8_t { exact, frozen, synonym, generated, miss };

struct Resolved {
    std::optional<Value> value;
    Path path = Path::miss;
    std::string tally_key;  // event key that produced the value, "" otherwise
    bool called_generator = false;
};

std::optional<Value> present(const Event& e, std::string_view key) {
    auto v = e.get(key);
    if (!v || v->is_null()) return std::nullopt;
    return v;
}

// Event key whose text form equals `raw`; "" when none does.
std::string matching_key(const Event& e, std::string_view raw) {
    auto t = trim(raw);
    for (const auto& [k, v] : e.attrs)
        if (!v.is_null() && to_text(v) == t) return k;
    for (auto k : kSpanKeys)
        if (auto v = span_value(e.span, k); v && to_text(*v) == t) return std::string(k);
    return "";
}

}  // namespace

std::vector<Event> Extractor::extract(std::vector<Event> events, const std::vector<std::string>& keys,
                                      const std::vector<TypeTag>& types, ExtractStats* stats) const {
    if (keys.size() != types.size())
        throw Error("ArityMismatch", std::to_string(keys.size()) + " keys but " + std::to_string(types.size()) +
                                         " types");
    std::vector<FrozenMapping> maps;
    for (size_t j = 0; j < keys.size(); ++j) maps.emplace_back(options_.window, options_.threshold);

    auto resolve = [&](const Event& e, size_t j) {
        Resolved r;
        const std::string& key = keys[j];
        const FrozenMapping& fm = maps[j];
        if (auto v = present(e, key)) {
            if ((r.value = coerce_value(*v, types[j]))) {
                r.path = Path::exact;
                r.tally_key = key;
                return r;
            }
        }
        if (options_.freezing && fm.state() == FrozenMapping::State::frozen) {
            if (auto v = present(e, fm.frozen_key())) {
                if ((r.value = coerce_value(*v, types[j]))) {
                    r.path = Path::frozen;
                    return r;
                }
            }
        }
        if (const auto* syn = synonyms_.lookup(key)) {
            for (const auto& sk : *syn) {
                auto v = present(e, sk);
                if (!v) continue;
                if ((r.value = coerce_value(*v, types[j]))) {
                    r.path = Path::synonym;
                    r.tally_key = sk;
                    return r;
                }
                break;
            }
        }
        r.called_generator = true;
        if (auto raw = generator_.generate(key, verbalize_event(e), user_info_)) {
            if ((r.value = parse_typed(*raw, types[j]))) {
                r.path = Path::generated;
                r.tally_key = matching_key(e, *raw);
                return r;
            }
        }
        r.value.reset();
        r.path = Path::miss;
        return r;
    };

    std::vector<Path> paths(events.size() * keys.size(), Path::miss);
    std::vector<char> calls(events.size() * keys.size(), 0);
    auto apply = [&](Event& e, size_t i, size_t j, Resolved&& r) {
        paths[i * keys.size() + j] = r.path;
        calls[i * keys.size() + j] = r.called_generator;
        if (r.path == Path::miss) {
            e.attrs[keys[j]] = Value();
            e.extraction_miss = true;
            return;
        }
        // An exact hit already of the requested type stays untouched (span keys stay virtual).
        if (r.path == Path::exact && *present(e, keys[j]) == *r.value) return;
        e.attrs[keys[j]] = std::move(*r.value);
    };

    auto observing = [&] {
        if (!options_.freezing) return false;
        return std::any_of(maps.begin(), maps.end(),
                           [](const FrozenMapping& m) { return m.state() == FrozenMapping::State::observing; });
    };

    // Window phase: strictly in input order so the first `window` inputs decide.
    size_t i = 0;
    for (; i < events.size() && observing(); ++i) {
        for (size_t j = 0; j < keys.size(); ++j) {
            Resolved r = resolve(events[i], j);
            if (options_.freezing && maps[j].state() == FrozenMapping::State::observing) {
                maps[j].observe(r.tally_key);
                if (maps[j].state() == FrozenMapping::State::frozen && stats)
                    stats->froze_after[keys[j]] = maps[j].seen();
            }
            apply(events[i], i, j, std::move(r));
        }
    }

    std::exception_ptr failure;
    const auto n = static_cast<int64_t>(events.size());
#pragma omp parallel for schedule(dynamic, 32)
    for (int64_t k = static_cast<int64_t>(i); k < n; ++k) {
        try {
            auto idx = static_cast<size_t>(k);
            for (size_t j = 0; j < keys.size(); ++j) apply(events[idx], idx, j, resolve(events[idx], j));
        } catch (...) {
#pragma omp critical(optree_extract_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    if (stats) {
        for (size_t k = 0; k < paths.size(); ++k) {
            stats->generator_calls += calls[k];
            switch (paths[k]) {
                case Path::exact: ++stats->exact; break;
                case Path::frozen: ++stats->frozen; break;
                case Path::synonym: ++stats->synonym; break;
                case Path::generated: ++stats->generated; break;
                case Path::miss: ++stats->misses; break;
            }
        }
    }
    return events;
}

}  // namespace optree
