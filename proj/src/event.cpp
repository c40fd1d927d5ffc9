#include "optree/event.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace optree {

namespace {
constexpr std::array<std::string_view, kSourceCount> kSourceNames = {
    "calendar",     "mail",         "social_media",    "note",           "workout",
    "music_stream", "movie_stream", "tvseries_stream", "online_purchase"};
}

std::string_view source_name(Source s) noexcept { return kSourceNames[static_cast<size_t>(s)]; }

std::optional<Source> parse_source(std::string_view name) noexcept {
    for (size_t i = 0; i < kSourceCount; ++i)
        if (kSourceNames[i] == name) return static_cast<Source>(i);
    return std::nullopt;
}

bool is_builtin_key(std::string_view key) noexcept {
    if (key == "source") return true;
    return std::find(kSpanKeys.begin(), kSpanKeys.end(), key) != kSpanKeys.end();
}

std::optional<Value> span_value(const TimeSpan& span, std::string_view key) {
    if (key == "start_date") return Value(date_of(span.start));
    if (key == "start_time") return Value(time_of(span.start));
    if (key == "end_date") return Value(date_of(span.end));
    if (key == "end_time") return Value(time_of(span.end));
    if (key == "start_datetime") return Value(span.start);
    if (key == "end_datetime") return Value(span.end);
    return std::nullopt;
}

std::string normalize_key(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        if (c == ' ') out += '_';
        else out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

bool is_valid_key(std::string_view key) noexcept {
    if (key.empty()) return false;
    return std::all_of(key.begin(), key.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    });
}

Event Event::make(std::string id, Source source, TimeSpan span, Attrs attrs) {
    Event e;
    e.id = std::move(id);
    e.source = source;
    e.span = span;
    e.attrs = std::move(attrs);
    e.attrs.insert_or_assign("source", Value(std::string(source_name(source))));
    e.provenance = {e.id};
    e.source_mask = source_bit(source);
    return e;
}

std::optional<Value> Event::get(std::string_view key) const {
    if (auto it = attrs.find(key); it != attrs.end()) return it->second;
    return span_value(span, key);
}

bool Event::has(std::string_view key) const {
    return attrs.find(key) != attrs.end() || span_value(span, key).has_value();
}

std::string verbalize_event(const Event& e) {
    std::string out;
    for (const auto& [key, value] : e.attrs) {
        if (value.is_null()) continue;
        if (!out.empty()) out += " | ";
        out += key;
        out += ": ";
        out += to_text(value);
    }
    return out;
}

const Event* EventStore::find(std::string_view id) const {
    auto it = id_index_.find(std::string(id));
    return it == id_index_.end() ? nullptr : &events_[it->second];
}

std::optional<size_t> EventStore::index_of(std::string_view id) const {
    auto it = id_index_.find(std::string(id));
    if (it == id_index_.end()) return std::nullopt;
    return it->second;
}

bool StoreBuilder::add(Event e) {
    if (!e.span.valid()) {
        note_skip(e.id + ": start after end");
        return false;
    }
    if (e.id.empty()) e.id = next_id();
    for (const auto& [key, value] : e.attrs) {
        if (!is_valid_key(key)) {
            note_skip(e.id + ": invalid key '" + key + "'");
            return false;
        }
    }
    auto src = e.attrs.find("source");
    if (src == e.attrs.end() || src->second != Value(std::string(source_name(e.source)))) {
        note_skip(e.id + ": source attribute does not match source");
        return false;
    }
    if (e.provenance.empty()) e.provenance = {e.id};
    if (e.source_mask == 0) e.source_mask = source_bit(e.source);
    staged_.push_back(std::move(e));
    return true;
}

void StoreBuilder::note_skip(std::string reason) { skip_reasons_.push_back(std::move(reason)); }

std::string StoreBuilder::next_id() {
    char buf[32];
    std::snprintf(buf, sizeof buf, "ev%06zu", ++id_counter_);
    return buf;
}

EventStore StoreBuilder::finalize() {
    if (staged_.empty()) throw Error("EmptyStore", "finalize called with zero events");
    EventStore store;
    std::stable_sort(staged_.begin(), staged_.end(), [](const Event& a, const Event& b) {
        if (a.span.start != b.span.start) return a.span.start < b.span.start;
        return a.id < b.id;
    });
    store.events_.reserve(staged_.size());
    for (auto& e : staged_) {
        if (store.id_index_.count(e.id)) {
            note_skip(e.id + ": duplicate id");
            continue;
        }
        store.id_index_.emplace(e.id, store.events_.size());
        store.events_.push_back(std::move(e));
    }
    staged_.clear();
    store.texts_.reserve(store.events_.size());
    for (size_t i = 0; i < store.events_.size(); ++i) {
        store.texts_.push_back(verbalize_event(store.events_[i]));
        store.by_source_[static_cast<size_t>(store.events_[i].source)].push_back(i);
    }
    return store;
}

std::vector<Event> events_by_source(const EventStore& store, Source source) {
    std::vector<Event> out;
    for (size_t i : store.source_index(source)) out.push_back(store.at(i));
    return out;
}

}  // namespace optree
