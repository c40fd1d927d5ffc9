#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "optree/value.hpp"

namespace optree {

enum class Source : uint8_t {
    calendar,
    mail,
    social_media,
    note,
    workout,
    music_stream,
    movie_stream,
    tvseries_stream,
    online_purchase,
};

inline constexpr size_t kSourceCount = 9;
inline constexpr std::array<Source, kSourceCount> kAllSources = {
    Source::calendar,     Source::mail,         Source::social_media,
    Source::note,         Source::workout,      Source::music_stream,
    Source::movie_stream, Source::tvseries_stream, Source::online_purchase};

std::string_view source_name(Source s) noexcept;
std::optional<Source> parse_source(std::string_view name) noexcept;
inline uint16_t source_bit(Source s) noexcept { return static_cast<uint16_t>(1u << static_cast<unsigned>(s)); }

/// Closed interval [start, end] on the naive local time line.
struct TimeSpan {
    DateTime start;
    DateTime end;

    bool valid() const noexcept { return start <= end; }
    bool overlaps(const TimeSpan& o) const noexcept { return start <= o.end && o.start <= end; }
    int64_t length() const noexcept { return end.seconds - start.seconds; }
    bool operator==(const TimeSpan&) const = default;
};

using Attrs = std::map<std::string, Value, std::less<>>;

/// Keys derived from the timespan; readable on every event without being stored.
inline constexpr std::array<std::string_view, 6> kSpanKeys = {
    "start_date", "start_time", "end_date", "end_time", "start_datetime", "end_datetime"};

bool is_builtin_key(std::string_view key) noexcept;
std::optional<Value> span_value(const TimeSpan& span, std::string_view key);

/// Lowercases and maps spaces to underscores.
std::string normalize_key(std::string_view raw);
/// Non-empty, lowercase snake_case ([a-z0-9_]).
bool is_valid_key(std::string_view key) noexcept;

struct Event {
    std::string id;
    Source source = Source::note;
    TimeSpan span;
    Attrs attrs;
    /// Ids of the store events this event was derived from.
    std::vector<std::string> provenance;
    /// Every source merged into this event (one bit for raw events).
    uint16_t source_mask = 0;
    bool extraction_miss = false;

    /// Builds a raw store event; inserts the "source" attribute and seeds provenance.
    static Event make(std::string id, Source source, TimeSpan span, Attrs attrs = {});

    /// Attribute lookup that falls back to the span-derived keys.
    std::optional<Value> get(std::string_view key) const;
    bool has(std::string_view key) const;
};

/// "key1: v1 | key2: v2" over attrs in key order; null attrs are omitted.
std::string verbalize_event(const Event& e);

/// Immutable, time-ordered collection of events.
class EventStore {
public:
    EventStore() = default;

    std::span<const Event> events() const noexcept { return events_; }
    size_t size() const noexcept { return events_.size(); }
    const Event& at(size_t i) const { return events_.at(i); }
    const Event* find(std::string_view id) const;
    std::optional<size_t> index_of(std::string_view id) const;

    /// Cached verbalization per event, aligned with events().
    std::span<const std::string> verbalizations() const noexcept { return texts_; }
    std::span<const size_t> source_index(Source s) const noexcept {
        return by_source_[static_cast<size_t>(s)];
    }

private:
    friend class StoreBuilder;
    std::vector<Event> events_;
    std::vector<std::string> texts_;
    std::array<std::vector<size_t>, kSourceCount> by_source_;
    std::unordered_map<std::string, size_t> id_index_;
};

/// Single-writer staging buffer; finalize() sorts by (start, id) and freezes.
class StoreBuilder {
public:
    /// Returns false (and counts a skip) when the event violates store invariants.
    bool add(Event e);
    void note_skip(std::string reason);

    size_t staged() const noexcept { return staged_.size(); }
    size_t skipped() const noexcept { return skip_reasons_.size(); }
    const std::vector<std::string>& skip_reasons() const noexcept { return skip_reasons_; }
    /// Next generated id for records that do not carry one.
    std::string next_id();

    /// Throws Error("EmptyStore") when nothing was staged.
    EventStore finalize();

private:
    std::vector<Event> staged_;
    std::vector<std::string> skip_reasons_;
    size_t id_counter_ = 0;
};

std::vector<Event> events_by_source(const EventStore& store, Source source);

}  // namespace optree
