#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "optree/event.hpp"
#include "optree/plan.hpp"
#include "optree/plugin_client.hpp"

namespace optree {

/// Produces a raw value for `key` from an event's verbalization, or nullopt.
/// Implementations must be deterministic and safe to call concurrently.
class ValueGenerator {
public:
    virtual ~ValueGenerator() = default;
    virtual std::optional<std::string> generate(std::string_view key, std::string_view verbalized,
                                                std::string_view user_info) = 0;
};

/// Keyword and pattern rules per key family:
///   price/amount/cost/spent  number before a currency (EUR, USD, €, $)
///   distance                 number before "km"
///   heart                    number before "bpm"
///   calorie                  number before "kcal"
///   minute/duration          number before "minute(s)"/"min"
///   cuisine                  cuisine name, else a known dish
///   genre/category/workout   first bundled term present outside quotes
///   city/destination/country bundled city (or its country)
///   artist/author/director   capitalized phrase after "by"
///   song/title/product/...   first double-quoted span
///   venue_type/place_type    first bundled venue kind (restaurant, cafe, ...)
///   location/place/venue     capitalized phrase after "at"
///   participants/people/...  user_info names present in the text
/// Any key also matches a literal "<key words>: <value>" fragment first.
class RuleValueGenerator : public ValueGenerator {
public:
    std::optional<std::string> generate(std::string_view key, std::string_view verbalized,
                                        std::string_view user_info) override;
};

/// HTTP plug-in: POST {key, event, user_info} -> {value} (null when absent).
class ExternalValueGenerator : public ValueGenerator {
public:
    explicit ExternalValueGenerator(const std::string& url);
    std::optional<std::string> generate(std::string_view key, std::string_view verbalized,
                                        std::string_view user_info) override;

private:
    JsonEndpoint endpoint_;
};

/// Requested key -> candidate event keys; the first present key wins.
class SynonymTable {
public:
    SynonymTable() = default;
    static SynonymTable defaults();
    void add(std::string key, std::vector<std::string> event_keys);
    const std::vector<std::string>* lookup(std::string_view key) const;

private:
    std::map<std::string, std::vector<std::string>, std::less<>> table_;
};

/// ISO for calendar tags (a datetime narrows to its date or time, a date
/// widens to midnight); numbers tolerate a currency or unit prefix/suffix;
/// lists split on commas; empty input is absent.
std::optional<Value> parse_typed(std::string_view raw, TypeTag tag);
/// Coerces an already typed value to `tag`; nullopt when impossible.
std::optional<Value> coerce_value(const Value& v, TypeTag tag);

/// Per requested key: observing -> frozen(event key) | unfrozen.
class FrozenMapping {
public:
    enum class State { observing, frozen, unfrozen };

    FrozenMapping(size_t window = 50, double threshold = 0.7) : window_(window), threshold_(threshold) {}

    /// Records which event key resolved one input; an empty key means the
    /// value matched no event key (or nothing was extracted).
    void observe(const std::string& event_key);

    State state() const noexcept { return state_; }
    const std::string& frozen_key() const noexcept { return frozen_key_; }
    size_t seen() const noexcept { return seen_; }

private:
    size_t window_;
    double threshold_;
    State state_ = State::observing;
    std::map<std::string, size_t> tally_;
    size_t seen_ = 0;
    std::string frozen_key_;
};

struct ExtractOptions {
    bool freezing = true;
    size_t window = 50;
    double threshold = 0.7;
};

struct ExtractStats {
    size_t exact = 0;
    size_t frozen = 0;
    size_t synonym = 0;
    size_t generated = 0;
    size_t generator_calls = 0;
    size_t misses = 0;
    /// Per key: inputs observed when the mapping froze (0 when it did not).
    std::map<std::string, size_t> froze_after;
};

/// The EXTRACT operator. Resolution order per event and key: exact key,
/// frozen mapping, synonym table, generator. Misses become null and set the
/// event's extraction_miss flag. Frozen mappings live for one extract() call.
class Extractor {
public:
    Extractor(ValueGenerator& generator, std::string user_info = {}, SynonymTable synonyms = SynonymTable::defaults(),
              ExtractOptions options = {});

    /// Throws Error("ArityMismatch") when keys and types differ in length.
    std::vector<Event> extract(std::vector<Event> events, const std::vector<std::string>& keys,
                               const std::vector<TypeTag>& types, ExtractStats* stats = nullptr) const;

private:
    ValueGenerator& generator_;
    std::string user_info_;
    SynonymTable synonyms_;
    ExtractOptions options_;
};

}  // namespace optree
