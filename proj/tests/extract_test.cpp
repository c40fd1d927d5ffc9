#include <gtest/gtest.h>

#include <atomic>
#include <mutex>

#include "optree/extract.hpp"
#include "support/event_builders.hpp"

using namespace optree;
using namespace optree::testing;

namespace {

class CountingGenerator : public ValueGenerator {
public:
    std::optional<std::string> generate(std::string_view key, std::string_view text,
                                        std::string_view info) override {
        ++calls;
        std::lock_guard lock(mu);
        seen.emplace_back(std::string(key), std::string(text));
        return inner.generate(key, text, info);
    }
    std::atomic<size_t> calls{0};
    std::mutex mu;
    std::vector<std::pair<std::string, std::string>> seen;
    RuleValueGenerator inner;
};

std::vector<Event> dinners(size_t n, size_t tagged) {
    static const char* cuisines[] = {"Italian", "Greek", "Thai"};
    std::vector<Event> out;
    for (size_t i = 0; i < n; ++i) {
        Attrs a{{"text", Value("dinner number " + std::to_string(i))}};
        if (i < tagged || i >= 50) a["kind"] = Value(cuisines[i % 3]);
        out.push_back(point("d" + std::to_string(i), Source::note, "2024-01-01T19:00:00", a));
    }
    return out;
}

}  // namespace

TEST(ParseTyped, Examples) {
    EXPECT_EQ(parse_typed("2022-03-14", TypeTag::date), Value(make_date(2022, 3, 14)));
    EXPECT_EQ(parse_typed("5.99 EUR", TypeTag::float_), Value(5.99));
    EXPECT_EQ(parse_typed("$12", TypeTag::int_), Value(12));
    EXPECT_EQ(parse_typed("7.0", TypeTag::int_), Value(7));
    EXPECT_FALSE(parse_typed("5.99", TypeTag::int_));
    EXPECT_FALSE(parse_typed("not a date", TypeTag::date));
    EXPECT_FALSE(parse_typed("   ", TypeTag::str));
    EXPECT_EQ(parse_typed("2022-03-14T10:30:00", TypeTag::time), Value(TimeOfDay{10 * 3600 + 1800}));
    EXPECT_EQ(parse_typed("2022-03-14", TypeTag::datetime), Value(make_datetime(2022, 3, 14)));
    EXPECT_EQ(parse_typed("Ana, Bo ,", TypeTag::list), Value(Value::List{Value("Ana"), Value("Bo")}));
}

TEST(CoerceValue, NarrowsAndWidens) {
    EXPECT_EQ(coerce_value(Value(make_datetime(2024, 8, 19, 9)), TypeTag::date), Value(make_date(2024, 8, 19)));
    EXPECT_EQ(coerce_value(Value(3), TypeTag::float_), Value(3.0));
    EXPECT_EQ(coerce_value(Value(Value::List{Value("a"), Value("b")}), TypeTag::str), Value("a, b"));
    EXPECT_EQ(coerce_value(Value("x"), TypeTag::list), Value(Value::List{Value("x")}));
    EXPECT_FALSE(coerce_value(Value(), TypeTag::str));
}

TEST(RuleGenerator, KeyFamilies) {
    RuleValueGenerator g;
    const std::string info = "mother: Lucia Hern\xc3\xa1ndez\nfather: Marco Hern\xc3\xa1ndez\nfriend: Robert Smith\n";
    EXPECT_EQ(g.generate("cuisine", "subject: New oven | body: Finally tried the pizza oven tonight", info),
              "Italian");
    EXPECT_EQ(g.generate("price", "text: Bought \"Desk Lamp\" for 24.99 EUR", info), "24.99");
    EXPECT_EQ(g.generate("artist", "text: Listening to \"Hello\" by Adele Adkins (pop) #music", info),
              "Adele Adkins");
    EXPECT_EQ(g.generate("genre", "text: Listening to \"Hello\" by Adele Adkins (pop) #music", info), "pop");
    EXPECT_EQ(g.generate("song", "text: Listening to \"Hello\" by Adele Adkins (pop)", info), "Hello");
    EXPECT_EQ(g.generate("location", "summary: Lunch with Mum and Dad at The Parthenon", info), "The Parthenon");
    EXPECT_EQ(g.generate("participants", "summary: Lunch with Mum and Dad at The Parthenon", info),
              "Lucia Hern\xc3\xa1ndez, Marco Hern\xc3\xa1ndez");
    EXPECT_EQ(g.generate("distance_km", "text: 10.5 km run done, avg 150 bpm", info), "10.5");
    EXPECT_EQ(g.generate("max_heart_rate", "text: 10.5 km run done, max 171 bpm", info), "171");
    EXPECT_EQ(g.generate("duration", "text: 117-minute weight training session", info), "117");
    EXPECT_EQ(g.generate("heart_rate", "text: Heart rate: 150, felt great", info), "150");
    EXPECT_EQ(g.generate("city", "text: Landed in Denpasar for two weeks", info), "Denpasar");
    EXPECT_EQ(g.generate("country", "text: Landed in Denpasar for two weeks", info), "Indonesia");
    EXPECT_FALSE(g.generate("cuisine", "text: went for a walk", info));
    EXPECT_FALSE(g.generate("participants", "text: alone at home", info));
}

TEST(Extract, DateViaSynonym) {
    RuleValueGenerator g;
    Extractor x(g);
    std::vector<Event> in = {ev("w", Source::workout, "2019-01-03T09:00:00", "2019-01-03T10:00:00",
                                {{"workout_type", Value("running")}})};
    ExtractStats st;
    auto out = x.extract(in, {"date"}, {TypeTag::date}, &st);
    EXPECT_EQ(out[0].attrs.at("date"), Value(make_date(2019, 1, 3)));
    EXPECT_EQ(st.synonym, 1u);
    EXPECT_FALSE(out[0].extraction_miss);
}

TEST(Extract, CuisineGeneratedFromMail) {
    RuleValueGenerator g;
    Extractor x(g);
    std::vector<Event> in = {point("m", Source::mail, "2023-10-12T18:00:00",
                                   {{"subject", Value("Saturday")},
                                    {"body", Value("Bring the wine, the pizza oven is finally fixed!")}})};
    auto out = x.extract(in, {"cuisine"}, {TypeTag::str});
    EXPECT_EQ(out[0].attrs.at("cuisine"), Value("Italian"));
}

TEST(Extract, MissesBecomeNullAndFlagged) {
    RuleValueGenerator g;
    Extractor x(g);
    std::vector<Event> in = {point("a", Source::note, "2024-01-01T10:00:00", {{"text", Value("hello")}}),
                             point("b", Source::note, "2024-01-01T11:00:00", {{"price", Value("3 EUR")}})};
    ExtractStats st;
    auto out = x.extract(in, {"price"}, {TypeTag::float_}, &st);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].id, "a");
    EXPECT_TRUE(out[0].attrs.at("price").is_null());
    EXPECT_TRUE(out[0].extraction_miss);
    EXPECT_EQ(out[0].attrs.at("text"), Value("hello"));
    EXPECT_EQ(out[1].attrs.at("price"), Value(3.0));
    EXPECT_FALSE(out[1].extraction_miss);
    EXPECT_EQ(st.misses, 1u);
    EXPECT_THROW(x.extract(in, {"a", "b"}, {TypeTag::str}), Error);
}

TEST(Extract, PreservesOtherAttrsAndIds) {
    RuleValueGenerator g;
    Extractor x(g);
    auto in = dinners(120, 50);
    auto out = x.extract(in, {"cuisine", "start_date"}, {TypeTag::str, TypeTag::date});
    ASSERT_EQ(out.size(), in.size());
    for (size_t i = 0; i < in.size(); ++i) {
        EXPECT_EQ(out[i].id, in[i].id);
        for (const auto& [k, v] : in[i].attrs) EXPECT_EQ(out[i].attrs.at(k), v);
        EXPECT_EQ(out[i].attrs.count("start_date"), 0u);  // span keys stay virtual
    }
}

TEST(FrozenMapping, FreezesAfterWindowAndStopsCallingGenerator) {
    CountingGenerator g;
    Extractor x(g);
    auto in = dinners(1050, 50);
    ExtractStats st;
    auto out = x.extract(in, {"cuisine"}, {TypeTag::str}, &st);
    EXPECT_EQ(st.froze_after.at("cuisine"), 50u);
    EXPECT_EQ(g.calls.load(), 50u);
    EXPECT_EQ(st.frozen, 1000u);
    for (const auto& e : out) EXPECT_EQ(e.attrs.at("cuisine"), e.attrs.at("kind"));
}

TEST(FrozenMapping, BelowBarStaysUnfrozen) {
    CountingGenerator g;
    Extractor x(g);
    auto in = dinners(200, 34);  // 34 of the first 50 agree: 68% < 70%
    ExtractStats st;
    x.extract(in, {"cuisine"}, {TypeTag::str}, &st);
    EXPECT_EQ(st.froze_after.count("cuisine"), 0u);
    EXPECT_EQ(st.frozen, 0u);
    EXPECT_EQ(g.calls.load(), 200u);

    CountingGenerator g2;
    Extractor x2(g2);
    ExtractStats st2;
    x2.extract(dinners(200, 35), {"cuisine"}, {TypeTag::str}, &st2);
    EXPECT_EQ(st2.froze_after.at("cuisine"), 50u);
}

TEST(FrozenMapping, StateMachine) {
    FrozenMapping m(4, 0.75);
    m.observe("a");
    m.observe("b");
    m.observe("a");
    EXPECT_EQ(m.state(), FrozenMapping::State::observing);
    m.observe("a");
    EXPECT_EQ(m.state(), FrozenMapping::State::frozen);
    EXPECT_EQ(m.frozen_key(), "a");
    m.observe("b");
    EXPECT_EQ(m.seen(), 4u);
    FrozenMapping u(2, 0.7);
    u.observe("");
    u.observe("a");
    EXPECT_EQ(u.state(), FrozenMapping::State::unfrozen);
}

TEST(FrozenMapping, DisablingFreezingChangesNothingWhenKeyUniversal) {
    RuleValueGenerator g;
    ExtractOptions off;
    off.freezing = false;
    Extractor on_x(g), off_x(g, {}, SynonymTable::defaults(), off);
    auto in = dinners(1050, 50);
    auto a = on_x.extract(in, {"cuisine"}, {TypeTag::str});
    auto b = off_x.extract(in, {"cuisine"}, {TypeTag::str});
    for (size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].attrs, b[i].attrs);
        ASSERT_EQ(a[i].extraction_miss, b[i].extraction_miss);
    }
}

TEST(Extract, GeneratorAtMostOncePerEventKey) {
    CountingGenerator g;
    ExtractOptions off;
    off.freezing = false;
    Extractor x(g, {}, SynonymTable::defaults(), off);
    std::vector<Event> in;
    for (int i = 0; i < 300; ++i)
        in.push_back(point("n" + std::to_string(i), Source::note, "2024-01-01T10:00:00",
                           {{"text", Value("note " + std::to_string(i) + " about sushi")}}));
    x.extract(in, {"cuisine", "location", "price"}, {TypeTag::str, TypeTag::str, TypeTag::float_});
    std::set<std::pair<std::string, std::string>> uniq(g.seen.begin(), g.seen.end());
    EXPECT_EQ(uniq.size(), g.seen.size());
    EXPECT_EQ(g.seen.size(), 900u);
}

TEST(Extract, Deterministic) {
    RuleValueGenerator g;
    Extractor x(g);
    auto in = dinners(400, 20);
    auto a = x.extract(in, {"cuisine", "kind"}, {TypeTag::str, TypeTag::list});
    auto b = x.extract(in, {"cuisine", "kind"}, {TypeTag::str, TypeTag::list});
    for (size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].attrs, b[i].attrs);
        ASSERT_EQ(a[i].extraction_miss, b[i].extraction_miss);
    }
}
