#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "optree/exec.hpp"
#include "support/event_builders.hpp"
#include "support/oracles.hpp"

using namespace optree;
using namespace optree::testing;

namespace {

const DateTime kClock = at("2024-08-20T12:00:00");

Expr pred(std::string_view text) { return parse_predicate(text); }
Expr cond(std::string_view text) { return parse_predicate(text, true); }

}  // namespace

// ---------------------------------------------------------------- predicates

TEST(Predicate, NullOperandMakesComparisonFalse) {
    PredicateEvaluator ev(kClock);
    Event e = point("e", Source::calendar, "2024-01-01T10:00:00", {{"k", Value()}});
    EXPECT_FALSE(ev.test(pred(R"(attr["k"] == 3)"), e));
    EXPECT_FALSE(ev.test(pred(R"(attr["k"] != 3)"), e));
    EXPECT_FALSE(ev.test(pred(R"(attr["missing"] < 3)"), e));
    EXPECT_TRUE(ev.test(pred(R"(not attr["k"] == 3)"), e));
}

TEST(Predicate, SubstringOnLoweredLocation) {
    PredicateEvaluator ev(kClock);
    Event park = point("a", Source::workout, "2024-01-01T10:00:00", {{"location", Value("Central Park")}});
    Event gym = point("b", Source::workout, "2024-01-01T10:00:00", {{"location", Value("City Gym")}});
    Expr p = pred(R"("park" in attr["location"].lower())");
    EXPECT_TRUE(ev.test(p, park));
    EXPECT_FALSE(ev.test(p, gym));
}

TEST(Predicate, CalendarArithmeticAgainstClock) {
    PredicateEvaluator ev(kClock);
    Expr p = pred(R"(attr["start_date"] >= date.today() - relativedelta(months=6))");
    EXPECT_TRUE(ev.test(p, point("in", Source::online_purchase, "2024-02-20T09:00:00")));
    EXPECT_FALSE(ev.test(p, point("out", Source::online_purchase, "2024-02-19T23:00:00")));
}

TEST(Predicate, WeekdayAccessorAndYearMonth) {
    PredicateEvaluator ev(kClock);
    Event e = point("e", Source::calendar, "2024-08-19T08:00:00");
    EXPECT_TRUE(ev.test(pred(R"(attr["start_date"].year == 2024 and attr["start_date"].month == 8)"), e));
    EXPECT_EQ(map_function("weekday", e), Value("Monday"));
}

TEST(Predicate, IllTypedOrderingRaises) {
    PredicateEvaluator ev(kClock);
    Event e = point("e", Source::calendar, "2024-08-19T08:00:00", {{"k", Value("abc")}});
    try {
        ev.test(pred(R"(attr["k"] < 3)"), e);
        FAIL() << "expected PredicateTypeError";
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), "PredicateTypeError");
    }
}

// ---------------------------------------------------------------------- join

TEST(Join, OverlapConditionOnHandmadePairs) {
    std::vector<Event> runs = {ev("r1", Source::workout, "2024-05-01T07:00:00", "2024-05-01T08:00:00"),
                               ev("r2", Source::workout, "2024-05-02T07:00:00", "2024-05-02T08:00:00")};
    std::vector<Event> songs = {ev("s1", Source::music_stream, "2024-05-01T07:30:00", "2024-05-01T07:34:00"),
                                ev("s2", Source::music_stream, "2024-05-02T09:00:00", "2024-05-02T09:03:00")};
    PredicateEvaluator e(kClock);
    auto out = join_events(
        runs, songs,
        cond("i1.start_datetime <= i2.end_datetime and i2.start_datetime <= i1.end_datetime"), e);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].id, "r1|s1");
    EXPECT_EQ(out[0].span.start, at("2024-05-01T07:00:00"));
    EXPECT_EQ(out[0].span.end, at("2024-05-01T08:00:00"));
    EXPECT_EQ(out[0].provenance, (std::vector<std::string>{"r1", "s1"}));
    // Right-side collisions are suffixed.
    EXPECT_EQ(out[0].attrs.at("source"), Value("workout"));
    EXPECT_EQ(out[0].attrs.at("source__r"), Value("music_stream"));
    EXPECT_EQ(out[0].attrs.at("start_datetime__r"), Value(at("2024-05-01T07:30:00")));
}

TEST(Join, EmptySideGivesEmpty) {
    std::mt19937_64 rng(3);
    auto l = random_events(rng, 5, "l");
    PredicateEvaluator e(kClock);
    EXPECT_TRUE(join_events(l, {}, cond("i1.k == i2.k"), e).empty());
    EXPECT_TRUE(join_events({}, l, cond("i1.k == i2.k"), e).empty());
}

TEST(Join, MatchesNestedLoopOracleOnRandomInstances) {
    const std::vector<std::string> conditions = {
        "i1.k == i2.k",
        "i2.k == i1.k and i1.tag == i2.tag",
        "i1.k < i2.k",
        "i1.k <= i2.k and i1.start_datetime <= i2.end_datetime",
        "i2.k > i1.k",
        "i1.k >= i2.k",
        "i1.start_datetime <= i2.end_datetime and i2.start_datetime <= i1.end_datetime",
        "i2.start_datetime >= i1.end_datetime and i2.start_date == i1.start_date",
        "i1.end_datetime < i2.start_datetime",
        "i1.k != i2.k",
        "i1.k > i2.k or i1.tag == i2.tag",
        "i1.start_date == i2.start_date",
        "i2.start_datetime >= i1.start_datetime and i2.start_datetime <= i1.end_datetime",
        "i1.k <= i2.k and i1.k >= i2.k and i1.tag == i2.tag",
        "i2.k > i1.k and i2.k < i1.k",
    };
    std::mt19937_64 rng(20240819);
    std::uniform_int_distribution<size_t> sz(0, 30), pick(0, conditions.size() - 1);
    PredicateEvaluator e(kClock);
    for (int round = 0; round < 1200; ++round) {
        auto l = random_events(rng, sz(rng), "l");
        auto r = random_events(rng, sz(rng), "r");
        Expr c = cond(conditions[pick(rng)]);
        auto oracle = ids_of(join_nested_loop(l, r, c, e));
        ASSERT_EQ(ids_of(join_events(l, r, c, e, true)), oracle) << render_expr(c) << " round " << round;
        ASSERT_EQ(ids_of(join_events(l, r, c, e, false)), oracle) << render_expr(c) << " round " << round;
    }
}

TEST(Join, RaisingLeadingConjunctIsNotSkipped) {
    // The nested loop evaluates the ill-typed first conjunct on every pair, so
    // the probed join must raise too even though no k values match.
    std::vector<Event> l = {point("l1", Source::calendar, "2024-01-01T08:00:00",
                                  {{"k", Value(int64_t{1})}, {"tag", Value("x")}})};
    std::vector<Event> r = {point("r1", Source::calendar, "2024-01-01T09:00:00", {{"k", Value(int64_t{2})}})};
    PredicateEvaluator e(kClock);
    for (const char* c : {"i1.tag < 3 and i1.k == i2.k", "i1.k == i2.k and i1.tag < 3"}) {
        bool nested_raises = false, probed_raises = false;
        try {
            join_nested_loop(l, r, cond(c), e);
        } catch (const Error&) {
            nested_raises = true;
        }
        try {
            join_events(l, r, cond(c), e);
        } catch (const Error&) {
            probed_raises = true;
        }
        EXPECT_EQ(probed_raises, nested_raises) << c;
    }
}

TEST(Join, OrderIsLeftStartThenRightStart) {
    std::mt19937_64 rng(9);
    PredicateEvaluator e(kClock);
    for (int round = 0; round < 50; ++round) {
        auto l = random_events(rng, 20, "l");
        auto r = random_events(rng, 20, "r");
        auto out = join_events(l, r, cond("i1.tag == i2.tag"), e);
        for (size_t i = 1; i < out.size(); ++i) {
            const Event& a = out[i - 1];
            const Event& b = out[i];
            EXPECT_LE(a.attrs.at("start_datetime").datetime().seconds,
                      b.attrs.at("start_datetime").datetime().seconds);
        }
    }
}

// ------------------------------------------------------------------ group_by

TEST(GroupBy, TwoDatesTwoGroups) {
    std::vector<Event> evs = {point("a", Source::calendar, "2024-01-01T08:00:00"),
                              point("b", Source::calendar, "2024-01-01T09:00:00"),
                              point("c", Source::calendar, "2024-01-02T08:00:00"),
                              point("d", Source::calendar, "2024-01-02T09:00:00")};
    auto g = group_events(evs, {"start_date"});
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(g[0].members.size(), 2u);
    EXPECT_EQ(g[1].members.size(), 2u);
}

TEST(GroupBy, MonthAndYearAreDistinct) {
    std::vector<Event> evs = {point("a", Source::calendar, "2021-01-10T08:00:00"),
                              point("b", Source::calendar, "2022-01-10T08:00:00"),
                              point("c", Source::calendar, "2021-01-20T08:00:00")};
    for (auto& e : evs) {
        e.attrs["month"] = map_function("month", e);
        e.attrs["year"] = map_function("year", e);
    }
    auto g = group_events(evs, {"month", "year"});
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(ids_of(g[0].members), (std::vector<std::string>{"a", "c"}));
}

TEST(GroupBy, MatchesNaivePartition) {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<size_t> sz(0, 40);
    std::uniform_int_distribution<int> keyset(0, 3);
    const std::vector<std::vector<std::string>> key_choices = {
        {"k"}, {"tag"}, {"k", "tag"}, {"start_date", "absent"}};
    for (int round = 0; round < 1000; ++round) {
        auto evs = random_events(rng, sz(rng), "e");
        const auto& keys = key_choices[keyset(rng)];
        // Naive: linear search over the already-seen combinations.
        std::vector<std::pair<std::vector<Value>, std::vector<std::string>>> naive;
        for (const auto& e : evs) {
            std::vector<Value> kv;
            for (const auto& k : keys) kv.push_back(e.get(k).value_or(Value()));
            auto it = std::find_if(naive.begin(), naive.end(), [&](const auto& p) {
                for (size_t i = 0; i < kv.size(); ++i)
                    if (p.first[i].kind() != kv[i].kind() || to_text(p.first[i]) != to_text(kv[i])) return false;
                return true;
            });
            if (it == naive.end()) {
                naive.push_back({kv, {}});
                it = naive.end() - 1;
            }
            it->second.push_back(e.id);
        }
        auto groups = group_events(evs, keys);
        ASSERT_EQ(groups.size(), naive.size());
        size_t covered = 0;
        for (size_t i = 0; i < groups.size(); ++i) {
            EXPECT_EQ(ids_of(groups[i].members), naive[i].second);
            covered += groups[i].members.size();
            for (const auto& m : groups[i].members)
                for (const auto& k : keys)
                    EXPECT_EQ(to_text(m.get(k).value_or(Value())), to_text(groups[i].key_values.at(k)));
        }
        EXPECT_EQ(covered, evs.size());
    }
}

// ------------------------------------------------------------ map/apply/unnest

TEST(Map, LenOverGroupsAttachesCounts) {
    std::vector<Event> evs = {point("a", Source::music_stream, "2024-01-01T08:00:00", {{"genre", Value("pop")}}),
                              point("b", Source::music_stream, "2024-01-01T09:00:00", {{"genre", Value("rock")}}),
                              point("c", Source::music_stream, "2024-01-01T10:00:00", {{"genre", Value("pop")}}),
                              point("d", Source::music_stream, "2024-01-01T11:00:00", {{"genre", Value("pop")}})};
    auto r = map_result(ExecutionResult::of_groups(group_events(evs, {"genre"})), "len", "num_songs");
    ASSERT_EQ(r.groups.size(), 2u);
    EXPECT_EQ(r.groups[0].key_values.at("num_songs"), Value(3));
    EXPECT_EQ(r.groups[1].key_values.at("num_songs"), Value(1));
}

TEST(Map, EmptyListAndDomainErrors) {
    EXPECT_EQ(map_result(ExecutionResult::of_events({}), "weekday", "w").size(), 0u);
    auto one = ExecutionResult::of_events({point("a", Source::calendar, "2024-08-19T08:00:00")});
    EXPECT_EQ(map_result(one, "weekday", "w").events[0].attrs.at("w"), Value("Monday"));
    try {
        map_result(one, "len", "n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "FunctionDomainError");
    }
    try {
        map_result(one, "frobnicate", "n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "UnknownFunction");
    }
}

TEST(Apply, LenCountsAndCarriesProvenance) {
    std::vector<Event> evs;
    for (int i = 0; i < 7; ++i)
        evs.push_back(point("e" + std::to_string(i), Source::note, "2024-01-01T08:00:00"));
    auto r = apply_function(ExecutionResult::of_events(evs), "len");
    EXPECT_EQ(r.scalar, Value(7));
    EXPECT_EQ(r.provenance.size(), 7u);
    EXPECT_EQ(apply_function(ExecutionResult::of_events({}), "len").scalar, Value(0));
}

TEST(Apply, LenAfterFilterCountsSurvivors) {
    std::mt19937_64 rng(5);
    PredicateEvaluator ev(kClock);
    Expr p = pred(R"(attr["k"] >= 5)");
    for (int round = 0; round < 100; ++round) {
        auto evs = random_events(rng, 25, "e");
        size_t expected = 0;
        for (const auto& e : evs) {
            auto v = e.get("k");
            if (v && v->is_numeric() && *v->as_double() >= 5) ++expected;
        }
        auto kept = filter_events(evs, p, ev);
        EXPECT_EQ(apply_function(ExecutionResult::of_events(kept), "len").scalar,
                  Value(static_cast<int64_t>(expected)));
    }
}

TEST(Unnest, SplitsListsAndDropsEmpty) {
    Value::List ab{Value("A"), Value("B")};
    std::vector<Event> evs = {
        point("s1", Source::music_stream, "2024-01-01T08:00:00", {{"artist_names", Value(ab)}}),
        point("s2", Source::music_stream, "2024-01-01T09:00:00", {{"artist_names", Value(Value::List{})}}),
        point("s3", Source::music_stream, "2024-01-01T10:00:00", {{"artist_names", Value("C")}})};
    auto out = unnest_events(evs, "artist_names", "artist");
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0].attrs.at("artist"), Value("A"));
    EXPECT_EQ(out[1].attrs.at("artist"), Value("B"));
    EXPECT_EQ(out[2].attrs.at("artist"), Value("C"));
    EXPECT_NE(out[0].id, out[1].id);
    EXPECT_EQ(out[0].provenance, (std::vector<std::string>{"s1"}));
}

TEST(Unnest, OutputCountIsSumOfLengths) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> len(0, 4);
    for (int round = 0; round < 200; ++round) {
        std::vector<Event> evs;
        size_t total = 0;
        for (int i = 0; i < 10; ++i) {
            Value::List items;
            int n = len(rng);
            for (int j = 0; j < n; ++j) items.push_back(Value(int64_t{j}));
            total += items.size();
            evs.push_back(point("e" + std::to_string(i), Source::note, "2024-01-01T08:00:00",
                                {{"xs", Value(std::move(items))}}));
        }
        auto out = unnest_events(evs, "xs", "x");
        EXPECT_EQ(out.size(), total);
        auto names = ids_of(out);
        std::set<std::string> ids(names.begin(), names.end());
        EXPECT_EQ(ids.size(), out.size());
    }
}

// --------------------------------------------------------- arg and aggregates

TEST(ArgExtreme, GroupWithLargestCount) {
    std::vector<Event> evs;
    for (int i = 0; i < 5; ++i)
        evs.push_back(point("p" + std::to_string(i), Source::music_stream, "2024-01-02T08:00:00",
                            {{"artist", Value("pop")}}));
    for (int i = 0; i < 3; ++i)
        evs.push_back(point("r" + std::to_string(i), Source::music_stream, "2024-01-01T08:00:00",
                            {{"artist", Value("rock")}}));
    auto grouped = map_result(ExecutionResult::of_groups(group_events(evs, {"artist"})), "len", "count");
    auto r = arg_extreme(grouped, Op::argmax, "count", std::string("artist"));
    EXPECT_EQ(r.scalar, Value("pop"));
    EXPECT_EQ(r.provenance.size(), 5u);
}

TEST(ArgExtreme, SingletonIsItself) {
    auto r = arg_extreme(ExecutionResult::of_events({point("a", Source::note, "2024-01-01T08:00:00",
                                                           {{"k", Value(4)}})}),
                         Op::argmin, "k", std::nullopt);
    ASSERT_EQ(r.kind, ExecutionResult::Kind::events);
    EXPECT_EQ(r.events[0].id, "a");
}

TEST(ArgExtreme, MatchesLinearScanWithTieBreak) {
    std::mt19937_64 rng(1234);
    std::uniform_int_distribution<size_t> sz(0, 25);
    for (int round = 0; round < 1500; ++round) {
        auto evs = random_events(rng, sz(rng), "e");
        std::shuffle(evs.begin(), evs.end(), rng);
        const Op op = round % 2 ? Op::argmax : Op::argmin;
        const Event* best = nullptr;
        for (const auto& e : evs) {
            auto v = e.get("k");
            if (!v || v->is_null()) continue;
            if (!best) {
                best = &e;
                continue;
            }
            double a = *v->as_double(), b = *best->get("k")->as_double();
            bool better = op == Op::argmax ? a > b : a < b;
            if (a == b) better = std::tie(e.span.start, e.id) < std::tie(best->span.start, best->id);
            if (better) best = &e;
        }
        if (!best) {
            EXPECT_THROW(arg_extreme(ExecutionResult::of_events(evs), op, "k", std::string("tag")), Error);
            continue;
        }
        auto r = arg_extreme(ExecutionResult::of_events(evs), op, "k", std::string("tag"));
        EXPECT_EQ(r.scalar, *best->get("tag"));
        EXPECT_EQ(r.provenance, best->provenance);
        auto whole = arg_extreme(ExecutionResult::of_events(evs), op, "k", std::nullopt);
        ASSERT_EQ(whole.events.size(), 1u);
        EXPECT_EQ(whole.events[0].id, best->id);
    }
}

TEST(Aggregate, SumOfPricesIsExactToTheCent) {
    std::vector<Event> evs = {
        point("a", Source::online_purchase, "2024-01-01T08:00:00", {{"amount_spent", Value(5.99)}}),
        point("b", Source::online_purchase, "2024-01-02T08:00:00", {{"amount_spent", Value(4.01)}})};
    auto r = aggregate(ExecutionResult::of_events(evs), Op::sum, "amount_spent");
    EXPECT_NEAR(*r.scalar.as_double(), 10.00, 1e-9);
    EXPECT_EQ(r.provenance, (std::vector<std::string>{"a", "b"}));
}

TEST(Aggregate, EmptyConventions) {
    auto empty = ExecutionResult::of_events({});
    EXPECT_EQ(aggregate(empty, Op::sum, "k").scalar, Value(0));
    for (Op op : {Op::avg, Op::min, Op::max}) {
        try {
            aggregate(empty, op, "k");
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), "EmptyAggregate");
        }
    }
}

TEST(Aggregate, MinOfDatetimesIsEarliest) {
    std::vector<Event> evs = {point("a", Source::workout, "2024-03-05T08:00:00"),
                              point("b", Source::workout, "2024-03-01T18:00:00"),
                              point("c", Source::workout, "2024-03-09T07:00:00")};
    auto r = aggregate(ExecutionResult::of_events(evs), Op::min, "start_datetime");
    EXPECT_EQ(r.scalar, Value(at("2024-03-01T18:00:00")));
    EXPECT_EQ(r.provenance, (std::vector<std::string>{"b"}));
}

TEST(Aggregate, NonNumericValuesRaise) {
    std::vector<Event> evs = {point("a", Source::note, "2024-03-05T08:00:00", {{"k", Value("x")}})};
    for (Op op : {Op::sum, Op::avg, Op::max}) {
        try {
            aggregate(ExecutionResult::of_events(evs), op, "k");
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), "NonNumeric");
        }
    }
}

TEST(Aggregate, MatchesLinearScanOracle) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<size_t> sz(0, 30);
    for (int round = 0; round < 1500; ++round) {
        auto evs = random_events(rng, sz(rng), "e");
        long double sum = 0;
        size_t n = 0;
        bool all_int = true;
        std::optional<double> lo, hi;
        for (const auto& e : evs) {
            auto v = e.get("k");
            if (!v || v->is_null()) continue;
            double x = *v->as_double();
            all_int &= v->kind() == Value::Kind::integer;
            sum += x;
            ++n;
            lo = lo ? std::min(*lo, x) : x;
            hi = hi ? std::max(*hi, x) : x;
        }
        auto in = ExecutionResult::of_events(evs);
        auto s = aggregate(in, Op::sum, "k");
        EXPECT_NEAR(*s.scalar.as_double(), static_cast<double>(sum), 1e-9);
        EXPECT_EQ(s.scalar.kind() == Value::Kind::integer, all_int);
        if (n == 0) {
            EXPECT_THROW(aggregate(in, Op::avg, "k"), Error);
            continue;
        }
        EXPECT_NEAR(*aggregate(in, Op::avg, "k").scalar.as_double(), static_cast<double>(sum / n), 1e-9);
        EXPECT_EQ(*aggregate(in, Op::min, "k").scalar.as_double(), *lo);
        EXPECT_EQ(*aggregate(in, Op::max, "k").scalar.as_double(), *hi);
    }
}

TEST(Aggregate, GroupKeyValuesAreAggregable) {
    std::vector<Event> evs = {point("a", Source::note, "2024-01-01T08:00:00", {{"g", Value("x")}}),
                              point("b", Source::note, "2024-01-01T08:00:00", {{"g", Value("x")}}),
                              point("c", Source::note, "2024-01-01T08:00:00", {{"g", Value("y")}})};
    auto grouped = map_result(ExecutionResult::of_groups(group_events(evs, {"g"})), "len", "n");
    EXPECT_EQ(aggregate(grouped, Op::max, "n").scalar, Value(2));
    EXPECT_NEAR(*aggregate(grouped, Op::avg, "n").scalar.as_double(), 1.5, 1e-12);
}

// -------------------------------------------------------------- filter laws

TEST(Filter, FusionLaw) {
    const std::vector<std::string> preds = {
        R"(attr["k"] > 3)",
        R"(attr["tag"] == "a")",
        R"(attr["start_time"].hour >= 12)",
        R"(attr["k"] != 5 or attr["tag"] == "b")",
        R"(not attr["k"] <= 7)",
        R"(attr["start_date"].weekday == 0)",
        R"("a" in attr["tag"])",
    };
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<size_t> pick(0, preds.size() - 1), sz(0, 30);
    PredicateEvaluator ev(kClock);
    for (int round = 0; round < 1000; ++round) {
        auto evs = random_events(rng, sz(rng), "e");
        Expr p = pred(preds[pick(rng)]);
        Expr q = pred(preds[pick(rng)]);
        Expr both;
        both.kind = ExprKind::logic_and;
        both.args = {p, q};
        EXPECT_EQ(ids_of(filter_events(filter_events(evs, p, ev), q, ev)), ids_of(filter_events(evs, both, ev)));
    }
}

TEST(Filter, FalseConstantGivesEmpty) {
    std::mt19937_64 rng(2);
    PredicateEvaluator ev(kClock);
    EXPECT_TRUE(filter_events(random_events(rng, 10, "e"), pred("False"), ev).empty());
}

// ------------------------------------------------------------------ executor

namespace {

// Handmade store for "How many times did I eat Italian food after playing
// football?". Football at F1..F4, Italian meals at I1..I6, two distractors.
EventStore q3_store() {
    auto football = [](std::string id, std::string day, std::string from, std::string to) {
        return ev(std::move(id), Source::workout, day + "T" + from, day + "T" + to,
                  {{"workout_type", Value("football")}});
    };
    auto meal = [](std::string id, std::string when, std::string cuisine) {
        return point(std::move(id), Source::calendar, when,
                     {{"cuisine", Value(cuisine)}, {"summary", Value("dinner " + cuisine)}});
    };
    return store_of({
        football("F1", "2024-03-02", "10:00:00", "12:00:00"),
        football("F2", "2024-03-09", "10:00:00", "12:00:00"),
        football("F3", "2024-03-16", "18:00:00", "20:00:00"),
        football("F4", "2024-03-23", "10:00:00", "12:00:00"),
        meal("I1", "2024-03-02T13:00:00", "Italian"),  // after F1
        meal("I2", "2024-03-02T19:00:00", "Italian"),  // after F1
        meal("I3", "2024-03-09T08:00:00", "Italian"),  // before F2
        meal("I4", "2024-03-16T21:00:00", "Italian"),  // after F3
        meal("I5", "2024-03-16T12:00:00", "Italian"),  // before F3
        meal("I6", "2024-03-20T13:00:00", "Italian"),  // no football that day
        meal("J1", "2024-03-23T13:00:00", "Japanese"),
        ev("T1", Source::workout, "2024-03-23T15:00:00", "2024-03-23T16:00:00", {{"workout_type", Value("tennis")}}),
    });
}

const char* kQ3Plan =
    R"(APPLY(l=JOIN(l1=EXTRACT(l=RETRIEVE(query="I played football"), attr_names=["start_datetime", "end_datetime"], attr_types=[datetime, datetime]), )"
    R"(l2=EXTRACT(l=RETRIEVE(query="I ate Italian food"), attr_names=["start_datetime"], attr_types=[datetime]), )"
    R"(condition="i2.start_datetime >= i1.end_datetime and i2.start_date == i1.start_date"), fct=len))";

struct Q3Fixture {
    EventStore store = q3_store();
    Bm25Scorer scorer;
    OracleClassifier oracle{{{"I played football", {"F1", "F2", "F3", "F4"}},
                             {"I ate Italian food", {"I1", "I2", "I3", "I4", "I5", "I6"}}}};
    Retriever retriever{scorer, oracle, oracle};
    RuleValueGenerator gen;
    Extractor extractor{gen};
    Executor exec{ExecContext{kClock, &store, &retriever, &extractor}};
};

}  // namespace

TEST(Executor, Q3CountEqualsHandCountedPairs) {
    Q3Fixture f;
    std::vector<TraceRecord> trace;
    auto r = f.exec.execute(parse_plan(kQ3Plan), &trace);
    ASSERT_EQ(r.kind, ExecutionResult::Kind::scalar);
    EXPECT_EQ(r.scalar, Value(3));  // (F1,I1) (F1,I2) (F3,I4)
    EXPECT_EQ(r.provenance, (std::vector<std::string>{"F1", "F3", "I1", "I2", "I4"}));
    ASSERT_EQ(trace.size(), 6u);
    EXPECT_EQ(trace.back().node_id, "1");
    EXPECT_EQ(trace.back().input_sizes, (std::vector<size_t>{3}));
    EXPECT_EQ(trace[0].node_id, "1.1.1.1");
    EXPECT_EQ(trace[0].output_size, 4u);
}

TEST(Executor, IsDeterministic) {
    Q3Fixture f;
    auto plan = parse_plan(kQ3Plan);
    auto a = f.exec.execute(plan);
    for (int i = 0; i < 5; ++i) {
        auto b = f.exec.execute(plan);
        EXPECT_EQ(a.scalar, b.scalar);
        EXPECT_EQ(a.provenance, b.provenance);
    }
}

TEST(Executor, RetrieveOnlyPlanGivesEventList) {
    Q3Fixture f;
    auto r = f.exec.execute(parse_plan(R"(RETRIEVE(query="I played football"))"));
    EXPECT_EQ(r.kind, ExecutionResult::Kind::events);
    EXPECT_EQ(r.size(), 4u);
}

TEST(Executor, SumOverGroupedIsTypeMismatch) {
    Q3Fixture f;
    try {
        f.exec.execute(parse_plan(
            R"(SUM(l=GROUP_BY(l=RETRIEVE(query="I played football"), attr_names=["start_date"]), attr_name="amount_spent"))"));
        FAIL();
    } catch (const ExecError& e) {
        EXPECT_EQ(e.code(), "TypeMismatch");
        EXPECT_EQ(e.node_id(), "1");
        EXPECT_EQ(e.op(), Op::sum);
    }
}

TEST(Executor, UnresolvedQudAndMissingRetriever) {
    Q3Fixture f;
    try {
        f.exec.execute(parse_plan(R"(APPLY(l=QUD("x"), fct=len))"));
        FAIL();
    } catch (const ExecError& e) {
        EXPECT_EQ(e.code(), "UnresolvedQud");
        EXPECT_EQ(e.node_id(), "1.1");
    }
    Executor bare(ExecContext{kClock, nullptr, nullptr, nullptr});
    try {
        bare.execute(parse_plan(R"(RETRIEVE(query="x"))"));
        FAIL();
    } catch (const ExecError& e) {
        EXPECT_EQ(e.code(), "ConfigError");
    }
}

TEST(Executor, FilterSubplanRunsOncePerFilter) {
    Q3Fixture f;
    auto plan = parse_plan(
        R"(FILTER(l=RETRIEVE(query="I ate Italian food"), filter=lambda attr: attr["start_datetime"] > MIN(l=RETRIEVE(query="I played football"), attr_name="start_datetime").result))");
    std::vector<TraceRecord> trace;
    auto r = f.exec.execute(plan, &trace);
    EXPECT_EQ(ids_of(r.events), (std::vector<std::string>{"I1", "I2", "I3", "I5", "I4", "I6"}));
    size_t sub_runs = std::count_if(trace.begin(), trace.end(), [](const TraceRecord& t) { return t.node_id == "1.s1"; });
    EXPECT_EQ(sub_runs, 1u);
    // The sub-plan's lineage joins the answer's provenance.
    EXPECT_TRUE(std::binary_search(r.provenance.begin(), r.provenance.end(), "F1"));
}
