#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "optree/bench.hpp"

using namespace optree;
using namespace optree::bench;

namespace {

// Independent oracle: direct binomial sum with exact integer coefficients.
double binomial_two_sided(size_t b, size_t c) {
    size_t n = b + c, k = std::min(b, c);
    double tail = 0, coef = 1;  // C(n, 0)
    for (size_t i = 0; i <= k; ++i) {
        if (i) coef = coef * static_cast<double>(n - i + 1) / static_cast<double>(i);
        tail += coef;
    }
    return std::min(1.0, 2 * tail / std::pow(2.0, static_cast<double>(n)));
}

QuestionOutcome outcome(bool strict, bool relaxed, std::vector<std::string> tags, bool structured = false) {
    QuestionOutcome o;
    o.strict = strict;
    o.relaxed = relaxed;
    o.tags = std::move(tags);
    o.structured_only = structured;
    return o;
}

}  // namespace

TEST(Match, RelaxedSlackIsTenPercent) {
    EXPECT_FALSE(hit_at_1(Value(int64_t{109}), Value(int64_t{100})));
    EXPECT_TRUE(rlx_hit_at_1(Value(int64_t{109}), Value(int64_t{100})));
    EXPECT_TRUE(rlx_hit_at_1(Value(int64_t{110}), Value(int64_t{100})));
    EXPECT_FALSE(rlx_hit_at_1(Value(int64_t{111}), Value(int64_t{100})));
    EXPECT_TRUE(rlx_hit_at_1(Value(90.0), Value(int64_t{100})));
    EXPECT_FALSE(rlx_hit_at_1(Value(-109.0), Value(int64_t{100})));
}

TEST(Match, ZeroGoldNeedsZero) {
    EXPECT_TRUE(rlx_hit_at_1(Value(0.0), Value(int64_t{0})));
    EXPECT_FALSE(rlx_hit_at_1(Value(0.01), Value(int64_t{0})));
}

TEST(Match, TextIsTrimmedAndCaseFolded) {
    EXPECT_TRUE(hit_at_1(Value("Monday"), Value("monday ")));
    EXPECT_FALSE(hit_at_1(Value("Monday"), Value("Tuesday")));
    EXPECT_FALSE(rlx_hit_at_1(Value("Monday"), Value("Tuesday")));
}

TEST(Match, NumericTextCountsAsNumber) {
    EXPECT_TRUE(hit_at_1(Value("42"), Value(int64_t{42})));
    EXPECT_TRUE(hit_at_1(Value(42.0), Value(int64_t{42})));
    EXPECT_TRUE(rlx_hit_at_1(Value(" 45 "), Value(int64_t{42})));
    EXPECT_FALSE(hit_at_1(Value("42 songs"), Value(int64_t{42})));
}

TEST(Match, NullOnlyMatchesNull) {
    EXPECT_TRUE(hit_at_1(Value(), Value()));
    EXPECT_FALSE(hit_at_1(Value(), Value(int64_t{0})));
    EXPECT_FALSE(rlx_hit_at_1(Value(int64_t{0}), Value()));
}

TEST(Match, ListsCompareAsMultisets) {
    Value a(std::vector<Value>{Value("Rock"), Value("jazz"), Value("rock")});
    Value b(std::vector<Value>{Value("jazz"), Value("rock"), Value("Rock ")});
    Value c(std::vector<Value>{Value("jazz"), Value("rock")});
    EXPECT_TRUE(hit_at_1(a, b));
    EXPECT_FALSE(hit_at_1(a, c));
    EXPECT_FALSE(hit_at_1(a, Value("rock")));
}

TEST(Match, CalendarValuesByIsoText) {
    EXPECT_TRUE(hit_at_1(Value(*parse_iso_date("2023-05-01")), Value("2023-05-01")));
    EXPECT_FALSE(hit_at_1(Value(*parse_iso_date("2023-05-01")), Value(*parse_iso_date("2023-05-02"))));
}

TEST(Match, RelaxedImpliedByStrictProperty) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1000, 1000);
    for (int i = 0; i < 2000; ++i) {
        Value p(std::round(u(rng))), g(std::round(u(rng)));
        if (hit_at_1(p, g)) EXPECT_TRUE(rlx_hit_at_1(p, g));
        EXPECT_TRUE(rlx_hit_at_1(g, g));
    }
}

TEST(McNemar, KnownValues) {
    EXPECT_NEAR(mcnemar_exact(0, 10), 0.001953125, 1e-9);
    EXPECT_NEAR(mcnemar_exact(5, 5), 1.0, 1e-12);
    EXPECT_NEAR(mcnemar_exact(2, 8), 0.109375, 1e-9);
}

TEST(McNemar, MatchesDirectBinomialSum) {
    for (size_t b = 0; b <= 40; ++b)
        for (size_t c = 0; c <= 40; ++c) {
            if (b + c == 0) continue;
            EXPECT_NEAR(mcnemar_exact(b, c), binomial_two_sided(b, c), 1e-9) << b << "," << c;
            EXPECT_DOUBLE_EQ(mcnemar_exact(b, c), mcnemar_exact(c, b));
            EXPECT_LE(mcnemar_exact(b, c), 1.0);
        }
}

TEST(McNemar, LargeCountsStayFinite) {
    double p = mcnemar_exact(400, 600);
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1e-9);
    EXPECT_NEAR(mcnemar_exact(3000, 3000), 1.0, 1e-12);
}

TEST(McNemar, NoDiscordantPairsRejected) {
    try {
        mcnemar_exact(0, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "NoDiscordantPairs");
    }
    EXPECT_THROW(mcnemar({{true, true}, {false, false}}), Error);
}

TEST(McNemar, CountsOnlyDiscordantPairs) {
    std::vector<std::pair<bool, bool>> pairs = {{true, true}, {false, false}};
    for (int i = 0; i < 8; ++i) pairs.push_back({false, true});
    pairs.push_back({true, false});
    pairs.push_back({true, false});
    EXPECT_DOUBLE_EQ(mcnemar(pairs), mcnemar_exact(2, 8));
}

TEST(Summary, AllCorrectGivesOne) {
    BenchReport r;
    for (int i = 0; i < 7; ++i) r.outcomes.push_back(outcome(true, true, {"temporal"}, true));
    summarize(r);
    EXPECT_EQ(r.n, 7u);
    EXPECT_DOUBLE_EQ(r.hit_at_1, 1.0);
    EXPECT_DOUBLE_EQ(r.rlx_hit_at_1, 1.0);
    EXPECT_DOUBLE_EQ(r.structured_hit_at_1, 1.0);
}

TEST(Summary, ThreeOfFour) {
    BenchReport r;
    r.outcomes = {outcome(true, true, {}), outcome(true, true, {}), outcome(false, true, {}),
                  outcome(true, true, {})};
    summarize(r);
    EXPECT_DOUBLE_EQ(r.hit_at_1, 0.75);
    EXPECT_DOUBLE_EQ(r.rlx_hit_at_1, 1.0);
}

TEST(Summary, PerTagRowsRecomputeFromOutcomes) {
    std::mt19937_64 rng(9);
    const std::vector<std::string> all = {"aggregation", "join", "temporal", "ordering"};
    BenchReport r;
    for (int i = 0; i < 300; ++i) {
        std::vector<std::string> tags;
        for (const auto& t : all)
            if (rng() % 2) tags.push_back(t);
        bool strict = rng() % 3 == 0;
        r.outcomes.push_back(outcome(strict, strict || rng() % 2, tags));
    }
    summarize(r);
    for (const auto& row : r.tags) {
        size_t n = 0, hit = 0, rlx = 0;
        for (const auto& o : r.outcomes)
            if (std::find(o.tags.begin(), o.tags.end(), row.tag) != o.tags.end()) {
                ++n;
                hit += o.strict;
                rlx += o.relaxed;
            }
        EXPECT_EQ(row.n, n);
        EXPECT_DOUBLE_EQ(row.hit_at_1, static_cast<double>(hit) / n);
        EXPECT_DOUBLE_EQ(row.rlx_hit_at_1, static_cast<double>(rlx) / n);
    }
    EXPECT_TRUE(std::is_sorted(r.tags.begin(), r.tags.end(),
                               [](const TagRow& a, const TagRow& b) { return a.tag < b.tag; }));
}

TEST(Summary, JsonWithoutTimingsIsStable) {
    BenchReport r;
    r.outcomes = {outcome(true, true, {"join"})};
    r.outcomes[0].latency_ms = 3.5;
    summarize(r);
    BenchReport s = r;
    s.outcomes[0].latency_ms = 9.0;
    summarize(s);
    EXPECT_EQ(r.to_json(false).dump(), s.to_json(false).dump());
    EXPECT_NE(r.to_json(true).dump(), s.to_json(true).dump());
    EXPECT_NE(r.table().find("Hit@1"), std::string::npos);
}
