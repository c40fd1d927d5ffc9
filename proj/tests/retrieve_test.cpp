#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "optree/retrieve.hpp"
#include "optree/text.hpp"
#include "support/event_builders.hpp"
#include "support/oracles.hpp"

using namespace optree;
using namespace optree::testing;

namespace {

std::vector<std::string> texts_of(std::span<const Event> events) {
    std::vector<std::string> out;
    for (const auto& e : events) out.push_back(verbalize_event(e));
    return out;
}

// Textbook BM25 straight from token counts, no index.
std::vector<double> brute_bm25(const std::string& query, const std::vector<std::string>& docs) {
    std::vector<std::map<std::string, int>> tf(docs.size());
    std::map<std::string, int> df;
    double total = 0;
    for (size_t d = 0; d < docs.size(); ++d) {
        auto toks = content_tokens(docs[d]);
        total += static_cast<double>(toks.size());
        for (const auto& t : toks) ++tf[d][t];
        for (const auto& [t, n] : tf[d]) ++df[t];
    }
    const double avg = total / static_cast<double>(docs.size());
    auto q = content_tokens(query);
    std::sort(q.begin(), q.end());
    q.erase(std::unique(q.begin(), q.end()), q.end());
    std::vector<double> out(docs.size(), 0.0);
    const double n = static_cast<double>(docs.size());
    for (size_t d = 0; d < docs.size(); ++d) {
        double len = 0;
        for (const auto& [t, c] : tf[d]) len += c;
        for (const auto& t : q) {
            auto it = tf[d].find(t);
            if (it == tf[d].end()) continue;
            double idf = std::log(1.0 + (n - df[t] + 0.5) / (df[t] + 0.5));
            double f = it->second;
            out[d] += idf * f * 2.2 / (f + 1.2 * (0.25 + 0.75 * len / avg));
        }
    }
    return out;
}

std::vector<Event> synthetic_pool(size_t n, uint64_t seed) {
    static const char* words[] = {"running", "football", "pizza", "meeting", "gym", "song", "park", "dinner",
                                  "lunch",   "mum",      "dad",   "beach",   "run", "runs", "yoga", "office"};
    std::mt19937_64 rng(seed);
    std::vector<Event> out;
    for (size_t i = 0; i < n; ++i) {
        std::string text;
        for (int k = 1 + static_cast<int>(rng() % 6); k > 0; --k) text += std::string(words[rng() % 16]) + " ";
        auto src = kAllSources[rng() % kSourceCount];
        auto start = DateTime{static_cast<int64_t>(rng() % 10'000'000)};
        out.push_back(Event::make("e" + std::to_string(i), src, {start, DateTime{start.seconds + 60}},
                                  {{"text", Value(text)}}));
    }
    return out;
}

}  // namespace

TEST(SparseRetrieve, ExactTokenMatch) {
    std::vector<Event> pool = {
        point("a", Source::note, "2024-01-01T10:00:00", {{"text", Value("played football today")}}),
        point("b", Source::note, "2024-01-02T10:00:00", {{"text", Value("ate pizza")}}),
        point("c", Source::social_media, "2024-01-03T10:00:00", {{"text", Value("Football again!")}}),
        point("d", Source::note, "2024-01-04T10:00:00", {{"text", Value("went to the gym")}}),
    };
    auto texts = texts_of(pool);
    Bm25Scorer scorer;
    auto hits = sparse_retrieve("football", pool, texts, {}, scorer);
    ASSERT_EQ(hits.size(), 2u);
    std::set<std::string> got = {pool[hits[0].index].id, pool[hits[1].index].id};
    EXPECT_EQ(got, (std::set<std::string>{"a", "c"}));
    EXPECT_DOUBLE_EQ(hits[0].score, 1.0);
    EXPECT_TRUE(sparse_retrieve("tennis", pool, texts, {}, scorer).empty());
    EXPECT_THROW(sparse_retrieve("the of", pool, texts, {}, scorer), Error);
}

TEST(SparseRetrieve, MatchesBruteForceScoring) {
    auto pool = synthetic_pool(100, 3);
    auto texts = texts_of(pool);
    RetrievalConfig cfg;
    Bm25Scorer scorer;
    auto hits = sparse_retrieve("running", pool, texts, cfg, scorer);
    auto raw = brute_bm25("running", texts);
    double max = *std::max_element(raw.begin(), raw.end());
    std::vector<std::pair<double, std::string>> expect;
    for (size_t i = 0; i < raw.size(); ++i)
        if (raw[i] > 0 && raw[i] / max > cfg.score_threshold) expect.emplace_back(-raw[i] / max, pool[i].id);
    std::sort(expect.begin(), expect.end());
    ASSERT_EQ(hits.size(), expect.size());
    for (size_t i = 0; i < hits.size(); ++i) {
        EXPECT_EQ(pool[hits[i].index].id, expect[i].second);
        EXPECT_NEAR(hits[i].score, -expect[i].first, 1e-12);
    }
}

TEST(SparseRetrieve, ParallelKernelMatchesSerial) {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        auto texts = texts_of(synthetic_pool(500, seed));
        auto index = LexicalIndex::build(texts);
        auto q = prepare_query(index, "football pizza running in the park");
        std::vector<double> a(index.size()), b(index.size());
        bm25_scores(index, q, a);
        bm25_scores_serial(index, q, b);
        ASSERT_EQ(a, b);
    }
}

TEST(SparseRetrieve, LoweringThresholdNeverRemoves) {
    auto pool = synthetic_pool(300, 8);
    auto texts = texts_of(pool);
    Bm25Scorer scorer;
    std::set<size_t> prev;
    for (double t : {0.9, 0.7, 0.5, 0.3, 0.1, 0.01}) {
        RetrievalConfig cfg;
        cfg.score_threshold = t;
        std::set<size_t> cur;
        for (const auto& h : sparse_retrieve("gym yoga dinner", pool, texts, cfg, scorer)) cur.insert(h.index);
        EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
        prev = std::move(cur);
    }
}

TEST(RetrievalConfig, RejectsOutOfRange) {
    RetrievalConfig cfg;
    cfg.score_threshold = 0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg.score_threshold = 0.1;
    cfg.pattern_freq_threshold = 1.5;
    EXPECT_THROW(cfg.validate(), Error);
}

TEST(MinePatterns, SupportCountedByHand) {
    std::vector<Event> c;
    for (int i = 0; i < 10; ++i)
        c.push_back(point("w" + std::to_string(i), Source::workout, "2024-01-01T10:00:00",
                          {{"workout_type", Value(i < 7 ? "soccer" : "gym")}, {"n", Value(i)}}));
    RetrievalConfig cfg;
    cfg.pattern_freq_threshold = 0.5;
    auto ps = mine_patterns(c, cfg);
    ASSERT_EQ(ps.size(), 2u);
    EXPECT_EQ(ps[0].kind, Pattern::Kind::key_value);
    EXPECT_EQ(ps[0].key, "workout_type");
    EXPECT_EQ(ps[0].value, Value("soccer"));
    EXPECT_EQ(ps[0].support, 7u);
    EXPECT_EQ(ps[1].kind, Pattern::Kind::whole_source);
    EXPECT_EQ(ps[1].support, 10u);
}

TEST(MinePatterns, WholeSourcePerSourceAndBoundary) {
    std::vector<Event> c = {point("a", Source::mail, "2024-01-01T10:00:00", {{"x", Value("1")}}),
                            point("b", Source::calendar, "2024-01-01T10:00:00", {{"x", Value("2")}}),
                            point("c", Source::mail, "2024-01-01T10:00:00", {{"x", Value("3")}})};
    RetrievalConfig cfg;
    cfg.pattern_freq_threshold = 1.0;
    auto ps = mine_patterns(c, cfg);
    ASSERT_EQ(ps.size(), 2u);
    for (const auto& p : ps) EXPECT_EQ(p.kind, Pattern::Kind::whole_source);
    EXPECT_EQ(ps[0].source, Source::mail);
}

TEST(ApplyLabels, IrrelevantSourceAndValueDrop) {
    std::vector<Event> c = {
        point("m1", Source::music_stream, "2024-01-01T10:00:00", {{"song", Value("x")}}),
        point("m2", Source::music_stream, "2024-01-01T11:00:00", {{"song", Value("y")}}),
        point("w1", Source::workout, "2024-01-01T12:00:00", {{"workout_type", Value("gym")}}),
        point("w2", Source::workout, "2024-01-01T13:00:00", {{"workout_type", Value("football")}}),
    };
    RetrievalConfig cfg;
    auto ps = mine_patterns(c, cfg);
    for (auto& p : ps) {
        if (p.kind == Pattern::Kind::whole_source)
            p.label = p.source == Source::music_stream ? PatternLabel::irrelevant : PatternLabel::partial;
        else
            p.label = p.value == Value("gym") ? PatternLabel::irrelevant : PatternLabel::partial;
    }
    auto out = apply_pattern_labels(c, ps);
    EXPECT_EQ(out.dropped, 3u);
    EXPECT_TRUE(out.kept.empty());
    EXPECT_EQ(ids_of(out.partial), std::vector<std::string>{"w2"});

    for (auto& p : ps) p.label = PatternLabel::relevant;
    out = apply_pattern_labels(c, ps);
    EXPECT_EQ(out.kept.size(), 4u);
    EXPECT_EQ(out.dropped, 0u);

    ps[0].label = PatternLabel::unlabeled;
    EXPECT_THROW(apply_pattern_labels(c, ps), Error);
}

TEST(ApplyLabels, KeepWinsUnderRandomLabels) {
    std::mt19937_64 rng(11);
    auto pool = synthetic_pool(60, 2);
    for (auto& e : pool) e.attrs["k"] = Value(static_cast<int64_t>(rng() % 4));
    RetrievalConfig cfg;
    cfg.pattern_freq_threshold = 0.05;
    auto ps = mine_patterns(pool, cfg);
    for (int round = 0; round < 500; ++round) {
        for (auto& p : ps) p.label = static_cast<PatternLabel>(1 + rng() % 3);
        auto out = apply_pattern_labels(pool, ps);
        std::set<std::string> kept;
        for (const auto& e : out.kept) kept.insert(e.id);
        for (const auto& e : pool) {
            bool any_relevant = std::any_of(ps.begin(), ps.end(), [&](const Pattern& p) {
                return p.label == PatternLabel::relevant && p.covers(e);
            });
            ASSERT_EQ(kept.count(e.id) == 1, any_relevant);
        }
        ASSERT_EQ(out.kept.size() + out.partial.size() + out.dropped, pool.size());
    }
}

TEST(ClassifyRemaining, LexicalHeuristicOnHandmadeEvents) {
    std::vector<Event> evs = {
        point("1", Source::note, "2024-01-01T10:00:00", {{"text", Value("Football with Carla")}}),
        point("2", Source::note, "2024-01-01T10:00:00", {{"text", Value("Dinner at the Italian place")}}),
        point("3", Source::note, "2024-01-01T10:00:00", {{"text", Value("The and of with")}}),
        point("4", Source::note, "2024-01-01T10:00:00", {{"text", Value("played some footballs")}}),
        point("5", Source::note, "2024-01-01T10:00:00", {{"text", Value("gym session")}}),
    };
    LexicalClassifier lex;
    auto kept = classify_remaining("I played football", evs, lex);
    EXPECT_EQ(ids_of(kept), (std::vector<std::string>{"1", "4"}));
    EXPECT_TRUE(classify_remaining("I played football", {}, lex).empty());
}

TEST(ClassifyRemaining, OracleKeepsGoldExactly) {
    auto pool = synthetic_pool(200, 4);
    std::set<std::string> gold;
    for (size_t i = 0; i < pool.size(); i += 3) gold.insert(pool[i].id);
    OracleClassifier oracle({{"Some Query", gold}});
    auto kept = classify_remaining("some   query", pool, oracle);
    std::set<std::string> got;
    for (const auto& e : kept) got.insert(e.id);
    EXPECT_EQ(got, gold);
    EXPECT_THROW(oracle.gold("other"), Error);
}

TEST(Deduplicate, CalendarAndSocialFootballMerge) {
    std::vector<Event> evs = {
        ev("cal", Source::calendar, "2024-10-11T10:00:00", "2024-10-11T11:00:00",
           {{"summary", Value("Football")}, {"location", Value("Park")}}),
        ev("soc", Source::social_media, "2024-10-11T10:30:00", "2024-10-11T11:30:00",
           {{"text", Value("Great football game")}, {"location", Value("City park")}}),
    };
    auto out = deduplicate(evs);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].span.start, at("2024-10-11T10:00:00"));
    EXPECT_EQ(out[0].span.end, at("2024-10-11T11:30:00"));
    EXPECT_EQ(out[0].provenance, (std::vector<std::string>{"cal", "soc"}));
    EXPECT_EQ(out[0].attrs.at("summary"), Value("Football"));
    EXPECT_EQ(out[0].attrs.at("text"), Value("Great football game"));
    // Equal span lengths: the earlier event wins the conflict.
    EXPECT_EQ(out[0].attrs.at("location"), Value("Park"));
    EXPECT_EQ(out[0].attrs.at("location__social_media"), Value("City park"));
}

TEST(Deduplicate, DisjointUnchangedAndSameSourceKept) {
    std::vector<Event> evs = {
        ev("a", Source::music_stream, "2024-01-01T10:00:00", "2024-01-01T10:03:00"),
        ev("b", Source::music_stream, "2024-01-01T10:02:00", "2024-01-01T10:05:00"),
        ev("c", Source::mail, "2024-01-01T12:00:00", "2024-01-01T12:00:00"),
    };
    auto out = deduplicate(evs);
    EXPECT_EQ(ids_of(out), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Deduplicate, ChainMergesTransitively) {
    std::vector<Event> evs = {
        ev("a", Source::calendar, "2024-01-01T10:00:00", "2024-01-01T11:00:00"),
        ev("b", Source::mail, "2024-01-01T10:30:00", "2024-01-01T12:00:00"),
        ev("c", Source::social_media, "2024-01-01T11:30:00", "2024-01-01T13:00:00"),
    };
    auto out = deduplicate(evs);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].span.start, at("2024-01-01T10:00:00"));
    EXPECT_EQ(out[0].span.end, at("2024-01-01T13:00:00"));
}

TEST(Deduplicate, MatchesDefinitionOracle) {
    std::mt19937_64 rng(21);
    for (int round = 0; round < 1000; ++round) {
        auto evs = random_intervals(rng, 1 + rng() % 30);
        auto out = deduplicate(evs);
        std::vector<std::set<std::string>> got;
        for (const auto& e : out) got.push_back({e.provenance.begin(), e.provenance.end()});
        std::sort(got.begin(), got.end());
        ASSERT_EQ(got, brute_dedup_groups(evs));
    }
}

TEST(Deduplicate, IdempotentAndSpanConservative) {
    std::mt19937_64 rng(5);
    for (int round = 0; round < 2000; ++round) {
        auto evs = random_intervals(rng, 1 + rng() % 40);
        auto once = deduplicate(evs);
        auto twice = deduplicate(once);
        ASSERT_EQ(ids_of(once), ids_of(twice));
        for (size_t i = 0; i < once.size(); ++i) {
            ASSERT_EQ(once[i].span, twice[i].span);
            ASSERT_EQ(once[i].attrs, twice[i].attrs);
        }
        // Union of spans, as a set of covered seconds.
        std::vector<char> in(1100, 0), outc(1100, 0);
        for (const auto& e : evs)
            for (int64_t t = e.span.start.seconds; t <= e.span.end.seconds; ++t) in[t] = 1;
        for (const auto& e : once)
            for (int64_t t = e.span.start.seconds; t <= e.span.end.seconds; ++t) outc[t] = 1;
        ASSERT_EQ(in, outc);
    }
}

TEST(Retriever, OracleClassifiersRecoverGold) {
    std::vector<Event> evs;
    std::set<std::string> gold;
    for (int d = 1; d <= 20; ++d) {
        std::string day = "2024-03-" + std::string(d < 10 ? "0" : "") + std::to_string(d);
        bool football = d % 2 == 0;
        std::string id = "w" + std::to_string(d);
        evs.push_back(ev(id, Source::workout, day + "T09:00:00", day + "T10:00:00",
                         {{"workout_type", Value(football ? "football" : "gym")}}));
        if (football) gold.insert(id);
        evs.push_back(point("m" + std::to_string(d), Source::music_stream, day + "T20:00:00",
                            {{"song", Value("Football anthem")}}));
        if (d % 4 == 0) {
            std::string sid = "s" + std::to_string(d);
            evs.push_back(point(sid, Source::social_media, day + "T09:30:00",
                                {{"text", Value("Great football match this morning")}}));
            gold.insert(sid);
        }
    }
    auto store = store_of(evs);
    OracleClassifier oracle({{"I played football", gold}});
    Bm25Scorer scorer;
    Retriever r(scorer, oracle, oracle);
    RetrieveStats st;
    auto out = r.retrieve("I played football", store, nullptr, &st);
    std::set<std::string> prov;
    for (const auto& e : out) prov.insert(e.provenance.begin(), e.provenance.end());
    EXPECT_EQ(prov, gold);
    EXPECT_EQ(out.size(), 10u);  // socials merge into their workouts
    EXPECT_EQ(st.output, 10u);
    EXPECT_GT(st.dropped_by_pattern, 0u);

    LexicalClassifier lex;
    Retriever lr(scorer, lex, lex);
    auto lout = lr.retrieve("I played football", store);
    std::set<std::string> lprov;
    for (const auto& e : lout) lprov.insert(e.provenance.begin(), e.provenance.end());
    EXPECT_TRUE(std::includes(lprov.begin(), lprov.end(), gold.begin(), gold.end()));

    std::vector<Event> none;
    EXPECT_TRUE(r.retrieve("I played football", store, &none).empty());
    std::vector<Event> some(evs.begin(), evs.begin() + 6);
    auto restricted = r.retrieve("I played football", store, &some);
    for (const auto& e : restricted) EXPECT_TRUE(gold.count(e.id));
}
