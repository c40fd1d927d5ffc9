#include <gtest/gtest.h>

#include <httplib.h>

#include <fstream>
#include <thread>

#include "optree/decomposer.hpp"
#include "optree/plan_validate.hpp"
#include "support/worked_plans.hpp"

using namespace optree;
using optree::testing::worked_plans;

namespace {

using Script = std::vector<std::pair<std::string, std::string>>;

std::string code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

// Collects the operator labels of a tree in pre-order.
void ops(const PlanNode& n, std::vector<Op>& out) {
    out.push_back(n.op);
    for (const auto& c : n.children) ops(c, out);
}

}  // namespace

TEST(Normalize, CaseAndWhitespace) {
    EXPECT_EQ(normalize_question("  How   many\tTimes?  "), "how many times?");
}

TEST(Resolve, ImmediateRetrieve) {
    ScriptedDecomposer d(Script{{"Q", R"(RETRIEVE(query="Q"))"}});
    auto r = resolve("Q", d);
    EXPECT_EQ(r.plan, make_retrieve("Q"));
    EXPECT_EQ(r.depth, 1);
    EXPECT_EQ(r.steps.size(), 1u);
}

TEST(Resolve, SelfLoopExceedsDepth) {
    ScriptedDecomposer d(Script{{"Q", R"(APPLY(l=QUD("Q"), fct=len))"}});
    EXPECT_EQ(code_of([&] { resolve("Q", d, 5); }), "DepthExceeded");
}

TEST(Resolve, MissingQuestionIsDecomposerMiss) {
    ScriptedDecomposer d(Script{{"Q", R"(APPLY(l=QUD("R"), fct=len))"}});
    EXPECT_EQ(code_of([&] { resolve("Q", d); }), "DecomposerMiss");
}

TEST(Resolve, UnparseableStepReported) {
    ScriptedDecomposer d(Script{{"Q", R"(APPLY(l=, fct=len))"}});
    EXPECT_EQ(code_of([&] { resolve("Q", d); }), "UnparseablePlan");
}

TEST(Resolve, FootballJoinCascadeHasEightNodes) {
    ScriptedDecomposer d(Script{
        {"How often did I eat Italian food after playing football?",
         R"(APPLY(l=QUD("I ate Italian food after playing football"), fct=len))"},
        {"I ate Italian food after playing football",
         R"(JOIN(l1=QUD("I played football with start and end time"), l2=QUD("I ate Italian food with start time"), condition="i2.start_datetime >= i1.end_datetime and i2.start_date == i1.start_date"))"},
        {"I played football with start and end time",
         R"(EXTRACT(l=QUD("I played football"), attr_names=["start_datetime", "end_datetime"], attr_types=[datetime, datetime]))"},
        {"I played football", R"(RETRIEVE(query="I played football"))"},
        {"I ate Italian food with start time",
         R"(EXTRACT(l=QUD("I ate Italian food"), attr_names=["start_datetime"], attr_types=[datetime]))"},
        {"I ate Italian food",
         R"(FILTER(l=QUD("I ate food with cuisine"), filter=lambda attr: attr["cuisine"] == "Italian"))"},
        {"I ate food with cuisine",
         R"(EXTRACT(l=QUD("I ate food"), attr_names=["cuisine"], attr_types=[str]))"},
        {"I ate food", R"(RETRIEVE(query="I ate food"))"},
    });
    auto r = resolve("How often did I eat Italian food after playing football?", d);
    EXPECT_EQ(count_nodes(r.plan), 8u);
    std::vector<Op> seq;
    ops(r.plan, seq);
    EXPECT_EQ(seq, (std::vector<Op>{Op::apply, Op::join, Op::extract, Op::retrieve, Op::extract, Op::filter,
                                    Op::extract, Op::retrieve}));
    EXPECT_TRUE(is_resolved(r.plan));
    EXPECT_TRUE(validate_plan(r.plan).empty());
    // Breadth-first: both join inputs expand before anything below them.
    ASSERT_EQ(r.steps.size(), 8u);
    EXPECT_EQ(r.steps[2].question, "I played football with start and end time");
    EXPECT_EQ(r.steps[3].question, "I ate Italian food with start time");
    EXPECT_EQ(r.steps[4].question, "I played football");
    EXPECT_EQ(r.depth, 6);
}

TEST(Resolve, HistoryIsAncestorChainOnly) {
    const auto& w = worked_plans()[6];  // parents in the evening: join of two retrieves
    ScriptedDecomposer d(w.steps);
    auto r = resolve(w.question, d);
    for (const auto& s : r.steps) {
        ASSERT_EQ(s.history.size(), static_cast<size_t>(s.depth - 1));
        if (s.question == "instances I met with my dad") {
            for (const auto& h : s.history) EXPECT_NE(h.question, "instances I met with my mum");
        }
    }
}

TEST(Resolve, WorkedScriptsReproduceTreesAndValidate) {
    for (const auto& w : worked_plans()) {
        ScriptedDecomposer d(w.steps);
        auto r = resolve(w.question, d);
        EXPECT_TRUE(is_resolved(r.plan)) << w.name;
        EXPECT_EQ(r.steps.size(), w.steps.size()) << w.name;
        EXPECT_TRUE(validate_plan(r.plan).empty()) << w.name;
        EXPECT_LE(r.depth, kDefaultMaxDepth);
        ScriptedDecomposer again(w.steps);
        EXPECT_EQ(resolve(w.question, again).plan, r.plan) << "determinism: " << w.name;
    }
}

TEST(Resolve, QudInsideFilterSubPlanIsExpanded) {
    const auto& w = worked_plans()[1];
    ScriptedDecomposer d(w.steps);
    auto r = resolve(w.question, d);
    const PlanNode& filter = r.plan.child();
    ASSERT_EQ(filter.op, Op::filter);
    const Expr& sub = filter.predicate().args.at(1);
    ASSERT_EQ(sub.kind, ExprKind::subplan);
    EXPECT_EQ(sub.sub.at(0).op, Op::min);
}

TEST(ScriptFile, LoadsTabSeparatedLines) {
    auto path = std::filesystem::temp_directory_path() / "optree_script_test.tsv";
    {
        std::ofstream out(path);
        out << "# comment\n\nQ one\tRETRIEVE(query=\"one\")\n";
    }
    auto d = ScriptedDecomposer::from_file(path);
    EXPECT_EQ(d.size(), 1u);
    EXPECT_EQ(d.step("q ONE", {}), "RETRIEVE(query=\"one\")");
    {
        std::ofstream out(path);
        out << "no tab here\n";
    }
    EXPECT_EQ(code_of([&] { ScriptedDecomposer::from_file(path); }), "ConfigError");
    std::filesystem::remove(path);
}

TEST(Harvest, CorrectRunsOnlyDedupedAndCapped) {
    ScriptedDecomposer d(Script{{"Q", R"(APPLY(l=QUD("R"), fct=len))"}, {"R", R"(RETRIEVE(query="r"))"}});
    auto res = resolve("Q", d);
    auto pairs = harvest_training_pairs({{"Q", res, true}, {"Q", res, true}});
    EXPECT_EQ(pairs.size(), 2u);  // one pair per step, duplicates removed
    EXPECT_TRUE(harvest_training_pairs({{"Q", res, false}}).empty());

    std::vector<RunRecord> runs;
    for (int i = 0; i < 4; ++i) {
        ScriptedDecomposer di(Script{{"Q", "RETRIEVE(query=\"v" + std::to_string(i) + "\")"}});
        runs.push_back({"Q", resolve("Q", di), true});
    }
    auto capped = harvest_training_pairs(runs);
    EXPECT_EQ(capped.size(), 3u);
}

TEST(GeneratorClient, RetriesOnceThenSucceeds) {
    httplib::Server server;
    int calls = 0;
    nlohmann::json last_request;
    server.Post("/plan", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        last_request = nlohmann::json::parse(req.body);
        std::string plan = calls == 1 ? "SUM(" : "RETRIEVE(query=\"x\")";
        res.set_content(nlohmann::json{{"plan_text", plan}}.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    GeneratorClient client("http://127.0.0.1:" + std::to_string(port) + "/plan");
    auto text = client.step("q", {{"parent", "APPLY(l=QUD(\"q\"), fct=len)"}});
    EXPECT_EQ(text, "RETRIEVE(query=\"x\")");
    EXPECT_EQ(calls, 2);
    EXPECT_EQ(last_request["history"][0]["q"], "parent");

    calls = 10;  // every later response is unparseable
    server.Post("/bad", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"plan_text":"SUM("})", "application/json");
    });
    GeneratorClient bad("http://127.0.0.1:" + std::to_string(port) + "/bad");
    EXPECT_EQ(code_of([&] { bad.step("q", {}); }), "UnparseablePlan");
    server.stop();
    t.join();
}

TEST(GeneratorClient, BadUrlIsConfigError) {
    EXPECT_EQ(code_of([] { GeneratorClient c("ftp://x"); }), "ConfigError");
    EXPECT_EQ(code_of([] { GeneratorClient c("http://:80"); }), "ConfigError");
}
