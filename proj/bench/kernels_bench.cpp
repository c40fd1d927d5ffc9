// OpenMP kernels against their serial references on a generated persona store.
//
//   kernels_bench --benchmark_filter=Bm25
//   kernels_bench --benchmark_filter=Join

#include <benchmark/benchmark.h>

#include "optree/exec.hpp"
#include "optree/kernels.hpp"
#include "optree/persona.hpp"

using namespace optree;

namespace {

const persona::PersonaData& data() {
    static const persona::PersonaData d = persona::generate_persona_data(1, persona::GenerationConfig{});
    return d;
}

const LexicalIndex& index() {
    static const LexicalIndex idx = LexicalIndex::build(data().store.verbalizations());
    return idx;
}

std::vector<Event> by_source(Source s, size_t limit) {
    auto all = events_by_source(data().store, s);
    if (all.size() > limit) all.resize(limit);
    return all;
}

const DateTime kClock = *parse_iso_datetime("2024-01-01T12:00:00");

void Bm25Parallel(benchmark::State& st) {
    const auto& idx = index();
    auto q = prepare_query(idx, "music I streamed by the artist");
    std::vector<double> out(idx.size());
    for (auto _ : st) {
        bm25_scores(idx, q, out);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(idx.size()));
}

void Bm25Serial(benchmark::State& st) {
    const auto& idx = index();
    auto q = prepare_query(idx, "music I streamed by the artist");
    std::vector<double> out(idx.size());
    for (auto _ : st) {
        bm25_scores_serial(idx, q, out);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(idx.size()));
}

// Songs played during a workout: a range probe on the sorted right side.
const Expr& during() {
    static const Expr e =
        parse_predicate("i2.start_datetime >= i1.start_datetime and i2.start_datetime <= i1.end_datetime", true);
    return e;
}

void JoinProbe(benchmark::State& st, bool parallel) {
    auto left = by_source(Source::workout, static_cast<size_t>(st.range(0)));
    auto right = by_source(Source::music_stream, 1u << 20);
    PredicateEvaluator eval(kClock);
    for (auto _ : st) benchmark::DoNotOptimize(join_events(left, right, during(), eval, parallel));
    st.counters["left"] = static_cast<double>(left.size());
    st.counters["right"] = static_cast<double>(right.size());
}

void JoinParallel(benchmark::State& st) { JoinProbe(st, true); }
void JoinSerial(benchmark::State& st) { JoinProbe(st, false); }

void JoinNestedLoop(benchmark::State& st) {
    auto left = by_source(Source::workout, static_cast<size_t>(st.range(0)));
    auto right = by_source(Source::music_stream, 1u << 20);
    PredicateEvaluator eval(kClock);
    for (auto _ : st) benchmark::DoNotOptimize(join_nested_loop(left, right, during(), eval));
}

}  // namespace

BENCHMARK(Bm25Parallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(Bm25Serial)->Unit(benchmark::kMicrosecond);
BENCHMARK(JoinParallel)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(JoinSerial)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(JoinNestedLoop)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
