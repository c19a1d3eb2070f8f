#include <benchmark/benchmark.h>

#include "semboot/corpus.hpp"
#include "semboot/derivation.hpp"
#include "semboot/inference.hpp"
#include "semboot/model.hpp"

using namespace semboot;

namespace {

const Corpus& corpus() {
  static const Corpus c = generate_synthetic(SynthConfig{});
  return c;
}

const Model& trained_model() {
  static const Model model = [] {
    Model m;
    for (std::size_t i = 0; i < 100; ++i) {
      train_example(m, corpus().examples[i].tokens, {corpus().examples[i].lf});
    }
    return m;
  }();
  return model;
}

struct Item {
  const char* text;
  const char* lf;
};

constexpr Item kItems[] = {
    {"you run", "(v|run pro:per|you)"},
    {"you lost a shoe", "(v|lost (det:art|a n|shoe) pro:per|you)"},
    {"mommy can not take a ball", "(neg|not (mod|can (v|take (det:art|a n|ball) n:prop|mommy)))"},
};

void BM_ForestBuild(benchmark::State& state) {
  const Item& item = kItems[state.range(0)];
  const auto tokens = tokenize(item.text);
  const Term lf = parse_lf(item.lf);
  for (auto _ : state) {
    ParseForest forest(tokens, TrainConfig{});
    benchmark::DoNotOptimize(forest.add_root(lf));
  }
  state.SetLabel(item.text);
}
BENCHMARK(BM_ForestBuild)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_AnalyzeExample(benchmark::State& state) {
  const Item& item = kItems[state.range(0)];
  const auto tokens = tokenize(item.text);
  const Term lf = parse_lf(item.lf);
  const Model& model = trained_model();
  for (auto _ : state) {
    auto an = analyze_example(model, tokens, {lf});
    benchmark::DoNotOptimize(an.log_z);
  }
  state.SetLabel(item.text);
}
BENCHMARK(BM_AnalyzeExample)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_TrainExample(benchmark::State& state) {
  const Example& ex = corpus().examples[100];
  for (auto _ : state) {
    state.PauseTiming();
    Model model = trained_model();
    state.ResumeTiming();
    benchmark::DoNotOptimize(train_example(model, ex.tokens, {ex.lf}));
  }
}
BENCHMARK(BM_TrainExample)->Unit(benchmark::kMillisecond);

void BM_Parse(benchmark::State& state) {
  const Model& model = trained_model();
  const auto tokens = tokenize("you like a ball");
  for (auto _ : state) {
    Parser parser(model);
    benchmark::DoNotOptimize(parser.parse(tokens));
  }
}
BENCHMARK(BM_Parse)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
