#pragma once

#include "semboot/corpus.hpp"
#include "semboot/derivation.hpp"
#include "semboot/model.hpp"

namespace semboot::testing {

inline const Corpus& svo_corpus() {
  static const Corpus corpus = generate_synthetic(SynthConfig{});
  return corpus;
}

// A model trained on the first `kTrained` SVO examples, shared by the unit tests.
inline constexpr std::size_t kTrained = 120;

inline const Model& small_svo_model() {
  static const Model model = [] {
    Model m;
    const Corpus& c = svo_corpus();
    for (std::size_t i = 0; i < kTrained; ++i) train_example(m, c.examples[i].tokens, {c.examples[i].lf});
    return m;
  }();
  return model;
}

}  // namespace semboot::testing
