#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>

#include "semboot/distributions.hpp"

namespace semboot {

struct AlphaConfig {
  double alpha = 1.0;    // p_r, p_h, p_l
  double alpha_t = 10.0;
  double alpha_w = 0.25;
};

// The full parameter set: root, tree, shell, LF and word distributions.
class Model {
 public:
  explicit Model(const AlphaConfig& alphas = {});

  DirichletProcess p_r;  // "" -> root category
  DirichletProcess p_t;  // category -> "leaf" | "L R rule" | "T NP"
  DirichletProcess p_h;  // category -> shell LF
  DirichletProcess p_l;  // shell LF -> LF
  DirichletProcess p_w;  // LF -> space-joined words

  std::set<std::string> seen_words;
  std::int64_t examples_seen = 0;

  bool word_seen(const std::string& w) const { return seen_words.count(w) > 0; }

  std::string to_json() const;
  static Model from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static Model load(const std::filesystem::path& path);
};

}  // namespace semboot
