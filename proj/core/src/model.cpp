#include "semboot/model.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace semboot {

using nlohmann::json;

Model::Model(const AlphaConfig& alphas)
    : p_r(BaseKind::CategoryGeometric, alphas.alpha),
      p_t(BaseKind::CategoryGeometric, alphas.alpha_t),
      p_h(BaseKind::LfGeometric, alphas.alpha),
      p_l(BaseKind::LfGeometric, alphas.alpha),
      p_w(BaseKind::WordGeometric, alphas.alpha_w) {}

namespace {

json dp_to_json(const DirichletProcess& dp) {
  json contexts = json::object();
  for (const auto& [ctx, c] : dp.contexts()) {
    json outcomes = json::object();
    for (const auto& [o, n] : c.outcomes) outcomes[o] = n;
    contexts[ctx] = json{{"total", c.total}, {"outcomes", std::move(outcomes)}};
  }
  return json{{"alpha", dp.alpha()}, {"base", std::string(base_kind_name(dp.base_kind()))}, {"contexts", contexts}};
}

DirichletProcess dp_from_json(const json& j) {
  DirichletProcess dp(parse_base_kind(j.at("base").get<std::string>()), j.at("alpha").get<double>());
  for (const auto& [ctx, c] : j.at("contexts").items()) {
    DirichletProcess::OutcomeMap outcomes;
    for (const auto& [o, n] : c.at("outcomes").items()) outcomes.emplace(o, n.get<double>());
    dp.restore_context(ctx, c.at("total").get<double>(), std::move(outcomes));
  }
  return dp;
}

}  // namespace

std::string Model::to_json() const {
  json j;
  j["format"] = "semboot-model";
  j["version"] = 1;
  j["examples_seen"] = examples_seen;
  j["seen_words"] = seen_words;
  j["distributions"] = json{{"p_r", dp_to_json(p_r)},
                            {"p_t", dp_to_json(p_t)},
                            {"p_h", dp_to_json(p_h)},
                            {"p_l", dp_to_json(p_l)},
                            {"p_w", dp_to_json(p_w)}};
  return j.dump(1);
}

Model Model::from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.value("format", std::string{}) != "semboot-model") throw std::runtime_error("not a semboot model file");
  Model m;
  const auto& d = j.at("distributions");
  m.p_r = dp_from_json(d.at("p_r"));
  m.p_t = dp_from_json(d.at("p_t"));
  m.p_h = dp_from_json(d.at("p_h"));
  m.p_l = dp_from_json(d.at("p_l"));
  m.p_w = dp_from_json(d.at("p_w"));
  m.examples_seen = j.at("examples_seen").get<std::int64_t>();
  for (const auto& w : j.at("seen_words")) m.seen_words.insert(w.get<std::string>());
  return m;
}

void Model::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file " + path.string());
  out << to_json() << '\n';
  if (!out) throw std::runtime_error("failed writing model file " + path.string());
}

Model Model::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read model file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace semboot
