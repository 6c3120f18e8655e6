#pragma once

// JSON descriptors for generators, test functions, partitions and experiments.

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dc_function.hpp"
#include "lab.hpp"
#include "path.hpp"

namespace loctime {

using json = nlohmann::json;

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* what) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw std::invalid_argument(std::string(what) + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace detail

inline GeneratorSpec generator_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("generator: expected an object");
  detail::reject_unknown(j, {"kind", "sigma", "mu", "lambda", "jump_lo", "jump_hi", "horizon", "x0", "steps", "seed"},
                         "generator");
  GeneratorSpec g;
  g.kind = generator_kind_from_string(detail::get_or<std::string>(j, "kind", "brownian"));
  g.sigma = detail::get_or(j, "sigma", g.sigma);
  g.mu = detail::get_or(j, "mu", g.mu);
  g.lambda = detail::get_or(j, "lambda", g.lambda);
  g.jump_lo = detail::get_or(j, "jump_lo", g.jump_lo);
  g.jump_hi = detail::get_or(j, "jump_hi", g.jump_hi);
  g.horizon = detail::get_or(j, "horizon", g.horizon);
  g.x0 = detail::get_or(j, "x0", g.x0);
  g.steps = detail::get_or(j, "steps", g.steps);
  g.seed = detail::get_or<std::uint64_t>(j, "seed", g.seed);
  g.validate();
  return g;
}

inline json to_json(const GeneratorSpec& g) {
  return json{{"kind", to_string(g.kind)}, {"sigma", g.sigma},     {"mu", g.mu},           {"lambda", g.lambda},
              {"jump_lo", g.jump_lo},      {"jump_hi", g.jump_hi}, {"horizon", g.horizon}, {"x0", g.x0},
              {"steps", g.steps},          {"seed", g.seed}};
}

// {kind: abs|relu|square|bump|affine|mix, ...}; mix takes terms: [{coef, fn}].
inline DCFunction function_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("function: expected an object");
  auto kind = detail::get_or<std::string>(j, "kind", "");
  if (kind == "abs") return make_abs(detail::get_or(j, "u", 0.0), detail::get_or(j, "scale", 0.5));
  if (kind == "relu") return make_relu(detail::get_or(j, "u", 0.0));
  if (kind == "square") return make_square();
  if (kind == "bump")
    return make_bump(detail::get_or(j, "center", 0.0), detail::get_or(j, "width", 1.0), detail::get_or(j, "amp", 1.0));
  if (kind == "affine") return make_affine(detail::get_or(j, "slope", 1.0), detail::get_or(j, "intercept", 0.0));
  if (kind == "mix") {
    if (!j.contains("terms") || !j["terms"].is_array() || j["terms"].empty())
      throw std::invalid_argument("function mix: needs a non-empty 'terms' array");
    std::vector<std::pair<double, DCFunction>> terms;
    for (const auto& t : j["terms"]) {
      if (!t.contains("fn")) throw std::invalid_argument("function mix: term without 'fn'");
      terms.emplace_back(detail::get_or(t, "coef", 1.0), function_from_json(t["fn"]));
    }
    return combine(terms, detail::get_or<std::string>(j, "name", "mix"));
  }
  throw std::invalid_argument("function: unknown kind '" + kind + "'");
}

// {kind: dyadic, levels: [...]} | {kind: uniform, counts: [...]} | {kind: explicit, times: [[...], ...]};
// include_jumps adds every marked jump time to each level.
inline PartitionScheme partition_from_json(const json& j, const SampledCadlagPath& path) {
  if (!j.is_object()) throw std::invalid_argument("partition: expected an object");
  auto kind = detail::get_or<std::string>(j, "kind", "dyadic");
  bool jumps = detail::get_or(j, "include_jumps", false);
  if (kind == "dyadic") return PartitionScheme::dyadic(path, detail::get_or(j, "levels", std::vector<int>{}), jumps);
  if (kind == "uniform") return PartitionScheme::uniform(path, detail::get_or(j, "counts", std::vector<int>{}), jumps);
  if (kind == "explicit")
    return PartitionScheme::explicit_times(path, detail::get_or(j, "times", std::vector<std::vector<double>>{}),
                                           jumps);
  throw std::invalid_argument("partition: unknown kind '" + kind + "'");
}

inline ExperimentConfig experiment_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("experiment: expected an object");
  detail::reject_unknown(j, {"generator", "estimator", "distance", "p", "weight", "ladder", "paths", "seed", "du", "t",
                             "threads"},
                         "experiment");
  ExperimentConfig c;
  if (!j.contains("generator")) throw std::invalid_argument("experiment: missing 'generator'");
  c.generator = generator_from_json(j["generator"]);
  c.estimator = estimator_from_string(detail::get_or<std::string>(j, "estimator", "K_pi"));
  c.distance = distance_from_string(detail::get_or<std::string>(j, "distance", "L1_levelgrid"));
  c.p = detail::get_or(j, "p", c.p);
  if (j.contains("weight")) c.weight = function_from_json(j["weight"]);
  c.ladder = detail::get_or(j, "ladder", std::vector<double>{});
  c.paths = detail::get_or<std::size_t>(j, "paths", c.paths);
  c.seed = detail::get_or<std::uint64_t>(j, "seed", c.seed);
  c.du = detail::get_or(j, "du", c.du);
  c.t = detail::get_or(j, "t", c.t);
  c.threads = detail::get_or<unsigned>(j, "threads", c.threads);
  c.validate();
  return c;
}

inline json load_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open '" + file + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("'" + file + "': " + e.what());
  }
}

}  // namespace loctime
