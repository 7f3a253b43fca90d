#include "generators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "rng.hpp"

namespace netcontrast {

namespace {

std::vector<std::string> index_labels(std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t v = 0; v < n; ++v) labels.push_back(std::to_string(v));
  return labels;
}

}  // namespace

Graph gilbert(std::size_t n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::invalid_argument, "gilbert p must lie in [0, 1]");
  Rng rng(seed);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < p) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j), 1.0});
  return Graph(false, index_labels(n), std::move(edges));
}

Graph price(std::size_t n, std::size_t out_links, double attractiveness, std::uint64_t seed) {
  const std::size_t c = out_links;
  if (c < 1) fail(ErrorCode::invalid_argument, "price needs at least one out-link per node");
  if (!(attractiveness > 0.0)) fail(ErrorCode::invalid_argument, "price attractiveness must be positive");
  if (n <= c) fail(ErrorCode::invalid_argument, "price needs n > c");

  Rng rng(seed);
  std::vector<Edge> edges;
  edges.reserve(c * (c + 1) / 2 + c * (n - c - 1));
  // One entry per edge target: drawing uniformly from it samples by in-degree.
  std::vector<NodeId> targets_by_edge;
  targets_by_edge.reserve(edges.capacity());
  for (std::size_t i = 1; i <= c; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j), 1.0});
      targets_by_edge.push_back(static_cast<NodeId>(j));
    }
  }

  std::vector<NodeId> chosen;
  for (std::size_t v = c + 1; v < n; ++v) {
    const double in_mass = static_cast<double>(targets_by_edge.size());
    const double total = in_mass + attractiveness * static_cast<double>(v);
    chosen.clear();
    while (chosen.size() < c) {
      NodeId pick;
      if (rng.uniform() * total < in_mass)
        pick = targets_by_edge[rng.below(targets_by_edge.size())];
      else
        pick = static_cast<NodeId>(rng.below(v));
      if (std::find(chosen.begin(), chosen.end(), pick) == chosen.end()) chosen.push_back(pick);
    }
    for (NodeId t : chosen) {
      edges.push_back({static_cast<NodeId>(v), t, 1.0});
      targets_by_edge.push_back(t);
    }
  }
  return Graph(true, index_labels(n), std::move(edges));
}

Graph generate(const GeneratorSpec& spec) {
  switch (spec.kind) {
    case GeneratorKind::gilbert: return gilbert(spec.n, spec.p, spec.seed);
    case GeneratorKind::price: return price(spec.n, spec.out_links, spec.attractiveness, spec.seed);
  }
  fail(ErrorCode::internal, "unknown generator");
}

void to_json(nlohmann::json& j, const GeneratorSpec& spec) {
  if (spec.kind == GeneratorKind::gilbert) {
    j = {{"kind", "gilbert"}, {"n", spec.n}, {"p", spec.p}, {"seed", spec.seed}};
  } else {
    j = {{"kind", "price"},
         {"n", spec.n},
         {"c", spec.out_links},
         {"a", spec.attractiveness},
         {"seed", spec.seed}};
  }
}

GeneratorSpec generator_spec_from_json(const nlohmann::json& j) {
  try {
    GeneratorSpec spec;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "gilbert") {
      spec.kind = GeneratorKind::gilbert;
      spec.p = j.at("p").get<double>();
    } else if (kind == "price") {
      spec.kind = GeneratorKind::price;
      spec.out_links = j.value("c", std::size_t{3});
      spec.attractiveness = j.value("a", 1.0);
    } else {
      fail(ErrorCode::invalid_argument, "unknown generator kind '" + kind + "'");
    }
    spec.n = j.at("n").get<std::size_t>();
    spec.seed = j.value("seed", std::uint64_t{42});
    return spec;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("malformed generator spec: ") + e.what());
  }
}

}  // namespace netcontrast
