#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "graph.hpp"

namespace netcontrast {

enum class GeneratorKind { gilbert, price };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::gilbert;
  std::size_t n = 0;
  double p = 0.0;            // gilbert
  std::size_t out_links = 3; // price
  double attractiveness = 1.0;
  std::uint64_t seed = 42;
};

/// Undirected G(n, p): every unordered pair is an edge independently.
Graph gilbert(std::size_t n, double p, std::uint64_t seed);

/// Directed Price network. Nodes 0..c form a clique oriented from higher to
/// lower index; every later node links to c distinct earlier nodes chosen
/// with probability proportional to in-degree + attractiveness.
Graph price(std::size_t n, std::size_t out_links, double attractiveness, std::uint64_t seed);

Graph generate(const GeneratorSpec& spec);

void to_json(nlohmann::json& j, const GeneratorSpec& spec);
GeneratorSpec generator_spec_from_json(const nlohmann::json& j);

}  // namespace netcontrast
