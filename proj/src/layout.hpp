#pragma once

#include <cstdint>
#include <optional>
#include <stop_token>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "features.hpp"
#include "graph.hpp"

namespace netcontrast {

struct LayoutParams {
  int iterations = 500;
  std::uint64_t seed = 42;
  double theta = 0.9;                     // Barnes-Hut opening criterion
  std::optional<double> optimal_distance; // K; 1.0 when unset
  double repulsion = 0.2;                 // C
  double tolerance = 1e-4;                // stop once mean displacement < tolerance * K
};

struct LayoutPositions {
  Eigen::MatrixXd xy;  // n x 2, centered, unit RMS radius
  std::uint64_t seed = 0;
  int iterations = 0;  // iterations actually run
  double raw_radius = 0.0;  // RMS radius before normalization
};

/// Spring-electrical placement: attraction d^2/K along edges, repulsion
/// C K^2/d between all pairs via a quadtree, adaptive step cooling.
LayoutPositions force_layout(const Graph& graph, const LayoutParams& params = {},
                             const ProgressFn& progress = {}, std::stop_token stop = {});

void to_json(nlohmann::json& j, const LayoutPositions& layout);
LayoutPositions layout_from_json(const nlohmann::json& j);

}  // namespace netcontrast
