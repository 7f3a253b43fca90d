#include "layout.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "rng.hpp"

namespace netcontrast {

namespace {

constexpr int kMaxDepth = 48;

class QuadTree {
 public:
  explicit QuadTree(const Eigen::MatrixXd& xy) : xy_(xy) {
    const Eigen::Vector2d lo = xy.colwise().minCoeff().transpose();
    const Eigen::Vector2d hi = xy.colwise().maxCoeff().transpose();
    const double width = std::max((hi - lo).maxCoeff(), 1e-9) * 1.0001;
    cells_.reserve(static_cast<std::size_t>(xy.rows()) * 2 + 1);
    cells_.push_back(Cell{lo, width});
    for (Eigen::Index i = 0; i < xy.rows(); ++i) insert(0, static_cast<int>(i), 0);
    finalize(0);
  }

  /// Repulsive force on point i from all other points.
  Eigen::Vector2d repulsion(int i, double strength, double theta) const {
    Eigen::Vector2d force = Eigen::Vector2d::Zero();
    accumulate(0, i, strength, theta * theta, force);
    return force;
  }

 private:
  struct Cell {
    Eigen::Vector2d corner;
    double width = 0.0;
    Eigen::Vector2d center_of_mass = Eigen::Vector2d::Zero();
    double mass = 0.0;
    std::array<int, 4> children{-1, -1, -1, -1};
    std::vector<int> points;  // only in leaves
    bool leaf = true;
  };

  int quadrant(const Cell& cell, const Eigen::Vector2d& p) const {
    const double half = cell.width / 2;
    return (p.x() >= cell.corner.x() + half ? 1 : 0) + (p.y() >= cell.corner.y() + half ? 2 : 0);
  }

  int child(int c, int q) {
    if (cells_[c].children[q] < 0) {
      const double half = cells_[c].width / 2;
      Eigen::Vector2d corner = cells_[c].corner;
      if (q & 1) corner.x() += half;
      if (q & 2) corner.y() += half;
      cells_[c].children[q] = static_cast<int>(cells_.size());
      cells_.push_back(Cell{corner, half});
    }
    return cells_[c].children[q];
  }

  void insert(int c, int i, int depth) {
    if (cells_[c].leaf) {
      if (cells_[c].points.empty() || depth >= kMaxDepth) {
        cells_[c].points.push_back(i);
        return;
      }
      // Split: push the existing points one level down.
      std::vector<int> moved = std::move(cells_[c].points);
      cells_[c].points.clear();
      cells_[c].leaf = false;
      for (int j : moved) insert(child(c, quadrant(cells_[c], xy_.row(j).transpose())), j, depth + 1);
    }
    insert(child(c, quadrant(cells_[c], xy_.row(i).transpose())), i, depth + 1);
  }

  void finalize(int c) {
    Cell& cell = cells_[c];
    Eigen::Vector2d weighted = Eigen::Vector2d::Zero();
    double mass = 0.0;
    if (cell.leaf) {
      for (int i : cell.points) {
        weighted += xy_.row(i).transpose();
        mass += 1.0;
      }
    } else {
      for (int q = 0; q < 4; ++q) {
        const int k = cells_[c].children[q];
        if (k < 0) continue;
        finalize(k);
        weighted += cells_[k].center_of_mass * cells_[k].mass;
        mass += cells_[k].mass;
      }
    }
    cells_[c].mass = mass;
    if (mass > 0) cells_[c].center_of_mass = weighted / mass;
  }

  void accumulate(int c, int i, double strength, double theta2, Eigen::Vector2d& force) const {
    const Cell& cell = cells_[c];
    if (cell.mass == 0.0) return;
    const Eigen::Vector2d p = xy_.row(i).transpose();
    if (cell.leaf) {
      for (int j : cell.points) {
        if (j == i) continue;
        const Eigen::Vector2d delta = p - xy_.row(j).transpose();
        const double d2 = delta.squaredNorm();
        if (d2 > 0.0) force += delta * (strength / d2);
      }
      return;
    }
    const Eigen::Vector2d delta = p - cell.center_of_mass;
    const double d2 = delta.squaredNorm();
    if (d2 > 0.0 && cell.width * cell.width < theta2 * d2) {
      force += delta * (strength * cell.mass / d2);
      return;
    }
    for (int k : cell.children)
      if (k >= 0) accumulate(k, i, strength, theta2, force);
  }

  const Eigen::MatrixXd& xy_;
  std::vector<Cell> cells_;
};

}  // namespace

LayoutPositions force_layout(const Graph& graph, const LayoutParams& params, const ProgressFn& progress,
                             std::stop_token stop) {
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  if (n < 1) fail(ErrorCode::invalid_argument, "layout needs at least one node");
  if (params.iterations < 0) fail(ErrorCode::invalid_argument, "iterations must be non-negative");
  const double k = params.optimal_distance.value_or(1.0);
  if (!(k > 0.0)) fail(ErrorCode::invalid_argument, "optimal distance must be positive");

  LayoutPositions out;
  out.seed = params.seed;
  if (n == 1) {
    out.xy = Eigen::MatrixXd::Zero(1, 2);
    return out;
  }

  Rng rng(params.seed);
  const double side = k * std::sqrt(static_cast<double>(n));
  Eigen::MatrixXd xy(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    xy(i, 0) = rng.uniform() * side;
    xy(i, 1) = rng.uniform() * side;
  }

  const double strength = params.repulsion * k * k;
  double step = k;
  double energy = std::numeric_limits<double>::infinity();
  int improving = 0;
  constexpr double cooling = 0.9;

  Eigen::MatrixXd force(n, 2);
  int it = 0;
  for (; it < params.iterations; ++it) {
    if (stop.stop_requested()) fail(ErrorCode::cancelled, "layout cancelled");
    const QuadTree tree(xy);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Vector2d f = tree.repulsion(static_cast<int>(i), strength, params.theta);
      const Eigen::Vector2d p = xy.row(i).transpose();
      for (NodeId u : graph.neighbors(static_cast<NodeId>(i), NeighborMode::all)) {
        const Eigen::Vector2d delta = xy.row(u).transpose() - p;
        f += delta * (delta.norm() / k);
      }
      force.row(i) = f.transpose();
    }

    const double previous = energy;
    energy = 0.0;
    double moved = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double norm = force.row(i).norm();
      energy += norm * norm;
      if (norm > 0.0) {
        const double length = std::min(step, norm);
        xy.row(i) += force.row(i) * (length / norm);
        moved += length;
      }
    }

    if (energy < previous) {
      if (++improving >= 5) {
        improving = 0;
        step /= cooling;
      }
    } else {
      improving = 0;
      step *= cooling;
    }
    if (progress && (it % 10 == 0)) progress("layout", static_cast<double>(it) / params.iterations);
    if (moved / static_cast<double>(n) < params.tolerance * k) {
      ++it;
      break;
    }
  }
  out.iterations = it;

  xy.rowwise() -= xy.colwise().mean();
  const double radius = std::sqrt(xy.rowwise().squaredNorm().mean());
  out.raw_radius = radius;
  if (radius > 0.0) xy /= radius;
  out.xy = std::move(xy);
  return out;
}

void to_json(nlohmann::json& j, const LayoutPositions& layout) {
  nlohmann::json positions = nlohmann::json::array();
  for (Eigen::Index i = 0; i < layout.xy.rows(); ++i)
    positions.push_back({layout.xy(i, 0), layout.xy(i, 1)});
  j = {{"positions", std::move(positions)}, {"seed", layout.seed}, {"iterations", layout.iterations}};
}

LayoutPositions layout_from_json(const nlohmann::json& j) {
  try {
    LayoutPositions layout;
    const auto& positions = j.at("positions");
    layout.xy.resize(static_cast<Eigen::Index>(positions.size()), 2);
    for (std::size_t i = 0; i < positions.size(); ++i) {
      layout.xy(static_cast<Eigen::Index>(i), 0) = positions[i].at(0).get<double>();
      layout.xy(static_cast<Eigen::Index>(i), 1) = positions[i].at(1).get<double>();
    }
    layout.seed = j.at("seed").get<std::uint64_t>();
    layout.iterations = j.value("iterations", 0);
    return layout;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse_error, std::string("malformed layout JSON: ") + e.what());
  }
}

}  // namespace netcontrast
