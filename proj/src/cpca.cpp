#include "cpca.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "error.hpp"

namespace netcontrast {

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x) {
  if (x.rows() < 2) fail(ErrorCode::invalid_argument, "covariance needs at least two rows");
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::MatrixXd c = (centered.transpose() * centered) / static_cast<double>(x.rows());
  // Exact symmetry; the product above is symmetric only up to rounding.
  return (c + c.transpose()) * 0.5;
}

Eigen::MatrixXd scaled_loadings(const Eigen::MatrixXd& components, bool* degenerate) {
  Eigen::MatrixXd scaled = components;
  for (Eigen::Index j = 0; j < components.cols(); ++j) {
    const double peak = components.col(j).cwiseAbs().maxCoeff();
    if (peak > 0.0) {
      scaled.col(j) /= peak;
    } else {
      scaled.col(j).setZero();
      if (degenerate) *degenerate = true;
    }
  }
  return scaled;
}

namespace {

void check_inputs(const Eigen::MatrixXd& target, const Eigen::MatrixXd& background) {
  if (target.cols() != background.cols())
    fail(ErrorCode::invalid_argument, "target and background must have the same number of features");
  if (!target.allFinite() || !background.allFinite())
    fail(ErrorCode::invalid_argument, "feature matrices contain non-finite values");
}

Eigen::VectorXd column_scales(const Eigen::MatrixXd& target, bool standardize) {
  Eigen::VectorXd scales = Eigen::VectorXd::Ones(target.cols());
  if (!standardize) return scales;
  const Eigen::RowVectorXd mean = target.colwise().mean();
  for (Eigen::Index j = 0; j < target.cols(); ++j) {
    const double sd = std::sqrt((target.col(j).array() - mean(j)).square().mean());
    if (sd > 0.0) scales(j) = sd;
  }
  return scales;
}

}  // namespace

CpcaModel fit_cpca(const Eigen::MatrixXd& target, const Eigen::MatrixXd& background, double alpha,
                   int d_prime, bool standardize) {
  check_inputs(target, background);
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    fail(ErrorCode::invalid_argument, "alpha must be a finite non-negative number");
  const Eigen::Index d = target.cols();
  if (d_prime < 1 || d < d_prime)
    fail(ErrorCode::invalid_argument, "need at least " + std::to_string(d_prime) + " features, got " +
                                          std::to_string(d));

  CpcaModel model;
  model.alpha = alpha;
  model.feature_scales = column_scales(target, standardize);
  model.target_means = target.colwise().mean().transpose();
  model.background_means = background.colwise().mean().transpose();

  const Eigen::VectorXd inv = model.feature_scales.cwiseInverse();
  const Eigen::MatrixXd ct = covariance(target * inv.asDiagonal());
  const Eigen::MatrixXd cb = covariance(background * inv.asDiagonal());
  const Eigen::MatrixXd contrast = ct - alpha * cb;

  const double magnitude =
      std::max({1.0, ct.cwiseAbs().maxCoeff(), alpha * cb.cwiseAbs().maxCoeff()});
  if (contrast.cwiseAbs().maxCoeff() <= 1e-12 * magnitude) {
    model.degenerate = true;
    model.components = Eigen::MatrixXd::Identity(d, d_prime);
    model.eigenvalues = Eigen::VectorXd::Zero(d_prime);
    model.scaled_loadings = scaled_loadings(model.components);
    return model;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(contrast);
  if (solver.info() != Eigen::Success) fail(ErrorCode::numerical, "eigendecomposition failed");
  model.components.resize(d, d_prime);
  model.eigenvalues.resize(d_prime);
  for (int k = 0; k < d_prime; ++k) {
    const Eigen::Index src = d - 1 - k;  // ascending order from the solver
    Eigen::VectorXd w = solver.eigenvectors().col(src);
    Eigen::Index at = 0;
    w.cwiseAbs().maxCoeff(&at);
    if (w(at) < 0.0) w = -w;
    model.components.col(k) = w;
    model.eigenvalues(k) = solver.eigenvalues()(src);
  }
  model.scaled_loadings = scaled_loadings(model.components, &model.degenerate);
  return model;
}

Eigen::MatrixXd project(const Eigen::MatrixXd& x, const CpcaModel& model) {
  if (x.cols() != model.components.rows())
    fail(ErrorCode::invalid_argument, "matrix has " + std::to_string(x.cols()) +
                                          " features but the model expects " +
                                          std::to_string(model.components.rows()));
  const Eigen::MatrixXd centered = x.rowwise() - model.target_means.transpose();
  return centered * model.feature_scales.cwiseInverse().asDiagonal() * model.components;
}

Embedding embed(const Eigen::MatrixXd& target, const Eigen::MatrixXd& background, const CpcaModel& model) {
  return {project(target, model), project(background, model)};
}

double trace_variance(const Eigen::MatrixXd& y) {
  if (y.rows() == 0) return 0.0;
  const Eigen::RowVectorXd mean = y.colwise().mean();
  return (y.rowwise() - mean).array().square().sum() / static_cast<double>(y.rows());
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid{0.0};
  constexpr int count = 40;
  const double lo = std::log10(0.1);
  const double hi = std::log10(1000.0);
  for (int i = 0; i < count; ++i)
    grid.push_back(std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / (count - 1)));
  return grid;
}

double auto_alpha(const Eigen::MatrixXd& target, const Eigen::MatrixXd& background,
                  const std::vector<double>& grid, bool standardize, std::vector<AlphaScore>* scores) {
  if (grid.empty()) fail(ErrorCode::invalid_argument, "alpha grid is empty");
  constexpr double eps0 = 1e-12;
  bool found = false;
  double best_alpha = 0.0;
  double best_score = 0.0;
  for (double alpha : grid) {
    const CpcaModel model = fit_cpca(target, background, alpha, 2, standardize);
    const double score =
        trace_variance(project(target, model)) / (eps0 + trace_variance(project(background, model)));
    if (scores) scores->push_back({alpha, score});
    if (!std::isfinite(score)) continue;
    if (!found || score > best_score || (score == best_score && alpha < best_alpha)) {
      found = true;
      best_alpha = alpha;
      best_score = score;
    }
  }
  if (!found) fail(ErrorCode::numerical, "no alpha on the grid produced a finite score");
  return best_alpha;
}

CpcaModel stabilize_signs(const Embedding& previous, CpcaModel model, const Eigen::MatrixXd& target,
                          const Eigen::MatrixXd& background) {
  if (previous.target.rows() != target.rows() || previous.background.rows() != background.rows())
    fail(ErrorCode::invalid_argument, "previous embedding covers a different node set");
  const Embedding current = embed(target, background, model);
  for (Eigen::Index j = 0; j < model.components.cols() && j < previous.target.cols(); ++j) {
    const double dot = previous.target.col(j).dot(current.target.col(j)) +
                       previous.background.col(j).dot(current.background.col(j));
    const double nu = std::sqrt(previous.target.col(j).squaredNorm() + previous.background.col(j).squaredNorm());
    const double nv = std::sqrt(current.target.col(j).squaredNorm() + current.background.col(j).squaredNorm());
    if (nu == 0.0 || nv == 0.0) continue;
    if (dot / (nu * nv) < 0.0) {
      model.components.col(j) *= -1.0;
      model.scaled_loadings.col(j) *= -1.0;
    }
  }
  return model;
}

Eigen::Matrix2d rotation_matrix(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

CpcaModel rotate(const CpcaModel& model, double theta, const Eigen::MatrixXd& target) {
  if (model.components.cols() != 2) fail(ErrorCode::invalid_argument, "rotation needs exactly two axes");
  if (theta == 0.0) return model;
  CpcaModel rotated = model;
  rotated.components = model.components * rotation_matrix(theta);
  bool degenerate = false;
  rotated.scaled_loadings = scaled_loadings(rotated.components, &degenerate);
  const Eigen::MatrixXd y = project(target, rotated);
  const Eigen::RowVectorXd mean = y.colwise().mean();
  rotated.eigenvalues =
      ((y.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(std::max<Eigen::Index>(y.rows(), 1)))
          .transpose();
  rotated.rotated = true;
  rotated.degenerate = model.degenerate || degenerate;
  return rotated;
}

namespace {

nlohmann::json matrix_rows(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_values(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::MatrixXd rows_matrix(const nlohmann::json& rows, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<Eigen::Index>(rows[r].size()) != cols)
      fail(ErrorCode::parse_error, "ragged matrix in model JSON");
    for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void to_json(nlohmann::json& j, const CpcaModel& model) {
  j = {{"alpha", model.alpha},
       {"components", matrix_rows(model.components)},
       {"eigenvalues", vector_values(model.eigenvalues)},
       {"scaled_loadings", matrix_rows(model.scaled_loadings)},
       {"rotated", model.rotated},
       {"degenerate", model.degenerate},
       {"target_means", vector_values(model.target_means)},
       {"background_means", vector_values(model.background_means)},
       {"feature_scales", vector_values(model.feature_scales)}};
}

CpcaModel cpca_model_from_json(const nlohmann::json& j) {
  try {
    CpcaModel model;
    model.alpha = j.at("alpha").get<double>();
    model.eigenvalues = vector_from(j.at("eigenvalues"));
    const Eigen::Index dims = model.eigenvalues.size();
    model.components = rows_matrix(j.at("components"), dims);
    model.scaled_loadings = rows_matrix(j.at("scaled_loadings"), dims);
    model.rotated = j.at("rotated").get<bool>();
    model.degenerate = j.at("degenerate").get<bool>();
    model.target_means = vector_from(j.at("target_means"));
    model.background_means = vector_from(j.at("background_means"));
    model.feature_scales = vector_from(j.at("feature_scales"));
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse_error, std::string("malformed model JSON: ") + e.what());
  }
}

}  // namespace netcontrast
