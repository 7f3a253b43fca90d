#pragma once

#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace netcontrast {

/// Contrastive PCA model with two output axes.
struct CpcaModel {
  double alpha = 0.0;
  Eigen::MatrixXd components;       // d x 2, orthonormal columns (the loadings)
  Eigen::VectorXd eigenvalues;      // descending; per-axis target variance once rotated
  Eigen::VectorXd target_means;     // d
  Eigen::VectorXd background_means; // d
  Eigen::VectorXd feature_scales;   // d, all ones unless standardized
  Eigen::MatrixXd scaled_loadings;  // d x 2, each column divided by its max |entry|
  bool rotated = false;
  bool degenerate = false;

  int dims() const { return static_cast<int>(components.cols()); }
};

/// Two projected point clouds sharing the target-mean origin.
struct Embedding {
  Eigen::MatrixXd target;      // n_T x 2
  Eigen::MatrixXd background;  // n_B x 2
};

/// Population covariance (divisor n) of the column-centered matrix.
Eigen::MatrixXd covariance(const Eigen::MatrixXd& x);

/// Top eigenvectors of C_T - alpha * C_B. Each column is oriented so its
/// largest-magnitude entry is positive. When the contrast matrix vanishes the
/// model is flagged degenerate and uses the canonical axes.
CpcaModel fit_cpca(const Eigen::MatrixXd& target, const Eigen::MatrixXd& background, double alpha,
                   int d_prime = 2, bool standardize = false);

/// ((X - target means) / scales) * W.
Eigen::MatrixXd project(const Eigen::MatrixXd& x, const CpcaModel& model);

Embedding embed(const Eigen::MatrixXd& target, const Eigen::MatrixXd& background, const CpcaModel& model);

/// Sum of per-column variances.
double trace_variance(const Eigen::MatrixXd& y);

/// {0} followed by 40 log-spaced values in [0.1, 1000].
std::vector<double> default_alpha_grid();

struct AlphaScore {
  double alpha = 0.0;
  double score = 0.0;
};

/// Scores every grid value by var(Y_T) / (1e-12 + var(Y_B)); returns the
/// best, ties going to the smaller alpha.
double auto_alpha(const Eigen::MatrixXd& target, const Eigen::MatrixXd& background,
                  const std::vector<double>& grid = default_alpha_grid(), bool standardize = false,
                  std::vector<AlphaScore>* scores = nullptr);

/// Flips any axis whose concatenated target+background coordinates
/// anti-correlate with the previous embedding.
CpcaModel stabilize_signs(const Embedding& previous, CpcaModel model, const Eigen::MatrixXd& target,
                          const Eigen::MatrixXd& background);

/// W' = W R(theta). Eigenvalues become per-axis projected target variances.
CpcaModel rotate(const CpcaModel& model, double theta, const Eigen::MatrixXd& target);

/// Columns divided by their max |entry|; zero columns stay zero and set
/// `degenerate` when given.
Eigen::MatrixXd scaled_loadings(const Eigen::MatrixXd& components, bool* degenerate = nullptr);

Eigen::Matrix2d rotation_matrix(double theta);

void to_json(nlohmann::json& j, const CpcaModel& model);
CpcaModel cpca_model_from_json(const nlohmann::json& j);

}  // namespace netcontrast
