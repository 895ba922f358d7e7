#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "dynpath/core.hpp"

namespace dynpath {

// Designs whose smallest/largest singular value ratio falls below this are
// treated as rank deficient.
inline constexpr double kRankTolerance = 1e-10;

// Householder QR of a tall design. The rank test runs on the singular values
// of the triangular factor, which are those of the design itself.
class LeastSquares {
 public:
  explicit LeastSquares(const Eigen::Ref<const Eigen::MatrixXd>& design)
      : rows_(design.rows()), cols_(design.cols()) {
    if (rows_ < cols_ || cols_ == 0) return;
    qr_.compute(design);
    const Eigen::MatrixXd r = qr_.matrixQR().topRows(cols_).triangularView<Eigen::Upper>();
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues();
    const double largest = sv(0);
    const double smallest = sv(sv.size() - 1);
    full_rank_ = largest > 0.0 && smallest / largest >= kRankTolerance;
  }

  bool full_rank() const noexcept { return full_rank_; }
  Eigen::Index rows() const noexcept { return rows_; }
  Eigen::Index cols() const noexcept { return cols_; }

  Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd>& response) const {
    if (!full_rank_) throw Error("least squares: rank-deficient design");
    return qr_.solve(response);
  }

  // (X'X)^{-1} = R^{-1} R^{-T}
  Eigen::MatrixXd gram_inverse() const {
    if (!full_rank_) throw Error("least squares: rank-deficient design");
    const auto r = qr_.matrixQR().topRows(cols_).triangularView<Eigen::Upper>();
    Eigen::MatrixXd r_inv = Eigen::MatrixXd::Identity(cols_, cols_);
    r.solveInPlace(r_inv);
    return r_inv * r_inv.transpose();
  }

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
  bool full_rank_ = false;
};

// Ordinary least squares with the usual unbiased residual variance.
struct Regression {
  std::vector<double> coef;
  std::vector<double> std_errors;
  double residual_variance = 0.0;
  std::size_t n = 0;
};

inline Regression ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
  LeastSquares ls(design);
  if (design.rows() <= design.cols()) throw Error("regression: too few observations");
  if (!ls.full_rank()) throw Error("regression: collinear design");
  const Eigen::VectorXd beta = ls.solve(response);
  const Eigen::VectorXd resid = response - design * beta;
  const auto dof = static_cast<double>(design.rows() - design.cols());
  Regression out;
  out.n = static_cast<std::size_t>(design.rows());
  out.residual_variance = resid.squaredNorm() / dof;
  const Eigen::MatrixXd cov = ls.gram_inverse() * out.residual_variance;
  out.coef.assign(beta.data(), beta.data() + beta.size());
  for (Eigen::Index j = 0; j < cov.rows(); ++j) out.std_errors.push_back(std::sqrt(cov(j, j)));
  return out;
}

}  // namespace dynpath
