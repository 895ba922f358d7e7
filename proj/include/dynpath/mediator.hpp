#pragma once

// Per-visit linear models for the mediator process.
//
// Marginal model, among survivors at t_i:
//   M_i = m0_i + gamma_i A + theta_i' C + eta_i
// Sequential (structural) model:
//   M_i = lambda_i A + delta_i' C + sum_{k<i} b_ik M_k + eps_i
// The two are linked by gamma = (I - B)^{-1} Lambda.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dynpath/core.hpp"
#include "dynpath/linalg.hpp"

namespace dynpath {

struct MarginalFit {
  double intercept = 0.0;
  double treatment = 0.0;
  std::vector<double> covariates;
  // Standard errors in regressor order: intercept, treatment, covariates.
  std::vector<double> std_errors;
  double residual_variance = 0.0;
};

struct StructuralFit {
  double intercept = 0.0;
  double treatment = 0.0;
  std::vector<double> covariates;
  // b_ik for k < i
  std::vector<double> past;
  // intercept, treatment, covariates, past mediators
  std::vector<double> std_errors;
  double residual_variance = 0.0;
};

// Result at one schedule index; `fit` is empty when the regression could not
// be run and `reason` says why.
template <class Fit>
struct IndexFit {
  Time time = 0.0;
  std::size_t survivors = 0;
  std::optional<Fit> fit;
  std::string reason;
};

template <class Fit>
struct PerIndexCoefficients {
  std::vector<IndexFit<Fit>> indices;

  std::size_t size() const noexcept { return indices.size(); }
  bool available(std::size_t i) const { return i < indices.size() && indices[i].fit.has_value(); }

  const Fit& at(std::size_t i) const {
    if (i >= indices.size()) throw Error("mediator coefficients: index " + std::to_string(i) + " out of range");
    if (!indices[i].fit)
      throw Error("mediator coefficients: index " + std::to_string(i) + " unavailable (" +
                  indices[i].reason + ")");
    return *indices[i].fit;
  }
};

using MediatorCoefficients = PerIndexCoefficients<MarginalFit>;
using StructuralCoefficients = PerIndexCoefficients<StructuralFit>;

namespace detail {

// Survivors at t_i and the regression of M_i on (1, A, C[, M_0..M_{i-1}]).
inline std::optional<Regression> regress_visit(const Dataset& data, std::size_t i, bool with_past,
                                               std::size_t& survivors, std::string& reason) {
  const Time ti = data.schedule()[i];
  std::vector<const SubjectRecord*> rows;
  for (const auto& s : data.subjects())
    if (s.followup >= ti) rows.push_back(&s);
  survivors = rows.size();

  const std::size_t p = data.covariate_count();
  const std::size_t q = 2 + p + (with_past ? i : 0);
  if (survivors <= q) {
    reason = "too few survivors (" + std::to_string(survivors) + ") for " + std::to_string(q) + " regressors";
    return std::nullopt;
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(survivors), static_cast<Eigen::Index>(q));
  Eigen::VectorXd y(static_cast<Eigen::Index>(survivors));
  for (std::size_t r = 0; r < survivors; ++r) {
    const auto& s = *rows[r];
    const auto row = static_cast<Eigen::Index>(r);
    Eigen::Index j = 0;
    x(row, j++) = 1.0;
    x(row, j++) = s.treatment;
    for (double c : s.baseline) x(row, j++) = c;
    if (with_past)
      for (std::size_t k = 0; k < i; ++k) x(row, j++) = s.mediators[k];
    y(row) = s.mediators[i];
  }
  if (!LeastSquares(x).full_rank()) {
    reason = "collinear design";
    return std::nullopt;
  }
  return ols(x, y);
}

}  // namespace detail

inline MediatorCoefficients fit_marginal(const Dataset& data) {
  MediatorCoefficients out;
  const std::size_t p = data.covariate_count();
  for (std::size_t i = 0; i < data.schedule().size(); ++i) {
    IndexFit<MarginalFit> slot;
    slot.time = data.schedule()[i];
    if (auto reg = detail::regress_visit(data, i, false, slot.survivors, slot.reason)) {
      MarginalFit f;
      f.intercept = reg->coef[0];
      f.treatment = reg->coef[1];
      f.covariates.assign(reg->coef.begin() + 2, reg->coef.begin() + 2 + static_cast<std::ptrdiff_t>(p));
      f.std_errors = reg->std_errors;
      f.residual_variance = reg->residual_variance;
      slot.fit = std::move(f);
    }
    out.indices.push_back(std::move(slot));
  }
  return out;
}

inline StructuralCoefficients fit_sequential(const Dataset& data) {
  StructuralCoefficients out;
  const auto p = static_cast<std::ptrdiff_t>(data.covariate_count());
  for (std::size_t i = 0; i < data.schedule().size(); ++i) {
    IndexFit<StructuralFit> slot;
    slot.time = data.schedule()[i];
    if (auto reg = detail::regress_visit(data, i, true, slot.survivors, slot.reason)) {
      StructuralFit f;
      f.intercept = reg->coef[0];
      f.treatment = reg->coef[1];
      f.covariates.assign(reg->coef.begin() + 2, reg->coef.begin() + 2 + p);
      f.past.assign(reg->coef.begin() + 2 + p, reg->coef.end());
      f.std_errors = reg->std_errors;
      f.residual_variance = reg->residual_variance;
      slot.fit = std::move(f);
    }
    out.indices.push_back(std::move(slot));
  }
  return out;
}

// gamma = (I - B)^{-1} Lambda by forward substitution; B strictly lower triangular.
inline std::vector<double> gamma_from_structural(std::span<const double> lambdas,
                                                 const Eigen::MatrixXd& b) {
  const auto n = static_cast<Eigen::Index>(lambdas.size());
  if (b.rows() != n || b.cols() != n)
    throw Error("gamma_from_structural: B must be " + std::to_string(n) + "x" + std::to_string(n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = i; k < n; ++k)
      if (b(i, k) != 0.0) throw Error("gamma_from_structural: B must be strictly lower triangular");
  std::vector<double> gamma(lambdas.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    double g = lambdas[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < i; ++k) g += b(i, k) * gamma[static_cast<std::size_t>(k)];
    gamma[static_cast<std::size_t>(i)] = g;
  }
  return gamma;
}

}  // namespace dynpath
