#pragma once

// Least-squares primitives shared by the stepwise selector. Everything is
// templated on the Eigen scalar so the same code runs in float, double, or
// long double; the library itself instantiates double.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "nstload/error.hpp"

namespace nstload {

template <typename Scalar>
struct OlsFit {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Scalar intercept{0};
  Vector coefficients;
  Vector residuals;
  Scalar r2{0};
};

namespace detail {

inline std::string column_label(std::span<const std::string> names, Eigen::Index j) {
  if (static_cast<std::size_t>(j) < names.size()) return names[static_cast<std::size_t>(j)];
  return "column " + std::to_string(j);
}

}  // namespace detail

/// Sample standard deviation (n - 1 denominator).
template <typename Derived>
typename Derived::Scalar sample_sd(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const auto n = v.size();
  if (n < 2) return Scalar(0);
  const Scalar mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / Scalar(n - 1));
}

/// Ordinary least squares with an intercept.
///
/// Columns are centred and scaled to unit norm before a column-pivoting
/// Householder QR, so rank decisions do not depend on the units of any
/// column. Requires n >= p + 2, finite data, no constant column, and a
/// target with non-zero variance.
template <typename DerivedX, typename DerivedY>
OlsFit<typename DerivedX::Scalar> fit_ols(const Eigen::MatrixBase<DerivedX>& X,
                                         const Eigen::MatrixBase<DerivedY>& y,
                                         std::span<const std::string> names = {}) {
  using Scalar = typename DerivedX::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (y.size() != n) {
    throw Error(ErrorCode::invalid_argument, "design has " + std::to_string(n) + " rows but target has " +
                                                 std::to_string(y.size()));
  }
  if (n < p + 2) {
    throw Error(ErrorCode::insufficient_data, "need at least " + std::to_string(p + 2) +
                                                  " observations for " + std::to_string(p) +
                                                  " predictors, got " + std::to_string(n));
  }
  if (!X.allFinite() || !y.allFinite()) {
    throw Error(ErrorCode::invalid_argument, "design or target contains non-finite values");
  }

  const Scalar y_mean = y.mean();
  const Vector yc = y.array() - y_mean;
  const Scalar ss_tot = yc.squaredNorm();
  const Scalar eps = Eigen::NumTraits<Scalar>::epsilon();
  if (!(ss_tot > Scalar(256) * eps * eps * y.squaredNorm())) {
    throw Error(ErrorCode::degenerate_target, "target has zero variance");
  }

  OlsFit<Scalar> fit;
  if (p == 0) {
    fit.intercept = y_mean;
    fit.coefficients = Vector(0);
    fit.residuals = yc;
    fit.r2 = Scalar(0);
    return fit;
  }

  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> x_mean = X.colwise().mean();
  Matrix Xc = X.rowwise() - x_mean;
  Vector scale(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const Scalar norm = Xc.col(j).norm();
    const Scalar magnitude = X.col(j).cwiseAbs().maxCoeff();
    if (!(norm > Scalar(16) * eps * std::sqrt(Scalar(n)) * magnitude)) {
      throw Error(ErrorCode::singular_design, detail::column_label(names, j) + " is constant");
    }
    scale(j) = norm;
    Xc.col(j) /= norm;
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(Xc);
  qr.setThreshold(Eigen::NumTraits<Scalar>::dummy_precision());
  if (qr.rank() < p) {
    std::string dependent;
    for (Eigen::Index k = qr.rank(); k < p; ++k) {
      if (!dependent.empty()) dependent += ", ";
      dependent += detail::column_label(names, qr.colsPermutation().indices()(k));
    }
    throw Error(ErrorCode::singular_design, "rank-deficient design; linearly dependent: " + dependent);
  }

  const Vector beta_scaled = qr.solve(yc);
  fit.coefficients = beta_scaled.cwiseQuotient(scale);
  fit.intercept = y_mean - x_mean.dot(fit.coefficients);
  fit.residuals = yc - Xc * beta_scaled;
  fit.r2 = std::clamp(Scalar(1) - fit.residuals.squaredNorm() / ss_tot, Scalar(0), Scalar(1));
  return fit;
}

/// 1 - (1 - r2)(n - 1)/(n - p - 1). Undefined unless n > p + 1.
template <typename Scalar>
Scalar adjusted_r2(Scalar r2, Eigen::Index n, Eigen::Index p) {
  if (p < 0 || n <= p + 1) {
    throw Error(ErrorCode::undefined_adjustment, "adjusted R^2 needs n > p + 1 (n = " + std::to_string(n) +
                                                     ", p = " + std::to_string(p) + ")");
  }
  if (p == 0) return r2;
  return Scalar(1) - (Scalar(1) - r2) * Scalar(n - 1) / Scalar(n - p - 1);
}

/// b_j * s(x_j) / s(y), sample standard deviations.
template <typename DerivedB, typename DerivedX, typename DerivedY>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, 1> standardized_coefficients(
    const Eigen::MatrixBase<DerivedB>& coefficients, const Eigen::MatrixBase<DerivedX>& X,
    const Eigen::MatrixBase<DerivedY>& y, std::span<const std::string> names = {}) {
  using Scalar = typename DerivedX::Scalar;
  if (coefficients.size() != X.cols() || y.size() != X.rows()) {
    throw Error(ErrorCode::invalid_argument, "coefficient/design/target sizes disagree");
  }
  const Scalar sy = sample_sd(y);
  if (!(sy > Scalar(0))) throw Error(ErrorCode::degenerate_target, "target has zero variance");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const Scalar sx = sample_sd(X.col(j));
    if (!(sx > Scalar(0))) {
      throw Error(ErrorCode::degenerate_target, detail::column_label(names, j) + " has zero variance");
    }
    out(j) = coefficients(j) * sx / sy;
  }
  return out;
}

/// 1 - R^2 of `candidate` regressed (with intercept) on `selected`; 1 when
/// nothing is selected. Low values flag multicollinearity.
template <typename DerivedC, typename DerivedS>
typename DerivedC::Scalar tolerance(const Eigen::MatrixBase<DerivedC>& candidate,
                                    const Eigen::MatrixBase<DerivedS>& selected,
                                    std::span<const std::string> selected_names = {}) {
  using Scalar = typename DerivedC::Scalar;
  if (selected.cols() == 0) return Scalar(1);
  const auto fit = fit_ols(selected, candidate, selected_names);
  return std::clamp(Scalar(1) - fit.r2, Scalar(0), Scalar(1));
}

}  // namespace nstload
