#include "nstload/regress.hpp"

#include <algorithm>
#include <numeric>

namespace nstload {

std::string_view to_string(Feature f) {
  switch (f) {
    case Feature::wmax: return "wmax";
    case Feature::wave: return "wave";
    case Feature::wsum: return "wsum";
    case Feature::log_time: return "log_time";
  }
  return "unknown";
}

std::optional<Feature> parse_feature(std::string_view name) {
  for (auto f : kAllFeatures) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

std::string_view to_string(CandidateMode m) {
  return m == CandidateMode::time_only ? "time_only" : "biometric_full";
}

std::optional<CandidateMode> parse_candidate_mode(std::string_view name) {
  if (name == "time_only") return CandidateMode::time_only;
  if (name == "biometric_full") return CandidateMode::biometric_full;
  return std::nullopt;
}

std::span<const Feature> candidate_features(CandidateMode m) {
  static constexpr std::array<Feature, 1> time_only = {Feature::log_time};
  if (m == CandidateMode::time_only) return time_only;
  return kAllFeatures;
}

std::string_view to_string(Selection s) {
  return s == Selection::forward_backward ? "forward_backward" : "forward";
}

std::optional<Selection> parse_selection(std::string_view name) {
  if (name == "forward") return Selection::forward;
  if (name == "forward_backward") return Selection::forward_backward;
  return std::nullopt;
}

bool FittedModel::includes(std::string_view name) const { return index_of(name).has_value(); }

std::optional<std::size_t> FittedModel::index_of(std::string_view name) const {
  auto it = std::find(selected.begin(), selected.end(), name);
  if (it == selected.end()) return std::nullopt;
  return static_cast<std::size_t>(it - selected.begin());
}

bool operator==(const FittedModel& a, const FittedModel& b) {
  return a.target == b.target && a.mode == b.mode && a.selected == b.selected &&
         a.intercept == b.intercept && a.coefficients == b.coefficients &&
         a.std_coefficients == b.std_coefficients && a.tolerances == b.tolerances && a.r2 == b.r2 &&
         a.adj_r2 == b.adj_r2 && a.n == b.n;
}

namespace {

Eigen::MatrixXd gather(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = X.col(cols[k]);
  return out;
}

std::vector<std::string> gather_names(std::span<const std::string> names, const std::vector<Eigen::Index>& cols) {
  std::vector<std::string> out;
  out.reserve(cols.size());
  for (auto c : cols) out.push_back(detail::column_label(names, c));
  return out;
}

// Adjusted R^2 of the model on `cols`; nullopt when it cannot be fitted.
std::optional<double> adj_r2_of(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const std::vector<Eigen::Index>& cols) {
  const auto n = X.rows();
  const auto p = static_cast<Eigen::Index>(cols.size());
  if (p == 0) return 0.0;
  if (n < p + 2) return std::nullopt;
  try {
    return adjusted_r2(fit_ols(gather(X, cols), y).r2, n, p);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::singular_design) return std::nullopt;
    throw;
  }
}

// Rows sorted lexicographically by (y, x_0, x_1, ...). Fitting in this order
// makes every result bitwise independent of the caller's row order.
Eigen::PermutationMatrix<Eigen::Dynamic> canonical_order(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(y.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (y(a) != y(b)) return y(a) < y(b);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (X(a, j) != X(b, j)) return X(a, j) < X(b, j);
    }
    return false;
  });
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(y.size());
  // Row k of the permuted matrix is row idx[k] of the original.
  for (std::size_t k = 0; k < idx.size(); ++k) perm.indices()(idx[k]) = static_cast<int>(k);
  return perm;
}

}  // namespace

FittedModel stepwise_fit(const Eigen::MatrixXd& X_in, std::span<const std::string> names,
                         const Eigen::VectorXd& y_in, const StepwiseConfig& config) {
  const Eigen::Index n = X_in.rows();
  if (y_in.size() != n) throw Error(ErrorCode::invalid_argument, "design and target row counts differ");
  if (X_in.cols() == 0) throw Error(ErrorCode::invalid_argument, "no candidate variables");
  if (n < 3) {
    throw Error(ErrorCode::insufficient_data,
                "stepwise fitting needs at least 3 rows (n >= 3), got " + std::to_string(n));
  }
  if (!X_in.allFinite() || !y_in.allFinite()) {
    throw Error(ErrorCode::invalid_argument, "design or target contains non-finite values");
  }
  const auto perm = canonical_order(X_in, y_in);
  const Eigen::MatrixXd X = perm * X_in;
  const Eigen::VectorXd y = perm * y_in;
  fit_ols(Eigen::MatrixXd(n, 0), y);  // throws on a zero-variance target

  const double threshold = config.effective_threshold();
  std::vector<Eigen::Index> selected;
  std::vector<double> admitted_tolerance;
  double current = 0.0;

  auto try_remove = [&] {
    while (selected.size() > 1) {
      std::optional<std::size_t> best_k;
      double best = current;
      for (std::size_t k = 0; k < selected.size(); ++k) {
        auto reduced = selected;
        reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(k));
        auto a = adj_r2_of(X, y, reduced);
        if (a && *a - current > config.min_improvement && (!best_k || *a > best)) {
          best = *a;
          best_k = k;
        }
      }
      if (!best_k) return;
      selected.erase(selected.begin() + static_cast<std::ptrdiff_t>(*best_k));
      admitted_tolerance.erase(admitted_tolerance.begin() + static_cast<std::ptrdiff_t>(*best_k));
      current = best;
    }
  };

  while (true) {
    std::optional<Eigen::Index> best_j;
    double best_adj = 0.0;
    double best_tol = 0.0;
    const Eigen::MatrixXd S = gather(X, selected);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (std::find(selected.begin(), selected.end(), j) != selected.end()) continue;
      const auto p_new = static_cast<Eigen::Index>(selected.size()) + 1;
      if (n < p_new + 2) continue;
      if (!(sample_sd(X.col(j)) > 0.0)) continue;
      double tol = 1.0;
      try {
        tol = tolerance(X.col(j), S);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::singular_design && e.code() != ErrorCode::degenerate_target) throw;
        continue;
      }
      if (tol < threshold) continue;
      auto trial = selected;
      trial.push_back(j);
      auto a = adj_r2_of(X, y, trial);
      if (!a) continue;
      if (!best_j || *a > best_adj) {
        best_j = j;
        best_adj = *a;
        best_tol = tol;
      }
    }
    if (!best_j || !(best_adj - current > config.min_improvement)) break;
    selected.push_back(*best_j);
    admitted_tolerance.push_back(best_tol);
    current = best_adj;
    if (config.selection == Selection::forward_backward) try_remove();
  }

  FittedModel model;
  model.n = static_cast<std::size_t>(n);
  model.selected = gather_names(names, selected);
  const auto p = static_cast<Eigen::Index>(selected.size());
  if (p == 0) {
    model.intercept = y.mean();
    model.coefficients = Eigen::VectorXd(0);
    model.std_coefficients = Eigen::VectorXd(0);
    model.tolerances = Eigen::VectorXd(0);
    return model;
  }
  const Eigen::MatrixXd S = gather(X, selected);
  const auto fit = fit_ols(S, y, model.selected);
  model.intercept = fit.intercept;
  model.coefficients = fit.coefficients;
  model.std_coefficients = standardized_coefficients(fit.coefficients, S, y, model.selected);
  model.tolerances = Eigen::Map<const Eigen::VectorXd>(admitted_tolerance.data(), p);
  model.r2 = fit.r2;
  model.adj_r2 = adjusted_r2(fit.r2, n, p);
  return model;
}

Eigen::VectorXd feature_column(const FeatureTable& table, Feature f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(table.rows.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    double x = 0.0;
    switch (f) {
      case Feature::wmax: x = r.wmax; break;
      case Feature::wave: x = r.wave; break;
      case Feature::wsum: x = r.wsum; break;
      case Feature::log_time: x = r.log_time; break;
    }
    v(static_cast<Eigen::Index>(i)) = x;
  }
  return v;
}

Eigen::MatrixXd design_matrix(const FeatureTable& table, std::span<const Feature> features) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(features.size()));
  for (std::size_t k = 0; k < features.size(); ++k) {
    X.col(static_cast<Eigen::Index>(k)) = feature_column(table, features[k]);
  }
  return X;
}

Eigen::VectorXd target_vector(const FeatureTable& table, Subscale target) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(table.rows.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = table.rows[i].targets[target];
  return y;
}

FittedModel stepwise_fit(const FeatureTable& table, Subscale target, CandidateMode mode,
                         const StepwiseConfig& config) {
  const auto features = candidate_features(mode);
  std::vector<std::string> names;
  for (auto f : features) names.emplace_back(to_string(f));
  auto model = stepwise_fit(design_matrix(table, features), names, target_vector(table, target), config);
  model.target = std::string(to_string(target));
  model.mode = mode;
  return model;
}

}  // namespace nstload
