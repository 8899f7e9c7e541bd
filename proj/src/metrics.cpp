#include "nstload/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "nstload/error.hpp"

namespace nstload {

WnstSeries wnst_series(const NstSeries& nst, double rest_nst_c) {
  if (nst.values.empty()) throw Error(ErrorCode::empty_series, "NST series is empty");
  if (!std::isfinite(rest_nst_c)) throw Error(ErrorCode::invalid_argument, "rest NST is not finite");
  WnstSeries out;
  out.rest_nst_c = rest_nst_c;
  out.values.reserve(nst.values.size());
  for (const auto& p : nst.values) out.values.push_back({p.window_end_s, p.nst_c - rest_nst_c});
  return out;
}

MetricSet summarize(const WnstSeries& w) {
  if (w.values.empty()) throw Error(ErrorCode::empty_series, "WNST series is empty");
  // Sorted compensated sum: the result must not depend on window order.
  std::vector<double> v;
  v.reserve(w.values.size());
  for (const auto& p : w.values) v.push_back(p.wnst_c);
  std::sort(v.begin(), v.end());
  double sum = 0.0, comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  MetricSet m;
  m.n_windows = v.size();
  m.wsum = sum + comp;
  m.wmax = v.back();
  m.wave = std::clamp(m.wsum / static_cast<double>(m.n_windows), v.front(), v.back());
  return m;
}

}  // namespace nstload
