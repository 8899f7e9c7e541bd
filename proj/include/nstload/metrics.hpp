#pragma once

#include <cstddef>
#include <vector>

#include "nstload/signal.hpp"

namespace nstload {

struct WnstPoint {
  double window_end_s = 0.0;
  double wnst_c = 0.0;
};

/// Task-window NST relative to the pre-task rest baseline.
struct WnstSeries {
  std::vector<WnstPoint> values;
  double rest_nst_c = 0.0;
};

/// Summary of one task's WNST series. `wsum` grows with the number of
/// windows, so it is confounded with task duration; `n_windows` is kept so
/// reports can show that.
struct MetricSet {
  double wmax = 0.0;
  double wave = 0.0;
  double wsum = 0.0;
  std::size_t n_windows = 0;
};

WnstSeries wnst_series(const NstSeries& nst, double rest_nst_c);

MetricSet summarize(const WnstSeries& w);

}  // namespace nstload
