// Brute-force metric references: every distance is an all-pairs scan, every
// IoU a direct count. Quadratic in the pixel count, so small maps only.

#pragma once

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <vector>

#include "epl/tensor.hpp"

namespace epl::testing {

inline bool naive_is_boundary(const LabelMap& l, Index y, Index x) {
  const int dy[4] = {-1, 1, 0, 0};
  const int dx[4] = {0, 0, -1, 1};
  for (int k = 0; k < 4; ++k) {
    const Index yy = y + dy[k];
    const Index xx = x + dx[k];
    if (yy < 0 || yy >= l.rows() || xx < 0 || xx >= l.cols()) continue;
    if (l(yy, xx) != l(y, x)) return true;
  }
  return false;
}

/// Chebyshev distance from (y, x) to the nearest pixel satisfying `pick`, or -1.
template <typename Pick>
long naive_distance(const LabelMap& l, Index y, Index x, Pick pick) {
  long best = -1;
  for (Index v = 0; v < l.rows(); ++v) {
    for (Index u = 0; u < l.cols(); ++u) {
      if (!pick(v, u)) continue;
      const long d = std::max(std::labs(static_cast<long>(v - y)), std::labs(static_cast<long>(u - x)));
      if (best < 0 || d < best) best = d;
    }
  }
  return best;
}

/// mIoU over pixels where `in_band(y, x)`; nullopt for an empty selection.
template <typename Band>
std::optional<double> naive_miou(const LabelMap& pred, const LabelMap& gt, int classes, Band in_band) {
  double sum = 0.0;
  int present = 0;
  bool any = false;
  for (int c = 0; c < classes; ++c) {
    long inter = 0, uni = 0;
    for (Index y = 0; y < gt.rows(); ++y) {
      for (Index x = 0; x < gt.cols(); ++x) {
        if (!in_band(y, x)) continue;
        any = true;
        const bool a = pred(y, x) == c;
        const bool b = gt(y, x) == c;
        inter += (a && b) ? 1 : 0;
        uni += (a || b) ? 1 : 0;
      }
    }
    if (uni == 0) continue;
    sum += static_cast<double>(inter) / static_cast<double>(uni);
    ++present;
  }
  if (!any) return std::nullopt;
  return present > 0 ? sum / present : 0.0;
}

inline double naive_miou(const LabelMap& pred, const LabelMap& gt, int classes) {
  return *naive_miou(pred, gt, classes, [](Index, Index) { return true; });
}

inline std::optional<double> naive_trimap(const LabelMap& pred, const LabelMap& gt, int classes,
                                          int width) {
  return naive_miou(pred, gt, classes, [&](Index y, Index x) {
    const long d = naive_distance(gt, y, x, [&](Index v, Index u) { return naive_is_boundary(gt, v, u); });
    return d >= 0 && d <= width;
  });
}

inline double naive_fmeasure(const LabelMap& pred, const LabelMap& gt, int tol) {
  long n_pred = 0, n_gt = 0, hit_pred = 0, hit_gt = 0;
  for (Index y = 0; y < gt.rows(); ++y) {
    for (Index x = 0; x < gt.cols(); ++x) {
      if (naive_is_boundary(pred, y, x)) {
        ++n_pred;
        const long d = naive_distance(gt, y, x, [&](Index v, Index u) {
          return gt(v, u) == pred(y, x) && naive_is_boundary(gt, v, u);
        });
        if (d >= 0 && d <= tol) ++hit_pred;
      }
      if (naive_is_boundary(gt, y, x)) {
        ++n_gt;
        const long d = naive_distance(pred, y, x, [&](Index v, Index u) {
          return pred(v, u) == gt(y, x) && naive_is_boundary(pred, v, u);
        });
        if (d >= 0 && d <= tol) ++hit_gt;
      }
    }
  }
  if (n_pred == 0 && n_gt == 0) return 1.0;
  if (n_pred == 0 || n_gt == 0) return 0.0;
  const double p = static_cast<double>(hit_pred) / static_cast<double>(n_pred);
  const double r = static_cast<double>(hit_gt) / static_cast<double>(n_gt);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

}  // namespace epl::testing
