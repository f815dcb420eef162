// Segmentation and boundary-quality metrics: mIoU, trimap IoU and the
// boundary F-measure.
//
// Boundary pixels are pixels with a 4-neighbour of a different label; the
// image border is not a boundary by itself. Bands and matching tolerances use
// the Chebyshev (8-connected) distance.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "epl/tensor.hpp"

namespace epl {

struct IoUResult {
  std::vector<std::optional<double>> per_class;  // nullopt when absent from both maps
  double miou = 0.0;
};

IoUResult miou(const LabelMap& pred, const LabelMap& gt, int classes);

/// Same as miou but counting only pixels where `mask` is set. Returns nullopt
/// when the mask is empty.
std::optional<IoUResult> masked_miou(const LabelMap& pred, const LabelMap& gt, int classes,
                                     const Mask& mask);

Mask boundary_pixels(const LabelMap& labels);

/// Chebyshev distance from every pixel to the nearest set pixel of `seeds`
/// (multi-source 8-connected BFS). Unreachable pixels get -1.
Plane<int> chebyshev_distance(const Mask& seeds);

Mask boundary_band(const LabelMap& gt, int width);

/// mIoU over boundary_band(gt, width); nullopt when the band is empty.
std::optional<double> trimap_iou(const LabelMap& pred, const LabelMap& gt, int classes, int width);

double boundary_fmeasure(const LabelMap& pred, const LabelMap& gt, int tolerance);

struct EvalReport {
  std::vector<std::optional<double>> per_class_iou;
  double miou = 0.0;
  std::map<int, std::optional<double>> trimap_iou;
  std::map<int, double> fmeasure;
  int images = 0;

  nlohmann::json to_json() const;
  /// Rows "metric,param,value" (one per width / tolerance).
  std::string to_csv() const;
};

/// Metrics for one image.
EvalReport evaluate(const LabelMap& pred, const LabelMap& gt, int classes,
                    const std::vector<int>& trimap_widths, const std::vector<int>& tolerances);

/// Mean of per-image reports. Not-applicable trimap entries are left out of
/// the corresponding mean; per-class IoUs average over images where defined.
EvalReport aggregate(const std::vector<EvalReport>& reports);

}  // namespace epl
