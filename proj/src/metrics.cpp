#include "epl/metrics.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace epl {

namespace {

void require_same_dims(const LabelMap& a, const LabelMap& b, const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DomainError(std::string(who) + ": dimension mismatch");
  }
}

IoUResult iou_from_counts(const std::vector<long>& inter, const std::vector<long>& uni) {
  IoUResult out;
  out.per_class.resize(inter.size());
  double sum = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < inter.size(); ++c) {
    if (uni[c] == 0) continue;
    const double iou = static_cast<double>(inter[c]) / static_cast<double>(uni[c]);
    out.per_class[c] = iou;
    sum += iou;
    ++present;
  }
  out.miou = present > 0 ? sum / present : 0.0;
  return out;
}

}  // namespace

IoUResult miou(const LabelMap& pred, const LabelMap& gt, int classes) {
  Mask all = Mask::Constant(gt.rows(), gt.cols(), true);
  return *masked_miou(pred, gt, classes, all);
}

std::optional<IoUResult> masked_miou(const LabelMap& pred, const LabelMap& gt, int classes,
                                     const Mask& mask) {
  require_same_dims(pred, gt, "miou");
  if (mask.rows() != gt.rows() || mask.cols() != gt.cols()) {
    throw DomainError("miou: mask dimension mismatch");
  }
  std::vector<long> inter(static_cast<std::size_t>(classes), 0);
  std::vector<long> uni(static_cast<std::size_t>(classes), 0);
  long counted = 0;
  for (Index p = 0; p < gt.data().size(); ++p) {
    if (!mask.data()[p]) continue;
    ++counted;
    const auto a = pred.data().data()[p];
    const auto b = gt.data().data()[p];
    if (a < 0 || a >= classes || b < 0 || b >= classes) {
      throw DomainError("miou: label outside [0, K)");
    }
    if (a == b) {
      ++inter[static_cast<std::size_t>(a)];
      ++uni[static_cast<std::size_t>(a)];
    } else {
      ++uni[static_cast<std::size_t>(a)];
      ++uni[static_cast<std::size_t>(b)];
    }
  }
  if (counted == 0) return std::nullopt;
  return iou_from_counts(inter, uni);
}

Mask boundary_pixels(const LabelMap& labels) {
  const Index rows = labels.rows();
  const Index cols = labels.cols();
  const LabelPlane& l = labels.data();
  Mask out = Mask::Constant(rows, cols, false);
  for (Index y = 0; y < rows; ++y) {
    for (Index x = 0; x < cols; ++x) {
      const auto v = l(y, x);
      out(y, x) = (y > 0 && l(y - 1, x) != v) || (y + 1 < rows && l(y + 1, x) != v) ||
                  (x > 0 && l(y, x - 1) != v) || (x + 1 < cols && l(y, x + 1) != v);
    }
  }
  return out;
}

Plane<int> chebyshev_distance(const Mask& seeds) {
  const Index rows = seeds.rows();
  const Index cols = seeds.cols();
  Plane<int> dist = Plane<int>::Constant(rows, cols, -1);
  std::deque<Index> queue;
  for (Index p = 0; p < seeds.size(); ++p) {
    if (seeds.data()[p]) {
      dist.data()[p] = 0;
      queue.push_back(p);
    }
  }
  while (!queue.empty()) {
    const Index p = queue.front();
    queue.pop_front();
    const Index y = p / cols;
    const Index x = p % cols;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const Index yy = y + dy;
        const Index xx = x + dx;
        if (yy < 0 || yy >= rows || xx < 0 || xx >= cols) continue;
        int& d = dist(yy, xx);
        if (d >= 0) continue;
        d = dist.data()[p] + 1;
        queue.push_back(yy * cols + xx);
      }
    }
  }
  return dist;
}

Mask boundary_band(const LabelMap& gt, int width) {
  if (width < 1) throw DomainError("boundary_band: width must be >= 1");
  const Plane<int> dist = chebyshev_distance(boundary_pixels(gt));
  return dist.unaryExpr([width](int d) { return d >= 0 && d <= width; });
}

std::optional<double> trimap_iou(const LabelMap& pred, const LabelMap& gt, int classes, int width) {
  require_same_dims(pred, gt, "trimap_iou");
  const auto r = masked_miou(pred, gt, classes, boundary_band(gt, width));
  if (!r) return std::nullopt;
  return r->miou;
}

double boundary_fmeasure(const LabelMap& pred, const LabelMap& gt, int tolerance) {
  require_same_dims(pred, gt, "boundary_fmeasure");
  if (tolerance < 0) throw DomainError("boundary_fmeasure: tolerance must be >= 0");
  const Mask pb = boundary_pixels(pred);
  const Mask gb = boundary_pixels(gt);
  const long n_pred = pb.count();
  const long n_gt = gb.count();
  if (n_pred == 0 && n_gt == 0) return 1.0;
  if (n_pred == 0 || n_gt == 0) return 0.0;

  const int classes = std::max(pred.classes(), gt.classes());
  long matched_pred = 0;
  long matched_gt = 0;
  for (int c = 0; c < classes; ++c) {
    const Mask pc = pb.array() && (pred.data().array() == c);
    const Mask gc = gb.array() && (gt.data().array() == c);
    if (!pc.any() && !gc.any()) continue;
    const Plane<int> to_gt = chebyshev_distance(gc);
    const Plane<int> to_pred = chebyshev_distance(pc);
    for (Index p = 0; p < pc.size(); ++p) {
      if (pc.data()[p] && to_gt.data()[p] >= 0 && to_gt.data()[p] <= tolerance) ++matched_pred;
      if (gc.data()[p] && to_pred.data()[p] >= 0 && to_pred.data()[p] <= tolerance) ++matched_gt;
    }
  }
  const double precision = static_cast<double>(matched_pred) / static_cast<double>(n_pred);
  const double recall = static_cast<double>(matched_gt) / static_cast<double>(n_gt);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

EvalReport evaluate(const LabelMap& pred, const LabelMap& gt, int classes,
                    const std::vector<int>& trimap_widths, const std::vector<int>& tolerances) {
  EvalReport r;
  r.images = 1;
  const IoUResult iou = miou(pred, gt, classes);
  r.per_class_iou = iou.per_class;
  r.miou = iou.miou;
  for (int w : trimap_widths) r.trimap_iou[w] = trimap_iou(pred, gt, classes, w);
  for (int t : tolerances) r.fmeasure[t] = boundary_fmeasure(pred, gt, t);
  return r;
}

EvalReport aggregate(const std::vector<EvalReport>& reports) {
  EvalReport out;
  if (reports.empty()) return out;
  std::size_t classes = 0;
  for (const auto& r : reports) classes = std::max(classes, r.per_class_iou.size());
  std::vector<double> class_sum(classes, 0.0);
  std::vector<int> class_n(classes, 0);
  std::map<int, double> tri_sum;
  std::map<int, int> tri_n;
  double miou_sum = 0.0;
  for (const auto& r : reports) {
    out.images += r.images;
    miou_sum += r.miou;
    for (std::size_t c = 0; c < r.per_class_iou.size(); ++c) {
      if (r.per_class_iou[c]) {
        class_sum[c] += *r.per_class_iou[c];
        ++class_n[c];
      }
    }
    for (const auto& [w, v] : r.trimap_iou) {
      tri_sum.try_emplace(w, 0.0);
      tri_n.try_emplace(w, 0);
      if (v) {
        tri_sum[w] += *v;
        ++tri_n[w];
      }
    }
    for (const auto& [t, v] : r.fmeasure) out.fmeasure[t] += v;
  }
  const double n = static_cast<double>(reports.size());
  out.miou = miou_sum / n;
  out.per_class_iou.resize(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    if (class_n[c] > 0) out.per_class_iou[c] = class_sum[c] / class_n[c];
  }
  for (const auto& [w, s] : tri_sum) {
    out.trimap_iou[w] = tri_n[w] > 0 ? std::optional<double>(s / tri_n[w]) : std::nullopt;
  }
  for (auto& [t, v] : out.fmeasure) v /= n;
  return out;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["images"] = images;
  j["miou"] = miou;
  auto& pc = j["per_class_iou"] = nlohmann::json::array();
  for (const auto& v : per_class_iou) pc.push_back(v ? nlohmann::json(*v) : nlohmann::json());
  auto& tri = j["trimap_iou"] = nlohmann::json::object();
  for (const auto& [w, v] : trimap_iou) {
    tri[std::to_string(w)] = v ? nlohmann::json(*v) : nlohmann::json("n/a");
  }
  auto& f = j["boundary_f"] = nlohmann::json::object();
  for (const auto& [t, v] : fmeasure) f[std::to_string(t)] = v;
  return j;
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "metric,param,value\n";
  os << "miou,," << miou << "\n";
  for (std::size_t c = 0; c < per_class_iou.size(); ++c) {
    os << "class_iou," << c << ",";
    if (per_class_iou[c]) os << *per_class_iou[c];
    os << "\n";
  }
  for (const auto& [w, v] : trimap_iou) {
    os << "trimap_iou," << w << ",";
    if (v) {
      os << *v;
    } else {
      os << "n/a";
    }
    os << "\n";
  }
  for (const auto& [t, v] : fmeasure) os << "boundary_f," << t << "," << v << "\n";
  return os.str();
}

}  // namespace epl
