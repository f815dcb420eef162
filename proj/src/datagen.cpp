#include "epl/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "epl/io.hpp"

namespace epl {

namespace {

using Rng = std::mt19937_64;

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// K-1 rectangles laid side by side so that consecutive classes share an edge.
void draw_adjacent_rects(const SceneSpec& spec, Rng& rng, LabelPlane& labels) {
  const int parts = spec.classes - 1;
  const bool horizontal = uniform_int(rng, 0, 1) == 0;
  const int along = horizontal ? spec.width : spec.height;
  const int across = horizontal ? spec.height : spec.width;
  const int min_part = 4;
  const int margin = 2;

  const int span = uniform_int(rng, parts * min_part, along - 2 * margin);
  const int start = uniform_int(rng, margin, along - margin - span);
  const int thick = uniform_int(rng, std::max(min_part, across / 4), across - 2 * margin);
  const int top = uniform_int(rng, margin, across - margin - thick);

  // Split points with at least min_part cells per rectangle.
  std::vector<int> cuts = {start};
  int remaining = span;
  for (int k = 0; k < parts - 1; ++k) {
    const int left_parts = parts - k - 1;
    const int len = uniform_int(rng, min_part, remaining - left_parts * min_part);
    cuts.push_back(cuts.back() + len);
    remaining -= len;
  }
  cuts.push_back(start + span);

  for (int k = 0; k < parts; ++k) {
    for (int a = cuts[static_cast<std::size_t>(k)]; a < cuts[static_cast<std::size_t>(k) + 1]; ++a) {
      for (int b = top; b < top + thick; ++b) {
        if (horizontal) {
          labels(b, a) = k + 1;
        } else {
          labels(a, b) = k + 1;
        }
      }
    }
  }
}

// One pair of same-class disks per foreground class, each pair in its own
// horizontal band. The disks are `gap` background pixels apart on the line
// joining their centres.
void draw_touching_disks(const SceneSpec& spec, Rng& rng, LabelPlane& labels) {
  const int pairs = spec.classes - 1;
  const int band = spec.height / pairs;
  const int max_r = std::min((band - 3) / 2, (spec.width - spec.gap - 5) / 4);
  const int min_r = std::min(3, max_r);
  for (int k = 0; k < pairs; ++k) {
    const int r = uniform_int(rng, min_r, std::min(max_r, min_r + 6));
    const int pair_width = 4 * r + spec.gap + 2;
    const int cy = uniform_int(rng, k * band + r + 1, (k + 1) * band - r - 2);
    const int x_left = uniform_int(rng, 1, spec.width - pair_width - 1);
    const int cx1 = x_left + r;
    const int cx2 = cx1 + 2 * r + spec.gap + 1;
    for (int y = std::max(0, cy - r); y <= std::min(spec.height - 1, cy + r); ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const int dy = y - cy;
        const bool in1 = dy * dy + (x - cx1) * (x - cx1) <= r * r;
        const bool in2 = dy * dy + (x - cx2) * (x - cx2) <= r * r;
        if (in1 || in2) labels(y, x) = k + 1;
      }
    }
  }
}

bool inside_convex(const std::vector<std::pair<double, double>>& poly, double y, double x) {
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto [y0, x0] = poly[i];
    const auto [y1, x1] = poly[(i + 1) % poly.size()];
    const double cross = (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0);
    pos |= cross > 0;
    neg |= cross < 0;
  }
  return !(pos && neg);
}

void draw_random_polygons(const SceneSpec& spec, Rng& rng, LabelPlane& labels) {
  const int shapes = uniform_int(rng, 2, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < shapes; ++k) {
    const int cls = uniform_int(rng, 1, spec.classes - 1);
    const double cy = unit(rng) * spec.height;
    const double cx = unit(rng) * spec.width;
    const double rad = (0.1 + 0.2 * unit(rng)) * std::min(spec.height, spec.width);
    const int verts = uniform_int(rng, 3, 6);
    std::vector<double> angles(static_cast<std::size_t>(verts));
    for (auto& a : angles) a = unit(rng) * 2.0 * M_PI;
    std::sort(angles.begin(), angles.end());
    std::vector<std::pair<double, double>> poly;
    for (double a : angles) poly.emplace_back(cy + rad * std::sin(a), cx + rad * std::cos(a));
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        if (inside_convex(poly, y + 0.5, x + 0.5)) labels(y, x) = cls;
      }
    }
  }
}

}  // namespace

SceneKind parse_scene_kind(std::string_view name) {
  if (name == "adjacent_rects") return SceneKind::AdjacentRects;
  if (name == "touching_disks") return SceneKind::TouchingDisks;
  if (name == "random_polygons") return SceneKind::RandomPolygons;
  if (name == "mixed") return SceneKind::Mixed;
  throw DomainError("unknown scene kind '" + std::string(name) + "'");
}

std::string to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::AdjacentRects:
      return "adjacent_rects";
    case SceneKind::TouchingDisks:
      return "touching_disks";
    case SceneKind::RandomPolygons:
      return "random_polygons";
    case SceneKind::Mixed:
      return "mixed";
  }
  return "?";
}

std::vector<double> SceneSpec::class_intensities() const {
  if (!intensities.empty()) return intensities;
  std::vector<double> out(static_cast<std::size_t>(std::max(classes, 0)));
  for (int c = 0; c < classes; ++c) out[static_cast<std::size_t>(c)] = classes > 1 ? double(c) / (classes - 1) : 0.0;
  return out;
}

void SceneSpec::validate() const {
  if (classes < 2) throw DomainError("SceneSpec: K must be >= 2 (background + objects)");
  if (classes > 256) throw DomainError("SceneSpec: K must be <= 256");
  if (height <= 0 || width <= 0) throw DomainError("SceneSpec: dimensions must be positive");
  if (count < 0) throw DomainError("SceneSpec: count must be >= 0");
  if (!(noise_sigma >= 0.0)) throw DomainError("SceneSpec: noise sigma must be >= 0");
  if (gap < 1 || gap > 2) throw DomainError("SceneSpec: gap must be 1 or 2 pixels");
  const auto levels = class_intensities();
  if (static_cast<int>(levels.size()) != classes) {
    throw DomainError("SceneSpec: need one intensity per class");
  }
  for (std::size_t a = 0; a < levels.size(); ++a) {
    for (std::size_t b = a + 1; b < levels.size(); ++b) {
      if (std::abs(levels[a] - levels[b]) < 3.0 * noise_sigma) {
        throw DomainError("SceneSpec: class intensities must differ by >= 3 sigma");
      }
    }
  }
  const int parts = classes - 1;
  const bool needs_rects = kind == SceneKind::AdjacentRects || kind == SceneKind::Mixed;
  const bool needs_disks = kind == SceneKind::TouchingDisks || kind == SceneKind::Mixed;
  if (needs_rects && (std::min(height, width) < 12 || std::max(height, width) < parts * 4 + 4)) {
    throw DomainError("SceneSpec: rectangles do not fit the image");
  }
  if (needs_disks) {
    const int band = height / parts;
    const int max_r = std::min((band - 3) / 2, (width - gap - 5) / 4);
    if (max_r < 2) throw DomainError("SceneSpec: disk pairs do not fit the image");
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Sample generate_sample(const SceneSpec& spec, int index) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(index)));
  LabelPlane labels = LabelPlane::Zero(spec.height, spec.width);
  SceneKind kind = spec.kind;
  if (kind == SceneKind::Mixed) kind = index % 2 == 0 ? SceneKind::AdjacentRects : SceneKind::TouchingDisks;
  switch (kind) {
    case SceneKind::AdjacentRects:
      draw_adjacent_rects(spec, rng, labels);
      break;
    case SceneKind::TouchingDisks:
      draw_touching_disks(spec, rng, labels);
      break;
    case SceneKind::RandomPolygons:
      draw_random_polygons(spec, rng, labels);
      break;
    case SceneKind::Mixed:
      break;
  }
  const auto levels = spec.class_intensities();
  std::normal_distribution<double> noise(0.0, 1.0);
  Plane<float> image(spec.height, spec.width);
  for (Index p = 0; p < image.size(); ++p) {
    const double base = levels[static_cast<std::size_t>(labels.data()[p])];
    const double n = spec.noise_sigma > 0.0 ? spec.noise_sigma * noise(rng) : 0.0;
    image.data()[p] = static_cast<float>(base + n);
  }
  return Sample{std::move(image), LabelMap(std::move(labels), spec.classes)};
}

std::vector<Sample> generate_dataset(const SceneSpec& spec) {
  spec.validate();
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) out.push_back(generate_sample(spec, i));
  return out;
}

void write_sample(const std::filesystem::path& dir, const std::string& stem, const Sample& sample) {
  write_eplt(dir / (stem + ".eplt"), to_tensor(sample.image));
  write_pgm(dir / (stem + ".pgm"), sample.labels);
}

Sample read_sample(const std::filesystem::path& dir, const std::string& stem, int classes) {
  Sample s;
  s.image = plane_from_tensor(read_eplt(dir / (stem + ".eplt")));
  s.labels = read_pgm(dir / (stem + ".pgm"), classes);
  if (s.image.rows() != s.labels.rows() || s.image.cols() != s.labels.cols()) {
    throw FormatError("sample " + stem + ": image and label dimensions differ");
  }
  return s;
}

}  // namespace epl
