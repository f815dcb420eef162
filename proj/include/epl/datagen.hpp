// Synthetic segmentation scenes exercising inter-class boundaries (adjacent
// rectangles of different classes) and intra-class boundaries (same-class
// disks separated by a thin background gap).

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "epl/tensor.hpp"

namespace epl {

enum class SceneKind { AdjacentRects, TouchingDisks, RandomPolygons, Mixed };

SceneKind parse_scene_kind(std::string_view name);
std::string to_string(SceneKind kind);

struct SceneSpec {
  SceneKind kind = SceneKind::Mixed;  // Mixed alternates rects (even index) and disks (odd)
  int height = 64;
  int width = 64;
  int classes = 3;
  double noise_sigma = 0.16;
  std::vector<double> intensities;  // per class; empty -> evenly spaced in [0, 1]
  int count = 200;
  std::uint64_t seed = 0;
  int gap = 1;  // background pixels between same-class disks, 1 or 2

  std::vector<double> class_intensities() const;
  void validate() const;
};

struct Sample {
  Plane<float> image;
  LabelMap labels;
};

/// Mixes (seed, stream) into an independent 64-bit seed (SplitMix64 finaliser).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

Sample generate_sample(const SceneSpec& spec, int index);
std::vector<Sample> generate_dataset(const SceneSpec& spec);

/// Writes `<stem>.eplt` (image) and `<stem>.pgm` (labels).
void write_sample(const std::filesystem::path& dir, const std::string& stem, const Sample& sample);
Sample read_sample(const std::filesystem::path& dir, const std::string& stem, int classes);

}  // namespace epl
