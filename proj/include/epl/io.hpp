// File formats.
//
// ".eplt" tensor dump: magic "EPLT", u32 version (1), u32 ndim, ndim x u32
// dims, then float32 values in row-major order. All integers and floats are
// little-endian. Label maps are binary PGM (P5) with pixel value = class.

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "epl/tensor.hpp"

namespace epl {

inline constexpr std::uint32_t kEpltVersion = 1;

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  std::size_t element_count() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

void write_eplt(const std::filesystem::path& path, const Tensor& tensor);
Tensor read_eplt(const std::filesystem::path& path);

Tensor to_tensor(const Plane<float>& plane);
Tensor to_tensor(const Eigen::VectorXd& vector);
Tensor to_tensor(const Field<double>& field);
Tensor to_tensor(const PotentialFieldSet<double>& energies);

Plane<float> plane_from_tensor(const Tensor& t);
Eigen::VectorXd vector_from_tensor(const Tensor& t);
Field<double> field_from_tensor(const Tensor& t);
PotentialFieldSet<double> potentials_from_tensor(const Tensor& t);

/// Writes labels as 8-bit P5 with maxval 255. Requires K <= 256.
void write_pgm(const std::filesystem::path& path, const LabelMap& labels);

/// Reads an 8-bit P5 file. With classes == 0 the class count is inferred as
/// max label + 1; otherwise every pixel must be < classes.
LabelMap read_pgm(const std::filesystem::path& path, int classes = 0);

/// Raw 8-bit greyscale P5, used for energy renderings.
void write_pgm_image(const std::filesystem::path& path, const Plane<std::uint8_t>& pixels);
Plane<std::uint8_t> read_pgm_image(const std::filesystem::path& path);

/// Linear map of [0, max_energy] to [0, 255].
Plane<std::uint8_t> render_energy(const Plane<double>& energy, double max_energy);

}  // namespace epl
