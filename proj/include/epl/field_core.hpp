// Probability -> potential domain conversion.
//
// The anisotropic convolution (AC) sums a class plane along a directed ray:
//
//   E_s(c)[p] = sum_{t=0..r} F(c)[p + t*s],   r = floor(w / 2)
//
// with zero padding outside the image. This is the all-ones w x w box kernel
// masked to the centre plus the r cells along s. Kernel weights are fixed.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "epl/tensor.hpp"

namespace epl {

struct Offset {
  int dy = 0;
  int dx = 0;
  friend bool operator==(const Offset&, const Offset&) = default;
};

enum class SplitterKind { A, B, C };

/// Ordered direction set. A = up, down, left, right; B = up-left, up-right,
/// down-left, down-right; C = A followed by B.
struct Splitter {
  SplitterKind kind = SplitterKind::A;
  std::vector<Offset> directions;

  Index size() const { return static_cast<Index>(directions.size()); }
};

Splitter make_splitter(SplitterKind kind);
SplitterKind parse_splitter_kind(std::string_view name);
std::string to_string(SplitterKind kind);

struct ACConfig {
  int kernel_size = 7;
  Splitter splitter = make_splitter(SplitterKind::A);

  int radius() const { return kernel_size / 2; }
  void validate() const;
};

ACConfig make_ac_config(int kernel_size, SplitterKind kind);

/// Which conversion feeds the potential-domain losses. `Standard` is the
/// plain box-filter ablation; it yields a single pseudo-direction.
enum class Conversion { Anisotropic, Standard };

Conversion parse_conversion(std::string_view name);
std::string to_string(Conversion c);

// ---------------------------------------------------------------------------

ProbabilityField one_hot(const LabelMap& labels, int classes);

namespace detail {

/// out(p) += sum_{t=0..steps} in(p + t*dir), zero outside `in`.
template <typename Scalar>
void accumulate_ray(const Plane<Scalar>& in, Offset dir, int steps, Plane<Scalar>& out) {
  const Index rows = in.rows();
  const Index cols = in.cols();
  for (int t = 0; t <= steps; ++t) {
    const Index dy = static_cast<Index>(t) * dir.dy;
    const Index dx = static_cast<Index>(t) * dir.dx;
    const Index y0 = std::max<Index>(0, -dy);
    const Index y1 = std::min<Index>(rows, rows - dy);
    const Index x0 = std::max<Index>(0, -dx);
    const Index x1 = std::min<Index>(cols, cols - dx);
    if (y1 <= y0 || x1 <= x0) continue;
    out.block(y0, x0, y1 - y0, x1 - x0) += in.block(y0 + dy, x0 + dx, y1 - y0, x1 - x0);
  }
}

}  // namespace detail

template <typename Scalar>
PotentialFieldSet<Scalar> anisotropic_convolve(const Field<Scalar>& field, const ACConfig& cfg) {
  cfg.validate();
  const Index n_dir = cfg.splitter.size();
  PotentialFieldSet<Scalar> out(n_dir, field.channels(), field.rows(), field.cols());
  for (Index s = 0; s < n_dir; ++s) {
    const Offset dir = cfg.splitter.directions[static_cast<std::size_t>(s)];
    for (Index c = 0; c < field.channels(); ++c) {
      detail::accumulate_ray(field[c], dir, cfg.radius(), out.plane(s, c));
    }
  }
  return out;
}

/// Adjoint of anisotropic_convolve: each direction's plane is summed along
/// the reversed ray and the directions are added together.
template <typename Scalar>
Field<Scalar> anisotropic_adjoint(const PotentialFieldSet<Scalar>& grad, const ACConfig& cfg) {
  cfg.validate();
  if (grad.directions() != cfg.splitter.size()) {
    throw DomainError("anisotropic_adjoint: direction count does not match splitter");
  }
  Field<Scalar> out(grad.channels(), grad.rows(), grad.cols());
  for (Index s = 0; s < grad.directions(); ++s) {
    const Offset dir = cfg.splitter.directions[static_cast<std::size_t>(s)];
    const Offset rev{-dir.dy, -dir.dx};
    for (Index c = 0; c < grad.channels(); ++c) {
      detail::accumulate_ray(grad.plane(s, c), rev, cfg.radius(), out[c]);
    }
  }
  return out;
}

/// Per-class w x w all-ones box filter with zero padding.
template <typename Scalar>
Field<Scalar> standard_convolve(const Field<Scalar>& field, int kernel_size) {
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw DomainError("standard_convolve: kernel size must be odd");
  }
  const int r = kernel_size / 2;
  const Index rows = field.rows();
  const Index cols = field.cols();
  Field<Scalar> out(field.channels(), rows, cols);
  for (Index c = 0; c < field.channels(); ++c) {
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        const Index y0 = std::max<Index>(0, -dy);
        const Index y1 = std::min<Index>(rows, rows - dy);
        const Index x0 = std::max<Index>(0, -dx);
        const Index x1 = std::min<Index>(cols, cols - dx);
        if (y1 <= y0 || x1 <= x0) continue;
        out[c].block(y0, x0, y1 - y0, x1 - x0) += field[c].block(y0 + dy, x0 + dx, y1 - y0, x1 - x0);
      }
    }
  }
  return out;
}

/// Converts with either AC or the box filter. The box output is wrapped as a
/// one-direction potential set so both routes share the loss code.
template <typename Scalar>
PotentialFieldSet<Scalar> convert(const Field<Scalar>& field, const ACConfig& cfg, Conversion kind) {
  if (kind == Conversion::Anisotropic) return anisotropic_convolve(field, cfg);
  cfg.validate();
  PotentialFieldSet<Scalar> out(1, field.channels(), field.rows(), field.cols());
  out[0] = standard_convolve(field, cfg.kernel_size);
  return out;
}

template <typename Scalar>
Field<Scalar> convert_adjoint(const PotentialFieldSet<Scalar>& grad, const ACConfig& cfg,
                              Conversion kind) {
  if (kind == Conversion::Anisotropic) return anisotropic_adjoint(grad, cfg);
  if (grad.directions() != 1) throw DomainError("convert_adjoint: box route has one direction");
  // The zero-padded box filter is self-adjoint.
  return standard_convolve(grad[0], cfg.kernel_size);
}

/// Naive per-pixel ray summation; independent reference for
/// anisotropic_convolve. Intended for small fields.
template <typename Scalar>
PotentialFieldSet<Scalar> potential_oracle(const Field<Scalar>& field, const ACConfig& cfg) {
  cfg.validate();
  const Index rows = field.rows();
  const Index cols = field.cols();
  const int r = cfg.radius();
  PotentialFieldSet<Scalar> out(cfg.splitter.size(), field.channels(), rows, cols);
  for (Index s = 0; s < cfg.splitter.size(); ++s) {
    const Offset dir = cfg.splitter.directions[static_cast<std::size_t>(s)];
    for (Index c = 0; c < field.channels(); ++c) {
      for (Index y = 0; y < rows; ++y) {
        for (Index x = 0; x < cols; ++x) {
          Scalar acc = 0;
          for (int t = 0; t <= r; ++t) {
            const Index yy = y + static_cast<Index>(t) * dir.dy;
            const Index xx = x + static_cast<Index>(t) * dir.dx;
            if (yy < 0 || yy >= rows || xx < 0 || xx >= cols) continue;
            acc += field[c](yy, xx);
          }
          out.plane(s, c)(y, x) = acc;
        }
      }
    }
  }
  return out;
}

}  // namespace epl
