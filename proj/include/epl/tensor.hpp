// Dense field containers shared by every EPL module.
//
// A plane is a row-major Eigen matrix (rows = image height). Probability
// fields stack one plane per class; potential field sets stack one
// probability-shaped field per splitter direction.

#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace epl {

using Index = Eigen::Index;

template <typename Scalar>
using Plane = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using LabelPlane = Plane<std::int32_t>;
using Mask = Plane<bool>;

/// Raised when an input lies outside an operation's domain (bad label, odd
/// exponent, mismatched shapes, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for malformed files (bad magic, truncated payload, ...).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// K planes of identical shape, indexed [class](row, col).
template <typename Scalar>
class Field {
 public:
  using PlaneType = Plane<Scalar>;

  Field() = default;
  Field(Index channels, Index rows, Index cols)
      : planes_(static_cast<std::size_t>(channels), PlaneType::Zero(rows, cols)) {}
  explicit Field(std::vector<PlaneType> planes) : planes_(std::move(planes)) {
    for (const auto& p : planes_) {
      if (p.rows() != rows() || p.cols() != cols()) {
        throw DomainError("Field: planes must share one shape");
      }
    }
  }

  Index channels() const { return static_cast<Index>(planes_.size()); }
  Index rows() const { return planes_.empty() ? 0 : planes_.front().rows(); }
  Index cols() const { return planes_.empty() ? 0 : planes_.front().cols(); }
  Index size() const { return channels() * rows() * cols(); }

  PlaneType& operator[](Index c) { return planes_[static_cast<std::size_t>(c)]; }
  const PlaneType& operator[](Index c) const { return planes_[static_cast<std::size_t>(c)]; }

  std::vector<PlaneType>& planes() { return planes_; }
  const std::vector<PlaneType>& planes() const { return planes_; }

  bool same_shape(const Field& other) const {
    return channels() == other.channels() && rows() == other.rows() && cols() == other.cols();
  }

  template <typename Other>
  Field<Other> cast() const {
    Field<Other> out;
    out.planes().reserve(planes_.size());
    for (const auto& p : planes_) out.planes().push_back(p.template cast<Other>());
    return out;
  }

  Field& operator+=(const Field& other) {
    for (Index c = 0; c < channels(); ++c) (*this)[c] += other[c];
    return *this;
  }
  Field& operator*=(Scalar s) {
    for (auto& p : planes_) p *= s;
    return *this;
  }

 private:
  std::vector<PlaneType> planes_;
};

using ProbabilityField = Field<double>;

/// |S| fields of K planes each, indexed [direction][class](row, col).
template <typename Scalar>
class PotentialFieldSet {
 public:
  PotentialFieldSet() = default;
  PotentialFieldSet(Index directions, Index channels, Index rows, Index cols)
      : fields_(static_cast<std::size_t>(directions), Field<Scalar>(channels, rows, cols)) {}

  Index directions() const { return static_cast<Index>(fields_.size()); }
  Index channels() const { return fields_.empty() ? 0 : fields_.front().channels(); }
  Index rows() const { return fields_.empty() ? 0 : fields_.front().rows(); }
  Index cols() const { return fields_.empty() ? 0 : fields_.front().cols(); }
  Index size() const { return directions() * channels() * rows() * cols(); }

  Field<Scalar>& operator[](Index s) { return fields_[static_cast<std::size_t>(s)]; }
  const Field<Scalar>& operator[](Index s) const { return fields_[static_cast<std::size_t>(s)]; }

  Plane<Scalar>& plane(Index s, Index c) { return (*this)[s][c]; }
  const Plane<Scalar>& plane(Index s, Index c) const { return (*this)[s][c]; }

  bool same_shape(const PotentialFieldSet& other) const {
    return directions() == other.directions() && channels() == other.channels() &&
           rows() == other.rows() && cols() == other.cols();
  }

 private:
  std::vector<Field<Scalar>> fields_;
};

/// Ground-truth annotation: one class index in [0, K) per pixel.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(LabelPlane data, int classes) : data_(std::move(data)), classes_(classes) { validate(); }

  Index rows() const { return data_.rows(); }
  Index cols() const { return data_.cols(); }
  int classes() const { return classes_; }
  const LabelPlane& data() const { return data_; }
  std::int32_t operator()(Index r, Index c) const { return data_(r, c); }

  void validate() const {
    if (data_.rows() <= 0 || data_.cols() <= 0) throw DomainError("LabelMap: empty dimensions");
    if (classes_ <= 0) throw DomainError("LabelMap: class count must be positive");
    if (data_.minCoeff() < 0 || data_.maxCoeff() >= classes_) {
      throw DomainError("LabelMap: label outside [0, " + std::to_string(classes_) + ")");
    }
  }

 private:
  LabelPlane data_;
  int classes_ = 0;
};

inline bool operator==(const LabelMap& a, const LabelMap& b) {
  return a.classes() == b.classes() && a.rows() == b.rows() && a.cols() == b.cols() &&
         a.data() == b.data();
}

// Flat row-major views used by the finite-difference harness and file I/O.

template <typename Scalar>
Eigen::VectorXd flatten(const Field<Scalar>& f) {
  Eigen::VectorXd v(f.size());
  Index k = 0;
  for (const auto& p : f.planes()) {
    for (Index i = 0; i < p.size(); ++i) v[k++] = static_cast<double>(p.data()[i]);
  }
  return v;
}

template <typename Scalar>
Eigen::VectorXd flatten(const PotentialFieldSet<Scalar>& e) {
  Eigen::VectorXd v(e.size());
  Index k = 0;
  for (Index s = 0; s < e.directions(); ++s) {
    for (const auto& p : e[s].planes()) {
      for (Index i = 0; i < p.size(); ++i) v[k++] = static_cast<double>(p.data()[i]);
    }
  }
  return v;
}

template <typename Scalar>
void unflatten(const Eigen::VectorXd& v, Field<Scalar>& f) {
  if (v.size() != f.size()) throw DomainError("unflatten: size mismatch");
  Index k = 0;
  for (auto& p : f.planes()) {
    for (Index i = 0; i < p.size(); ++i) p.data()[i] = static_cast<Scalar>(v[k++]);
  }
}

template <typename Scalar>
void unflatten(const Eigen::VectorXd& v, PotentialFieldSet<Scalar>& e) {
  if (v.size() != e.size()) throw DomainError("unflatten: size mismatch");
  Index k = 0;
  for (Index s = 0; s < e.directions(); ++s) {
    for (auto& p : e[s].planes()) {
      for (Index i = 0; i < p.size(); ++i) p.data()[i] = static_cast<Scalar>(v[k++]);
    }
  }
}

template <typename Scalar>
double max_abs_diff(const PotentialFieldSet<Scalar>& a, const PotentialFieldSet<Scalar>& b) {
  if (!a.same_shape(b)) throw DomainError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (Index s = 0; s < a.directions(); ++s) {
    for (Index c = 0; c < a.channels(); ++c) {
      m = std::max(m, static_cast<double>((a.plane(s, c) - b.plane(s, c)).cwiseAbs().maxCoeff()));
    }
  }
  return m;
}

}  // namespace epl
