#include "epl/field_core.hpp"

namespace epl {

Splitter make_splitter(SplitterKind kind) {
  static const std::vector<Offset> axis = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  static const std::vector<Offset> diagonal = {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  Splitter s;
  s.kind = kind;
  switch (kind) {
    case SplitterKind::A:
      s.directions = axis;
      break;
    case SplitterKind::B:
      s.directions = diagonal;
      break;
    case SplitterKind::C:
      s.directions = axis;
      s.directions.insert(s.directions.end(), diagonal.begin(), diagonal.end());
      break;
  }
  return s;
}

SplitterKind parse_splitter_kind(std::string_view name) {
  if (name == "A" || name == "a") return SplitterKind::A;
  if (name == "B" || name == "b") return SplitterKind::B;
  if (name == "C" || name == "c") return SplitterKind::C;
  throw DomainError("unknown splitter kind '" + std::string(name) + "' (expected A, B or C)");
}

std::string to_string(SplitterKind kind) {
  switch (kind) {
    case SplitterKind::A:
      return "A";
    case SplitterKind::B:
      return "B";
    case SplitterKind::C:
      return "C";
  }
  return "?";
}

void ACConfig::validate() const {
  if (kernel_size < 3 || kernel_size % 2 == 0) {
    throw DomainError("AC kernel size must be an odd integer >= 3, got " +
                      std::to_string(kernel_size));
  }
  if (splitter.directions.empty()) throw DomainError("AC splitter has no directions");
}

ACConfig make_ac_config(int kernel_size, SplitterKind kind) {
  ACConfig cfg;
  cfg.kernel_size = kernel_size;
  cfg.splitter = make_splitter(kind);
  cfg.validate();
  return cfg;
}

Conversion parse_conversion(std::string_view name) {
  if (name == "ac" || name == "AC") return Conversion::Anisotropic;
  if (name == "sc" || name == "SC") return Conversion::Standard;
  throw DomainError("unknown conversion '" + std::string(name) + "' (expected ac or sc)");
}

std::string to_string(Conversion c) { return c == Conversion::Anisotropic ? "ac" : "sc"; }

ProbabilityField one_hot(const LabelMap& labels, int classes) {
  if (classes <= 0) throw DomainError("one_hot: class count must be positive");
  if (labels.data().size() > 0 &&
      (labels.data().minCoeff() < 0 || labels.data().maxCoeff() >= classes)) {
    throw DomainError("one_hot: label outside [0, " + std::to_string(classes) + ")");
  }
  ProbabilityField out(classes, labels.rows(), labels.cols());
  for (int c = 0; c < classes; ++c) {
    out[c] = (labels.data().array() == c).cast<double>().matrix();
  }
  return out;
}

}  // namespace epl
