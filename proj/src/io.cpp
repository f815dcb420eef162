#include "epl/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

namespace epl {

namespace {

constexpr std::array<char, 4> kMagic = {'E', 'P', 'L', 'T'};

void put_u32(std::vector<char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const std::vector<char>& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw FormatError("eplt: truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  pos += 4;
  return v;
}

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void dump(const std::filesystem::path& path, const std::vector<char>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

void expect_dims(const Tensor& t, std::size_t ndim, const char* what) {
  if (t.dims.size() != ndim) {
    throw FormatError(std::string(what) + ": expected " + std::to_string(ndim) +
                      "-d tensor, got " + std::to_string(t.dims.size()) + "-d");
  }
}

// Whitespace/comment aware token reader for PNM headers.
std::string pnm_token(const std::vector<char>& in, std::size_t& pos) {
  while (pos < in.size()) {
    const char ch = in[pos];
    if (ch == '#') {
      while (pos < in.size() && in[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < in.size() && !std::isspace(static_cast<unsigned char>(in[pos]))) tok += in[pos++];
  if (tok.empty()) throw FormatError("pgm: truncated header");
  return tok;
}

int pnm_int(const std::vector<char>& in, std::size_t& pos) {
  const std::string tok = pnm_token(in, pos);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size()) throw FormatError("pgm: bad header field '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    throw FormatError("pgm: bad header field '" + tok + "'");
  }
}

}  // namespace

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

void write_eplt(const std::filesystem::path& path, const Tensor& tensor) {
  if (tensor.element_count() != tensor.values.size()) {
    throw DomainError("eplt: dims do not match value count");
  }
  std::vector<char> out(kMagic.begin(), kMagic.end());
  put_u32(out, kEpltVersion);
  put_u32(out, static_cast<std::uint32_t>(tensor.dims.size()));
  for (auto d : tensor.dims) put_u32(out, d);
  out.reserve(out.size() + 4 * tensor.values.size());
  for (float v : tensor.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  dump(path, out);
}

Tensor read_eplt(const std::filesystem::path& path) {
  const std::vector<char> in = slurp(path);
  if (in.size() < 4 || !std::equal(kMagic.begin(), kMagic.end(), in.begin())) {
    throw FormatError("eplt: bad magic in " + path.string());
  }
  std::size_t pos = 4;
  const std::uint32_t version = get_u32(in, pos);
  if (version != kEpltVersion) {
    throw FormatError("eplt: unsupported version " + std::to_string(version));
  }
  Tensor t;
  const std::uint32_t ndim = get_u32(in, pos);
  if (ndim > 16) throw FormatError("eplt: implausible ndim " + std::to_string(ndim));
  t.dims.resize(ndim);
  for (auto& d : t.dims) d = get_u32(in, pos);
  const std::size_t n = t.element_count();
  if (in.size() - pos != 4 * n) {
    throw FormatError("eplt: payload size does not match dims in " + path.string());
  }
  t.values.resize(n);
  for (auto& v : t.values) v = std::bit_cast<float>(get_u32(in, pos));
  return t;
}

Tensor to_tensor(const Plane<float>& plane) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(plane.rows()), static_cast<std::uint32_t>(plane.cols())};
  t.values.assign(plane.data(), plane.data() + plane.size());
  return t;
}

Tensor to_tensor(const Eigen::VectorXd& vector) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(vector.size())};
  t.values.reserve(static_cast<std::size_t>(vector.size()));
  for (Index i = 0; i < vector.size(); ++i) t.values.push_back(static_cast<float>(vector[i]));
  return t;
}

Tensor to_tensor(const Field<double>& field) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(field.channels()), static_cast<std::uint32_t>(field.rows()),
            static_cast<std::uint32_t>(field.cols())};
  const Eigen::VectorXd flat = flatten(field);
  t.values.assign(flat.begin(), flat.end());
  return t;
}

Tensor to_tensor(const PotentialFieldSet<double>& energies) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(energies.directions()),
            static_cast<std::uint32_t>(energies.channels()),
            static_cast<std::uint32_t>(energies.rows()), static_cast<std::uint32_t>(energies.cols())};
  const Eigen::VectorXd flat = flatten(energies);
  t.values.assign(flat.begin(), flat.end());
  return t;
}

Plane<float> plane_from_tensor(const Tensor& t) {
  expect_dims(t, 2, "plane");
  Plane<float> p(t.dims[0], t.dims[1]);
  std::copy(t.values.begin(), t.values.end(), p.data());
  return p;
}

Eigen::VectorXd vector_from_tensor(const Tensor& t) {
  expect_dims(t, 1, "vector");
  Eigen::VectorXd v(static_cast<Index>(t.dims[0]));
  for (Index i = 0; i < v.size(); ++i) v[i] = t.values[static_cast<std::size_t>(i)];
  return v;
}

Field<double> field_from_tensor(const Tensor& t) {
  expect_dims(t, 3, "field");
  Field<double> f(t.dims[0], t.dims[1], t.dims[2]);
  Eigen::VectorXd flat(static_cast<Index>(t.values.size()));
  for (Index i = 0; i < flat.size(); ++i) flat[i] = t.values[static_cast<std::size_t>(i)];
  unflatten(flat, f);
  return f;
}

PotentialFieldSet<double> potentials_from_tensor(const Tensor& t) {
  expect_dims(t, 4, "potential field set");
  PotentialFieldSet<double> e(t.dims[0], t.dims[1], t.dims[2], t.dims[3]);
  Eigen::VectorXd flat(static_cast<Index>(t.values.size()));
  for (Index i = 0; i < flat.size(); ++i) flat[i] = t.values[static_cast<std::size_t>(i)];
  unflatten(flat, e);
  return e;
}

void write_pgm(const std::filesystem::path& path, const LabelMap& labels) {
  if (labels.classes() > 256) throw DomainError("pgm: at most 256 classes fit in 8 bits");
  write_pgm_image(path, labels.data().cast<std::uint8_t>());
}

LabelMap read_pgm(const std::filesystem::path& path, int classes) {
  const Plane<std::uint8_t> px = read_pgm_image(path);
  LabelPlane data = px.cast<std::int32_t>();
  const int inferred = data.size() > 0 ? data.maxCoeff() + 1 : 1;
  if (classes > 0 && inferred > classes) {
    throw DomainError("pgm: " + path.string() + " has label " + std::to_string(inferred - 1) +
                      " >= class count " + std::to_string(classes));
  }
  return LabelMap(std::move(data), classes > 0 ? classes : inferred);
}

void write_pgm_image(const std::filesystem::path& path, const Plane<std::uint8_t>& pixels) {
  std::ostringstream header;
  header << "P5\n" << pixels.cols() << ' ' << pixels.rows() << "\n255\n";
  const std::string h = header.str();
  std::vector<char> out(h.begin(), h.end());
  out.insert(out.end(), reinterpret_cast<const char*>(pixels.data()),
             reinterpret_cast<const char*>(pixels.data()) + pixels.size());
  dump(path, out);
}

Plane<std::uint8_t> read_pgm_image(const std::filesystem::path& path) {
  const std::vector<char> in = slurp(path);
  if (in.size() < 2 || in[0] != 'P' || in[1] != '5') {
    throw FormatError("pgm: bad magic in " + path.string() + " (expected P5)");
  }
  std::size_t pos = 2;
  const int width = pnm_int(in, pos);
  const int height = pnm_int(in, pos);
  const int maxval = pnm_int(in, pos);
  if (width <= 0 || height <= 0) throw FormatError("pgm: non-positive dimensions");
  if (maxval <= 0 || maxval > 255) throw FormatError("pgm: only 8-bit maxval is supported");
  ++pos;  // single whitespace before raster
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (in.size() < pos + n) throw FormatError("pgm: truncated raster in " + path.string());
  Plane<std::uint8_t> px(height, width);
  std::memcpy(px.data(), in.data() + pos, n);
  return px;
}

Plane<std::uint8_t> render_energy(const Plane<double>& energy, double max_energy) {
  const double scale = max_energy > 0 ? 255.0 / max_energy : 0.0;
  return energy.unaryExpr([scale](double e) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(e * scale), 0L, 255L));
  });
}

}  // namespace epl
