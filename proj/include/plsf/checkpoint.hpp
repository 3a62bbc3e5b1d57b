#ifndef PLSF_CHECKPOINT_HPP
#define PLSF_CHECKPOINT_HPP

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "plsf/basis.hpp"
#include "plsf/error.hpp"
#include "plsf/field.hpp"

namespace plsf {

// Binary velocity checkpoint, all integers and floats little-endian:
//
//   offset  size  content
//   0       4     magic "PLSF"
//   4       4     u32 version (= 1)
//   8       4     u32 dim
//   12      4     u32 M
//   16      8     f64 L
//   24      8     u64 mode count K = ((M+1)^dim - 1) / 2
//   32      ...   for each of the K half-space wavevectors, in basis order
//                 (|n|^2, then lexicographic), dim pairs of f64 (re, im)
//
// Coefficients at -n follow by conjugation; the mean mode is zero.

inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
inline void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
inline void put_f64(std::vector<unsigned char>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class ByteReader {
 public:
  explicit ByteReader(const std::vector<unsigned char>& b) : bytes_(b) {}
  std::uint64_t get(int width) {
    if (pos_ + static_cast<std::size_t>(width) > bytes_.size())
      throw IoError("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t(bytes_[pos_++]) << (8 * i);
    return v;
  }
  double get_f64() { return std::bit_cast<double>(get(8)); }
  bool at_end() const noexcept { return pos_ == bytes_.size(); }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<unsigned char> encode_checkpoint(const SpectralVelocity& v) {
  const auto& g = v.grid();
  const auto reps = detail::ordered_representatives(g);
  std::vector<unsigned char> out{'P', 'L', 'S', 'F'};
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(g.dim()));
  detail::put_u32(out, static_cast<std::uint32_t>(g.resolution()));
  detail::put_f64(out, g.length());
  detail::put_u64(out, reps.size());
  for (const auto& n : reps)
    for (int c = 0; c < g.dim(); ++c) {
      const Complex z = v.field().at(c, n);
      detail::put_f64(out, z.real());
      detail::put_f64(out, z.imag());
    }
  return out;
}

/// Decodes a checkpoint; dealias selects the padded grid of the result.
inline SpectralVelocity decode_checkpoint(const std::vector<unsigned char>& bytes,
                                          double dealias = 1.5) {
  if (bytes.size() < 4 || bytes[0] != 'P' || bytes[1] != 'L' || bytes[2] != 'S' || bytes[3] != 'F')
    throw IoError("checkpoint: bad magic (expected \"PLSF\")");
  detail::ByteReader r(bytes);
  r.get(4);
  const auto version = r.get(4);
  if (version != kCheckpointVersion)
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  const auto dim = static_cast<int>(r.get(4));
  const auto m = static_cast<int>(r.get(4));
  const double length = r.get_f64();
  const auto count = r.get(8);
  const TorusGrid g(dim, length, m, dealias);
  const auto reps = detail::ordered_representatives(g);
  if (count != reps.size())
    throw IoError("checkpoint: mode count " + std::to_string(count) + " does not match grid (" +
                  std::to_string(reps.size()) + ")");
  SpectralVectorField f(g);
  for (const auto& n : reps)
    for (int c = 0; c < dim; ++c) {
      const double re = r.get_f64();
      const double im = r.get_f64();
      f.at(c, n) = Complex{re, im};
      f.at(c, negate(n)) = Complex{re, -im};
    }
  if (!r.at_end()) throw IoError("checkpoint: trailing bytes");
  return SpectralVelocity(std::move(f));
}

inline void write_checkpoint(const std::string& path, const SpectralVelocity& v) {
  const auto bytes = encode_checkpoint(v);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("checkpoint: cannot open '" + path + "' for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("checkpoint: write failed for '" + path + "'");
}

inline SpectralVelocity read_checkpoint(const std::string& path, double dealias = 1.5) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint: cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes, dealias);
}

}  // namespace plsf

#endif  // PLSF_CHECKPOINT_HPP
