#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace seeker {

// Counts how often values had to be clamped into the calibrated range.
// Saturation is tolerated and surfaced, never fatal.
struct SaturationCounters {
  long point_clamps = 0;
  long radius_clamps = 0;
};

// Fixed-budget uniform quantizer: every coreset point or cluster center is
// packed into one 16-bit code, every cluster radius into one 8-bit code.
// The 16 bits are split evenly across dimensions with the remainder going to
// the last dimension (3-D: 5+5+6).
struct QuantSpec {
  std::vector<double> min_v;
  std::vector<double> max_v;
  double radius_max = 1.0;

  static constexpr int kCenterBits = 16;
  static constexpr int kRadiusBits = 8;
  static constexpr int kRadiusLevels = (1 << kRadiusBits) - 1;  // 255

  int dims() const { return static_cast<int>(min_v.size()); }

  int bits_for_dim(int d) const {
    const int D = dims();
    const int base = kCenterBits / D;
    return d == D - 1 ? kCenterBits - base * (D - 1) : base;
  }

  // Number of quantization steps per dimension (codes run 0..levels).
  int levels_for_dim(int d) const { return (1 << bits_for_dim(d)) - 1; }

  double step(int d) const { return (max_v[d] - min_v[d]) / levels_for_dim(d); }

  double radius_step() const { return radius_max / kRadiusLevels; }

  // Worst-case displacement of a quantized center from the true center:
  // half a step per axis, combined euclidean. Added to radii before encoding
  // so dequantized balls still cover their points.
  double center_slack() const {
    double s2 = 0.0;
    for (int d = 0; d < dims(); ++d) {
      const double h = 0.5 * step(d);
      s2 += h * h;
    }
    return std::sqrt(s2);
  }

  void validate() const {
    if (dims() < 1 || dims() > kCenterBits)
      throw std::invalid_argument("QuantSpec: dims must be in [1,16]");
    if (max_v.size() != min_v.size())
      throw std::invalid_argument("QuantSpec: min/max size mismatch");
    for (int d = 0; d < dims(); ++d)
      if (!(min_v[d] < max_v[d]))
        throw std::invalid_argument("QuantSpec: min must be strictly below max");
    if (!(radius_max > 0.0)) throw std::invalid_argument("QuantSpec: radius_max must be positive");
  }
};

// Packs one point into a 16-bit code, dimension 0 in the least significant
// bits. Out-of-range coordinates clamp to the nearest representable value.
inline std::uint16_t quantize_point(std::span<const double> p, const QuantSpec& spec,
                                    SaturationCounters* sat = nullptr) {
  if (static_cast<int>(p.size()) != spec.dims())
    throw std::invalid_argument("quantize_point: dimension mismatch");
  std::uint32_t code = 0;
  int shift = 0;
  for (int d = 0; d < spec.dims(); ++d) {
    const int levels = spec.levels_for_dim(d);
    double t = (p[d] - spec.min_v[d]) / (spec.max_v[d] - spec.min_v[d]);
    if (t < 0.0 || t > 1.0) {
      if (sat) ++sat->point_clamps;
      t = t < 0.0 ? 0.0 : 1.0;
    }
    const auto q = static_cast<std::uint32_t>(std::lround(t * levels));
    code |= (q <= static_cast<std::uint32_t>(levels) ? q : levels) << shift;
    shift += spec.bits_for_dim(d);
  }
  return static_cast<std::uint16_t>(code);
}

inline std::uint16_t quantize_point(std::span<const float> p, const QuantSpec& spec,
                                    SaturationCounters* sat = nullptr) {
  std::vector<double> tmp(p.begin(), p.end());
  return quantize_point(std::span<const double>(tmp), spec, sat);
}

inline std::vector<double> dequantize_point(std::uint16_t code, const QuantSpec& spec) {
  std::vector<double> p(spec.dims());
  int shift = 0;
  for (int d = 0; d < spec.dims(); ++d) {
    const int bits = spec.bits_for_dim(d);
    const std::uint32_t q = (code >> shift) & ((1u << bits) - 1);
    p[d] = spec.min_v[d] + q * spec.step(d);
    shift += bits;
  }
  return p;
}

// Radius codes round *up* so a dequantized radius never under-covers. A radius
// beyond radius_max saturates at the top code (counted).
inline std::uint8_t quantize_radius(double r, const QuantSpec& spec,
                                    SaturationCounters* sat = nullptr) {
  if (r < 0.0) throw std::invalid_argument("quantize_radius: negative radius");
  const double step = spec.radius_step();
  if (r > spec.radius_max) {
    if (sat) ++sat->radius_clamps;
    return QuantSpec::kRadiusLevels;
  }
  auto q = static_cast<long>(std::ceil(r / step - 1e-12));
  if (q < 0) q = 0;
  if (q > QuantSpec::kRadiusLevels) q = QuantSpec::kRadiusLevels;
  // ceil under floating error could still land one step short; nudge up.
  if (q * step < r && q < QuantSpec::kRadiusLevels) ++q;
  return static_cast<std::uint8_t>(q);
}

inline double dequantize_radius(std::uint8_t code, const QuantSpec& spec) {
  return code * spec.radius_step();
}

}  // namespace seeker
