#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "seeker/window.hpp"

namespace seeker::memo {

inline constexpr double kDefaultThreshold = 0.95;

class ConstantInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Pearson correlation over two equal-length series; empty optional when
// either side has zero variance (correlation undefined).
inline std::optional<double> pearson_opt(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw std::invalid_argument("pearson: length mismatch");
  if (a.size() < 2) throw std::invalid_argument("pearson: need at least two samples");
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

inline double pearson(std::span<const float> a, std::span<const float> b) {
  const auto r = pearson_opt(a, b);
  if (!r) throw ConstantInput("pearson: constant input has no defined correlation");
  return *r;
}

// One representative window per class, indexed by class. Matching flattens
// windows row-major, so templates and queries must share a shape.
struct TemplateStore {
  std::vector<std::optional<SampleWindow>> templates;

  int classes() const { return static_cast<int>(templates.size()); }

  void set(int cls, SampleWindow w) {
    if (cls < 0) throw std::invalid_argument("TemplateStore: negative class");
    if (cls >= classes()) templates.resize(cls + 1);
    templates[cls] = std::move(w);
  }
};

// Best correlating template at or above the threshold, or nothing. Ties pick
// the lowest class index; constant windows never match (correlation
// undefined, treated as no-match rather than an error).
inline std::optional<std::pair<int, double>> match_template(const TemplateStore& store,
                                                            const SampleWindow& w,
                                                            double threshold = kDefaultThreshold) {
  std::optional<std::pair<int, double>> best;
  for (int cls = 0; cls < store.classes(); ++cls) {
    const auto& tpl = store.templates[cls];
    if (!tpl || !tpl->same_shape(w)) continue;
    const auto r = pearson_opt(tpl->flat(), w.flat());
    if (!r) continue;
    if (*r >= threshold && (!best || *r > best->second)) best = {cls, *r};
  }
  return best;
}

}  // namespace seeker::memo
