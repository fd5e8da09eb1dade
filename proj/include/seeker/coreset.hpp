#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "seeker/quant.hpp"
#include "seeker/rng.hpp"
#include "seeker/window.hpp"

namespace seeker::coreset {

inline constexpr int kMaxWireClusters = 15;   // wire format cap on cluster count
inline constexpr int kMaxClusterPoints = 16;  // 4-bit count stores count-1
inline constexpr int kMaxLloydIterations = 4;
inline constexpr int kMaxDpRefinePasses = 7;
inline constexpr int kDefaultClusterCount = 12;
inline constexpr int kDefaultDpPoints = 20;

// Raised when a window cannot be represented within the wire limits (more
// than 15 clusters would be required to keep every cluster at <= 16 points).
class UnsatisfiableCounts : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- quantized products -----------------------------------------------------

struct QuantCluster {
  std::uint16_t center_code = 0;
  std::uint8_t radius_code = 0;
  bool operator==(const QuantCluster&) const = default;
};

// Clustered coreset: centers + radii only (3 bytes per cluster on the wire).
struct ClusterCoreset {
  std::vector<QuantCluster> clusters;
  bool operator==(const ClusterCoreset&) const = default;
};

// Recoverable coreset: adds a 4-bit point count per cluster so the host can
// resample a full pseudo-window.
struct RecoverableCoreset {
  std::vector<QuantCluster> clusters;
  std::vector<int> counts;  // per cluster, 1..16
  bool operator==(const RecoverableCoreset&) const = default;
};

// Importance-sampled coreset: m quantized points, no cluster structure.
struct DpCoreset {
  std::vector<std::uint16_t> point_codes;
  bool operator==(const DpCoreset&) const = default;
};

// --- geometry ----------------------------------------------------------------

// Pre-quantization cluster over window rows.
struct GeoCluster {
  std::vector<double> center;
  double radius = 0.0;
  std::vector<int> members;  // row indices, ascending
};

struct LloydResult {
  std::vector<GeoCluster> clusters;
  int iterations = 0;   // assignment passes actually run
  bool converged = false;  // assignment reached a fixed point within the cap
};

namespace detail {

inline double dist2(std::span<const float> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

inline double dist2_rows(const SampleWindow& w, int i, int j) {
  double s = 0.0;
  for (int d = 0; d < w.cols; ++d) {
    const double diff = static_cast<double>(w.at(i, d)) - w.at(j, d);
    s += diff * diff;
  }
  return s;
}

inline std::vector<double> mean_of(const SampleWindow& w, const std::vector<int>& members) {
  std::vector<double> c(w.cols, 0.0);
  for (int idx : members)
    for (int d = 0; d < w.cols; ++d) c[d] += w.at(idx, d);
  for (double& v : c) v /= static_cast<double>(members.size());
  return c;
}

inline double radius_of(const SampleWindow& w, const std::vector<int>& members,
                        std::span<const double> center) {
  double r2 = 0.0;
  for (int idx : members) r2 = std::max(r2, dist2(w.row(idx), center));
  return std::sqrt(r2);
}

}  // namespace detail

// Lloyd's algorithm with temporally equispaced initial centers and a hard cap
// of four iterations. Ties assign to the lowest cluster index; clusters that
// empty out are removed. Deterministic: no randomness anywhere.
inline LloydResult lloyd_clusters(const SampleWindow& w, int k) {
  w.validate();
  if (k < 1 || k > w.rows) throw std::invalid_argument("lloyd_clusters: k out of range");

  std::vector<std::vector<double>> centers;
  centers.reserve(k);
  for (int i = 0; i < k; ++i) {
    const int row = static_cast<int>(static_cast<std::int64_t>(i) * w.rows / k);
    auto p = w.row(row);
    centers.emplace_back(p.begin(), p.end());
  }

  std::vector<int> assign(w.rows, -1);
  LloydResult out;

  for (int it = 1; it <= kMaxLloydIterations; ++it) {
    out.iterations = it;

    std::vector<int> next(w.rows);
    for (int i = 0; i < w.rows; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d = detail::dist2(w.row(i), centers[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      next[i] = best;
    }

    if (next == assign) {
      out.converged = true;
      break;
    }
    assign = std::move(next);

    // Recompute means; drop empty clusters and remap assignments.
    std::vector<int> count(centers.size(), 0);
    std::vector<std::vector<double>> sums(centers.size(), std::vector<double>(w.cols, 0.0));
    for (int i = 0; i < w.rows; ++i) {
      ++count[assign[i]];
      for (int d = 0; d < w.cols; ++d) sums[assign[i]][d] += w.at(i, d);
    }
    std::vector<int> remap(centers.size(), -1);
    std::vector<std::vector<double>> kept;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (count[c] == 0) continue;
      remap[c] = static_cast<int>(kept.size());
      for (double& v : sums[c]) v /= count[c];
      kept.push_back(std::move(sums[c]));
    }
    centers = std::move(kept);
    for (int& a : assign) a = remap[a];
  }

  out.clusters.resize(centers.size());
  for (std::size_t c = 0; c < centers.size(); ++c) out.clusters[c].center = centers[c];
  for (int i = 0; i < w.rows; ++i) out.clusters[assign[i]].members.push_back(i);
  for (auto& cl : out.clusters)
    cl.radius = detail::radius_of(w, cl.members, cl.center);
  return out;
}

namespace detail {

// Split one oversized cluster along its diameter: points join the nearer of
// the two farthest-apart members. Falls back to an index halving when the
// geometry is degenerate (all points coincident).
inline std::pair<std::vector<int>, std::vector<int>> diameter_split(const SampleWindow& w,
                                                                    const std::vector<int>& members) {
  const int n = static_cast<int>(members.size());
  int pa = 0, pb = 1;
  double best = -1.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = dist2_rows(w, members[i], members[j]);
      if (d > best) {
        best = d;
        pa = i;
        pb = j;
      }
    }
  std::vector<int> a, b;
  if (best > 0.0) {
    for (int i = 0; i < n; ++i) {
      const double da = dist2_rows(w, members[i], members[pa]);
      const double db = dist2_rows(w, members[i], members[pb]);
      (da <= db ? a : b).push_back(members[i]);
    }
  }
  if (a.empty() || b.empty()) {  // degenerate: halve by index
    a.assign(members.begin(), members.begin() + n / 2);
    b.assign(members.begin() + n / 2, members.end());
  }
  return {std::move(a), std::move(b)};
}

// Split into the minimum number of near-equal index chunks, each <= cap.
inline std::vector<std::vector<int>> chunk_split(const std::vector<int>& members, int cap) {
  const int n = static_cast<int>(members.size());
  const int chunks = (n + cap - 1) / cap;
  std::vector<std::vector<int>> out;
  out.reserve(chunks);
  const int base = n / chunks, rem = n % chunks;
  int pos = 0;
  for (int c = 0; c < chunks; ++c) {
    const int sz = base + (c < rem ? 1 : 0);
    out.emplace_back(members.begin() + pos, members.begin() + pos + sz);
    pos += sz;
  }
  return out;
}

// Additional clusters unavoidably required to bring every membership list
// under the cap.
inline int min_extra_clusters(const std::vector<std::vector<int>>& memberships, int cap) {
  int extra = 0;
  for (const auto& m : memberships) {
    const int n = static_cast<int>(m.size());
    if (n > cap) extra += (n + cap - 1) / cap - 1;
  }
  return extra;
}

}  // namespace detail

// Clustered coreset without counts: quantized centers plus radii. Radii are
// inflated by the center quantization slack before encoding so every member
// point stays inside its dequantized ball.
inline ClusterCoreset kmeans_coreset(const SampleWindow& w, int k, const QuantSpec& spec,
                                     SaturationCounters* sat = nullptr) {
  spec.validate();
  auto lloyd = lloyd_clusters(w, k);
  ClusterCoreset out;
  out.clusters.reserve(lloyd.clusters.size());
  for (const auto& cl : lloyd.clusters) {
    QuantCluster q;
    q.center_code = quantize_point(std::span<const double>(cl.center), spec, sat);
    q.radius_code = quantize_radius(cl.radius + spec.center_slack(), spec, sat);
    out.clusters.push_back(q);
  }
  return out;
}

// Recoverable coreset: clustered coreset plus per-cluster point counts.
// Clusters holding more than 16 points are split until compliant, growing the
// cluster count but never beyond the wire cap of 15.
inline RecoverableCoreset recoverable_coreset(const SampleWindow& w, int k, const QuantSpec& spec,
                                              SaturationCounters* sat = nullptr) {
  spec.validate();
  auto lloyd = lloyd_clusters(w, k);

  std::vector<std::vector<int>> groups;
  groups.reserve(lloyd.clusters.size());
  for (auto& cl : lloyd.clusters) groups.push_back(std::move(cl.members));

  auto feasible_total = [&groups] {
    return static_cast<int>(groups.size()) + detail::min_extra_clusters(groups, kMaxClusterPoints);
  };
  if (feasible_total() > kMaxWireClusters)
    throw UnsatisfiableCounts("recoverable_coreset: window cannot fit 15 clusters of <= 16 points");

  for (;;) {
    // Largest oversized cluster first (ties: lowest index) for determinism.
    int pick = -1;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const int n = static_cast<int>(groups[g].size());
      if (n > kMaxClusterPoints && (pick < 0 || n > static_cast<int>(groups[pick].size())))
        pick = static_cast<int>(g);
    }
    if (pick < 0) break;

    auto [a, b] = detail::diameter_split(w, groups[pick]);
    std::vector<std::vector<int>> candidate;
    candidate.reserve(groups.size() + 1);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (static_cast<int>(g) == pick) {
        candidate.push_back(a);
        candidate.push_back(b);
      } else {
        candidate.push_back(groups[g]);
      }
    }
    const int need = static_cast<int>(candidate.size()) +
                     detail::min_extra_clusters(candidate, kMaxClusterPoints);
    if (need <= kMaxWireClusters) {
      groups = std::move(candidate);
    } else {
      // The geometric split would blow the budget; fall back to exact chunking
      // of this cluster, which meets the precomputed minimum.
      auto chunks = detail::chunk_split(groups[pick], kMaxClusterPoints);
      std::vector<std::vector<int>> next;
      next.reserve(groups.size() + chunks.size() - 1);
      for (std::size_t g = 0; g < groups.size(); ++g) {
        if (static_cast<int>(g) == pick)
          for (auto& c : chunks) next.push_back(std::move(c));
        else
          next.push_back(std::move(groups[g]));
      }
      groups = std::move(next);
    }
  }

  RecoverableCoreset out;
  out.clusters.reserve(groups.size());
  out.counts.reserve(groups.size());
  for (const auto& members : groups) {
    const auto center = detail::mean_of(w, members);
    const double radius = detail::radius_of(w, members, center);
    QuantCluster q;
    q.center_code = quantize_point(std::span<const double>(center), spec, sat);
    q.radius_code = quantize_radius(radius + spec.center_slack(), spec, sat);
    out.clusters.push_back(q);
    out.counts.push_back(static_cast<int>(members.size()));
  }
  return out;
}

// Host-side resampling: each cluster contributes `count` points drawn
// uniformly from the dequantized ball. Rows appear in cluster order.
inline SampleWindow reconstruct(const RecoverableCoreset& rec, const QuantSpec& spec,
                                std::uint64_t seed) {
  spec.validate();
  if (rec.clusters.size() != rec.counts.size())
    throw std::invalid_argument("reconstruct: clusters/counts size mismatch");
  const int D = spec.dims();
  SampleWindow out;
  out.cols = D;
  Rng rng(seed);
  for (std::size_t c = 0; c < rec.clusters.size(); ++c) {
    const int count = rec.counts[c];
    if (count < 1 || count > kMaxClusterPoints)
      throw std::invalid_argument("reconstruct: count out of range");
    const auto center = dequantize_point(rec.clusters[c].center_code, spec);
    const double radius = dequantize_radius(rec.clusters[c].radius_code, spec);
    for (int j = 0; j < count; ++j) {
      std::vector<double> dir(D);
      double norm2 = 0.0;
      for (int d = 0; d < D; ++d) {
        dir[d] = rng.next_normal();
        norm2 += dir[d] * dir[d];
      }
      double norm = std::sqrt(norm2);
      if (norm < 1e-12) {
        std::fill(dir.begin(), dir.end(), 0.0);
        dir[0] = 1.0;
        norm = 1.0;
      }
      const double r = radius * std::pow(rng.next_double(), 1.0 / D);
      for (int d = 0; d < D; ++d) out.points.push_back(static_cast<float>(center[d] + dir[d] / norm * r));
    }
    out.rows += count;
  }
  return out;
}

// --- importance sampling -----------------------------------------------------

// Squared-distance-proportional seeding (uniform first pick) followed by up to
// seven greedy swap passes that strictly reduce the coverage cost
// sum_i min_{s in S} d^2(p_i, s). Returns selected row indices in pick order.
inline std::vector<int> dp_select(const SampleWindow& w, int m, std::uint64_t seed) {
  w.validate();
  const int n = w.rows;
  if (m < 1 || m > n) throw std::invalid_argument("dp_select: m out of range");

  // Pairwise squared distances, computed once per window.
  std::vector<double> dmat(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = detail::dist2_rows(w, i, j);
      dmat[static_cast<std::size_t>(i) * n + j] = d;
      dmat[static_cast<std::size_t>(j) * n + i] = d;
    }
  auto dm = [&](int i, int j) { return dmat[static_cast<std::size_t>(i) * n + j]; };

  Rng rng(seed);
  std::vector<int> selected;
  std::vector<char> is_sel(n, 0);
  std::vector<double> d2(n);

  const int first = static_cast<int>(rng.next_index(n));
  selected.push_back(first);
  is_sel[first] = 1;
  for (int i = 0; i < n; ++i) d2[i] = dm(i, first);

  while (static_cast<int>(selected.size()) < m) {
    double total = 0.0;
    for (int i = 0; i < n; ++i)
      if (!is_sel[i]) total += d2[i];
    int pick = -1;
    if (total <= 0.0) {
      // Remaining points coincide with the selection: uniform choice.
      int nth = static_cast<int>(rng.next_index(n - selected.size()));
      for (int i = 0; i < n; ++i) {
        if (is_sel[i]) continue;
        if (nth-- == 0) {
          pick = i;
          break;
        }
      }
    } else {
      const double r = rng.next_double() * total;
      double cum = 0.0;
      for (int i = 0; i < n; ++i) {
        if (is_sel[i]) continue;
        cum += d2[i];
        if (cum >= r) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {  // floating-point tail guard
        for (int i = n - 1; i >= 0; --i)
          if (!is_sel[i]) {
            pick = i;
            break;
          }
      }
    }
    selected.push_back(pick);
    is_sel[pick] = 1;
    for (int i = 0; i < n; ++i) d2[i] = std::min(d2[i], dm(i, pick));
  }

  if (m == n) return selected;  // nothing to refine

  // Greedy swap refinement over the cached distance matrix. near1 holds the
  // slot index of each point's closest pick; second holds the distance to the
  // runner-up, which is what the cost becomes if that closest pick is removed.
  std::vector<int> near1(n);
  std::vector<double> second(n);
  auto rebuild_near = [&] {
    for (int i = 0; i < n; ++i) {
      double b1 = std::numeric_limits<double>::infinity(), b2 = b1;
      int s1 = 0;
      for (int j = 0; j < m; ++j) {
        const double d = dm(i, selected[j]);
        if (d < b1) {
          b2 = b1;
          b1 = d;
          s1 = j;
        } else if (d < b2) {
          b2 = d;
        }
      }
      near1[i] = s1;
      d2[i] = b1;
      second[i] = m > 1 ? b2 : b1;
    }
  };
  double cost = 0.0;
  rebuild_near();
  for (int i = 0; i < n; ++i) cost += d2[i];

  for (int pass = 0; pass < kMaxDpRefinePasses; ++pass) {
    bool improved = false;
    for (int j = 0; j < m; ++j) {
      double best_cost = cost;
      int best_c = -1;
      for (int c = 0; c < n; ++c) {
        if (is_sel[c]) continue;
        double cand = 0.0;
        for (int i = 0; i < n; ++i) {
          const double base = near1[i] == j ? second[i] : d2[i];
          cand += std::min(base, dm(i, c));
        }
        if (cand < best_cost - 1e-12) {
          best_cost = cand;
          best_c = c;
        }
      }
      if (best_c >= 0) {
        is_sel[selected[j]] = 0;
        is_sel[best_c] = 1;
        selected[j] = best_c;
        cost = best_cost;
        rebuild_near();
        improved = true;
      }
    }
    if (!improved) break;
  }
  return selected;
}

inline DpCoreset dp_sample(const SampleWindow& w, int m, std::uint64_t seed, const QuantSpec& spec,
                           SaturationCounters* sat = nullptr) {
  spec.validate();
  if (spec.dims() != w.cols) throw std::invalid_argument("dp_sample: dimension mismatch");
  DpCoreset out;
  for (int idx : dp_select(w, m, seed)) out.point_codes.push_back(quantize_point(w.row(idx), spec, sat));
  return out;
}

// Expands a point-coreset back into an unclustered pseudo-window.
inline SampleWindow dp_expand(const DpCoreset& dp, const QuantSpec& spec) {
  SampleWindow out;
  out.cols = spec.dims();
  out.rows = static_cast<int>(dp.point_codes.size());
  out.points.reserve(static_cast<std::size_t>(out.rows) * out.cols);
  for (std::uint16_t code : dp.point_codes) {
    const auto p = dequantize_point(code, spec);
    for (double v : p) out.points.push_back(static_cast<float>(v));
  }
  return out;
}

// --- activity-aware cluster count --------------------------------------------

// Per-class cluster budget table. For each class, the smallest candidate k
// whose accuracy stays within `tolerance` of the largest candidate's.
struct ActivityLut {
  std::vector<int> candidate_ks;  // ascending
  std::vector<int> k_by_class;    // class index -> chosen k
  double tolerance = 0.02;

  int max_k() const { return candidate_ks.back(); }
  int min_k() const { return candidate_ks.front(); }

  int k_for(std::optional<int> cls) const {
    if (cls && *cls >= 0 && *cls < static_cast<int>(k_by_class.size())) return k_by_class[*cls];
    return max_k();
  }
};

// accuracy[k_index][class] measured on held-out data, one row per candidate.
inline ActivityLut build_activity_lut(std::vector<int> candidate_ks,
                                      const std::vector<std::vector<double>>& accuracy,
                                      double tolerance) {
  if (candidate_ks.empty()) throw std::invalid_argument("build_activity_lut: no candidates");
  if (!std::is_sorted(candidate_ks.begin(), candidate_ks.end()))
    throw std::invalid_argument("build_activity_lut: candidates must be ascending");
  if (accuracy.size() != candidate_ks.size())
    throw std::invalid_argument("build_activity_lut: accuracy rows must match candidates");
  if (tolerance < 0.0) throw std::invalid_argument("build_activity_lut: negative tolerance");

  const std::size_t classes = accuracy.front().size();
  for (const auto& row : accuracy)
    if (row.size() != classes) throw std::invalid_argument("build_activity_lut: ragged accuracy table");

  ActivityLut lut;
  lut.candidate_ks = std::move(candidate_ks);
  lut.tolerance = tolerance;
  lut.k_by_class.assign(classes, lut.max_k());
  for (std::size_t c = 0; c < classes; ++c) {
    const double ref = accuracy.back()[c];
    if (std::isnan(ref)) continue;  // class unseen in held-out data: stay conservative
    for (std::size_t ki = 0; ki < lut.candidate_ks.size(); ++ki) {
      if (!std::isnan(accuracy[ki][c]) && accuracy[ki][c] >= ref - tolerance) {
        lut.k_by_class[c] = lut.candidate_ks[ki];
        break;
      }
    }
  }
  return lut;
}

// Picks the cluster count for a window: the LUT entry for the node's current
// class belief, optionally lowered by an energy hint. The result always stays
// inside the candidate set (hints snap down to a candidate, never below the
// smallest).
inline int select_cluster_count(const ActivityLut& lut, std::optional<int> cls,
                                std::optional<int> budget_hint = std::nullopt) {
  int k = lut.k_for(cls);
  if (budget_hint && *budget_hint < k) {
    const int want = std::max(*budget_hint, lut.min_k());
    k = lut.min_k();
    for (int cand : lut.candidate_ks)
      if (cand <= want) k = cand;
  }
  return k;
}

}  // namespace seeker::coreset
