#pragma once

// The ten collage criteria and the weighted fitness.
//
// Every criterion is computed from a CriterionInputs record: per-image visible
// and reference map mass, areas, face counts, hull areas, the visible-region
// neighbor graph and pairwise histogram distances. The full evaluator below
// builds that record from scratch; the optimizer builds it incrementally.
//
// Reference mass is the integral of the transformed (rotated, unclipped) map,
// which equals sum2(M) for axis-aligned placements and keeps every visibility
// ratio inside [0,1] for rotated ones.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "collage/color.hpp"
#include "collage/core.hpp"
#include "collage/geometry.hpp"
#include "collage/scene.hpp"

namespace collage {

struct CriterionVector {
  std::array<double, kCriterionCount> values{};

  double operator[](int i) const { return values[i]; }
  double& operator[](int i) { return values[i]; }
  /// C'_k with k in 1..10.
  double c(int k) const { return values.at(k - 1); }
  friend bool operator==(const CriterionVector&, const CriterionVector&) = default;
};

inline double fitness(const CriterionVector& v, const std::array<double, kCriterionCount>& lambdas) {
  double f = 0.0;
  for (int i = 0; i < kCriterionCount; ++i) f += lambdas[i] * v[i];
  return f;
}

inline double fitness(const CriterionVector& v, const WeightSet& w) { return fitness(v, w.lambdas); }

/// Half-normalized chi-squared distance between two L1-normalized histograms.
inline double chi_squared(std::span<const double> h, std::span<const double> g) {
  constexpr double eps = 1e-10;
  double d = 0.0;
  for (std::size_t b = 0; b < h.size(); ++b) {
    const double s = h[b] + g[b];
    if (s == 0.0) continue;
    const double diff = h[b] - g[b];
    d += diff * diff / (s + eps);
  }
  return 0.5 * d;
}

/// Count histograms are normalized on the fly.
inline double chi_squared_counts(const int* h, long nh, const int* g, long ng) {
  constexpr double eps = 1e-10;
  if (nh <= 0 || ng <= 0) return 0.0;
  const double ih = 1.0 / nh, ig = 1.0 / ng;
  double d = 0.0;
  for (int b = 0; b < color::kRgbBins; ++b) {
    if (h[b] == 0 && g[b] == 0) continue;
    const double a = h[b] * ih, c = g[b] * ig;
    d += (a - c) * (a - c) / (a + c + eps);
  }
  return 0.5 * d;
}

inline double population_std(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / xs.size());
}

/// 1 - |c - canvas center| / half diagonal.
inline double centrality(double cx, double cy, const Canvas& canvas) {
  const double d = std::hypot(cx - 0.5 * canvas.width, cy - 0.5 * canvas.height);
  return std::max(0.0, 1.0 - d / canvas.half_diagonal());
}

struct CriterionInputs {
  int n = 0;
  Canvas canvas;
  std::vector<double> vis_mass;  // combined visible importance
  std::vector<double> ref_mass;  // combined reference importance
  long covered = 0;
  long face_visible = 0;
  long face_total = 0;
  std::vector<int> theta_index;
  bool top_visible = false;
  double top_cx = 0.0, top_cy = 0.0;
  std::vector<long> vis_area;
  std::vector<long> hull_area;
  std::vector<std::vector<int>> neighbors;  // sorted, symmetric
  std::vector<double> chi2;                 // n*n, valid on edges

  double ratio(int i) const { return std::min(1.0, vis_mass[i] / ref_mass[i]); }
};

inline double c1_visibility(const CriterionInputs& in) {
  double s = 0.0;
  for (int i = 0; i < in.n; ++i) s += in.ratio(i);
  return s / in.n;
}

inline double c2_coverage(const CriterionInputs& in) {
  return double(in.covered) / double(in.canvas.area());
}

inline double c3_ratio_balance(const CriterionInputs& in) {
  std::vector<double> r(in.n);
  for (int i = 0; i < in.n; ++i) r[i] = in.ratio(i);
  return 1.0 - population_std(r);
}

/// Datasets without faces satisfy the criterion vacuously.
inline double c4_face_ratio(const CriterionInputs& in) {
  if (in.face_total == 0) return 1.0;
  return std::min(1.0, double(in.face_visible) / double(in.face_total));
}

inline double c5_axis_alignment(const CriterionInputs& in) {
  const auto aligned = std::count(in.theta_index.begin(), in.theta_index.end(), kZeroAngleIndex);
  return double(aligned) / in.n;
}

inline double c6_centrality(const CriterionInputs& in) {
  if (!in.top_visible) return 0.0;
  return centrality(in.top_cx, in.top_cy, in.canvas);
}

/// Minimum visible-area / hull-area over images with a visible region.
inline double c7_convexity(const CriterionInputs& in) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < in.n; ++i)
    if (in.vis_area[i] > 0) best = std::min(best, double(in.vis_area[i]) / double(in.hull_area[i]));
  return std::isfinite(best) ? best : 0.0;
}

inline double c8_color_similarity(const CriterionInputs& in) {
  double s = 0.0;
  for (int i = 0; i < in.n; ++i) {
    const auto& nb = in.neighbors[i];
    if (nb.empty()) continue;
    double d = 0.0;
    for (int j : nb) d += in.chi2[std::size_t(i) * in.n + j];
    s += d / nb.size();
  }
  return s / in.n;
}

inline double c9_orientation_diversity(const CriterionInputs& in) {
  double s = 0.0;
  std::vector<double> group;
  for (int i = 0; i < in.n; ++i) {
    group.clear();
    group.push_back(normalized_angle(in.theta_index[i]));
    for (int j : in.neighbors[i]) group.push_back(normalized_angle(in.theta_index[j]));
    s += population_std(group);
  }
  return s / in.n;
}

inline double c10_min_orientation_difference(const CriterionInputs& in) {
  double s = 0.0;
  for (int i = 0; i < in.n; ++i) {
    const auto& nb = in.neighbors[i];
    if (nb.empty()) continue;
    int best = std::numeric_limits<int>::max();
    for (int j : nb) best = std::min(best, std::abs(in.theta_index[i] - in.theta_index[j]));
    s += double(best) / kZeroAngleIndex;
  }
  return s / in.n;
}

/// Bit i set means criterion C'_{i+1} is needed.
using CriterionMask = unsigned;
inline constexpr CriterionMask kAllCriteria = (1u << kCriterionCount) - 1;

inline CriterionMask active_criteria(const std::array<double, kCriterionCount>& lambdas) {
  CriterionMask m = 0;
  for (int i = 0; i < kCriterionCount; ++i)
    if (lambdas[i] != 0.0) m |= 1u << i;
  return m;
}

inline bool needs_neighbors(CriterionMask m) { return m & ((1u << 7) | (1u << 8) | (1u << 9)); }
inline bool needs_histograms(CriterionMask m) { return m & (1u << 7); }
inline bool needs_hulls(CriterionMask m) { return m & (1u << 6); }

/// Criteria outside the mask are left at 0.
inline CriterionVector assemble_criteria(const CriterionInputs& in, CriterionMask mask = kAllCriteria) {
  using Fn = double (*)(const CriterionInputs&);
  static constexpr std::array<Fn, kCriterionCount> fns{
      c1_visibility,     c2_coverage,  c3_ratio_balance,    c4_face_ratio,
      c5_axis_alignment, c6_centrality, c7_convexity,       c8_color_similarity,
      c9_orientation_diversity, c10_min_orientation_difference};
  CriterionVector v;
  for (int i = 0; i < kCriterionCount; ++i)
    if (mask & (1u << i)) v[i] = fns[i](in);
  return v;
}

// ---------------------------------------------------------------------------
// Full evaluation from scratch

/// Everything the criteria need for one configuration.
struct EvaluationContext {
  CollageConfiguration config;
  Grid<int> labels;                               // topmost image per canvas cell
  std::vector<std::vector<double>> vis_channels;  // per image, per sprite channel
  std::vector<std::vector<double>> ref_channels;
  std::vector<std::vector<int>> histograms;       // per image, 512 RGB bins over visible cells
  CriterionInputs inputs;
};

/// Paints sprites top-down into a label grid and gathers per-image statistics.
/// channel_weights blends the sprite channels into the visibility mass.
inline EvaluationContext build_context(const CollageConfiguration& cfg, SpriteBank& bank,
                                       std::span<const double> channel_weights,
                                       CriterionMask mask = kAllCriteria) {
  validate_configuration(cfg);
  const int n = static_cast<int>(cfg.states.size());
  if (std::size_t(n) != bank.size()) throw ValidationError("configuration and dataset sizes differ");
  const int channels = bank.channels();
  if (int(channel_weights.size()) != channels) throw ValidationError("one weight per sprite channel");

  const Canvas& canvas = cfg.canvas;
  const int W = canvas.width, H = canvas.height;
  EvaluationContext ctx;
  ctx.config = cfg;
  ctx.labels = Grid<int>(W, H, kNoImage);
  ctx.vis_channels.assign(n, std::vector<double>(channels, 0.0));
  ctx.ref_channels.assign(n, std::vector<double>(channels, 0.0));
  ctx.histograms.assign(n, std::vector<int>(color::kRgbBins, 0));

  auto& in = ctx.inputs;
  in.n = n;
  in.canvas = canvas;
  in.vis_mass.assign(n, 0.0);
  in.ref_mass.assign(n, 0.0);
  in.vis_area.assign(n, 0);
  in.hull_area.assign(n, 0);
  in.theta_index.resize(n);
  std::vector<double> cx(n, 0.0), cy(n, 0.0);
  std::vector<std::vector<std::pair<int, int>>> extents(n);

  const auto layers = cfg.layers();
  for (int img : top_down_order(layers)) {
    const auto& st = cfg.states[img];
    in.theta_index[img] = st.theta_index;
    const Sprite& sp = bank.get(img, st.theta_index);
    auto& vis = ctx.vis_channels[img];
    ctx.ref_channels[img] = sp.total_mass;
    in.face_total += sp.face_total;
    auto& hist = ctx.histograms[img];
    auto& ext = extents[img];
    ext.assign(H, {1, 0});
    long area = 0;
    for (int ly = 0; ly < sp.height; ++ly) {
      const int y = st.ty + ly;
      if (y < 0 || y >= H) continue;
      const RowSpan& span = sp.rows[ly];
      const int xb = std::max(st.tx + span.begin, 0), xe = std::min(st.tx + span.end, W);
      int* row = &ctx.labels.data[std::size_t(y) * W];
      auto& e = ext[y];
      for (int x = xb; x < xe; ++x) {
        if (row[x] != kNoImage) continue;
        row[x] = img;
        const int cell = span.offset + (x - st.tx - span.begin);
        for (int c = 0; c < channels; ++c) vis[c] += sp.values[std::size_t(cell) * channels + c];
        in.face_visible += sp.face[cell];
        ++hist[sp.bin[cell]];
        cx[img] += x + 0.5;
        cy[img] += y + 0.5;
        if (e.first > e.second) e = {x, x};
        e.second = x;
        ++area;
      }
    }
    in.vis_area[img] = area;
    in.covered += area;
  }

  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < channels; ++c) {
      in.vis_mass[i] += channel_weights[c] * ctx.vis_channels[i][c];
      in.ref_mass[i] += channel_weights[c] * ctx.ref_channels[i][c];
    }
    if (!(in.ref_mass[i] > 0.0))
      throw ValidationError("image " + std::to_string(i) + " has a zero-integral importance map");
    if (in.vis_area[i] > 0 && needs_hulls(mask)) in.hull_area[i] = hull_area_from_row_extents(extents[i]);
  }

  const int top = top_down_order(layers).front();
  if (in.vis_area[top] > 0) {
    in.top_visible = true;
    in.top_cx = cx[top] / in.vis_area[top];
    in.top_cy = cy[top] / in.vis_area[top];
  }

  in.neighbors.assign(n, {});
  in.chi2.assign(std::size_t(n) * n, 0.0);
  if (needs_neighbors(mask)) {
    const auto sets = neighbor_graph(ctx.labels, n);
    for (int i = 0; i < n; ++i) in.neighbors[i].assign(sets[i].begin(), sets[i].end());
    if (needs_histograms(mask))
      for (int i = 0; i < n; ++i)
        for (int j : in.neighbors[i])
          if (j > i) {
            const double d = chi_squared_counts(ctx.histograms[i].data(), in.vis_area[i],
                                                ctx.histograms[j].data(), in.vis_area[j]);
            in.chi2[std::size_t(i) * n + j] = in.chi2[std::size_t(j) * n + i] = d;
          }
  }
  return ctx;
}

/// Evaluates configurations of one dataset under a given alpha blend of the
/// base maps. Sprites are cached across calls.
class Evaluator {
 public:
  explicit Evaluator(const Dataset& ds) : bank_(ds, ChannelSpec::base()) { ds.validate(); }

  EvaluationContext context(const CollageConfiguration& cfg, const std::array<double, 3>& alphas,
                            CriterionMask mask = kAllCriteria) {
    return build_context(cfg, bank_, alphas, mask);
  }
  CriterionVector evaluate(const CollageConfiguration& cfg, const std::array<double, 3>& alphas) {
    return assemble_criteria(context(cfg, alphas).inputs);
  }
  SpriteBank& bank() { return bank_; }

 private:
  SpriteBank bank_;
};

inline CriterionVector evaluate_all(const CollageConfiguration& cfg, const Dataset& ds,
                                    const std::array<double, 3>& alphas) {
  Evaluator ev(ds);
  return ev.evaluate(cfg, alphas);
}

// ---------------------------------------------------------------------------
// Alpha-independent candidate features for weight learning

/// What learning needs to re-evaluate a fixed configuration under any alpha:
/// per-image visible and reference mass for each base map, plus the criteria
/// that do not depend on the maps.
struct CandidateFeatures {
  std::vector<std::array<double, 3>> visible;    // per image, (sal, qua, har)
  std::vector<std::array<double, 3>> reference;  // per image
  CriterionVector fixed;                         // C'2, C'4..C'10 valid; C'1, C'3 ignored

  CriterionVector criteria(const std::array<double, 3>& alphas) const {
    CriterionVector v = fixed;
    const std::size_t n = visible.size();
    std::vector<double> r(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double vis = 0.0, ref = 0.0;
      for (int k = 0; k < 3; ++k) {
        vis += alphas[k] * visible[i][k];
        ref += alphas[k] * reference[i][k];
      }
      r[i] = ref > 0.0 ? std::min(1.0, vis / ref) : 0.0;
      s += r[i];
    }
    v[0] = n ? s / n : 0.0;
    v[2] = 1.0 - population_std(r);
    return v;
  }
};

inline CandidateFeatures extract_features(const EvaluationContext& ctx) {
  if (ctx.vis_channels.empty() || ctx.vis_channels[0].size() != 3)
    throw ValidationError("features need a context built on the three base maps");
  CandidateFeatures f;
  for (std::size_t i = 0; i < ctx.vis_channels.size(); ++i) {
    f.visible.push_back({ctx.vis_channels[i][0], ctx.vis_channels[i][1], ctx.vis_channels[i][2]});
    f.reference.push_back({ctx.ref_channels[i][0], ctx.ref_channels[i][1], ctx.ref_channels[i][2]});
  }
  f.fixed = assemble_criteria(ctx.inputs);
  f.fixed[0] = 0.0;
  f.fixed[2] = 0.0;
  return f;
}

}  // namespace collage
