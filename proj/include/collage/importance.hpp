#pragma once

// Per-image importance maps: multi-scale tile contrast saliency, a local
// hue-template harmony field, and a local natural-scene-statistics quality
// field. All three land in [0,1] and can be blended into a single map.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "collage/color.hpp"
#include "collage/core.hpp"

namespace collage {

struct MapProviderConfig {
  int saliency_tile = 8;
  std::array<int, 3> saliency_radii{1, 2, 3};
  std::vector<int> harmony_windows{9, 17, 33};
  std::vector<int> quality_windows{9, 17, 33};

  /// Window sizes in ascending order, so per-window sums do not depend on
  /// the configured order.
  static std::vector<int> sorted(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return v;
  }

  void validate() const {
    if (saliency_tile < 1) throw ValidationError("saliency tile size must be >= 1");
    for (std::size_t i = 0; i < saliency_radii.size(); ++i) {
      if (saliency_radii[i] < 1) throw ValidationError("saliency radii must be >= 1");
      if (i > 0 && saliency_radii[i] <= saliency_radii[i - 1])
        throw ValidationError("saliency radii must be strictly increasing");
    }
    for (const auto* ws : {&harmony_windows, &quality_windows})
      for (int w : *ws)
        if (w < 1 || w % 2 == 0) throw ValidationError("window sizes must be odd and >= 1");
  }
};

/// The three base maps of one image, indexable by MapKind.
struct MapSet {
  ImportanceMap saliency;
  ImportanceMap quality;
  ImportanceMap harmony;

  const ImportanceMap& operator[](MapKind k) const {
    switch (k) {
      case MapKind::saliency: return saliency;
      case MapKind::quality: return quality;
      case MapKind::harmony: return harmony;
      default: throw ValidationError("MapSet holds only base kinds");
    }
  }
  ImportanceMap& operator[](MapKind k) {
    return const_cast<ImportanceMap&>(std::as_const(*this)[k]);
  }
};

namespace detail {

/// Min-max normalization in place. A constant field becomes all ones if its
/// value is positive and all zeros otherwise.
inline void normalize_min_max(std::vector<double>& v) {
  if (v.empty()) return;
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it, hi = *hi_it;
  const double span = hi - lo;
  if (span <= 1e-12 * std::max(1.0, std::abs(hi))) {
    std::fill(v.begin(), v.end(), hi > 1e-12 ? 1.0 : 0.0);
    return;
  }
  for (double& x : v) x = std::clamp((x - lo) / span, 0.0, 1.0);
}

/// Summed-area table with a zero border row/column.
class Integral {
 public:
  Integral(int w, int h, const std::vector<double>& src) : w_(w), h_(h), s_((w + 1) * std::size_t(h + 1), 0.0) {
    for (int y = 0; y < h; ++y) {
      double row = 0.0;
      for (int x = 0; x < w; ++x) {
        row += src[std::size_t(y) * w + x];
        at(x + 1, y + 1) = at(x + 1, y) + row;
      }
    }
  }
  /// Sum over the window of half-size r centered on (x,y), clipped. Returns
  /// the sum and writes the clipped cell count.
  double window(int x, int y, int r, int* count = nullptr) const {
    const int x0 = std::max(0, x - r), x1 = std::min(w_, x + r + 1);
    const int y0 = std::max(0, y - r), y1 = std::min(h_, y + r + 1);
    if (count) *count = (x1 - x0) * (y1 - y0);
    return s_[idx(x1, y1)] - s_[idx(x0, y1)] - s_[idx(x1, y0)] + s_[idx(x0, y0)];
  }

 private:
  std::size_t idx(int x, int y) const { return std::size_t(y) * (w_ + 1) + x; }
  double& at(int x, int y) { return s_[idx(x, y)]; }
  int w_, h_;
  std::vector<double> s_;
};

inline ImportanceMap to_map(int w, int h, MapKind kind, std::vector<double> values) {
  ImportanceMap m(w, h, kind);
  m.values.data = std::move(values);
  return m;
}

// Harmonic hue templates as (sector center offset, half width) in degrees.
struct Sector {
  double center;
  double half_width;
};

inline const std::vector<std::vector<Sector>>& hue_templates() {
  static const std::vector<std::vector<Sector>> t = {
      {{0, 9.0}},                 // i
      {{0, 46.8}},                // V
      {{0, 9.0}, {90, 39.6}},     // L
      {{0, 9.0}, {180, 9.0}},     // I
      {{0, 90.0}},                // T
      {{0, 46.8}, {180, 9.0}},    // Y
      {{0, 46.8}, {180, 46.8}},   // X
  };
  return t;
}

inline constexpr int kHueBins = 36;
inline constexpr int kTemplateRotations = 36;

inline double hue_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

/// deviation[(template * rotations + rotation) * bins + bin] in degrees.
inline const std::vector<double>& template_deviation_table() {
  static const std::vector<double> table = [] {
    const auto& templates = hue_templates();
    std::vector<double> t(templates.size() * kTemplateRotations * kHueBins);
    for (std::size_t k = 0; k < templates.size(); ++k)
      for (int r = 0; r < kTemplateRotations; ++r)
        for (int b = 0; b < kHueBins; ++b) {
          const double hue = 10.0 * b + 5.0;
          double best = 180.0;
          for (const auto& s : templates[k]) {
            const double d = hue_distance(hue, 10.0 * r + s.center) - s.half_width;
            best = std::min(best, std::max(0.0, d));
          }
          t[(k * kTemplateRotations + r) * kHueBins + b] = best;
        }
    return t;
  }();
  return table;
}

/// 1 - (mean angular deviation from the best-fitting template) / 180.
inline double template_harmony(const std::array<double, kHueBins>& hist) {
  double total = 0.0;
  std::array<int, kHueBins> nz{};
  int n = 0;
  for (int b = 0; b < kHueBins; ++b)
    if (hist[b] > 1e-12) {
      total += hist[b];
      nz[n++] = b;
    }
  if (total <= 1e-9) return 1.0;
  const auto& table = template_deviation_table();
  const std::size_t combos = hue_templates().size() * kTemplateRotations;
  double best = 1e300;
  for (std::size_t c = 0; c < combos && best > 0.0; ++c) {
    const double* row = &table[c * kHueBins];
    double dev = 0.0;
    for (int i = 0; i < n; ++i) dev += hist[nz[i]] * row[nz[i]];
    best = std::min(best, dev);
  }
  return 1.0 - best / total / 180.0;
}

inline std::vector<double> gaussian_blur7(int w, int h, const std::vector<double>& src) {
  constexpr int r = 3;
  const double sigma = 7.0 / 6.0;
  std::array<double, 2 * r + 1> k{};
  double ks = 0.0;
  for (int i = -r; i <= r; ++i) ks += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& v : k) v /= ks;
  auto clampi = [](int v, int lo, int hi) { return std::min(std::max(v, lo), hi); };
  std::vector<double> tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * src[std::size_t(y) * w + clampi(x + i, 0, w - 1)];
      tmp[std::size_t(y) * w + x] = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * tmp[std::size_t(clampi(y + i, 0, h - 1)) * w + x];
      out[std::size_t(y) * w + x] = s;
    }
  return out;
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + v.size() / 2;
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

/// Regularity of a local variance estimate against a reference level.
inline double regularity(double v, double reference) {
  return 1.0 / (1.0 + std::abs(v - reference) / (reference + 0.1));
}

}  // namespace detail

/// Raw per-tile contrast at one neighborhood radius, before filtering.
/// Exposed for tests; tiles are indexed row-major over a tiles_x x tiles_y grid.
struct TileGrid {
  int tiles_x = 0, tiles_y = 0, tile = 0;
  std::vector<color::Luv> means;
};

inline TileGrid tile_means(const RasterImage& image, int tile) {
  TileGrid g;
  g.tile = tile;
  g.tiles_x = (image.width + tile - 1) / tile;
  g.tiles_y = (image.height + tile - 1) / tile;
  g.means.resize(std::size_t(g.tiles_x) * g.tiles_y);
  std::vector<int> counts(g.means.size(), 0);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const auto c = color::to_luv(image.at(x, y));
      auto& m = g.means[std::size_t(y / tile) * g.tiles_x + x / tile];
      m.l += c.l;
      m.u += c.u;
      m.v += c.v;
      ++counts[std::size_t(y / tile) * g.tiles_x + x / tile];
    }
  for (std::size_t i = 0; i < g.means.size(); ++i) {
    g.means[i].l /= counts[i];
    g.means[i].u /= counts[i];
    g.means[i].v /= counts[i];
  }
  return g;
}

inline std::vector<double> tile_contrast(const TileGrid& g, int radius) {
  std::vector<double> out(g.means.size(), 0.0);
  for (int ty = 0; ty < g.tiles_y; ++ty)
    for (int tx = 0; tx < g.tiles_x; ++tx) {
      const auto& m = g.means[std::size_t(ty) * g.tiles_x + tx];
      double s = 0.0;
      for (int ny = std::max(0, ty - radius); ny <= std::min(g.tiles_y - 1, ty + radius); ++ny)
        for (int nx = std::max(0, tx - radius); nx <= std::min(g.tiles_x - 1, tx + radius); ++nx) {
          if (nx == tx && ny == ty) continue;
          const auto& n = g.means[std::size_t(ny) * g.tiles_x + nx];
          s += std::sqrt((m.l - n.l) * (m.l - n.l) + (m.u - n.u) * (m.u - n.u) +
                         (m.v - n.v) * (m.v - n.v));
        }
      out[std::size_t(ty) * g.tiles_x + tx] = s;
    }
  return out;
}

/// 3x3 tile box filter, averaging over the in-bounds tiles.
inline std::vector<double> box_filter_tiles(const std::vector<double>& v, int tiles_x, int tiles_y) {
  std::vector<double> out(v.size(), 0.0);
  for (int ty = 0; ty < tiles_y; ++ty)
    for (int tx = 0; tx < tiles_x; ++tx) {
      double s = 0.0;
      int n = 0;
      for (int ny = std::max(0, ty - 1); ny <= std::min(tiles_y - 1, ty + 1); ++ny)
        for (int nx = std::max(0, tx - 1); nx <= std::min(tiles_x - 1, tx + 1); ++nx) {
          s += v[std::size_t(ny) * tiles_x + nx];
          ++n;
        }
      out[std::size_t(ty) * tiles_x + tx] = s / n;
    }
  return out;
}

inline ImportanceMap saliency_map(const RasterImage& image, const MapProviderConfig& cfg = {}) {
  cfg.validate();
  image.validate();
  if (cfg.saliency_tile > std::min(image.width, image.height))
    throw ValidationError("saliency tile larger than image");
  const TileGrid g = tile_means(image, cfg.saliency_tile);
  std::vector<double> tiles(g.means.size(), 0.0);
  for (int r : cfg.saliency_radii) {
    const auto f = box_filter_tiles(tile_contrast(g, r), g.tiles_x, g.tiles_y);
    for (std::size_t i = 0; i < tiles.size(); ++i) tiles[i] += f[i];
  }
  detail::normalize_min_max(tiles);
  std::vector<double> px(std::size_t(image.width) * image.height);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      px[std::size_t(y) * image.width + x] =
          tiles[std::size_t(y / g.tile) * g.tiles_x + x / g.tile];
  return detail::to_map(image.width, image.height, MapKind::saliency, std::move(px));
}

/// Chromatic weight of a pixel for hue statistics; 0 for near-achromatic pixels.
inline double chroma_weight(const color::Hsv& c) {
  return (c.s < 0.08 || c.v < 0.08) ? 0.0 : c.s;
}

inline ImportanceMap harmony_map(const RasterImage& image, const MapProviderConfig& cfg = {}) {
  cfg.validate();
  image.validate();
  const int w = image.width, h = image.height;
  const std::size_t n = std::size_t(w) * h;
  std::vector<std::vector<double>> planes(detail::kHueBins, std::vector<double>(n, 0.0));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto c = color::to_hsv(image.at(x, y));
      const double wt = chroma_weight(c);
      if (wt <= 0.0) continue;
      const int bin = std::min(detail::kHueBins - 1, int(c.h / 10.0));
      planes[bin][std::size_t(y) * w + x] = wt;
    }
  std::vector<detail::Integral> integrals;
  integrals.reserve(detail::kHueBins);
  for (const auto& p : planes) integrals.emplace_back(w, h, p);

  std::vector<double> acc(n, 0.0);
  std::array<double, detail::kHueBins> hist{};
  for (int win : MapProviderConfig::sorted(cfg.harmony_windows)) {
    const int r = win / 2;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        for (int b = 0; b < detail::kHueBins; ++b) hist[b] = integrals[b].window(x, y, r);
        acc[std::size_t(y) * w + x] += detail::template_harmony(hist);
      }
  }
  detail::normalize_min_max(acc);
  return detail::to_map(w, h, MapKind::harmony, std::move(acc));
}

/// Mean-subtracted contrast-normalized luminance coefficients.
inline std::vector<double> mscn_coefficients(const RasterImage& image) {
  const int w = image.width, h = image.height;
  std::vector<double> lum(std::size_t(w) * h), sq(lum.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double l = color::luminance(image.at(x, y));
      lum[std::size_t(y) * w + x] = l;
      sq[std::size_t(y) * w + x] = l * l;
    }
  const auto mu = detail::gaussian_blur7(w, h, lum);
  const auto mu2 = detail::gaussian_blur7(w, h, sq);
  std::vector<double> out(lum.size());
  for (std::size_t i = 0; i < lum.size(); ++i) {
    const double sigma = std::sqrt(std::max(0.0, mu2[i] - mu[i] * mu[i]));
    out[i] = (lum[i] - mu[i]) / (sigma + 1.0);
  }
  return out;
}

inline ImportanceMap quality_map(const RasterImage& image, const MapProviderConfig& cfg = {}) {
  cfg.validate();
  image.validate();
  const int w = image.width, h = image.height;
  const auto mscn = mscn_coefficients(image);
  std::vector<double> energy(mscn.size());
  for (std::size_t i = 0; i < mscn.size(); ++i) energy[i] = mscn[i] * mscn[i];

  // Whole-image index: global MSCN energy against its pixelwise median.
  const double global_mean = std::accumulate(energy.begin(), energy.end(), 0.0) / energy.size();
  const double global_index = detail::regularity(global_mean, detail::median_of(energy));
  std::vector<double> acc(energy.size(), global_index);

  const detail::Integral integral(w, h, energy);
  std::vector<double> local(energy.size());
  for (int win : MapProviderConfig::sorted(cfg.quality_windows)) {
    const int r = win / 2;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        int count = 0;
        const double s = integral.window(x, y, r, &count);
        local[std::size_t(y) * w + x] = s / count;
      }
    const double reference = detail::median_of(local);
    for (std::size_t i = 0; i < local.size(); ++i) acc[i] += detail::regularity(local[i], reference);
  }
  detail::normalize_min_max(acc);
  return detail::to_map(w, h, MapKind::quality, std::move(acc));
}

inline ImportanceMap compute_map(MapKind kind, const RasterImage& image, const MapProviderConfig& cfg) {
  switch (kind) {
    case MapKind::saliency: return saliency_map(image, cfg);
    case MapKind::quality: return quality_map(image, cfg);
    case MapKind::harmony: return harmony_map(image, cfg);
    default: throw ValidationError("cannot compute a combined map directly");
  }
}

/// Snap values to the 8-bit grid used by the map PNG files, so cached and
/// freshly computed maps are identical.
inline void quantize_to_8bit(ImportanceMap& m) {
  for (double& v : m.values.data) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
}

/// Pixelwise alpha blend of (sal, qua, har).
inline ImportanceMap combine_maps(const MapSet& maps, const std::array<double, 3>& alphas) {
  const auto& s = maps.saliency;
  for (const auto* m : {&maps.quality, &maps.harmony})
    if (m->width() != s.width() || m->height() != s.height())
      throw ValidationError("combine_maps: map dimensions differ");
  double total = 0.0;
  for (double a : alphas) {
    if (!(a >= 0.0)) throw ValidationError("combine_maps: alphas must be non-negative");
    total += a;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("combine_maps: alphas must sum to 1");
  ImportanceMap out(s.width(), s.height(), MapKind::combined);
  for (std::size_t i = 0; i < out.values.data.size(); ++i)
    out.values.data[i] = std::clamp(alphas[0] * s.values.data[i] +
                                        alphas[1] * maps.quality.values.data[i] +
                                        alphas[2] * maps.harmony.values.data[i],
                                    0.0, 1.0);
  return out;
}

}  // namespace collage
