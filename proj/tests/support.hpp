#pragma once

// Synthetic datasets and configurations shared by the test binaries.

#include <random>

#include "collage/criteria.hpp"
#include "collage/learning.hpp"
#include "collage/optimizer.hpp"
#include "collage/scene.hpp"

namespace collage::testkit {

/// Image filled with random axis-aligned colored blocks.
inline RasterImage random_image(int w, int h, std::mt19937_64& rng, int id = 0) {
  std::uniform_int_distribution<int> c(0, 255);
  RasterImage img(w, h, {std::uint8_t(c(rng)), std::uint8_t(c(rng)), std::uint8_t(c(rng))}, id);
  std::uniform_int_distribution<int> bx(0, w - 1), by(0, h - 1);
  for (int k = 0; k < 6; ++k) {
    const Rgb col{std::uint8_t(c(rng)), std::uint8_t(c(rng)), std::uint8_t(c(rng))};
    int x0 = bx(rng), y0 = by(rng), x1 = bx(rng), y1 = by(rng);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) img.set(x, y, col);
  }
  return img;
}

/// Smooth random field in [lo, 1].
inline ImportanceMap random_map(int w, int h, MapKind kind, std::mt19937_64& rng, double lo = 0.05) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double ax = u(rng) * 0.2, ay = u(rng) * 0.2, px = u(rng) * 6, py = u(rng) * 6;
  ImportanceMap m(w, h, kind);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double s = 0.5 + 0.25 * std::sin(ax * x + px) + 0.25 * std::cos(ay * y + py);
      m(x, y) = lo + (1.0 - lo) * std::clamp(s, 0.0, 1.0);
    }
  return m;
}

struct SyntheticSpec {
  int n = 4;
  int min_side = 12, max_side = 28;
  double face_probability = 0.5;
};

/// Random images with random maps (not computed from the pixels) and faces.
inline Dataset synthetic_dataset(std::uint64_t seed, SyntheticSpec spec = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> side(spec.min_side, spec.max_side);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset ds;
  ds.name = "synthetic-" + std::to_string(seed);
  for (int i = 0; i < spec.n; ++i) {
    const int w = side(rng), h = side(rng);
    ds.images.push_back(random_image(w, h, rng, i));
    FaceMask f(w, h);
    if (u(rng) < spec.face_probability) {
      const int fw = std::max(1, w / 3), fh = std::max(1, h / 3);
      const int fx = std::uniform_int_distribution<int>(0, w - fw)(rng);
      const int fy = std::uniform_int_distribution<int>(0, h - fh)(rng);
      for (int y = fy; y < fy + fh; ++y)
        for (int x = fx; x < fx + fw; ++x) f.values(x, y) = 1;
    }
    ds.faces.push_back(std::move(f));
    MapSet m;
    m.saliency = random_map(w, h, MapKind::saliency, rng);
    m.quality = random_map(w, h, MapKind::quality, rng);
    m.harmony = random_map(w, h, MapKind::harmony, rng);
    ds.maps.push_back(std::move(m));
  }
  return ds;
}

/// Solid-color images with uniform maps.
inline Dataset uniform_dataset(const std::vector<std::pair<int, int>>& sizes, const std::vector<Rgb>& colors = {}) {
  Dataset ds;
  ds.name = "uniform";
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto [w, h] = sizes[i];
    const Rgb c = i < colors.size() ? colors[i] : Rgb{128, 128, 128};
    ds.images.emplace_back(w, h, c, int(i));
    ds.faces.emplace_back(w, h);
    MapSet m;
    m.saliency = ImportanceMap(w, h, MapKind::saliency, 1.0);
    m.quality = ImportanceMap(w, h, MapKind::quality, 1.0);
    m.harmony = ImportanceMap(w, h, MapKind::harmony, 1.0);
    ds.maps.push_back(std::move(m));
  }
  return ds;
}

inline std::vector<int> identity_layers(int n) {
  std::vector<int> l(n);
  std::iota(l.begin(), l.end(), 0);
  return l;
}

/// Any grid position in [-side, canvas] and any angle, random layer permutation.
inline CollageConfiguration random_configuration(const Dataset& ds, Canvas canvas, std::mt19937_64& rng) {
  CollageConfiguration cfg;
  cfg.canvas = canvas;
  auto layers = identity_layers(int(ds.size()));
  std::shuffle(layers.begin(), layers.end(), rng);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int span = std::max(ds.images[i].width, ds.images[i].height);
    ImageState s;
    s.tx = std::uniform_int_distribution<int>(-span, canvas.width)(rng);
    s.ty = std::uniform_int_distribution<int>(-span, canvas.height)(rng);
    s.theta_index = std::uniform_int_distribution<int>(0, kAngleCount - 1)(rng);
    s.layer = layers[i];
    cfg.states.push_back(s);
  }
  return cfg;
}

inline CriterionVector evaluate_blended(const CollageConfiguration& cfg, const Dataset& ds, const WeightSet& w) {
  SpriteBank bank(ds, ChannelSpec::combined(w.alphas));
  const std::array<double, 1> one{1.0};
  return assemble_criteria(build_context(cfg, bank, one).inputs);
}

/// Random candidate features whose fitness under the given weights is at least min_fitness.
inline CandidateFeatures random_features(const WeightSet& truth, std::mt19937_64& rng, int images = 3,
                                         double min_fitness = 0.1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (true) {
    CandidateFeatures f;
    for (int i = 0; i < images; ++i) {
      std::array<double, 3> ref{}, vis{};
      for (int k = 0; k < 3; ++k) {
        ref[k] = 0.5 + u(rng);
        vis[k] = ref[k] * u(rng);
      }
      f.visible.push_back(vis);
      f.reference.push_back(ref);
    }
    for (int k = 0; k < kCriterionCount; ++k) f.fixed[k] = u(rng);
    if (fitness(f.criteria(truth.alphas), truth.lambdas) >= min_fitness) return f;
  }
}

/// Training items scored exactly by the fitness under the given weights.
inline std::vector<TrainingItem> synthetic_training(const WeightSet& truth, std::uint64_t seed, int datasets = 20,
                                                    int candidates = 3) {
  std::mt19937_64 rng(seed);
  std::vector<TrainingItem> data;
  for (int d = 0; d < datasets; ++d) {
    TrainingItem item;
    item.name = "d" + std::to_string(d);
    for (int c = 0; c < candidates; ++c) {
      item.candidates.push_back(random_features(truth, rng));
      item.scores.push_back(fitness(item.candidates.back().criteria(truth.alphas), truth.lambdas));
    }
    data.push_back(std::move(item));
  }
  return data;
}

}  // namespace collage::testkit
