#include <gtest/gtest.h>

#include <random>

#include "collage/color.hpp"
#include "collage/importance.hpp"

using namespace collage;

namespace {

RasterImage hue_image(int w, int h, auto&& hue_at) {
  RasterImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double hue = hue_at(x, y);
      // Fully saturated, full value.
      const double hp = hue / 60.0;
      const double xx = 1.0 - std::abs(std::fmod(hp, 2.0) - 1.0);
      double r = 0, g = 0, b = 0;
      if (hp < 1) r = 1, g = xx;
      else if (hp < 2) r = xx, g = 1;
      else if (hp < 3) g = 1, b = xx;
      else if (hp < 4) g = xx, b = 1;
      else if (hp < 5) r = xx, b = 1;
      else r = 1, b = xx;
      img.set(x, y, {std::uint8_t(std::lround(255 * r)), std::uint8_t(std::lround(255 * g)),
                     std::uint8_t(std::lround(255 * b))});
    }
  return img;
}

/// Brute-force tile saliency: contrast per scale, 3x3 mean, sum, min-max.
std::vector<double> saliency_oracle(const RasterImage& img, int tile, std::array<int, 3> radii) {
  const int tx = img.width / tile, ty = img.height / tile;
  std::vector<color::Luv> mean(tx * ty);
  for (int j = 0; j < ty; ++j)
    for (int i = 0; i < tx; ++i) {
      double l = 0, u = 0, v = 0;
      for (int y = j * tile; y < (j + 1) * tile; ++y)
        for (int x = i * tile; x < (i + 1) * tile; ++x) {
          const auto c = color::to_luv(img.at(x, y));
          l += c.l, u += c.u, v += c.v;
        }
      const double n = tile * tile;
      mean[j * tx + i] = {l / n, u / n, v / n};
    }
  auto dist = [&](int a, int b) {
    return std::hypot(mean[a].l - mean[b].l, mean[a].u - mean[b].u, mean[a].v - mean[b].v);
  };
  std::vector<double> total(tx * ty, 0.0);
  for (int r : radii) {
    std::vector<double> c(tx * ty, 0.0);
    for (int a = 0; a < tx * ty; ++a)
      for (int b = 0; b < tx * ty; ++b) {
        const int dx = std::abs(a % tx - b % tx), dy = std::abs(a / tx - b / tx);
        if (a != b && std::max(dx, dy) <= r) c[a] += dist(a, b);
      }
    for (int a = 0; a < tx * ty; ++a) {
      double s = 0;
      int n = 0;
      for (int b = 0; b < tx * ty; ++b)
        if (std::abs(a % tx - b % tx) <= 1 && std::abs(a / tx - b / tx) <= 1) s += c[b], ++n;
      total[a] += s / n;
    }
  }
  const double lo = *std::min_element(total.begin(), total.end());
  const double hi = *std::max_element(total.begin(), total.end());
  for (double& v : total) v = hi > lo ? (v - lo) / (hi - lo) : (hi > 0 ? 1.0 : 0.0);
  return total;
}

RasterImage noise_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, 255);
  RasterImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto g = std::uint8_t(u(rng));
      img.set(x, y, {g, g, g});
    }
  return img;
}

}  // namespace

TEST(Saliency, UniformImageIsAllZero) {
  const RasterImage img(64, 48, {128, 128, 128});
  const auto m = saliency_map(img);
  for (double v : m.values.data) EXPECT_EQ(v, 0.0);
}

TEST(Saliency, SingleRedTileIsMaximum) {
  RasterImage img(40, 40, {128, 128, 128});
  for (int y = 16; y < 24; ++y)
    for (int x = 16; x < 24; ++x) img.set(x, y, {255, 0, 0});
  const auto m = saliency_map(img);
  const auto oracle = saliency_oracle(img, 8, {1, 2, 3});
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x) EXPECT_NEAR(m(x, y), oracle[(y / 8) * 5 + x / 8], 1e-12);
  for (int y = 16; y < 24; ++y)
    for (int x = 16; x < 24; ++x) EXPECT_DOUBLE_EQ(m(x, y), 1.0);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x)
      if (x < 16 || x >= 24 || y < 16 || y >= 24) EXPECT_LT(m(x, y), 1.0);
}

TEST(Saliency, MatchesOracleOnRandomTiles) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> c(0, 255);
  RasterImage img(56, 48);
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 7; ++i) {
      const Rgb col{std::uint8_t(c(rng)), std::uint8_t(c(rng)), std::uint8_t(c(rng))};
      for (int y = j * 8; y < j * 8 + 8; ++y)
        for (int x = i * 8; x < i * 8 + 8; ++x) img.set(x, y, col);
    }
  const auto m = saliency_map(img);
  const auto oracle = saliency_oracle(img, 8, {1, 2, 3});
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 56; ++x) EXPECT_NEAR(m(x, y), oracle[(y / 8) * 7 + x / 8], 1e-9);
}

TEST(Saliency, CheckerboardInteriorIsConstant) {
  RasterImage img(96, 96);
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x) img.set(x, y, ((x / 8 + y / 8) % 2) ? Rgb{255, 255, 255} : Rgb{0, 0, 0});
  const auto m = saliency_map(img);
  // Tiles at least radius 3 + box 1 away from the border see a full neighborhood.
  const double ref = m(4 * 8, 4 * 8);
  for (int ty = 4; ty < 8; ++ty)
    for (int tx = 4; tx < 8; ++tx) EXPECT_NEAR(m(tx * 8 + 3, ty * 8 + 3), ref, 1e-12);
}

TEST(Saliency, TileShiftShiftsInteriorContrast) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> c(0, 255);
  RasterImage a(96, 96), b(96, 96);
  std::vector<Rgb> tiles(13 * 12);
  for (auto& t : tiles) t = {std::uint8_t(c(rng)), std::uint8_t(c(rng)), std::uint8_t(c(rng))};
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x) {
      a.set(x, y, tiles[(y / 8) * 13 + x / 8 + 1]);
      b.set(x, y, tiles[(y / 8) * 13 + x / 8]);  // content of a shifted right by one tile
    }
  const auto ga = tile_means(a, 8), gb = tile_means(b, 8);
  for (int r : {1, 2, 3}) {
    const auto fa = box_filter_tiles(tile_contrast(ga, r), 12, 12);
    const auto fb = box_filter_tiles(tile_contrast(gb, r), 12, 12);
    for (int ty = 4; ty < 8; ++ty)
      for (int tx = 4; tx < 7; ++tx) EXPECT_NEAR(fb[ty * 12 + tx + 1], fa[ty * 12 + tx], 1e-9);
  }
}

TEST(Saliency, RejectsTileLargerThanImage) {
  EXPECT_THROW(saliency_map(RasterImage(6, 20)), ValidationError);
}

TEST(Harmony, SingleHueIsAllOnes) {
  const auto m = harmony_map(hue_image(40, 30, [](int, int) { return 200.0; }));
  for (double v : m.values.data) EXPECT_EQ(v, 1.0);
}

TEST(Harmony, GrayscaleIsAllOnes) {
  RasterImage img(40, 30);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) img.set(x, y, {std::uint8_t(x * 6), std::uint8_t(x * 6), std::uint8_t(x * 6)});
  const auto m = harmony_map(img);
  for (double v : m.values.data) EXPECT_EQ(v, 1.0);
}

TEST(Harmony, ComplementaryHalvesInteriorNotBelowBoundary) {
  const auto m = harmony_map(hue_image(80, 40, [](int x, int) { return x < 40 ? 0.0 : 180.0; }));
  EXPECT_GE(m(5, 20), m(40, 20));
  EXPECT_GE(m(75, 20), m(39, 20));
}

TEST(Harmony, TripleJunctionScoresBelowInterior) {
  const auto m = harmony_map(hue_image(100, 100, [](int x, int y) {
    if (x < 50) return 0.0;
    return y < 50 ? 120.0 : 240.0;
  }));
  EXPECT_LT(m(50, 50), m(10, 10));
  EXPECT_LT(m(50, 50), m(90, 10));
  EXPECT_DOUBLE_EQ(m(10, 10), 1.0);
}

TEST(Harmony, TemplateScoreOracle) {
  std::array<double, detail::kHueBins> hist{};
  hist[0] = 1.0;
  EXPECT_DOUBLE_EQ(detail::template_harmony(hist), 1.0);
  hist[18] = 1.0;  // complementary pair fits template I
  EXPECT_DOUBLE_EQ(detail::template_harmony(hist), 1.0);
  std::array<double, detail::kHueBins> triad{};
  triad[0] = triad[12] = triad[24] = 1.0;
  const double s = detail::template_harmony(triad);
  EXPECT_LT(s, 1.0);
  EXPECT_GT(s, 0.0);
  std::array<double, detail::kHueBins> empty{};
  EXPECT_EQ(detail::template_harmony(empty), 1.0);
}

TEST(Quality, ConstantImageIsAllOnes) {
  const auto m = quality_map(RasterImage(50, 40, {90, 30, 200}));
  for (double v : m.values.data) EXPECT_EQ(v, 1.0);
}

TEST(Quality, BlurredQuadrantScoresLower) {
  RasterImage img = noise_image(96, 96, 9);
  // Repeated 5x5 box blur of the top-left quadrant.
  for (int pass = 0; pass < 6; ++pass) {
    RasterImage src = img;
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 48; ++x) {
        int s = 0, n = 0;
        for (int dy = -2; dy <= 2; ++dy)
          for (int dx = -2; dx <= 2; ++dx) {
            const int xx = std::clamp(x + dx, 0, 47), yy = std::clamp(y + dy, 0, 47);
            s += src.at(xx, yy).r;
            ++n;
          }
        const auto g = std::uint8_t(s / n);
        img.set(x, y, {g, g, g});
      }
  }
  const auto m = quality_map(img);
  double blurred = 0, sharp = 0;
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x) (x < 48 && y < 48 ? blurred : sharp) += m(x, y);
  EXPECT_LT(blurred / (48 * 48), sharp / (96 * 96 - 48 * 48));
}

TEST(Quality, WindowOrderIrrelevant) {
  const RasterImage img = noise_image(40, 40, 2);
  MapProviderConfig a, b;
  a.quality_windows = {9, 17, 33};
  b.quality_windows = {33, 9, 17};
  EXPECT_EQ(quality_map(img, a).values, quality_map(img, b).values);
  a.harmony_windows = {9, 17, 33};
  b.harmony_windows = {17, 33, 9};
  const RasterImage hues = hue_image(40, 40, [](int x, int y) { return double((x * 7 + y * 3) % 360); });
  EXPECT_EQ(harmony_map(hues, a).values, harmony_map(hues, b).values);
}

TEST(Maps, AllInUnitRangeAndSized) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> c(0, 255);
  RasterImage img(64, 40);
  for (auto& p : img.pixels) p = std::uint8_t(c(rng));
  for (MapKind k : kBaseMapKinds) {
    const auto m = compute_map(k, img, {});
    EXPECT_EQ(m.width(), 64);
    EXPECT_EQ(m.height(), 40);
    EXPECT_EQ(m.kind, k);
    for (double v : m.values.data) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_THROW(compute_map(MapKind::combined, img, {}), ValidationError);
}

TEST(ProviderConfig, Validation) {
  MapProviderConfig c;
  c.harmony_windows = {8};
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.saliency_radii = {1, 1, 2};
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.saliency_tile = 0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Combine, Examples) {
  MapSet s;
  s.saliency = ImportanceMap(2, 1, MapKind::saliency, 0.0);
  s.quality = ImportanceMap(2, 1, MapKind::quality, 0.3);
  s.harmony = ImportanceMap(2, 1, MapKind::harmony, 0.9);
  s.saliency(1, 0) = 0.7;
  const auto one_hot = combine_maps(s, {1, 0, 0});
  EXPECT_EQ(one_hot.values, s.saliency.values);
  EXPECT_EQ(one_hot.kind, MapKind::combined);
  EXPECT_NEAR(combine_maps(s, {1.0 / 3, 1.0 / 3, 1.0 / 3})(0, 0), 0.4, 1e-12);

  MapSet same;
  same.saliency = same.quality = same.harmony = s.saliency;
  const auto fixed = combine_maps(same, {0.2, 0.5, 0.3});
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(fixed.values.data[i], s.saliency.values.data[i], 1e-15);

  EXPECT_THROW(combine_maps(s, {0.5, 0.5, 0.5}), ValidationError);
  s.quality = ImportanceMap(3, 1, MapKind::quality);
  EXPECT_THROW(combine_maps(s, {1, 0, 0}), ValidationError);
}

TEST(Combine, ConvexBoundsAndLinearity) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  MapSet s;
  for (MapKind k : kBaseMapKinds) {
    s[k] = ImportanceMap(16, 16, k);
    for (double& v : s[k].values.data) v = u(rng);
  }
  for (int t = 0; t < 100; ++t) {
    double a = u(rng), b = u(rng), c = u(rng);
    const double z = a + b + c;
    a /= z, b /= z, c /= z;
    const auto m = combine_maps(s, {a, b, c});
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      const double x = s.saliency.values.data[i], y = s.quality.values.data[i], w = s.harmony.values.data[i];
      EXPECT_GE(m.values.data[i], std::min({x, y, w}) - 1e-12);
      EXPECT_LE(m.values.data[i], std::max({x, y, w}) + 1e-12);
      EXPECT_NEAR(m.values.data[i], a * x + b * y + c * w, 1e-12);
    }
  }
}

TEST(Quantize, SnapsToEightBit) {
  ImportanceMap m(3, 1, MapKind::saliency);
  m.values.data = {0.0, 0.5, 1.2};
  quantize_to_8bit(m);
  EXPECT_EQ(m.values.data[0], 0.0);
  EXPECT_EQ(m.values.data[1], 128.0 / 255.0);
  EXPECT_EQ(m.values.data[2], 1.0);
}
