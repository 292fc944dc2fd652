#pragma once

// Procedurally drawn test photographs: landscapes, portraits with face boxes,
// flowers, streets, seascapes, patterns and abstract blobs.

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "collage/dataset.hpp"
#include "collage/io.hpp"

namespace collage::toy {

struct ToyImage {
  std::string name;
  RasterImage image;
  std::vector<FaceBox> faces;
};

namespace detail {

struct Painter {
  RasterImage& img;
  std::mt19937_64& rng;

  static std::uint8_t clamp8(double v) { return std::uint8_t(std::clamp(std::lround(v), 0L, 255L)); }

  void fill_rect(int x0, int y0, int x1, int y1, Rgb c) {
    for (int y = std::max(0, y0); y < std::min(img.height, y1); ++y)
      for (int x = std::max(0, x0); x < std::min(img.width, x1); ++x) img.set(x, y, c);
  }

  void ellipse(double cx, double cy, double rx, double ry, Rgb c) {
    for (int y = std::max(0, int(cy - ry)); y <= std::min(img.height - 1, int(cy + ry) + 1); ++y)
      for (int x = std::max(0, int(cx - rx)); x <= std::min(img.width - 1, int(cx + rx) + 1); ++x) {
        const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
        if (dx * dx + dy * dy <= 1.0) img.set(x, y, c);
      }
  }

  void vertical_gradient(Rgb top, Rgb bottom, int y0 = 0, int y1 = -1) {
    if (y1 < 0) y1 = img.height;
    for (int y = y0; y < y1; ++y) {
      const double t = double(y - y0) / std::max(1, y1 - y0 - 1);
      const Rgb c{clamp8(top.r + t * (bottom.r - top.r)), clamp8(top.g + t * (bottom.g - top.g)),
                  clamp8(top.b + t * (bottom.b - top.b))};
      for (int x = 0; x < img.width; ++x) img.set(x, y, c);
    }
  }

  /// Smooth hill line y(x) filled below with color.
  void hills(double base, double amp, double freq, double phase, Rgb c) {
    for (int x = 0; x < img.width; ++x) {
      const int top = int(base + amp * std::sin(freq * x + phase) + 0.5 * amp * std::sin(2.3 * freq * x + 1.7 * phase));
      for (int y = std::max(0, top); y < img.height; ++y) img.set(x, y, c);
    }
  }

  void noise(int amplitude) {
    std::uniform_int_distribution<int> d(-amplitude, amplitude);
    for (auto& p : img.pixels) p = clamp8(p + d(rng));
  }

  Rgb random_color(int lo = 0, int hi = 255) {
    std::uniform_int_distribution<int> c(lo, hi);
    return {std::uint8_t(c(rng)), std::uint8_t(c(rng)), std::uint8_t(c(rng))};
  }
};

inline FaceBox draw_face(Painter& p, double cx, double cy, double r) {
  std::uniform_int_distribution<int> tone(0, 3);
  static constexpr Rgb kSkin[] = {{241, 194, 170}, {224, 172, 105}, {198, 134, 66}, {141, 85, 36}};
  const Rgb skin = kSkin[tone(p.rng)];
  p.ellipse(cx, cy - 0.15 * r, 1.05 * r, 0.7 * r, p.random_color(20, 90));  // hair
  p.ellipse(cx, cy, 0.8 * r, r, skin);
  p.ellipse(cx - 0.32 * r, cy - 0.2 * r, 0.12 * r, 0.08 * r, {30, 30, 30});
  p.ellipse(cx + 0.32 * r, cy - 0.2 * r, 0.12 * r, 0.08 * r, {30, 30, 30});
  p.ellipse(cx, cy + 0.45 * r, 0.3 * r, 0.08 * r, {170, 60, 60});
  p.fill_rect(int(cx - 1.2 * r), int(cy + r), int(cx + 1.2 * r), p.img.height, p.random_color(30, 220));  // shoulders
  const int x0 = std::max(0, int(cx - 0.8 * r)), y0 = std::max(0, int(cy - r));
  const int x1 = std::min(p.img.width, int(cx + 0.8 * r) + 1), y1 = std::min(p.img.height, int(cy + r) + 1);
  return {x0, y0, x1 - x0, y1 - y0};
}

}  // namespace detail

inline constexpr std::array<const char*, 7> kSceneNames{"landscape", "portrait", "flowers", "street",
                                                         "seascape",  "pattern",  "abstract"};

/// Deterministic image for (index, seed); the scene type cycles with index.
inline ToyImage toy_image(int index, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed * 1000003ULL + std::uint64_t(index));
  static constexpr std::pair<int, int> kSizes[] = {{192, 144}, {144, 192}, {176, 176}, {224, 160},
                                                   {160, 224}, {200, 150}, {150, 200}};
  const auto [w, h] = kSizes[(index * 3 + int(seed % 7)) % 7];
  ToyImage out;
  out.name = std::string(kSceneNames[index % 7]) + "-" + std::to_string(index);
  out.image = RasterImage(w, h, {}, index);
  detail::Painter p{out.image, rng};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (index % 7) {
    case 0: {  // landscape
      p.vertical_gradient({90, 150, 230}, {200, 225, 250}, 0, h);
      p.ellipse(w * (0.2 + 0.6 * u(rng)), h * 0.22, h * 0.09, h * 0.09, {255, 220, 90});
      p.hills(h * 0.55, h * 0.08, 0.05 + 0.03 * u(rng), 6 * u(rng), {70, 120, 70});
      p.hills(h * 0.72, h * 0.06, 0.08, 6 * u(rng), {40, 95, 40});
      break;
    }
    case 1: {  // portrait with one or two faces
      p.vertical_gradient(p.random_color(100, 230), p.random_color(60, 200));
      const int faces = 1 + int(u(rng) < 0.4);
      for (int f = 0; f < faces; ++f) {
        const double cx = faces == 1 ? w * 0.5 : w * (0.3 + 0.4 * f);
        out.faces.push_back(detail::draw_face(p, cx, h * 0.42, std::min(w, h) * (faces == 1 ? 0.22 : 0.15)));
      }
      break;
    }
    case 2: {  // flowers
      p.vertical_gradient({60, 140, 60}, {30, 90, 30});
      for (int k = 0; k < 14; ++k) {
        const double cx = w * u(rng), cy = h * u(rng), r = 6 + 10 * u(rng);
        const Rgb petal = p.random_color(120, 255);
        for (int a = 0; a < 6; ++a)
          p.ellipse(cx + r * std::cos(a * 1.047), cy + r * std::sin(a * 1.047), 0.6 * r, 0.6 * r, petal);
        p.ellipse(cx, cy, 0.5 * r, 0.5 * r, {250, 210, 40});
      }
      break;
    }
    case 3: {  // street
      p.vertical_gradient({150, 180, 210}, {230, 230, 235}, 0, h / 2);
      int x = 0;
      while (x < w) {
        const int bw = 18 + int(30 * u(rng)), bh = int(h * (0.3 + 0.4 * u(rng)));
        const Rgb c = p.random_color(60, 200);
        p.fill_rect(x, h * 3 / 4 - bh, x + bw, h * 3 / 4, c);
        for (int wy = h * 3 / 4 - bh + 6; wy < h * 3 / 4 - 8; wy += 12)
          for (int wx = x + 4; wx < x + bw - 6; wx += 10) p.fill_rect(wx, wy, wx + 5, wy + 6, {250, 240, 170});
        x += bw + 2;
      }
      p.fill_rect(0, h * 3 / 4, w, h, {70, 70, 75});
      for (int lx = 5; lx < w; lx += 30) p.fill_rect(lx, h * 7 / 8, lx + 15, h * 7 / 8 + 3, {240, 240, 240});
      break;
    }
    case 4: {  // seascape
      p.vertical_gradient({250, 170, 110}, {250, 220, 180}, 0, h / 2);
      p.vertical_gradient({30, 80, 150}, {10, 40, 90}, h / 2, h);
      p.ellipse(w * 0.5, h * 0.5, h * 0.12, h * 0.12, {255, 120, 60});
      p.fill_rect(0, h / 2, w, h / 2 + 2, {20, 60, 120});
      const double bx = w * (0.2 + 0.5 * u(rng));
      p.fill_rect(int(bx), int(h * 0.62), int(bx + w * 0.18), int(h * 0.67), {90, 50, 30});
      p.fill_rect(int(bx + w * 0.08), int(h * 0.45), int(bx + w * 0.09), int(h * 0.62), {60, 40, 20});
      break;
    }
    case 5: {  // pattern
      const Rgb a = p.random_color(), b = p.random_color();
      const int period = 10 + int(20 * u(rng));
      const bool checker = u(rng) < 0.5;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const bool on = checker ? ((x / period + y / period) % 2) : (((x + y) / period) % 2);
          out.image.set(x, y, on ? a : b);
        }
      break;
    }
    default: {  // abstract blobs
      p.vertical_gradient(p.random_color(), p.random_color());
      for (int k = 0; k < 8; ++k)
        p.ellipse(w * u(rng), h * u(rng), 10 + 35 * u(rng), 10 + 35 * u(rng), p.random_color());
      break;
    }
  }
  p.noise(6);
  return out;
}

/// Writes n images and manifest.json into dir; returns the manifest path.
inline std::filesystem::path write_toy_dataset(const std::filesystem::path& dir, int n, std::uint64_t seed = 1,
                                               const std::string& name = "toy") {
  std::filesystem::create_directories(dir);
  nlohmann::json images = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    const auto t = toy_image(i, seed);
    const std::string file = t.name + ".png";
    write_image(t.image, dir / file);
    nlohmann::json e = {{"path", file}};
    if (!t.faces.empty()) {
      nlohmann::json faces = nlohmann::json::array();
      for (const auto& f : t.faces) faces.push_back({f.x, f.y, f.w, f.h});
      e["faces"] = faces;
    }
    images.push_back(e);
  }
  const auto manifest = dir / "manifest.json";
  std::ofstream(manifest) << nlohmann::json{{"name", name}, {"images", images}}.dump(2) << '\n';
  return manifest;
}

}  // namespace collage::toy
