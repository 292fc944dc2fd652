#pragma once

// Domain types shared by every part of the collage pipeline.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace collage {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be read or decoded.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Orientation set: 13 angles from -pi/3 to pi/3 in pi/18 steps.

inline constexpr int kAngleCount = 13;
inline constexpr int kZeroAngleIndex = 6;
inline constexpr double kAngleStep = std::numbers::pi / 18.0;
inline constexpr double kMaxAngle = std::numbers::pi / 3.0;

constexpr double angle_of(int theta_index) {
  return (theta_index - kZeroAngleIndex) * kAngleStep;
}

/// theta / theta_max as an exact ratio of the index offset.
constexpr double normalized_angle(int theta_index) {
  return static_cast<double>(theta_index - kZeroAngleIndex) / kZeroAngleIndex;
}

/// Nearest allowed angle index; exact ties go toward zero, out-of-range
/// inputs clamp to the extreme angles.
inline int quantize_orientation_index(double theta_raw) {
  if (!std::isfinite(theta_raw)) throw ValidationError("orientation must be finite");
  const double steps = theta_raw / kAngleStep;
  double k = std::floor(std::abs(steps));
  const double frac = std::abs(steps) - k;
  if (frac > 0.5) k += 1.0;
  const double signed_k = std::copysign(k, steps);
  const double clamped = std::clamp(signed_k, -double(kZeroAngleIndex), double(kZeroAngleIndex));
  return static_cast<int>(clamped) + kZeroAngleIndex;
}

inline double quantize_orientation(double theta_raw) {
  return angle_of(quantize_orientation_index(theta_raw));
}

// ---------------------------------------------------------------------------

template <class T>
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int w, int h, T fill = T{}) : width(w), height(h), data(std::size_t(w) * h, fill) {}

  T& operator()(int x, int y) { return data[std::size_t(y) * width + x]; }
  const T& operator()(int x, int y) const { return data[std::size_t(y) * width + x]; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  std::size_t size() const { return data.size(); }

  friend bool operator==(const Grid&, const Grid&) = default;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major 8-bit RGB image.
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
  int id = 0;

  RasterImage() = default;
  RasterImage(int w, int h, Rgb fill = {}, int image_id = 0) : width(w), height(h), id(image_id) {
    if (w < 1 || h < 1) throw ValidationError("image dimensions must be positive");
    pixels.resize(std::size_t(w) * h * 3);
    for (std::size_t i = 0; i < pixels.size(); i += 3) {
      pixels[i] = fill.r;
      pixels[i + 1] = fill.g;
      pixels[i + 2] = fill.b;
    }
  }

  Rgb at(int x, int y) const {
    const std::size_t o = (std::size_t(y) * width + x) * 3;
    return {pixels[o], pixels[o + 1], pixels[o + 2]};
  }
  void set(int x, int y, Rgb c) {
    const std::size_t o = (std::size_t(y) * width + x) * 3;
    pixels[o] = c.r;
    pixels[o + 1] = c.g;
    pixels[o + 2] = c.b;
  }
  void validate() const {
    if (width < 1 || height < 1) throw ValidationError("image dimensions must be positive");
    if (pixels.size() != std::size_t(width) * height * 3)
      throw ValidationError("pixel buffer size does not match dimensions");
  }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;
};

/// Order matches the alpha weights: (sal, qua, har).
enum class MapKind { saliency = 0, quality = 1, harmony = 2, combined = 3 };

inline constexpr std::array<MapKind, 3> kBaseMapKinds{MapKind::saliency, MapKind::quality,
                                                      MapKind::harmony};

inline std::string to_string(MapKind k) {
  switch (k) {
    case MapKind::saliency: return "saliency";
    case MapKind::quality: return "quality";
    case MapKind::harmony: return "harmony";
    case MapKind::combined: return "combined";
  }
  return "unknown";
}

inline MapKind map_kind_from_string(const std::string& s) {
  if (s == "saliency") return MapKind::saliency;
  if (s == "quality") return MapKind::quality;
  if (s == "harmony") return MapKind::harmony;
  if (s == "combined") return MapKind::combined;
  throw ValidationError("unknown map kind: " + s);
}

/// Per-pixel importance in [0,1].
struct ImportanceMap {
  Grid<double> values;
  MapKind kind = MapKind::saliency;

  ImportanceMap() = default;
  ImportanceMap(int w, int h, MapKind k, double fill = 0.0) : values(w, h, fill), kind(k) {}

  int width() const { return values.width; }
  int height() const { return values.height; }
  double operator()(int x, int y) const { return values(x, y); }
  double& operator()(int x, int y) { return values(x, y); }

  double sum() const {
    double s = 0.0;
    for (double v : values.data) s += v;
    return s;
  }
};

/// Binary face-region mask, 1 inside a face box.
struct FaceMask {
  Grid<std::uint8_t> values;

  FaceMask() = default;
  FaceMask(int w, int h) : values(w, h, 0) {}
  long count() const {
    long n = 0;
    for (auto v : values.data) n += v;
    return n;
  }
};

struct ImageState {
  int tx = 0;
  int ty = 0;
  int theta_index = kZeroAngleIndex;
  int layer = 0;

  double theta() const { return angle_of(theta_index); }
  friend bool operator==(const ImageState&, const ImageState&) = default;
};

struct Canvas {
  int width = 400;
  int height = 400;
  int render_scale = 4;

  long area() const { return long(width) * height; }
  double half_diagonal() const { return 0.5 * std::hypot(double(width), double(height)); }
  friend bool operator==(const Canvas&, const Canvas&) = default;
};

struct CollageConfiguration {
  Canvas canvas;
  std::vector<ImageState> states;

  std::vector<int> layers() const {
    std::vector<int> l;
    l.reserve(states.size());
    for (const auto& s : states) l.push_back(s.layer);
    return l;
  }
  friend bool operator==(const CollageConfiguration&, const CollageConfiguration&) = default;
};

inline bool is_permutation_of_indices(std::span<const int> layers) {
  std::vector<char> seen(layers.size(), 0);
  for (int l : layers) {
    if (l < 0 || std::size_t(l) >= layers.size() || seen[l]) return false;
    seen[l] = 1;
  }
  return true;
}

/// Image indices ordered top layer first.
inline std::vector<int> top_down_order(std::span<const int> layers) {
  std::vector<int> order(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) order[layers[i]] = int(i);
  return order;
}

inline void validate_configuration(const CollageConfiguration& cfg) {
  for (const auto& s : cfg.states)
    if (s.theta_index < 0 || s.theta_index >= kAngleCount)
      throw ValidationError("theta_index out of range");
  const auto layers = cfg.layers();
  if (!is_permutation_of_indices(layers)) throw ValidationError("layers are not a permutation");
  if (cfg.canvas.width < 1 || cfg.canvas.height < 1 || cfg.canvas.render_scale < 1)
    throw ValidationError("invalid canvas");
}

inline constexpr int kCriterionCount = 10;

/// lambdas weight C'1..C'10; alphas are (sal, qua, har) on the simplex.
struct WeightSet {
  std::array<double, kCriterionCount> lambdas{};
  std::array<double, 3> alphas{1.0, 0.0, 0.0};

  /// Unit weights on the three basic criteria, one-hot map.
  static WeightSet basic(MapKind kind) {
    WeightSet w;
    w.lambdas = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
    w.alphas = {0, 0, 0};
    w.alphas[static_cast<int>(kind)] = 1.0;
    return w;
  }

  void validate(double lambda_bound = 10.0) const {
    double s = 0.0;
    for (double a : alphas) {
      if (!(a >= 0.0)) throw ValidationError("alphas must be non-negative");
      s += a;
    }
    if (std::abs(s - 1.0) > 1e-9) throw ValidationError("alphas must sum to 1");
    for (double l : lambdas)
      if (!std::isfinite(l) || std::abs(l) > lambda_bound + 1e-12)
        throw ValidationError("lambda outside bound");
  }
};

}  // namespace collage
