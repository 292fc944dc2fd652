#pragma once

#include <algorithm>
#include <cmath>

#include "collage/core.hpp"

namespace collage::color {

struct Luv {
  double l = 0, u = 0, v = 0;
};

struct Hsv {
  double h = 0;  // degrees in [0,360)
  double s = 0;  // [0,1]
  double v = 0;  // [0,1]
};

inline double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

/// sRGB (D65) to CIE L*u*v*.
inline Luv to_luv(Rgb p) {
  const double r = srgb_to_linear(p.r / 255.0);
  const double g = srgb_to_linear(p.g / 255.0);
  const double b = srgb_to_linear(p.b / 255.0);
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  constexpr double kUn = 0.19783000664283;
  constexpr double kVn = 0.46831999493879;
  constexpr double kEps = 216.0 / 24389.0;
  constexpr double kKappa = 24389.0 / 27.0;
  Luv out;
  out.l = y > kEps ? 116.0 * std::cbrt(y) - 16.0 : kKappa * y;
  const double d = x + 15.0 * y + 3.0 * z;
  if (d <= 0.0) return out;
  out.u = 13.0 * out.l * (4.0 * x / d - kUn);
  out.v = 13.0 * out.l * (9.0 * y / d - kVn);
  return out;
}

inline Hsv to_hsv(Rgb p) {
  const double r = p.r / 255.0, g = p.g / 255.0, b = p.b / 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  Hsv out;
  out.v = mx;
  out.s = mx > 0.0 ? d / mx : 0.0;
  if (d <= 0.0) return out;
  double h;
  if (mx == r)
    h = 60.0 * std::fmod((g - b) / d, 6.0);
  else if (mx == g)
    h = 60.0 * ((b - r) / d + 2.0);
  else
    h = 60.0 * ((r - g) / d + 4.0);
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

inline double luminance(Rgb p) { return 0.299 * p.r + 0.587 * p.g + 0.114 * p.b; }

/// 8x8x8 RGB histogram bin.
inline int rgb_bin(Rgb p) { return (p.r >> 5) * 64 + (p.g >> 5) * 8 + (p.b >> 5); }

inline constexpr int kRgbBins = 512;

}  // namespace collage::color
