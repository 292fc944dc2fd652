#pragma once

// Image and map file I/O, and the min-side normalization applied on load.

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "collage/core.hpp"

namespace collage {

inline constexpr int kNormalizedMinSide = 128;

namespace detail {

inline cv::Mat to_mat(const RasterImage& img) {
  img.validate();
  cv::Mat rgb(img.height, img.width, CV_8UC3, const_cast<std::uint8_t*>(img.pixels.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  return bgr;
}

inline RasterImage from_mat(const cv::Mat& bgr, int id = 0) {
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  RasterImage img(rgb.cols, rgb.rows, {}, id);
  for (int y = 0; y < rgb.rows; ++y)
    std::copy_n(rgb.ptr<std::uint8_t>(y), std::size_t(rgb.cols) * 3, img.pixels.data() + std::size_t(y) * rgb.cols * 3);
  return img;
}

/// Output size for a min-side resize; the short side lands exactly on target.
inline std::pair<int, int> min_side_size(int w, int h, int target) {
  if (std::min(w, h) == target) return {w, h};
  const double s = double(target) / std::min(w, h);
  if (w <= h) return {target, std::max(1, int(std::lround(h * s)))};
  return {std::max(1, int(std::lround(w * s))), target};
}

}  // namespace detail

inline RasterImage read_image(const std::filesystem::path& path, int id = 0) {
  if (!std::filesystem::exists(path)) throw LoadError("image not found: " + path.string());
  const cv::Mat m = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (m.empty()) throw LoadError("cannot decode image: " + path.string());
  return detail::from_mat(m, id);
}

inline std::vector<std::uint8_t> encode_png(const RasterImage& img) {
  std::vector<std::uint8_t> buf;
  if (!cv::imencode(".png", detail::to_mat(img), buf)) throw Error("PNG encoding failed");
  return buf;
}

inline void write_image(const RasterImage& img, const std::filesystem::path& path) {
  if (!cv::imwrite(path.string(), detail::to_mat(img))) throw Error("cannot write image: " + path.string());
}

/// Bilinear resize so that min(width, height) == target, preserving aspect.
inline RasterImage resize_min_side(const RasterImage& img, int target = kNormalizedMinSide) {
  img.validate();
  const auto [w, h] = detail::min_side_size(img.width, img.height, target);
  if (w == img.width && h == img.height) return img;
  cv::Mat out;
  cv::resize(detail::to_mat(img), out, cv::Size(w, h), 0, 0, cv::INTER_LINEAR);
  return detail::from_mat(out, img.id);
}

/// Axis-aligned face box in source-image pixels.
struct FaceBox {
  int x = 0, y = 0, w = 0, h = 0;
  friend bool operator==(const FaceBox&, const FaceBox&) = default;
};

/// Rasterizes boxes given on a (src_w x src_h) image onto a (dst_w x dst_h)
/// mask. Box edges scale by dst/src and round half away from zero.
inline FaceMask rasterize_faces(const std::vector<FaceBox>& boxes, int src_w, int src_h, int dst_w, int dst_h) {
  FaceMask mask(dst_w, dst_h);
  const double sx = double(dst_w) / src_w, sy = double(dst_h) / src_h;
  for (const auto& b : boxes) {
    if (b.w < 1 || b.h < 1 || b.x < 0 || b.y < 0 || b.x + b.w > src_w || b.y + b.h > src_h)
      throw ValidationError("face box outside image bounds");
    const int x0 = int(std::lround(b.x * sx)), x1 = std::min(dst_w, int(std::lround((b.x + b.w) * sx)));
    const int y0 = int(std::lround(b.y * sy)), y1 = std::min(dst_h, int(std::lround((b.y + b.h) * sy)));
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) mask.values(x, y) = 1;
  }
  return mask;
}

/// 8-bit grayscale PNG, value/255 = importance.
inline std::vector<std::uint8_t> encode_map_png(const ImportanceMap& m) {
  cv::Mat g(m.height(), m.width(), CV_8UC1);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      g.at<std::uint8_t>(y, x) = std::uint8_t(std::lround(std::clamp(m(x, y), 0.0, 1.0) * 255.0));
  std::vector<std::uint8_t> buf;
  if (!cv::imencode(".png", g, buf)) throw Error("PNG encoding failed");
  return buf;
}

/// Reads an 8-bit map; when its size differs from (w, h) it is resized
/// bilinearly in 8-bit, so values stay on the k/255 grid.
inline ImportanceMap read_map(const std::filesystem::path& path, MapKind kind, int w, int h) {
  if (!std::filesystem::exists(path)) throw LoadError("map not found: " + path.string());
  cv::Mat g = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (g.empty()) throw LoadError("cannot decode map: " + path.string());
  if (g.cols != w || g.rows != h) {
    cv::Mat r;
    cv::resize(g, r, cv::Size(w, h), 0, 0, cv::INTER_LINEAR);
    g = r;
  }
  ImportanceMap m(w, h, kind);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m(x, y) = g.at<std::uint8_t>(y, x) / 255.0;
  return m;
}

inline ImportanceMap decode_map_png(const std::vector<std::uint8_t>& bytes, MapKind kind) {
  const cv::Mat g = cv::imdecode(bytes, cv::IMREAD_GRAYSCALE);
  if (g.empty()) throw LoadError("cannot decode map PNG");
  ImportanceMap m(g.cols, g.rows, kind);
  for (int y = 0; y < g.rows; ++y)
    for (int x = 0; x < g.cols; ++x) m(x, y) = g.at<std::uint8_t>(y, x) / 255.0;
  return m;
}

}  // namespace collage
