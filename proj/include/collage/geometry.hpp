#pragma once

// Roto-translation of images, maps and masks onto the canvas, layered
// visibility, the visible-region neighbor graph and discrete convex hulls.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

#include "collage/color.hpp"
#include "collage/core.hpp"

namespace collage {

inline constexpr int kNoImage = -1;

// ---------------------------------------------------------------------------
// Rotation geometry

/// Rotated source rectangle: the inverse mapping from local sprite cells to
/// source coordinates. The sprite's top-left corner is the bounding-box corner
/// of the rotated rectangle, so (tx,ty) place that corner on the canvas.
struct RotatedFrame {
  int src_w = 0, src_h = 0;
  double cos_t = 1.0, sin_t = 0.0;
  double box_w = 0.0, box_h = 0.0;  // continuous bounding box
  int width = 0, height = 0;        // integer sprite extent

  RotatedFrame(int w, int h, double theta) : src_w(w), src_h(h) {
    if (theta == 0.0) {
      cos_t = 1.0;
      sin_t = 0.0;
    } else {
      cos_t = std::cos(theta);
      sin_t = std::sin(theta);
    }
    box_w = w * std::abs(cos_t) + h * std::abs(sin_t);
    box_h = w * std::abs(sin_t) + h * std::abs(cos_t);
    width = static_cast<int>(std::ceil(box_w - 1e-9));
    height = static_cast<int>(std::ceil(box_h - 1e-9));
  }

  /// Source coordinates of a point given in sprite-local continuous coordinates.
  void to_source(double lx, double ly, double& u, double& v) const {
    const double px = lx - 0.5 * box_w;
    const double py = ly - 0.5 * box_h;
    u = cos_t * px + sin_t * py + 0.5 * src_w;
    v = -sin_t * px + cos_t * py + 0.5 * src_h;
  }
  bool inside(double u, double v) const { return u >= 0.0 && v >= 0.0 && u < src_w && v < src_h; }
};

/// Bilinear sample at continuous source coordinates (pixel centers at +0.5),
/// clamped to the border.
template <class Fetch>
double bilinear(int w, int h, double u, double v, Fetch&& fetch) {
  const double fx = std::clamp(u - 0.5, 0.0, double(w - 1));
  const double fy = std::clamp(v - 0.5, 0.0, double(h - 1));
  const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
  const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const double ax = fx - x0, ay = fy - y0;
  if (ax == 0.0 && ay == 0.0) return fetch(x0, y0);
  return (1 - ax) * (1 - ay) * fetch(x0, y0) + ax * (1 - ay) * fetch(x1, y0) +
         (1 - ax) * ay * fetch(x0, y1) + ax * ay * fetch(x1, y1);
}

inline Rgb sample_rgb(const RasterImage& img, double u, double v) {
  auto ch = [&](int c) {
    const double s = bilinear(img.width, img.height, u, v, [&](int x, int y) {
      return double(img.pixels[(std::size_t(y) * img.width + x) * 3 + c]);
    });
    return static_cast<std::uint8_t>(std::clamp(std::lround(s), 0L, 255L));
  };
  return {ch(0), ch(1), ch(2)};
}

// ---------------------------------------------------------------------------
// Sprites: an image and its per-pixel data, pre-rotated into local cells.

struct RowSpan {
  int begin = 0;   // first covered local x
  int end = 0;     // one past last covered local x
  int offset = 0;  // index of the first cell in the cell arrays
};

/// Rotated raster for one (image, angle). Cells are stored row by row for
/// covered cells only; each covered row is a contiguous span.
struct Sprite {
  int width = 0, height = 0;
  int channels = 0;
  std::vector<RowSpan> rows;          // one per local row
  std::vector<double> values;         // cells * channels, bilinear
  std::vector<std::uint8_t> face;     // per cell, nearest neighbor
  std::vector<std::uint16_t> bin;     // per cell, RGB histogram bin
  std::vector<double> total_mass;     // per channel, unclipped
  long face_total = 0;
  long area = 0;
};

/// Sprite construction input. Maps (channels) and face mask are optional.
struct SpriteSource {
  const RasterImage* image = nullptr;
  std::vector<const Grid<double>*> channels;
  const Grid<std::uint8_t>* face = nullptr;
};

inline Sprite make_sprite(const SpriteSource& src, int theta_index) {
  const RasterImage& img = *src.image;
  const RotatedFrame f(img.width, img.height, angle_of(theta_index));
  Sprite s;
  s.width = f.width;
  s.height = f.height;
  s.channels = static_cast<int>(src.channels.size());
  s.rows.resize(f.height);
  s.total_mass.assign(s.channels, 0.0);
  int offset = 0;
  for (int ly = 0; ly < f.height; ++ly) {
    RowSpan span{0, 0, offset};
    bool started = false;
    for (int lx = 0; lx < f.width; ++lx) {
      double u, v;
      f.to_source(lx + 0.5, ly + 0.5, u, v);
      if (!f.inside(u, v)) {
        if (started) break;
        continue;
      }
      if (!started) {
        span.begin = lx;
        started = true;
      }
      span.end = lx + 1;
      for (int c = 0; c < s.channels; ++c) {
        const auto& g = *src.channels[c];
        const double val = bilinear(g.width, g.height, u, v, [&](int x, int y) { return g(x, y); });
        s.values.push_back(val);
        s.total_mass[c] += val;
      }
      const int nx = std::min(int(u), img.width - 1), ny = std::min(int(v), img.height - 1);
      const std::uint8_t fb = src.face ? (*src.face)(nx, ny) : 0;
      s.face.push_back(fb);
      s.face_total += fb;
      s.bin.push_back(static_cast<std::uint16_t>(color::rgb_bin(sample_rgb(img, u, v))));
      ++offset;
    }
    if (!started) span.offset = offset;
    s.rows[ly] = span;
  }
  s.area = offset;
  return s;
}

// ---------------------------------------------------------------------------
// Canvas-space placement (the general, per-canvas-cell form).

/// A source placed on the canvas: coverage plus resampled values.
struct PlacedRaster {
  int source_id = 0;
  Grid<std::uint8_t> coverage;
  Grid<double> values;  // map values, face bits, or 0 when only coverage matters

  double sum() const {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (coverage.data[i]) s += values.data[i];
    return s;
  }
  long area() const { return std::accumulate(coverage.data.begin(), coverage.data.end(), 0L); }
};

enum class Sampling { nearest, bilinear };

/// Rotates a scalar field about its center and places the bounding corner at
/// (tx,ty). Out-of-canvas parts are clipped.
inline PlacedRaster transform(const Grid<double>& source, const ImageState& state, const Canvas& canvas,
                              Sampling sampling = Sampling::bilinear, int source_id = 0) {
  const RotatedFrame f(source.width, source.height, state.theta());
  PlacedRaster p{source_id, Grid<std::uint8_t>(canvas.width, canvas.height, 0),
                 Grid<double>(canvas.width, canvas.height, 0.0)};
  const int y0 = std::max(0, state.ty), y1 = std::min(canvas.height, state.ty + f.height);
  const int x0 = std::max(0, state.tx), x1 = std::min(canvas.width, state.tx + f.width);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      double u, v;
      f.to_source(x - state.tx + 0.5, y - state.ty + 0.5, u, v);
      if (!f.inside(u, v)) continue;
      p.coverage(x, y) = 1;
      if (sampling == Sampling::nearest)
        p.values(x, y) = source(std::min(int(u), source.width - 1), std::min(int(v), source.height - 1));
      else
        p.values(x, y) = bilinear(source.width, source.height, u, v,
                                  [&](int sx, int sy) { return source(sx, sy); });
    }
  return p;
}

inline PlacedRaster transform(const FaceMask& mask, const ImageState& state, const Canvas& canvas,
                              int source_id = 0) {
  Grid<double> g(mask.values.width, mask.values.height);
  for (std::size_t i = 0; i < g.size(); ++i) g.data[i] = mask.values.data[i];
  return transform(g, state, canvas, Sampling::nearest, source_id);
}

inline PlacedRaster transform(const RasterImage& image, const ImageState& state, const Canvas& canvas) {
  return transform(Grid<double>(image.width, image.height, 0.0), state, canvas, Sampling::nearest, image.id);
}

/// Topmost-owner label grid over the canvas.
struct VisibilityComposite {
  Grid<int> labels;
  int image_count = 0;

  Grid<std::uint8_t> visible_mask(int image) const {
    Grid<std::uint8_t> m(labels.width, labels.height, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) m.data[i] = labels.data[i] == image;
    return m;
  }
  long visible_area(int image) const {
    return std::count(labels.data.begin(), labels.data.end(), image);
  }
  long covered() const {
    return labels.size() - std::count(labels.data.begin(), labels.data.end(), kNoImage);
  }
};

/// Each covered cell goes to the covering image with the smallest layer value.
/// placed[i] belongs to image i.
inline VisibilityComposite composite(const std::vector<PlacedRaster>& placed, std::span<const int> layers) {
  if (placed.size() != layers.size()) throw ValidationError("composite: one layer per raster");
  if (!is_permutation_of_indices(layers)) throw ValidationError("composite: layers must be a permutation");
  VisibilityComposite c;
  c.image_count = static_cast<int>(placed.size());
  if (placed.empty()) return c;
  c.labels = Grid<int>(placed[0].coverage.width, placed[0].coverage.height, kNoImage);
  for (int img : top_down_order(layers)) {
    const auto& cov = placed[img].coverage;
    for (std::size_t i = 0; i < cov.size(); ++i)
      if (cov.data[i] && c.labels.data[i] == kNoImage) c.labels.data[i] = img;
  }
  return c;
}

/// Placed values restricted to the image's visible cells.
inline double visible_sum(const VisibilityComposite& c, int image, const PlacedRaster& placed) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.labels.size(); ++i)
    if (c.labels.data[i] == image) s += placed.values.data[i];
  return s;
}

using NeighborSets = std::vector<std::set<int>>;

/// Images are neighbors when their visible regions touch under 8-adjacency.
inline NeighborSets neighbor_graph(const Grid<int>& labels, int image_count) {
  NeighborSets n(image_count);
  const int w = labels.width, h = labels.height;
  auto link = [&](int a, int b) {
    if (a == kNoImage || b == kNoImage || a == b) return;
    n[a].insert(b);
    n[b].insert(a);
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int a = labels(x, y);
      if (a == kNoImage) continue;
      if (x + 1 < w) link(a, labels(x + 1, y));
      if (y + 1 < h) {
        link(a, labels(x, y + 1));
        if (x + 1 < w) link(a, labels(x + 1, y + 1));
        if (x > 0) link(a, labels(x - 1, y + 1));
      }
    }
  return n;
}

inline NeighborSets neighbor_graph(const VisibilityComposite& c) {
  return neighbor_graph(c.labels, c.image_count);
}

// ---------------------------------------------------------------------------
// Discrete convex hull

struct Point {
  long x = 0, y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

inline long cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Andrew's monotone chain; returns the hull counter-clockwise without
/// collinear points. Input need not be sorted.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

/// Number of lattice points inside or on a convex lattice polygon (Pick).
inline long lattice_points_in_hull(const std::vector<Point>& hull) {
  if (hull.empty()) return 0;
  if (hull.size() == 1) return 1;
  long twice_area = 0, boundary = 0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    twice_area += a.x * b.y - b.x * a.y;
    boundary += std::gcd(std::abs(b.x - a.x), std::abs(b.y - a.y));
  }
  if (hull.size() == 2) return boundary / 2 + 1;  // segment counted twice
  twice_area = std::abs(twice_area);
  // I + B = A + B/2 + 1
  return (twice_area + boundary) / 2 + 1;
}

/// Cell-count area of the convex hull of the cell centers in each row's
/// extreme cells. rows[y] = {min_x, max_x} or min_x > max_x for empty rows.
inline long hull_area_from_row_extents(const std::vector<std::pair<int, int>>& rows, int y_offset = 0) {
  std::vector<Point> pts;
  for (std::size_t y = 0; y < rows.size(); ++y) {
    const auto [lo, hi] = rows[y];
    if (lo > hi) continue;
    pts.push_back({lo, long(y) + y_offset});
    if (hi != lo) pts.push_back({hi, long(y) + y_offset});
  }
  return lattice_points_in_hull(convex_hull(std::move(pts)));
}

/// Area (in cells) of the discrete convex hull of a binary mask.
inline long convex_hull_area(const Grid<std::uint8_t>& mask) {
  std::vector<std::pair<int, int>> rows(mask.height, {1, 0});
  bool any = false;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask(x, y)) {
        any = true;
        auto& r = rows[y];
        if (r.first > r.second) r = {x, x};
        r.first = std::min(r.first, x);
        r.second = std::max(r.second, x);
      }
  if (!any) throw ValidationError("convex_hull_area: empty mask");
  return hull_area_from_row_extents(rows);
}

// ---------------------------------------------------------------------------
// Rendering

/// Topmost image per output cell at the given magnification.
inline Grid<int> provenance(const CollageConfiguration& cfg, const std::vector<RasterImage>& images, int scale) {
  validate_configuration(cfg);
  if (images.size() != cfg.states.size()) throw ValidationError("render: one image per state");
  const int w = cfg.canvas.width * scale, h = cfg.canvas.height * scale;
  Grid<int> labels(w, h, kNoImage);
  const auto layers = cfg.layers();
  for (int img : top_down_order(layers)) {
    const auto& st = cfg.states[img];
    const RotatedFrame f(images[img].width, images[img].height, st.theta());
    const int y0 = std::max(0, st.ty * scale), y1 = std::min(h, (st.ty + f.height) * scale);
    const int x0 = std::max(0, st.tx * scale), x1 = std::min(w, (st.tx + f.width) * scale);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) {
        if (labels(x, y) != kNoImage) continue;
        double u, v;
        f.to_source((x + 0.5) / scale - st.tx, (y + 0.5) / scale - st.ty, u, v);
        if (f.inside(u, v)) labels(x, y) = img;
      }
  }
  return labels;
}

/// Paints images bottom layer first over a white background, bilinear sampling.
inline RasterImage render(const CollageConfiguration& cfg, const std::vector<RasterImage>& images, int scale) {
  const Grid<int> labels = provenance(cfg, images, scale);
  RasterImage out(labels.width, labels.height, Rgb{255, 255, 255});
  std::vector<RotatedFrame> frames;
  for (std::size_t i = 0; i < images.size(); ++i)
    frames.emplace_back(images[i].width, images[i].height, cfg.states[i].theta());
  for (int y = 0; y < labels.height; ++y)
    for (int x = 0; x < labels.width; ++x) {
      const int img = labels(x, y);
      if (img == kNoImage) continue;
      const auto& st = cfg.states[img];
      double u, v;
      frames[img].to_source((x + 0.5) / scale - st.tx, (y + 0.5) / scale - st.ty, u, v);
      out.set(x, y, sample_rgb(images[img], u, v));
    }
  return out;
}

inline RasterImage render(const CollageConfiguration& cfg, const std::vector<RasterImage>& images) {
  return render(cfg, images, cfg.canvas.render_scale);
}

}  // namespace collage
