#pragma once

// Discrete direct search over collage configurations.
//
// Each iteration sweeps the images top layer first. For the image being moved
// every (grid position, orientation) pair is scored with the others held
// fixed and the best strictly improving candidate is adopted. Layers come
// from the blended importance-map integrals and never change during search.
//
// Scoring a candidate is incremental: the composite of all other images is
// built once per image (SweepEvaluator::rebase) and each candidate only walks
// the moving image's own cells.

#include <chrono>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include "collage/criteria.hpp"
#include "collage/geometry.hpp"
#include "collage/scene.hpp"

namespace collage {

struct SearchSpec {
  Canvas canvas;
  int grid = 50;
  std::vector<int> xs;      // allowed top-left x positions
  std::vector<int> ys;      // allowed top-left y positions
  std::vector<int> angles;  // allowed theta indices
  int max_iterations = 50;
  std::uint64_t seed = 1;
  int restarts = 1;
  int threads = 1;

  /// Grid from -2g to the canvas side in steps of g, all 13 orientations.
  static SearchSpec standard(Canvas canvas = {}, int grid = 50) {
    SearchSpec s;
    s.canvas = canvas;
    s.grid = grid;
    if (grid < 1) throw ValidationError("grid step must be >= 1");
    for (int x = -2 * grid; x <= canvas.width; x += grid) s.xs.push_back(x);
    for (int y = -2 * grid; y <= canvas.height; y += grid) s.ys.push_back(y);
    s.angles.resize(kAngleCount);
    std::iota(s.angles.begin(), s.angles.end(), 0);
    return s;
  }

  void validate() const {
    if (grid < 1) throw ValidationError("grid step must be >= 1");
    if (max_iterations < 1) throw ValidationError("max iterations must be >= 1");
    if (restarts < 1) throw ValidationError("restarts must be >= 1");
    if (xs.empty() || ys.empty() || angles.empty()) throw ValidationError("empty search space");
    for (int a : angles)
      if (a < 0 || a >= kAngleCount) throw ValidationError("angle index out of range");
  }

  bool contains(const ImageState& s) const {
    return std::find(xs.begin(), xs.end(), s.tx) != xs.end() &&
           std::find(ys.begin(), ys.end(), s.ty) != ys.end() &&
           std::find(angles.begin(), angles.end(), s.theta_index) != angles.end();
  }

  std::size_t candidate_count() const { return xs.size() * ys.size() * angles.size(); }

  ImageState candidate(std::size_t k, int layer) const {
    const std::size_t na = angles.size(), nx = xs.size();
    return {xs[(k / na) % nx], ys[k / (na * nx)], angles[k % na], layer};
  }
};

/// Layer 0 goes to the largest map integral; ties keep dataset order.
inline std::vector<int> assign_layers(const std::vector<ImportanceMap>& maps) {
  std::vector<double> sums;
  sums.reserve(maps.size());
  for (const auto& m : maps) sums.push_back(m.sum());
  std::vector<int> order(maps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sums[a] > sums[b]; });
  std::vector<int> layers(maps.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) layers[order[rank]] = int(rank);
  return layers;
}

inline CollageConfiguration random_init(const SearchSpec& spec, std::span<const int> layers, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  auto pick = [&](const std::vector<int>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  CollageConfiguration cfg;
  cfg.canvas = spec.canvas;
  for (int layer : layers) {
    ImageState s;
    s.tx = pick(spec.xs);
    s.ty = pick(spec.ys);
    s.theta_index = pick(spec.angles);
    s.layer = layer;
    cfg.states.push_back(s);
  }
  return cfg;
}

// ---------------------------------------------------------------------------

/// Scores placements of one moving image against a fixed composite of the
/// others. Sprites must carry a single blended channel.
class SweepEvaluator {
 public:
  struct Scratch {
    std::vector<std::uint32_t> stamp;
    std::uint32_t generation = 0;
    std::vector<int> taken;
    std::vector<int> span_lo, span_hi;  // taken interval per canvas row
    std::vector<std::uint32_t> span_stamp;
    std::vector<long> lost_area, lost_face;
    std::vector<double> lost_mass;
    std::vector<int> affected_slot;  // image -> slot in hist_delta or -1
    std::vector<int> affected;
    std::vector<std::vector<int>> hist_delta;
    std::vector<int> moving_hist;
    std::vector<std::vector<int>> adjusted_hist;
    std::vector<std::pair<int, int>> moving_ext;
    std::vector<int> contacts;
    std::vector<Point> pts;
    CriterionInputs in;
  };

  SweepEvaluator(SpriteBank& bank, Canvas canvas, const std::array<double, kCriterionCount>& lambdas)
      : bank_(&bank), canvas_(canvas), lambdas_(lambdas), mask_(active_criteria(lambdas)) {
    if (bank.channels() != 1) throw ValidationError("sweep evaluator needs blended sprites");
    if (mask_ == 0) mask_ = 1;  // keep C'1 so degenerate weights still produce a value
  }

  Scratch make_scratch() const {
    Scratch s;
    const std::size_t cells = std::size_t(canvas_.width) * canvas_.height;
    s.stamp.assign(cells, 0);
    s.span_lo.assign(canvas_.height, 0);
    s.span_hi.assign(canvas_.height, -1);
    s.span_stamp.assign(canvas_.height, 0);
    s.lost_area.assign(n_, 0);
    s.lost_face.assign(n_, 0);
    s.lost_mass.assign(n_, 0.0);
    s.affected_slot.assign(n_, -1);
    s.hist_delta.assign(n_, std::vector<int>(color::kRgbBins, 0));
    s.adjusted_hist.assign(n_, std::vector<int>(color::kRgbBins, 0));
    s.moving_hist.assign(color::kRgbBins, 0);
    s.moving_ext.assign(canvas_.height, {1, 0});
    s.in = base_inputs_;
    return s;
  }

  /// Builds the composite of every image except `moving`.
  void rebase(const CollageConfiguration& cfg, int moving) {
    const int n = static_cast<int>(cfg.states.size());
    const int W = canvas_.width, H = canvas_.height;
    n_ = n;
    moving_ = moving;
    states_ = cfg.states;
    above_.assign(n, 0);
    for (int i = 0; i < n; ++i) above_[i] = cfg.states[i].layer < cfg.states[moving].layer;

    label_.assign(std::size_t(W) * H, kNoImage);
    value_.assign(label_.size(), 0.0);
    face_.assign(label_.size(), 0);
    bin_.assign(label_.size(), 0);
    vis_mass_.assign(n, 0.0);
    ref_mass_.assign(n, 0.0);
    area_.assign(n, 0);
    face_vis_.assign(n, 0);
    face_total_.assign(n, 0);
    hist_.assign(n, std::vector<int>(color::kRgbBins, 0));
    hull_.assign(n, 0);
    std::vector<double> cx(n, 0.0), cy(n, 0.0);
    std::vector<std::vector<std::pair<int, int>>> ext(n);

    const auto layers = cfg.layers();
    const auto order = top_down_order(layers);
    for (int img : order) {
      if (img == moving) continue;
      const auto& st = cfg.states[img];
      const Sprite& sp = bank().get(img, st.theta_index);
      ref_mass_[img] = sp.total_mass[0];
      face_total_[img] = sp.face_total;
      ext[img].assign(H, {1, 0});
      for (int ly = 0; ly < sp.height; ++ly) {
        const int y = st.ty + ly;
        if (y < 0 || y >= H) continue;
        const RowSpan& span = sp.rows[ly];
        const int xb = std::max(st.tx + span.begin, 0), xe = std::min(st.tx + span.end, W);
        for (int x = xb; x < xe; ++x) {
          const std::size_t c = std::size_t(y) * W + x;
          if (label_[c] != kNoImage) continue;
          const int cell = span.offset + (x - st.tx - span.begin);
          label_[c] = img;
          value_[c] = sp.values[cell];
          face_[c] = sp.face[cell];
          bin_[c] = sp.bin[cell];
          vis_mass_[img] += sp.values[cell];
          face_vis_[img] += sp.face[cell];
          ++hist_[img][sp.bin[cell]];
          ++area_[img];
          cx[img] += x + 0.5;
          cy[img] += y + 0.5;
          auto& e = ext[img][y];
          if (e.first > e.second) e = {x, x};
          e.second = x;
        }
      }
    }

    // Visible runs per image and row, for hull updates.
    run_index_.assign(std::size_t(n) * (H + 1), 0);
    runs_.assign(n, {});
    for (int img = 0; img < n; ++img) runs_[img].clear();
    std::vector<std::vector<int>> row_start(n, std::vector<int>(H + 1, 0));
    for (int y = 0; y < H; ++y) {
      for (int img = 0; img < n; ++img) row_start[img][y] = int(runs_[img].size());
      int x = 0;
      const int* row = &label_[std::size_t(y) * W];
      while (x < W) {
        const int l = row[x];
        int e = x;
        while (e + 1 < W && row[e + 1] == l) ++e;
        if (l != kNoImage) runs_[l].push_back({x, e});
        x = e + 1;
      }
    }
    for (int img = 0; img < n; ++img) {
      row_start[img][H] = int(runs_[img].size());
      std::copy(row_start[img].begin(), row_start[img].end(), run_index_.begin() + std::size_t(img) * (H + 1));
    }

    covered_ = 0;
    face_vis_total_ = 0;
    face_total_sum_ = 0;
    for (int i = 0; i < n; ++i) {
      covered_ += area_[i];
      face_vis_total_ += face_vis_[i];
      face_total_sum_ += face_total_[i];
      if (i != moving && !(ref_mass_[i] > 0.0))
        throw ValidationError("image " + std::to_string(i) + " has a zero-integral importance map");
      if (area_[i] > 0 && needs_hulls(mask_)) hull_[i] = hull_area_from_row_extents(ext[i]);
    }

    top_ = order.front();
    top_visible_ = false;
    if (top_ != moving && area_[top_] > 0) {
      top_visible_ = true;
      top_cx_ = cx[top_] / area_[top_];
      top_cy_ = cy[top_] / area_[top_];
    }

    contacts_.assign(std::size_t(n) * n, 0);
    chi2_.assign(std::size_t(n) * n, 0.0);
    if (needs_neighbors(mask_)) {
      auto add = [&](int a, int b) {
        if (a == kNoImage || b == kNoImage || a == b) return;
        ++contacts_[std::size_t(a) * n + b];
        ++contacts_[std::size_t(b) * n + a];
      };
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
          const int a = label_[std::size_t(y) * W + x];
          if (a == kNoImage) continue;
          if (x + 1 < W) add(a, label_[std::size_t(y) * W + x + 1]);
          if (y + 1 < H) {
            add(a, label_[std::size_t(y + 1) * W + x]);
            if (x + 1 < W) add(a, label_[std::size_t(y + 1) * W + x + 1]);
            if (x > 0) add(a, label_[std::size_t(y + 1) * W + x - 1]);
          }
        }
      if (needs_histograms(mask_))
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j)
            if (contacts_[std::size_t(i) * n + j] > 0)
              chi2_[std::size_t(i) * n + j] = chi2_[std::size_t(j) * n + i] =
                  chi_squared_counts(hist_[i].data(), area_[i], hist_[j].data(), area_[j]);
    }

    base_inputs_ = CriterionInputs{};
    base_inputs_.n = n;
    base_inputs_.canvas = canvas_;
    base_inputs_.vis_mass.assign(n, 0.0);
    base_inputs_.ref_mass.assign(n, 0.0);
    base_inputs_.vis_area.assign(n, 0);
    base_inputs_.hull_area.assign(n, 0);
    base_inputs_.theta_index.resize(n);
    for (int i = 0; i < n; ++i) base_inputs_.theta_index[i] = cfg.states[i].theta_index;
    base_inputs_.neighbors.assign(n, {});
    base_inputs_.chi2.assign(std::size_t(n) * n, 0.0);
  }

  /// Fitness of the rebased configuration with the moving image at `s`.
  double evaluate(const ImageState& s, Scratch& sc, CriterionVector* out = nullptr) const {
    const int n = n_, m = moving_;
    const int W = canvas_.width, H = canvas_.height;
    const Sprite& sp = bank().get(m, s.theta_index);
    if (++sc.generation == 0) {
      std::fill(sc.stamp.begin(), sc.stamp.end(), 0);
      std::fill(sc.span_stamp.begin(), sc.span_stamp.end(), 0);
      sc.generation = 1;
    }
    const std::uint32_t gen = sc.generation;
    const bool want_hist = needs_histograms(mask_);
    const bool want_nb = needs_neighbors(mask_);
    const bool want_hull = needs_hulls(mask_);

    for (int i : sc.affected) {
      sc.affected_slot[i] = -1;
      sc.lost_area[i] = sc.lost_face[i] = 0;
      sc.lost_mass[i] = 0.0;
      if (want_hist) std::fill(sc.hist_delta[i].begin(), sc.hist_delta[i].end(), 0);
    }
    sc.affected.clear();
    sc.taken.clear();
    if (want_hist) std::fill(sc.moving_hist.begin(), sc.moving_hist.end(), 0);

    long m_area = 0, m_face = 0, newly_covered = 0;
    double m_mass = 0.0, m_cx = 0.0, m_cy = 0.0;
    int y_first = H, y_last = -1;
    for (int ly = 0; ly < sp.height; ++ly) {
      const int y = s.ty + ly;
      if (y < 0 || y >= H) continue;
      const RowSpan& span = sp.rows[ly];
      const int xb = std::max(s.tx + span.begin, 0), xe = std::min(s.tx + span.end, W);
      if (xb >= xe) continue;
      sc.span_lo[y] = xb;
      sc.span_hi[y] = xe - 1;
      sc.span_stamp[y] = gen;
      auto& e = sc.moving_ext[y];
      e = {1, 0};
      y_first = std::min(y_first, y);
      y_last = y;
      for (int x = xb; x < xe; ++x) {
        const std::size_t c = std::size_t(y) * W + x;
        const int o = label_[c];
        if (o != kNoImage && above_[o]) continue;
        const int cell = span.offset + (x - s.tx - span.begin);
        sc.stamp[c] = gen;
        if (want_nb) sc.taken.push_back(int(c));
        ++m_area;
        m_mass += sp.values[cell];
        m_face += sp.face[cell];
        m_cx += x + 0.5;
        m_cy += y + 0.5;
        if (want_hist) ++sc.moving_hist[sp.bin[cell]];
        if (e.first > e.second) e = {x, x};
        e.second = x;
        if (o == kNoImage) {
          ++newly_covered;
          continue;
        }
        if (sc.affected_slot[o] < 0) {
          sc.affected_slot[o] = 1;
          sc.affected.push_back(o);
        }
        ++sc.lost_area[o];
        sc.lost_mass[o] += value_[c];
        sc.lost_face[o] += face_[c];
        if (want_hist) ++sc.hist_delta[o][bin_[c]];
      }
    }

    CriterionInputs& in = sc.in;
    in.n = n;
    in.canvas = canvas_;
    in.vis_mass.resize(n);
    in.ref_mass.resize(n);
    in.vis_area.resize(n);
    in.hull_area.resize(n);
    in.theta_index = base_inputs_.theta_index;
    in.theta_index[m] = s.theta_index;
    long face_lost = 0;
    for (int i = 0; i < n; ++i) {
      in.vis_mass[i] = vis_mass_[i] - sc.lost_mass[i];
      in.vis_area[i] = area_[i] - sc.lost_area[i];
      in.ref_mass[i] = ref_mass_[i];
      in.hull_area[i] = hull_[i];
      face_lost += sc.lost_face[i];
    }
    in.vis_mass[m] = m_mass;
    in.vis_area[m] = m_area;
    in.ref_mass[m] = sp.total_mass[0];
    if (!(in.ref_mass[m] > 0.0))
      throw ValidationError("image " + std::to_string(m) + " has a zero-integral importance map");
    in.covered = covered_ + newly_covered;
    in.face_visible = face_vis_total_ - face_lost + m_face;
    in.face_total = face_total_sum_ + sp.face_total;

    if (top_ == m) {
      in.top_visible = m_area > 0;
      in.top_cx = m_area ? m_cx / m_area : 0.0;
      in.top_cy = m_area ? m_cy / m_area : 0.0;
    } else {
      in.top_visible = top_visible_;
      in.top_cx = top_cx_;
      in.top_cy = top_cy_;
    }

    if (want_hull) {
      in.hull_area[m] = 0;
      if (m_area > 0) {
        sc.pts.clear();
        for (int y = y_first; y <= y_last; ++y) {
          if (sc.span_stamp[y] != gen) continue;
          const auto [lo, hi] = sc.moving_ext[y];
          if (lo > hi) continue;
          sc.pts.push_back({lo, y});
          if (hi != lo) sc.pts.push_back({hi, y});
        }
        in.hull_area[m] = lattice_points_in_hull(convex_hull(sc.pts));
      }
      for (int o : sc.affected) in.hull_area[o] = in.vis_area[o] > 0 ? reduced_hull(o, sc) : 0;
    }

    if (want_nb) {
      sc.contacts = contacts_;
      auto& ct = sc.contacts;
      static constexpr int dx[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
      static constexpr int dy[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
      for (int c : sc.taken) {
        const int x = c % W, y = c / W;
        const int oc = label_[c];
        for (int k = 0; k < 8; ++k) {
          const int qx = x + dx[k], qy = y + dy[k];
          if (qx < 0 || qy < 0 || qx >= W || qy >= H) continue;
          const int q = qy * W + qx;
          const int oq = label_[q];
          const bool q_taken = sc.stamp[q] == gen;
          if (oc != kNoImage && oq != kNoImage && oc != oq && (!q_taken || q > c)) {
            --ct[std::size_t(oc) * n + oq];
            --ct[std::size_t(oq) * n + oc];
          }
          if (!q_taken && oq != kNoImage) {
            ++ct[std::size_t(m) * n + oq];
            ++ct[std::size_t(oq) * n + m];
          }
        }
      }
      in.neighbors.resize(n);
      for (int i = 0; i < n; ++i) {
        auto& nb = in.neighbors[i];
        nb.clear();
        for (int j = 0; j < n; ++j)
          if (ct[std::size_t(i) * n + j] > 0) nb.push_back(j);
      }
      if (want_hist) {
        in.chi2 = chi2_;
        for (int o : sc.affected) {
          auto& h = sc.adjusted_hist[o];
          for (int b = 0; b < color::kRgbBins; ++b) h[b] = hist_[o][b] - sc.hist_delta[o][b];
        }
        auto hist_of = [&](int i) -> const int* {
          if (i == m) return sc.moving_hist.data();
          if (sc.affected_slot[i] >= 0) return sc.adjusted_hist[i].data();
          return hist_[i].data();
        };
        for (int i = 0; i < n; ++i) {
          const bool dirty_i = i == m || sc.affected_slot[i] >= 0;
          for (int j : in.neighbors[i]) {
            if (j <= i) continue;
            const bool dirty = dirty_i || j == m || sc.affected_slot[j] >= 0;
            if (!dirty) continue;
            const double d = chi_squared_counts(hist_of(i), in.vis_area[i], hist_of(j), in.vis_area[j]);
            in.chi2[std::size_t(i) * n + j] = in.chi2[std::size_t(j) * n + i] = d;
          }
        }
      }
    } else {
      in.neighbors.assign(n, {});
    }

    const CriterionVector v = assemble_criteria(in, mask_);
    if (out) *out = v;
    return fitness(v, lambdas_);
  }

  CriterionMask mask() const { return mask_; }

 private:
  SpriteBank& bank() const { return *bank_; }

  /// Hull of image o's visible cells after removing the moving image's row spans.
  long reduced_hull(int o, Scratch& sc) const {
    const int H = canvas_.height;
    const std::uint32_t gen = sc.generation;
    sc.pts.clear();
    const int* idx = &run_index_[std::size_t(o) * (H + 1)];
    const auto& runs = runs_[o];
    for (int y = 0; y < H; ++y) {
      const int r0 = idx[y], r1 = idx[y + 1];
      if (r0 == r1) continue;
      int lo = 1, hi = 0;
      if (sc.span_stamp[y] != gen) {
        lo = runs[r0].first;
        hi = runs[r1 - 1].second;
      } else {
        const int a = sc.span_lo[y], b = sc.span_hi[y];
        for (int r = r0; r < r1; ++r) {
          const auto [s, e] = runs[r];
          if (s < a) { lo = s; break; }
          if (e > b) { lo = std::max(s, b + 1); break; }
        }
        for (int r = r1 - 1; r >= r0; --r) {
          const auto [s, e] = runs[r];
          if (e > b) { hi = e; break; }
          if (s < a) { hi = std::min(e, a - 1); break; }
        }
      }
      if (lo > hi) continue;
      sc.pts.push_back({lo, y});
      if (hi != lo) sc.pts.push_back({hi, y});
    }
    return lattice_points_in_hull(convex_hull(sc.pts));
  }

  SpriteBank* bank_;
  Canvas canvas_;
  std::array<double, kCriterionCount> lambdas_;
  CriterionMask mask_;

  int n_ = 0, moving_ = 0;
  std::vector<ImageState> states_;
  std::vector<char> above_;
  std::vector<int> label_;
  std::vector<double> value_;
  std::vector<std::uint8_t> face_;
  std::vector<std::uint16_t> bin_;
  std::vector<double> vis_mass_, ref_mass_;
  std::vector<long> area_, face_vis_, face_total_, hull_;
  std::vector<std::vector<int>> hist_;
  std::vector<std::vector<std::pair<int, int>>> runs_;
  std::vector<int> run_index_;
  long covered_ = 0, face_vis_total_ = 0, face_total_sum_ = 0;
  int top_ = 0;
  bool top_visible_ = false;
  double top_cx_ = 0.0, top_cy_ = 0.0;
  std::vector<int> contacts_;
  std::vector<double> chi2_;
  CriterionInputs base_inputs_;
};

// ---------------------------------------------------------------------------

struct MoveRecord {
  int iteration = 0;
  int image = 0;
  ImageState from, to;
  double fitness = 0.0;
};

struct SearchTrace {
  std::vector<double> best_fitness;  // entry 0 is the initial configuration
  std::vector<MoveRecord> moves;
  double wall_seconds = 0.0;
  int restart = 0;
};

struct OptimizeResult {
  CollageConfiguration config;
  SearchTrace trace;
  double fitness = 0.0;
  CriterionVector criteria;
};

namespace detail {

/// Full-evaluation fitness on blended sprites.
inline double blended_fitness(const CollageConfiguration& cfg, SpriteBank& bank, const WeightSet& w,
                              CriterionVector* out = nullptr) {
  const std::array<double, 1> one{1.0};
  const auto mask = active_criteria(w.lambdas);
  const auto ctx = build_context(cfg, bank, one, mask ? mask : 1u);
  const auto v = assemble_criteria(ctx.inputs, mask ? mask : 1u);
  if (out) *out = v;
  return fitness(v, w.lambdas);
}

}  // namespace detail

/// Improvements smaller than this are treated as ties.
inline constexpr double kImprovementTolerance = 1e-12;

/// Coordinate search from a given start; the bank must hold blended sprites.
inline OptimizeResult optimize_from(CollageConfiguration cfg, SpriteBank& bank, const WeightSet& weights,
                                    const SearchSpec& spec) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  bank.prepare(spec.angles);
  const int n = static_cast<int>(cfg.states.size());
  SweepEvaluator eval(bank, spec.canvas, weights.lambdas);

  OptimizeResult res;
  res.trace.best_fitness.push_back(detail::blended_fitness(cfg, bank, weights));
  const std::size_t ncand = spec.candidate_count();
  const int threads = std::max(1, spec.threads);
  std::vector<SweepEvaluator::Scratch> scratch;

  const auto order = top_down_order(cfg.layers());
  for (int it = 1; it <= spec.max_iterations; ++it) {
    bool improved = false;
    for (int img : order) {
      eval.rebase(cfg, img);
      scratch.clear();
      for (int t = 0; t < threads; ++t) scratch.push_back(eval.make_scratch());
      const double current = eval.evaluate(cfg.states[img], scratch[0]);
      const int layer = cfg.states[img].layer;

      std::vector<double> best_f(threads, -std::numeric_limits<double>::infinity());
      std::vector<std::size_t> best_k(threads, ncand);
      auto work = [&](int t) {
        for (std::size_t k = t; k < ncand; k += threads) {
          const double f = eval.evaluate(spec.candidate(k, layer), scratch[t]);
          if (f > best_f[t]) {
            best_f[t] = f;
            best_k[t] = k;
          }
        }
      };
      if (threads == 1) {
        work(0);
      } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
      }
      double bf = -std::numeric_limits<double>::infinity();
      std::size_t bk = ncand;
      for (int t = 0; t < threads; ++t)
        if (best_f[t] > bf || (best_f[t] == bf && best_k[t] < bk)) {
          bf = best_f[t];
          bk = best_k[t];
        }
      if (bk < ncand && bf > current + kImprovementTolerance) {
        const ImageState next = spec.candidate(bk, layer);
        res.trace.moves.push_back({it, img, cfg.states[img], next, bf});
        cfg.states[img] = next;
        improved = true;
      }
    }
    res.trace.best_fitness.push_back(detail::blended_fitness(cfg, bank, weights));
    if (!improved) break;
  }
  res.fitness = detail::blended_fitness(cfg, bank, weights, &res.criteria);
  res.config = std::move(cfg);
  res.trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

/// Layers from the blended maps, random start(s), coordinate search; the best
/// of `spec.restarts` runs is returned.
inline OptimizeResult optimize(const Dataset& ds, const WeightSet& weights, const SearchSpec& spec) {
  ds.validate();
  spec.validate();
  const auto combined = ds.combined_maps(weights.alphas);
  const auto layers = assign_layers(combined);
  SpriteBank bank(ds, ChannelSpec::combined(weights.alphas));
  OptimizeResult best;
  bool have = false;
  for (int r = 0; r < spec.restarts; ++r) {
    const auto init = random_init(spec, layers, spec.seed + std::uint64_t(r) * 0x9E3779B97F4A7C15ull);
    auto res = optimize_from(init, bank, weights, spec);
    res.trace.restart = r;
    if (!have || res.fitness > best.fitness) {
      best = std::move(res);
      have = true;
    }
  }
  return best;
}

}  // namespace collage
