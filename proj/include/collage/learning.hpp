#pragma once

// Weight learning from ranked candidate collages.
//
// Maximizes, over lambdas and alphas,
//   sum over datasets of tau(user order, fitness order)
//     - eta * sum over k >= 2 of |f(j_k)/f(j_1) - sc(m_k)/sc(m_1)|
// where j is the fitness order and m the user order, by a coordinate pattern
// search with step halving and random restarts.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "collage/criteria.hpp"
#include "collage/preference.hpp"

namespace collage {

/// Candidates of one dataset with the user's scores for each.
struct TrainingItem {
  std::string name;
  std::vector<CandidateFeatures> candidates;
  std::vector<double> scores;

  std::vector<int> user_order() const { return order_by_value(scores); }

  void validate() const {
    if (candidates.size() < 2) throw ValidationError("training item '" + name + "' needs at least two candidates");
    if (scores.size() != candidates.size()) throw ValidationError("training item '" + name + "': one score per candidate");
    for (double s : scores)
      if (!std::isfinite(s) || s < 0) throw ValidationError("training item '" + name + "': invalid score");
    if (*std::max_element(scores.begin(), scores.end()) <= 0.0)
      throw ValidationError("training item '" + name + "': all scores are zero");
  }

  static TrainingItem from_tally(std::string name, std::vector<CandidateFeatures> candidates, const RankTally& t) {
    const auto s = f1_score(t);
    return {std::move(name), std::move(candidates), std::vector<double>(s.begin(), s.end())};
  }
};

struct LearnSpec {
  double eta = 1.0;
  double lambda_bound = 10.0;
  bool learn_alphas = true;  // false keeps alphas at the starting blend
  int restarts = 8;
  double initial_step = 1.0;
  double final_step = 1e-4;
  long max_evaluations = 400000;
  std::uint64_t seed = 1;
  std::array<double, 3> start_alphas{1.0 / 3, 1.0 / 3, 1.0 / 3};

  void validate() const {
    if (!(eta >= 0.0)) throw ValidationError("eta must be >= 0");
    if (!(lambda_bound > 0.0)) throw ValidationError("lambda bound must be > 0");
    if (restarts < 1) throw ValidationError("restarts must be >= 1");
    if (!(initial_step > 0.0) || !(final_step > 0.0) || final_step > initial_step)
      throw ValidationError("invalid step schedule");
    if (max_evaluations < 1) throw ValidationError("max evaluations must be >= 1");
  }
};

struct ObjectiveBreakdown {
  double objective = 0.0;
  double tau_sum = 0.0;
  double penalty = 0.0;
};

/// Ratio term for one dataset. A zero top fitness makes every ratio undefined;
/// each such term counts as 1.
inline double ratio_penalty(std::span<const double> f, std::span<const double> scores) {
  const auto fit_order = order_by_value(f);
  const auto user_order = order_by_value(scores);
  const double f1 = f[fit_order[0]];
  const double s1 = scores[user_order[0]];
  double p = 0.0;
  for (std::size_t k = 1; k < f.size(); ++k) {
    if (std::abs(f1) < 1e-12) {
      p += 1.0;
      continue;
    }
    p += std::abs(f[fit_order[k]] / f1 - scores[user_order[k]] / s1);
  }
  return p;
}

inline ObjectiveBreakdown learning_objective(const WeightSet& w, const std::vector<TrainingItem>& data, double eta) {
  ObjectiveBreakdown out;
  std::vector<double> f;
  for (const auto& item : data) {
    f.clear();
    for (const auto& c : item.candidates) f.push_back(fitness(c.criteria(w.alphas), w.lambdas));
    const auto fit_order = order_by_value(f);
    out.tau_sum += kendall_tau(item.user_order(), fit_order);
    out.penalty += ratio_penalty(f, item.scores);
  }
  out.objective = out.tau_sum - eta * out.penalty;
  return out;
}

struct LearnResult {
  WeightSet weights;
  ObjectiveBreakdown breakdown;
  bool improved = true;  // false: no restart improved on its start point
  long evaluations = 0;
  int best_restart = 0;
};

namespace detail {

/// Search point: 10 lambdas then 3 raw non-negative alpha coordinates.
using LearnPoint = std::array<double, kCriterionCount + 3>;

inline std::optional<WeightSet> to_weights(const LearnPoint& p) {
  WeightSet w;
  for (int i = 0; i < kCriterionCount; ++i) w.lambdas[i] = p[i];
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += p[kCriterionCount + k];
  if (!(s > 0.0)) return std::nullopt;
  for (int k = 0; k < 3; ++k) w.alphas[k] = p[kCriterionCount + k] / s;
  return w;
}

}  // namespace detail

inline LearnResult learn_weights(const std::vector<TrainingItem>& data, const LearnSpec& spec) {
  spec.validate();
  if (data.empty()) throw ValidationError("no training data");
  for (const auto& d : data) d.validate();

  const double B = spec.lambda_bound;
  const int dims = spec.learn_alphas ? kCriterionCount + 3 : kCriterionCount;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> lam(-1.0, 1.0), alp(0.0, 1.0);

  LearnResult best;
  best.breakdown.objective = -std::numeric_limits<double>::infinity();
  bool any_improved = false;
  long evals = 0;
  auto score = [&](const detail::LearnPoint& p) -> std::optional<std::pair<WeightSet, ObjectiveBreakdown>> {
    auto w = detail::to_weights(p);
    if (!w) return std::nullopt;
    ++evals;
    return std::pair{*w, learning_objective(*w, data, spec.eta)};
  };

  for (int r = 0; r < spec.restarts && evals < spec.max_evaluations; ++r) {
    detail::LearnPoint x{};
    if (r == 0) {
      for (int i = 0; i < kCriterionCount; ++i) x[i] = 1.0;
    } else {
      for (int i = 0; i < kCriterionCount; ++i) x[i] = lam(rng);
    }
    for (int k = 0; k < 3; ++k) x[kCriterionCount + k] = (r == 0 || !spec.learn_alphas) ? spec.start_alphas[k] : alp(rng);
    auto cur = score(x);
    if (!cur) continue;
    const double start_obj = cur->second.objective;

    for (double step = spec.initial_step; step >= spec.final_step && evals < spec.max_evaluations;) {
      // Poll all coordinate directions and move to the best improvement.
      int best_dim = -1;
      double best_delta = 0.0;
      auto best_val = cur;
      for (int d = 0; d < dims; ++d)
        for (double sign : {1.0, -1.0}) {
          detail::LearnPoint y = x;
          y[d] += sign * step;
          if (d < kCriterionCount) y[d] = std::clamp(y[d], -B, B);
          else y[d] = std::max(0.0, y[d]);
          if (y[d] == x[d]) continue;
          auto v = score(y);
          if (v && v->second.objective > best_val->second.objective) {
            best_val = v;
            best_dim = d;
            best_delta = y[d] - x[d];
          }
        }
      if (best_dim >= 0) {
        x[best_dim] += best_delta;
        cur = best_val;
      } else {
        step *= 0.5;
      }
    }
    if (cur->second.objective > start_obj) any_improved = true;
    if (cur->second.objective > best.breakdown.objective) {
      best.weights = cur->first;
      best.breakdown = cur->second;
      best.best_restart = r;
    }
  }
  if (!std::isfinite(best.breakdown.objective)) throw ValidationError("no feasible starting point");
  best.improved = any_improved;
  best.evaluations = evals;
  return best;
}

// ---------------------------------------------------------------------------

/// Expected learned signs of lambda'_1..lambda'_10.
inline constexpr std::array<int, kCriterionCount> kExpectedSigns{+1, +1, -1, +1, +1, +1, +1, -1, -1, +1};

struct SignReport {
  std::array<int, kCriterionCount> signs{};  // -1, 0 (inert) or +1
  std::array<int, kCriterionCount> expected = kExpectedSigns;
  std::vector<int> mismatches;               // 1-based criterion indices

  bool all_match() const { return mismatches.empty(); }
};

inline SignReport sign_report(const WeightSet& w, const std::array<int, kCriterionCount>& expected = kExpectedSigns,
                              double zero_tolerance = 1e-12) {
  SignReport r;
  r.expected = expected;
  for (int i = 0; i < kCriterionCount; ++i) {
    const double l = w.lambdas[i];
    r.signs[i] = std::abs(l) <= zero_tolerance ? 0 : (l > 0 ? 1 : -1);
    if (r.signs[i] != expected[i]) r.mismatches.push_back(i + 1);
  }
  return r;
}

inline std::string sign_symbol(int s) { return s > 0 ? "+" : s < 0 ? "-" : "0/inert"; }

}  // namespace collage
