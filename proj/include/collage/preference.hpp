#pragma once

// Ranking tallies, Formula One scoring, Kendall tau and preference records.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "collage/core.hpp"

namespace collage {

/// Points for 1st, 2nd and 3rd place.
inline constexpr std::array<int, 3> kFormulaOnePoints{25, 18, 15};

/// counts[c][p] = number of times candidate c was placed at position p.
struct RankTally {
  std::vector<std::vector<int>> counts;

  static RankTally with_candidates(std::size_t n) { return {std::vector<std::vector<int>>(n, std::vector<int>(3, 0))}; }
  std::size_t size() const { return counts.size(); }

  void validate() const {
    for (const auto& c : counts) {
      if (c.size() > kFormulaOnePoints.size())
        throw ValidationError("tally has counts beyond position " + std::to_string(kFormulaOnePoints.size()));
      for (int v : c)
        if (v < 0) throw ValidationError("tally counts must be non-negative");
    }
  }
};

inline int f1_score(std::span<const int> counts) {
  if (counts.size() > kFormulaOnePoints.size())
    throw ValidationError("tally has counts beyond position " + std::to_string(kFormulaOnePoints.size()));
  int s = 0;
  for (std::size_t p = 0; p < counts.size(); ++p) {
    if (counts[p] < 0) throw ValidationError("tally counts must be non-negative");
    s += kFormulaOnePoints[p] * counts[p];
  }
  return s;
}

inline std::vector<int> f1_score(const RankTally& t) {
  t.validate();
  std::vector<int> out;
  out.reserve(t.size());
  for (const auto& c : t.counts) out.push_back(f1_score(c));
  return out;
}

/// Scores divided by their maximum.
inline std::vector<double> normalize_scores(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("no scores to normalize");
  for (double s : scores)
    if (!std::isfinite(s) || s < 0) throw ValidationError("scores must be finite and non-negative");
  const double mx = *std::max_element(scores.begin(), scores.end());
  if (mx == 0.0) throw ValidationError("all scores are zero");
  std::vector<double> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(s / mx);
  return out;
}

inline std::vector<double> normalize_scores(std::span<const int> scores) {
  std::vector<double> d(scores.begin(), scores.end());
  return normalize_scores(std::span<const double>(d));
}

/// Candidate indices sorted by decreasing value; ties keep the lower index first.
inline std::vector<int> order_by_value(std::span<const double> values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] > values[b]; });
  return order;
}

/// Rankings list elements best first. Both must be permutations of the same set.
inline double kendall_tau(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ValidationError("rankings have different lengths");
  std::map<int, int> pos_b;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (!pos_b.emplace(b[i], int(i)).second) throw ValidationError("ranking repeats an element");
  std::vector<int> rank(a.size());
  std::set<int> seen;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!seen.insert(a[i]).second) throw ValidationError("ranking repeats an element");
    auto it = pos_b.find(a[i]);
    if (it == pos_b.end()) throw ValidationError("rankings are over different element sets");
    rank[i] = it->second;
  }
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  long concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) (rank[i] < rank[j] ? concordant : discordant)++;
  return double(concordant - discordant) / double(n * (n - 1) / 2);
}

// ---------------------------------------------------------------------------
// Preference records

struct PreferenceRecord {
  std::string dataset;
  std::string round;
  std::vector<std::string> candidates;  // candidate ids presented
  std::string subject;
  std::vector<std::string> ranking;     // best first; empty for pairwise records
  std::optional<std::pair<std::string, std::string>> pair;  // (winner, loser)
  std::int64_t timestamp = 0;

  bool is_pairwise() const { return pair.has_value(); }

  void validate() const {
    if (subject.empty()) throw ValidationError("preference has no subject");
    if (candidates.size() < 2) throw ValidationError("preference needs at least two candidates");
    const std::set<std::string> pool(candidates.begin(), candidates.end());
    if (pool.size() != candidates.size()) throw ValidationError("duplicate candidate ids");
    if (is_pairwise()) {
      if (!ranking.empty()) throw ValidationError("record has both a ranking and a pair");
      const auto& [w, l] = *pair;
      if (w == l) throw ValidationError("pairwise choice needs two distinct candidates");
      if (!pool.count(w) || !pool.count(l)) throw ValidationError("pairwise choice references unknown candidate");
      return;
    }
    if (ranking.size() != candidates.size()) throw ValidationError("ranking is not a total order over the candidates");
    const std::set<std::string> ranked(ranking.begin(), ranking.end());
    if (ranked != pool) throw ValidationError("ranking is not a total order over the candidates");
  }
};

/// True if the pairwise choices contain a preference cycle.
inline bool has_cycle(const std::vector<std::pair<std::string, std::string>>& edges) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& [w, l] : edges) {
    adj[w].push_back(l);
    adj.try_emplace(l);
  }
  std::map<std::string, int> state;  // 0 new, 1 on stack, 2 done
  for (const auto& [start, _] : adj) {
    if (state[start]) continue;
    std::vector<std::pair<std::string, std::size_t>> stack{{start, 0}};
    state[start] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& out = adj[node];
      if (next == out.size()) {
        state[node] = 2;
        stack.pop_back();
        continue;
      }
      const std::string& to = out[next++];
      if (state[to] == 1) return true;
      if (state[to] == 0) {
        state[to] = 1;
        stack.emplace_back(to, 0);
      }
    }
  }
  return false;
}

/// Subjects whose pairwise choices within a round are circular.
inline std::set<std::pair<std::string, std::string>> circular_subjects(const std::vector<PreferenceRecord>& records) {
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<std::string, std::string>>> by_key;
  for (const auto& r : records)
    if (r.is_pairwise()) by_key[{r.round, r.subject}].push_back(*r.pair);
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& [key, edges] : by_key)
    if (has_cycle(edges)) out.insert(key);
  return out;
}

/// Tally over the given candidate ids. Full rankings count positions 1..3;
/// pairwise records count the winner first and the loser second. Subjects with
/// circular pairwise choices are excluded.
inline RankTally tally_records(const std::vector<PreferenceRecord>& records, const std::vector<std::string>& candidates) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < candidates.size(); ++i) index[candidates[i]] = int(i);
  const auto excluded = circular_subjects(records);
  RankTally t = RankTally::with_candidates(candidates.size());
  auto bump = [&](const std::string& id, int pos) {
    auto it = index.find(id);
    if (it == index.end()) throw ValidationError("preference references unknown candidate " + id);
    ++t.counts[it->second][pos];
  };
  for (const auto& r : records) {
    if (excluded.count({r.round, r.subject})) continue;
    if (r.is_pairwise()) {
      bump(r.pair->first, 0);
      bump(r.pair->second, 1);
      continue;
    }
    if (r.ranking.size() > kFormulaOnePoints.size())
      throw ValidationError("rankings beyond " + std::to_string(kFormulaOnePoints.size()) + " positions are not scored");
    for (std::size_t p = 0; p < r.ranking.size(); ++p) bump(r.ranking[p], int(p));
  }
  return t;
}

}  // namespace collage
