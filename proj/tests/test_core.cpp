#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "collage/core.hpp"
#include "collage/optimizer.hpp"
#include "support.hpp"

using namespace collage;

namespace {

// Independent oracle: argmin over the 13 allowed angles, ties toward zero.
double nearest_allowed(double t) {
  double best = 0.0, best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kAngleCount; ++k) {
    const double a = (k - 6) * std::numbers::pi / 18.0;
    const double d = std::abs(a - t);
    if (d < best_d - 1e-12 || (std::abs(d - best_d) <= 1e-12 && std::abs(a) < std::abs(best))) {
      best = a;
      best_d = d;
    }
  }
  return best;
}

}  // namespace

TEST(Orientation, AllowedAngles) {
  EXPECT_EQ(angle_of(kZeroAngleIndex), 0.0);
  EXPECT_NEAR(angle_of(0), -std::numbers::pi / 3, 1e-15);
  EXPECT_NEAR(angle_of(12), std::numbers::pi / 3, 1e-15);
  EXPECT_DOUBLE_EQ(normalized_angle(0), -1.0);
  EXPECT_DOUBLE_EQ(normalized_angle(12), 1.0);
}

TEST(Orientation, QuantizeExamples) {
  EXPECT_EQ(quantize_orientation(0.0), 0.0);
  EXPECT_NEAR(quantize_orientation(0.20), std::numbers::pi / 18, 1e-12);
  EXPECT_NEAR(quantize_orientation(2.0), std::numbers::pi / 3, 1e-12);
  EXPECT_NEAR(quantize_orientation(-2.0), -std::numbers::pi / 3, 1e-12);
}

TEST(Orientation, TiesRoundTowardZero) {
  const double half = std::numbers::pi / 36;
  EXPECT_EQ(quantize_orientation_index(half), kZeroAngleIndex);
  EXPECT_EQ(quantize_orientation_index(-half), kZeroAngleIndex);
  EXPECT_EQ(quantize_orientation_index(3 * half), kZeroAngleIndex + 1);
  EXPECT_EQ(quantize_orientation_index(-3 * half), kZeroAngleIndex - 1);
}

TEST(Orientation, MatchesOracleOnRandomAngles) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 20000; ++i) {
    const double t = u(rng);
    EXPECT_NEAR(quantize_orientation(t), nearest_allowed(t), 1e-12) << t;
  }
}

TEST(Orientation, NonFiniteRejected) {
  EXPECT_THROW(quantize_orientation(std::numeric_limits<double>::quiet_NaN()), ValidationError);
  EXPECT_THROW(quantize_orientation(std::numeric_limits<double>::infinity()), ValidationError);
}

TEST(Configuration, LayerPermutation) {
  EXPECT_TRUE(is_permutation_of_indices(std::vector<int>{2, 0, 1}));
  EXPECT_FALSE(is_permutation_of_indices(std::vector<int>{0, 0, 1}));
  EXPECT_FALSE(is_permutation_of_indices(std::vector<int>{0, 3, 1}));
  EXPECT_EQ(top_down_order(std::vector<int>{2, 0, 1}), (std::vector<int>{1, 2, 0}));

  CollageConfiguration cfg;
  cfg.states = {{0, 0, 6, 0}, {0, 0, 6, 0}};
  EXPECT_THROW(validate_configuration(cfg), ValidationError);
  cfg.states[1].layer = 1;
  EXPECT_NO_THROW(validate_configuration(cfg));
  cfg.states[1].theta_index = 13;
  EXPECT_THROW(validate_configuration(cfg), ValidationError);
}

TEST(Weights, BasicAndValidation) {
  const auto w = WeightSet::basic(MapKind::harmony);
  EXPECT_EQ(w.alphas, (std::array<double, 3>{0, 0, 1}));
  EXPECT_EQ(w.lambdas[0], 1.0);
  EXPECT_EQ(w.lambdas[3], 0.0);
  EXPECT_NO_THROW(w.validate());

  WeightSet bad = w;
  bad.alphas = {0.5, 0.6, 0.0};
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = w;
  bad.lambdas[4] = 10.5;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad.lambdas[4] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Layers, AssignBySortedIntegrals) {
  std::vector<ImportanceMap> maps;
  for (double v : {5.0, 9.0, 1.0}) maps.emplace_back(1, 1, MapKind::combined, v);
  EXPECT_EQ(assign_layers(maps), (std::vector<int>{1, 0, 2}));

  std::vector<ImportanceMap> equal(4, ImportanceMap(2, 2, MapKind::combined, 0.5));
  EXPECT_EQ(assign_layers(equal), (std::vector<int>{0, 1, 2, 3}));
}

TEST(Layers, MatchesOracleSortOnRandomMaps) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ImportanceMap> maps;
    std::vector<std::pair<double, int>> keyed;
    for (int i = 0; i < 14; ++i) {
      maps.push_back(testkit::random_map(10 + i, 12, MapKind::combined, rng));
      double s = 0.0;
      for (double v : maps.back().values.data) s += v;
      keyed.push_back({-s, i});
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<int> expected(14);
    for (int rank = 0; rank < 14; ++rank) expected[keyed[rank].second] = rank;
    EXPECT_EQ(assign_layers(maps), expected);
  }
}

TEST(SearchSpecTest, StandardGrid) {
  const auto s = SearchSpec::standard();
  EXPECT_EQ(s.xs.front(), -100);
  EXPECT_EQ(s.xs.back(), 400);
  EXPECT_EQ(s.xs.size(), 11u);
  EXPECT_EQ(s.angles.size(), 13u);
  EXPECT_EQ(s.candidate_count(), 11u * 11u * 13u);
  EXPECT_THROW(SearchSpec::standard(Canvas{}, 0), ValidationError);

  SearchSpec bad = s;
  bad.max_iterations = 0;
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(RandomInit, DeterministicAndOnGrid) {
  const auto spec = SearchSpec::standard();
  const std::vector<int> layers{2, 0, 1, 3};
  const auto a = random_init(spec, layers, 42);
  const auto b = random_init(spec, layers, 42);
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    EXPECT_TRUE(spec.contains(a.states[i]));
    EXPECT_EQ(a.states[i].layer, layers[i]);
  }
}

TEST(RandomInit, SeedsDiffer) {
  const auto spec = SearchSpec::standard();
  const std::vector<int> layers{0, 1, 2, 3, 4};
  int differ = 0;
  for (std::uint64_t s = 0; s < 100; ++s)
    differ += random_init(spec, layers, 2 * s + 1000) != random_init(spec, layers, 2 * s + 1001);
  EXPECT_GE(differ, 99);
}
