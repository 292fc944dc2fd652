#include <gtest/gtest.h>

#include "collage/learning.hpp"
#include "support.hpp"

using namespace collage;

namespace {

/// Candidates differing only in C'1 (fixed full visibility ratios).
CandidateFeatures visibility_only(double ratio) {
  CandidateFeatures f;
  f.visible = {{ratio, ratio, ratio}};
  f.reference = {{1.0, 1.0, 1.0}};
  f.fixed.values.fill(0.0);
  return f;
}

}  // namespace

TEST(Objective, PerfectOrdersWithoutPenalty) {
  WeightSet w;
  w.lambdas = {2, 1, -0.5, 1, 1, 1, 1, -0.5, -0.5, 1};
  w.alphas = {0.5, 0.3, 0.2};
  const auto data = testkit::synthetic_training(w, 5, 6, 3);
  const auto b = learning_objective(w, data, 0.0);
  EXPECT_DOUBLE_EQ(b.tau_sum, 6.0);
  EXPECT_DOUBLE_EQ(b.objective, 6.0);
  EXPECT_NEAR(b.penalty, 0.0, 1e-12);
  EXPECT_NEAR(learning_objective(w, data, 1.0).objective, 6.0, 1e-12);
}

TEST(Objective, TauTermIsScaleInvariant) {
  WeightSet truth;
  truth.lambdas = {1, 1, -1, 1, 1, 1, 1, -1, -1, 1};
  const auto data = testkit::synthetic_training(truth, 9, 10, 4);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    WeightSet w;
    for (auto& l : w.lambdas) l = u(rng);
    WeightSet scaled = w;
    for (auto& l : scaled.lambdas) l *= 3.7;
    const auto a = learning_objective(w, data, 1.0), b = learning_objective(scaled, data, 1.0);
    EXPECT_DOUBLE_EQ(a.tau_sum, b.tau_sum);
    EXPECT_NEAR(a.penalty, b.penalty, 1e-9);
  }
}

TEST(Objective, ZeroTopFitnessCountsEachTermAsOne) {
  const std::vector<double> f{0.0, 0.0, 0.0};
  const std::vector<double> s{3.0, 2.0, 1.0};
  EXPECT_DOUBLE_EQ(ratio_penalty(f, s), 2.0);
  const std::vector<double> g{2.0, 1.0, 0.5};
  EXPECT_NEAR(ratio_penalty(g, s), std::abs(0.5 - 2.0 / 3) + std::abs(0.25 - 1.0 / 3), 1e-15);
}

TEST(Learn, SeparableVisibilityInstance) {
  std::vector<TrainingItem> data;
  for (int d = 0; d < 4; ++d) {
    TrainingItem item;
    item.name = "d" + std::to_string(d);
    for (double r : {0.9 - 0.1 * d, 0.6 - 0.1 * d, 0.3}) {
      item.candidates.push_back(visibility_only(r));
      item.scores.push_back(r);
    }
    data.push_back(std::move(item));
  }
  LearnSpec spec;
  spec.restarts = 3;
  const auto res = learn_weights(data, spec);
  EXPECT_GT(res.weights.lambdas[0], 0.0);
  EXPECT_DOUBLE_EQ(res.breakdown.tau_sum, 4.0);
}

TEST(Learn, RespectsConstraintsAndIsDeterministic) {
  WeightSet truth;
  truth.lambdas = {2, 1, -0.5, 1, 1, 1, 1, -0.5, -0.5, 1};
  truth.alphas = {0.6, 0.1, 0.3};
  const auto data = testkit::synthetic_training(truth, 21, 8, 3);
  LearnSpec spec;
  spec.restarts = 3;
  spec.lambda_bound = 1.5;
  spec.max_evaluations = 20000;
  const auto a = learn_weights(data, spec);
  const auto b = learn_weights(data, spec);
  EXPECT_EQ(a.weights.lambdas, b.weights.lambdas);
  EXPECT_EQ(a.weights.alphas, b.weights.alphas);
  EXPECT_LE(a.evaluations, spec.max_evaluations + 2 * 13);
  for (double l : a.weights.lambdas) EXPECT_LE(std::abs(l), spec.lambda_bound);
  double s = 0.0;
  for (double al : a.weights.alphas) {
    EXPECT_GE(al, 0.0);
    s += al;
  }
  EXPECT_NEAR(s, 1.0, 1e-12);
  // The start point of restart 0 is a lower bound on the result.
  WeightSet start;
  start.lambdas.fill(1.0);
  EXPECT_GE(a.breakdown.objective, learning_objective(start, data, spec.eta).objective);
}

TEST(Learn, FixedAlphasStayAtStart) {
  WeightSet truth;
  truth.lambdas = {1, 1, -1, 1, 1, 1, 1, -1, -1, 1};
  const auto data = testkit::synthetic_training(truth, 31, 5, 3);
  LearnSpec spec;
  spec.restarts = 2;
  spec.learn_alphas = false;
  spec.start_alphas = {0.2, 0.3, 0.5};
  const auto res = learn_weights(data, spec);
  EXPECT_NEAR(res.weights.alphas[0], 0.2, 1e-15);
  EXPECT_NEAR(res.weights.alphas[1], 0.3, 1e-15);
  EXPECT_NEAR(res.weights.alphas[2], 0.5, 1e-15);
}

TEST(Learn, RejectsEmptyOrInvalidData) {
  EXPECT_THROW(learn_weights({}, LearnSpec{}), ValidationError);
  TrainingItem one{"x", {visibility_only(0.5)}, {1.0}};
  EXPECT_THROW(learn_weights({one}, LearnSpec{}), ValidationError);
  TrainingItem zeros{"z", {visibility_only(0.5), visibility_only(0.4)}, {0.0, 0.0}};
  EXPECT_THROW(learn_weights({zeros}, LearnSpec{}), ValidationError);
  LearnSpec bad;
  bad.eta = -1;
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Learn, FromTallyUsesFormulaOneScores) {
  const RankTally t{{{9, 3, 4}, {5, 6, 5}, {2, 7, 7}}};
  const auto item = TrainingItem::from_tally("Burst", {visibility_only(0.9), visibility_only(0.5), visibility_only(0.2)}, t);
  EXPECT_EQ(item.scores, (std::vector<double>{339, 308, 281}));
  EXPECT_EQ(item.user_order(), (std::vector<int>{0, 1, 2}));
}

TEST(Signs, Report) {
  WeightSet w;
  w.lambdas = {1, 2, -1, 0.5, 0.1, 3, 1, -2, -0.1, 0.2};
  auto r = sign_report(w);
  EXPECT_TRUE(r.all_match());

  w.lambdas.fill(0.0);
  r = sign_report(w);
  EXPECT_EQ(r.mismatches.size(), 10u);
  for (int s : r.signs) EXPECT_EQ(sign_symbol(s), "0/inert");

  w.lambdas = {1, 2, 1, 0.5, 0.1, 3, 1, -2, 0.1, 0.2};
  r = sign_report(w);
  EXPECT_EQ(r.mismatches, (std::vector<int>{3, 9}));
  EXPECT_EQ(sign_symbol(r.signs[2]), "+");
  EXPECT_EQ(sign_symbol(r.signs[7]), "-");
}
