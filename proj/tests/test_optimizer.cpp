#include <gtest/gtest.h>

#include <random>

#include "collage/optimizer.hpp"
#include "support.hpp"

using namespace collage;

namespace {

const std::array<double, 10> kAllOnes{1, 1, 1, 1, 1, 1, 1, 1, 1, 1};

SearchSpec small_spec(Canvas canvas, std::vector<int> xs, std::vector<int> ys, std::vector<int> angles) {
  SearchSpec s;
  s.canvas = canvas;
  s.grid = 1;
  s.xs = std::move(xs);
  s.ys = std::move(ys);
  s.angles = std::move(angles);
  s.max_iterations = 50;
  return s;
}

/// Exhaustive maximum over every joint assignment of the search space.
double brute_force_max(const Dataset& ds, const WeightSet& w, const SearchSpec& spec) {
  const auto layers = assign_layers(ds.combined_maps(w.alphas));
  Evaluator ev(ds);
  const std::size_t k = spec.candidate_count();
  const int n = int(ds.size());
  std::vector<std::size_t> idx(n, 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    CollageConfiguration cfg{spec.canvas, {}};
    for (int i = 0; i < n; ++i) cfg.states.push_back(spec.candidate(idx[i], layers[i]));
    best = std::max(best, fitness(ev.evaluate(cfg, w.alphas), w.lambdas));
    int i = 0;
    while (i < n && ++idx[i] == k) idx[i++] = 0;
    if (i == n) break;
  }
  return best;
}

}  // namespace

TEST(SweepEvaluator, MatchesFullEvaluation) {
  std::mt19937_64 rng(71);
  for (int d = 0; d < 8; ++d) {
    testkit::SyntheticSpec ss;
    ss.n = 3 + d % 4;
    const auto ds = testkit::synthetic_dataset(700 + d, ss);
    const std::array<double, 3> a{0.4, 0.35, 0.25};
    SpriteBank bank(ds, ChannelSpec::combined(a));
    bank.prepare_all();
    const Canvas canvas{70, 60, 1};
    SweepEvaluator sweep(bank, canvas, kAllOnes);
    Evaluator full(ds);
    for (int t = 0; t < 6; ++t) {
      auto cfg = testkit::random_configuration(ds, canvas, rng);
      const int moving = std::uniform_int_distribution<int>(0, int(ds.size()) - 1)(rng);
      sweep.rebase(cfg, moving);
      auto scratch = sweep.make_scratch();
      for (int c = 0; c < 25; ++c) {
        const int span = 40;
        ImageState s{std::uniform_int_distribution<int>(-span, canvas.width)(rng),
                     std::uniform_int_distribution<int>(-span, canvas.height)(rng),
                     std::uniform_int_distribution<int>(0, 12)(rng), cfg.states[moving].layer};
        CriterionVector inc;
        const double f = sweep.evaluate(s, scratch, &inc);
        cfg.states[moving] = s;
        const auto ref = full.evaluate(cfg, a);
        for (int k = 0; k < 10; ++k) ASSERT_NEAR(inc[k], ref[k], 1e-9) << "criterion " << k + 1;
        EXPECT_NEAR(f, fitness(ref, kAllOnes), 1e-9);
      }
    }
  }
}

TEST(SweepEvaluator, PartialMaskMatchesMaskedFull) {
  std::mt19937_64 rng(73);
  const auto ds = testkit::synthetic_dataset(750);
  const WeightSet w = WeightSet::basic(MapKind::quality);
  SpriteBank bank(ds, ChannelSpec::combined(w.alphas));
  bank.prepare_all();
  const Canvas canvas{60, 60, 1};
  SweepEvaluator sweep(bank, canvas, w.lambdas);
  for (int t = 0; t < 10; ++t) {
    auto cfg = testkit::random_configuration(ds, canvas, rng);
    sweep.rebase(cfg, t % 4);
    auto scratch = sweep.make_scratch();
    for (int c = 0; c < 10; ++c) {
      ImageState s{std::uniform_int_distribution<int>(-20, 60)(rng), std::uniform_int_distribution<int>(-20, 60)(rng),
                   std::uniform_int_distribution<int>(0, 12)(rng), cfg.states[t % 4].layer};
      const double f = sweep.evaluate(s, scratch);
      cfg.states[t % 4] = s;
      EXPECT_NEAR(f, fitness(evaluate_all(cfg, ds, w.alphas), w.lambdas), 1e-9);
    }
  }
}

TEST(Optimize, SingleUniformImageGoesFullyOnCanvas) {
  const auto ds = testkit::uniform_dataset({{30, 30}});
  WeightSet w = WeightSet::basic(MapKind::saliency);
  w.lambdas[5] = 1.0;
  SearchSpec spec = SearchSpec::standard({100, 100, 1}, 10);
  spec.seed = 3;
  const auto res = optimize(ds, w, spec);
  const auto v = evaluate_all(res.config, ds, w.alphas);
  EXPECT_DOUBLE_EQ(v.c(1), 1.0);
  EXPECT_NEAR(res.fitness, brute_force_max(ds, w, spec), 1e-9);
}

TEST(Optimize, TwoImagesReducedSpaceAgainstBruteForce) {
  // Coordinate search either finds the global maximum or stops at a state where
  // no single image can improve on its own.
  int matched = 0;
  const int runs = 20;
  for (int seed = 0; seed < runs; ++seed) {
    testkit::SyntheticSpec ss;
    ss.n = 2;
    ss.min_side = 20;
    ss.max_side = 40;
    const auto ds = testkit::synthetic_dataset(800 + seed, ss);
    WeightSet w;
    w.lambdas = {1, 1, 1, 0.5, 0.5, 0.5, 0.5, -0.5, -0.5, 0.5};
    w.alphas = {0.5, 0.3, 0.2};
    SearchSpec spec = small_spec({80, 80, 1}, {0, 20, 40}, {0, 20, 40}, {4, 6, 8});
    spec.seed = seed;
    const auto res = optimize(ds, w, spec);
    const double best = brute_force_max(ds, w, spec);
    EXPECT_LE(res.fitness, best + 1e-9);
    for (std::size_t i = 1; i < res.trace.best_fitness.size(); ++i)
      EXPECT_GE(res.trace.best_fitness[i], res.trace.best_fitness[i - 1]);
    if (res.fitness >= best - 1e-9) {
      ++matched;
      continue;
    }
    Evaluator ev(ds);
    for (int i = 0; i < 2; ++i)
      for (std::size_t k = 0; k < spec.candidate_count(); ++k) {
        auto cfg = res.config;
        cfg.states[i] = spec.candidate(k, cfg.states[i].layer);
        EXPECT_LE(fitness(ev.evaluate(cfg, w.alphas), w.lambdas), res.fitness + 1e-9) << "seed " << seed;
      }
  }
  EXPECT_GT(matched, runs / 2);
}

TEST(Optimize, DeterministicAndThreadIndependent) {
  const auto ds = testkit::synthetic_dataset(900, {5, 20, 40, 0.5});
  WeightSet w;
  w.lambdas = {1, 1, -0.5, 0.3, 0.2, 0.4, 0.3, -0.3, -0.2, 0.1};
  w.alphas = {0.2, 0.5, 0.3};
  SearchSpec spec = SearchSpec::standard({100, 100, 1}, 20);
  spec.seed = 17;
  spec.max_iterations = 5;
  const auto a = optimize(ds, w, spec);
  const auto b = optimize(ds, w, spec);
  spec.threads = 3;
  const auto c = optimize(ds, w, spec);
  EXPECT_EQ(a.config, b.config);
  EXPECT_EQ(a.config, c.config);
  EXPECT_EQ(a.fitness, c.fitness);
  EXPECT_EQ(a.trace.best_fitness, c.trace.best_fitness);
}

TEST(Optimize, NeverWorseThanStartAndLayersFixed) {
  for (int seed = 0; seed < 5; ++seed) {
    const auto ds = testkit::synthetic_dataset(950 + seed, {4, 15, 35, 0.5});
    WeightSet w;
    w.lambdas = {1, 1, 1, 1, 1, 1, 1, -1, -1, 1};
    w.alphas = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    SearchSpec spec = SearchSpec::standard({90, 90, 1}, 15);
    spec.seed = seed;
    const auto layers = assign_layers(ds.combined_maps(w.alphas));
    const auto res = optimize(ds, w, spec);
    ASSERT_FALSE(res.trace.best_fitness.empty());
    EXPECT_GE(res.fitness, res.trace.best_fitness.front());
    EXPECT_EQ(res.fitness, res.trace.best_fitness.back());
    EXPECT_EQ(res.config.layers(), layers);
    for (const auto& s : res.config.states) EXPECT_TRUE(spec.contains(s));
    for (const auto& m : res.trace.moves) EXPECT_TRUE(spec.contains(m.to));
    // The starting point is the seeded random initialization.
    const auto init = random_init(spec, layers, spec.seed);
    EXPECT_NEAR(res.trace.best_fitness.front(), fitness(evaluate_all(init, ds, w.alphas), w.lambdas), 1e-9);
  }
}

TEST(Optimize, MultiStartKeepsBest) {
  const auto ds = testkit::synthetic_dataset(990, {3, 20, 40, 0.0});
  const WeightSet w = WeightSet::basic(MapKind::saliency);
  SearchSpec spec = SearchSpec::standard({80, 80, 1}, 20);
  spec.seed = 5;
  const auto single = optimize(ds, w, spec);
  spec.restarts = 3;
  const auto multi = optimize(ds, w, spec);
  EXPECT_GE(multi.fitness, single.fitness);
}
