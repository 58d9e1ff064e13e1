#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "diffdp/error.hpp"
#include "diffdp/estimation.hpp"
#include "diffdp/mixture.hpp"

using namespace diffdp;

namespace {

PosteriorDraws random_draws(std::size_t n_draws, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  CenteringMeasure g;
  g.precision_scale = 0.1;
  const auto cfg = StickConfig::dirichlet(1.0, 0.5);
  PosteriorDraws out;
  out.times = {0.0, 1.0, 2.0};
  for (std::size_t d = 0; d < n_draws; ++d) {
    auto s = sample_marginal<KernelParam>(cfg, [&](Rng& r) { return g.sample(r); }, 1e-3, rng);
    auto path = s;
    path.times = out.times;
    for (std::size_t j = 0; j < s.sticks.size(); ++j) {
      double v = s.sticks[j][0];
      path.sticks[j] = {v};
      for (int i = 1; i < 3; ++i) {
        v = sample_transition(v, 1.0, cfg.params(j + 1), rng);
        path.sticks[j].push_back(v);
      }
    }
    out.draws.push_back({d, 1.0, 0.5, path});
  }
  return out;
}

std::vector<double> normal_trace(std::size_t n, double shift, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = shift + sample_normal(rng, 0.0, 1.0);
  return x;
}

}  // namespace

TEST(HistogramMode, PeakedSample) {
  Rng rng = make_rng(1);
  std::vector<double> x;
  for (int i = 0; i < 5000; ++i) x.push_back(sample_normal(rng, 2.0, 0.1));
  for (int i = 0; i < 2000; ++i) x.push_back(sample_uniform(rng) * 10.0 - 5.0);
  EXPECT_NEAR(histogram_mode(x), 2.0, 0.05);
  EXPECT_DOUBLE_EQ(histogram_mode(std::vector<double>{3.0, 3.0}), 3.0);
  EXPECT_THROW(histogram_mode(std::vector<double>{}), DomainError);
}

TEST(HistogramMode, RunWidthIsTheNarrowest) {
  // 4 equal bins on [0, 4]; the dense bin [3, 4) holds half the values.
  const std::vector<double> x{0.0, 1.5, 2.5, 3.2, 3.4, 3.6, 4.0, 0.5};
  EXPECT_DOUBLE_EQ(histogram_mode(x, 4, 0.5), 3.5);
}

TEST(Summarize, SingleDrawIsDegenerate) {
  const auto draws = random_draws(1, 2);
  const std::vector<double> grid{-2.0, 0.0, 1.5};
  const auto s = summarize(draws, grid);
  ASSERT_EQ(s.cells.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const double mf = mean_functional(draws.draws[0].measure, i);
    EXPECT_DOUBLE_EQ(s.mean_functional[i].q025, mf);
    EXPECT_DOUBLE_EQ(s.mean_functional[i].q975, mf);
    EXPECT_NEAR(s.mean_functional[i].mode, mf, 1e-12);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double f = density_eval(draws.draws[0].measure, i, grid[k]);
      EXPECT_NEAR(s.cells[i][k].q025, f, 1e-14);
      EXPECT_NEAR(s.cells[i][k].q50, f, 1e-14);
      EXPECT_NEAR(s.cells[i][k].q975, f, 1e-14);
      EXPECT_NEAR(s.cells[i][k].mean, f, 1e-14);
    }
  }
}

TEST(Summarize, QuantilesOrderedAndMatchDirectEvaluation) {
  const auto draws = random_draws(200, 3);
  std::vector<double> grid;
  for (int k = -20; k <= 20; ++k) grid.push_back(0.5 * k);
  const auto s = summarize(draws, grid);
  EXPECT_EQ(s.num_draws, 200u);
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const auto& mf = s.mean_functional[i];
    EXPECT_LE(mf.q025, mf.q50);
    EXPECT_LE(mf.q50, mf.q975);
    std::vector<double> means;
    for (const auto& d : draws.draws) means.push_back(mean_functional(d.measure, i));
    double avg = 0.0;
    for (double m : means) avg += m / means.size();
    EXPECT_NEAR(mf.mean, avg, 1e-10);
    for (const auto& c : s.cells[i]) {
      EXPECT_GE(c.q025, 0.0);
      EXPECT_LE(c.q025, c.q50);
      EXPECT_LE(c.q50, c.q975);
    }
  }
  EXPECT_THROW(summarize(PosteriorDraws{}, grid), DomainError);
  EXPECT_THROW(summarize(draws, std::vector<double>{}), DomainError);
}

TEST(GelmanRubin, IidChainsNearOne) {
  const double r = gelman_rubin({normal_trace(10000, 0.0, 4), normal_trace(10000, 0.0, 5)});
  EXPECT_GE(r, 1.0);
  EXPECT_LE(r, 1.1);
}

TEST(GelmanRubin, DisjointChainsLarge) {
  EXPECT_GT(gelman_rubin({normal_trace(1000, 0.0, 6), normal_trace(1000, 50.0, 7)}), 10.0);
}

TEST(GelmanRubin, Errors) {
  const std::vector<double> flat(100, 1.0);
  EXPECT_THROW(gelman_rubin({flat, flat}), DomainError);
  EXPECT_THROW(gelman_rubin({normal_trace(100, 0.0, 1)}), DomainError);
  EXPECT_THROW(gelman_rubin({normal_trace(100, 0.0, 1), normal_trace(90, 0.0, 2)}), DomainError);
  EXPECT_THROW(gelman_rubin({normal_trace(5, 0.0, 1), normal_trace(5, 0.0, 2)}), DomainError);
}

TEST(EffectiveSampleSize, IidTrace) {
  const auto x = normal_trace(10000, 0.0, 8);
  const double ess = effective_sample_size(x);
  EXPECT_GE(ess, 8000.0);
  EXPECT_LE(ess, 10000.0);
}

TEST(EffectiveSampleSize, Ar1ClosedForm) {
  Rng rng = make_rng(9);
  const double rho = 0.5;
  const std::size_t n = 100000;
  std::vector<double> x(n);
  x[0] = sample_normal(rng, 0.0, 1.0);
  for (std::size_t t = 1; t < n; ++t) x[t] = rho * x[t - 1] + std::sqrt(1 - rho * rho) * sample_normal(rng, 0.0, 1.0);
  const double expect = n * (1 - rho) / (1 + rho);
  EXPECT_NEAR(effective_sample_size(x), expect, 0.2 * expect);
}

TEST(EffectiveSampleSize, Degenerate) {
  std::vector<double> x(50, 2.0);
  EXPECT_THROW(effective_sample_size(x), DomainError);
  // A level shift halfway: every lag is strongly correlated.
  for (std::size_t t = 25; t < x.size(); ++t) x[t] = 3.0;
  EXPECT_LT(effective_sample_size(x), 5.0);
  EXPECT_THROW(effective_sample_size(std::vector<double>{1, 2, 3}), DomainError);
}

TEST(Coverage, CountsBandHits) {
  DensitySurface s;
  s.times = {0.0, 1.0};
  s.y_grid = {0.0, 1.0};
  s.cells = {{{0.1, 0.2, 0.3, 0.2}, {0.1, 0.2, 0.3, 0.2}}, {{0.1, 0.2, 0.3, 0.2}, {0.5, 0.6, 0.7, 0.6}}};
  s.mean_functional = {{0.0, 0.0, -1.0, 0.0, 1.0}, {2.0, 2.0, 1.5, 2.0, 2.5}};
  const auto rep = coverage_report(
      s, [](double t) { return t == 0.0 ? 0.5 : 3.0; }, [](double, double) { return 0.25; });
  EXPECT_DOUBLE_EQ(rep.mean_coverage, 0.5);
  EXPECT_DOUBLE_EQ(rep.density_coverage, 0.75);
  EXPECT_EQ(rep.num_cells, 4u);
  EXPECT_NEAR(mean_functional_rmse(s, [](double) { return 1.0; }), std::sqrt((1.0 + 1.0) / 2.0), 1e-15);
  const std::vector<double> wrong_times{0.0, 2.0}, means{0.0, 0.0};
  EXPECT_THROW(coverage_report(s, wrong_times, means, {{0.0, 0.0}, {0.0, 0.0}}), DomainError);
  EXPECT_THROW(coverage_report(s, s.times, means, {{0.0}, {0.0}}), DomainError);
}

TEST(Export, CsvAndJsonShapes) {
  const auto draws = random_draws(20, 10);
  const std::vector<double> grid{-1.0, 0.0, 1.0, 2.0};
  const auto s = summarize(draws, grid);
  std::ostringstream surf, mf;
  write_surface_csv(surf, s);
  write_mean_functional_csv(mf, s);
  std::istringstream a(surf.str()), b(mf.str());
  std::string line;
  std::getline(a, line);
  EXPECT_EQ(line, "t,y,q025,q50,q975,mean");
  int rows = 0;
  while (std::getline(a, line)) ++rows;
  EXPECT_EQ(rows, 12);
  std::getline(b, line);
  EXPECT_EQ(line, "t,mode,mean,lo,hi");
  rows = 0;
  while (std::getline(b, line)) ++rows;
  EXPECT_EQ(rows, 3);
  const auto j = surface_to_json(s);
  EXPECT_EQ(j.at("cells").size(), 3u);
  EXPECT_EQ(j.at("cells")[0].size(), 4u);
  EXPECT_EQ(j.at("num_draws").get<std::size_t>(), 20u);
}
