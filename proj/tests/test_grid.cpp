#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "localtime/grid.hpp"

using namespace loctime;

TEST(LevelGrid, CoveringIsAlignedAndBrackets) {
  auto g = LevelGrid::covering(-0.37, 1.21, 0.125, 0.2);
  EXPECT_LE(g.u_min, -0.37 - 0.2);
  EXPECT_GE(g.u_max(), 1.21 + 0.2);
  EXPECT_DOUBLE_EQ(g.u_min / 0.125, std::round(g.u_min / 0.125));
  EXPECT_THROW(LevelGrid::covering(0, 1, 0.0, 0.1), std::invalid_argument);
  EXPECT_THROW(LevelGrid::covering(0, 1, 0.1, -1.0), std::invalid_argument);
}

TEST(LevelGrid, CellOfMatchesEdges) {
  auto g = LevelGrid::covering(-1, 1, 0.1, 0.0);
  for (std::size_t k = 0; k < g.cells; ++k) {
    EXPECT_EQ(g.cell_of(g.edge(k)), k);
    EXPECT_EQ(g.cell_of(g.center(k)), k);
  }
  EXPECT_EQ(g.cell_of(-100.0), 0u);
  EXPECT_EQ(g.cell_of(100.0), g.cells - 1);
}

// Oracle: fine midpoint sum of the piecewise-linear function over each cell.
TEST(CellAverageAccumulator, MatchesBruteForceAverages) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.3, 1.3);
  auto g = LevelGrid::covering(-1, 1, 0.07, 0.1);
  CellAverageAccumulator acc(g);
  struct Piece {
    double lo, hi, a, b;
  };
  std::vector<Piece> pieces;
  for (int i = 0; i < 40; ++i) {
    double x = U(rng), y = U(rng);
    Piece p{std::min(x, y), std::max(x, y), U(rng), U(rng)};
    pieces.push_back(p);
    acc.add(p.lo, p.hi, p.a, p.b);
  }
  // pieces ending exactly on cell edges
  pieces.push_back({g.edge(3), g.edge(9), 0.5, -0.25});
  acc.add(g.edge(3), g.edge(9), 0.5, -0.25);
  pieces.push_back({g.edge(4), g.edge(5), 1.0, 0.0});
  acc.add(g.edge(4), g.edge(5), 1.0, 0.0);
  auto f = acc.finish();
  const int sub = 20000;
  for (std::size_t k = 0; k < g.cells; ++k) {
    double s = 0.0;
    for (int m = 0; m < sub; ++m) {
      double u = g.edge(k) + (m + 0.5) * g.du / sub;
      for (const auto& p : pieces)
        if (u >= p.lo && u < p.hi) s += p.a + p.b * u;
    }
    EXPECT_NEAR(f[k], s / sub, 2e-3) << "cell " << k;
  }
}

TEST(CellAverageAccumulator, IntegralIsExact) {
  auto g = LevelGrid::covering(0, 1, 0.1, 0.05);
  CellAverageAccumulator acc(g);
  acc.add(0.013, 0.917, 2.0, -1.0);
  double exact = 2.0 * (0.917 - 0.013) - 0.5 * (0.917 * 0.917 - 0.013 * 0.013);
  EXPECT_NEAR(acc.finish().integral(), exact, 1e-14);
}

TEST(CenterRangeAccumulator, MatchesPerLevelLoop) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1, 1);
  auto g = LevelGrid::covering(-1, 1, 0.01, 0.0);
  CenterRangeAccumulator acc(g);
  std::vector<double> brute(g.cells, 0.0);
  for (int i = 0; i < 200; ++i) {
    double x = U(rng), e = 0.3 * std::abs(U(rng));
    double v = U(rng);
    acc.add(v, [&](double c) { return c < x && !(x - c <= e); }, [&](double c) { return std::abs(x - c) <= e; });
    for (std::size_t k = 0; k < g.cells; ++k)
      if (std::abs(x - g.center(k)) <= e) brute[k] += v;
  }
  auto f = acc.finish();
  for (std::size_t k = 0; k < g.cells; ++k) EXPECT_NEAR(f[k], brute[k], 1e-12);
}

TEST(LevelFunction, NormsAndIntegrateOver) {
  auto g = LevelGrid::covering(0, 1, 0.25, 0.0);
  LevelFunction f(g);
  f.values = {1, -2, 3, 0};
  EXPECT_DOUBLE_EQ(f.integral(), 0.5);
  EXPECT_DOUBLE_EQ(f.lp_norm(1), 1.5);
  EXPECT_DOUBLE_EQ(f.sup(), 3.0);
  EXPECT_DOUBLE_EQ(f.integrate_over(0.125, 0.375), 1 * 0.125 - 2 * 0.125);
  EXPECT_DOUBLE_EQ(f.integrate_over(-5, 5), 0.5);
  LevelFunction h(LevelGrid::covering(0, 2, 0.25, 0.0));
  EXPECT_THROW(require_same_grid(f, h, "test"), std::invalid_argument);
}

TEST(LocalTimeField, RejectsMixedGrids) {
  LocalTimeField field;
  field.push(0.5, LevelFunction(LevelGrid::covering(0, 1, 0.1, 0)));
  EXPECT_THROW(field.push(1.0, LevelFunction(LevelGrid::covering(0, 2, 0.1, 0))), std::invalid_argument);
}
