#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "localtime/path.hpp"

using namespace loctime;

namespace {

SampledCadlagPath grid_path(std::vector<double> values, std::vector<JumpMark> marks = {}) {
  std::vector<double> t(values.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i) / static_cast<double>(t.size() - 1);
  return SampledCadlagPath(t, std::move(values), std::move(marks));
}

SampledCadlagPath random_path(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0, 0.1);
  std::bernoulli_distribution jump(0.05);
  std::vector<double> v{0.0};
  std::vector<JumpMark> marks;
  for (std::size_t i = 1; i < n; ++i) {
    if (jump(rng)) {
      marks.push_back({i, v.back()});
      v.push_back(v.back() + 5 * N(rng));
    } else {
      v.push_back(v.back() + N(rng));
    }
  }
  return grid_path(v, marks);
}

}  // namespace

TEST(SampledCadlagPath, Validation) {
  EXPECT_THROW(SampledCadlagPath({0.0}, {1.0}), std::invalid_argument);
  EXPECT_THROW(SampledCadlagPath({0.0, 1.0}, {1.0}), std::invalid_argument);
  EXPECT_THROW(SampledCadlagPath({0.0, 0.5, 0.5}, {1, 2, 3}), std::invalid_argument);
  EXPECT_THROW(SampledCadlagPath({0.1, 0.5}, {1, 2}), std::invalid_argument);
  EXPECT_THROW(SampledCadlagPath({0.0, 0.5}, {1, 2}, {{0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(SampledCadlagPath({0.0, 0.5}, {1, 2}, {{1, 1.5}}), std::invalid_argument);
  EXPECT_THROW(SampledCadlagPath({0.0, 0.5, 1}, {1, 2, 3}, {{1, 1.0}, {1, 1.0}}), std::invalid_argument);
  EXPECT_NO_THROW(SampledCadlagPath({0.0, 0.5}, {1, 2}, {{1, 1.0}}));
}

TEST(Restrict, IdentityAtHorizon) {
  auto p = random_path(1, 50);
  EXPECT_EQ(restrict(p, 1.0), p);
}

TEST(Restrict, JumpConventions) {
  auto p = grid_path({0, 0, 1, 1, 1}, {{2, 0.0}});  // jump at t = 0.5
  EXPECT_TRUE(restrict(p, 0.4).jumps().empty());
  auto r = restrict(p, 0.5);
  ASSERT_EQ(r.jumps().size(), 1u);
  EXPECT_DOUBLE_EQ(jump_sizes(r)[0].size, 1.0);
  EXPECT_DOUBLE_EQ(r.horizon(), 0.5);
}

TEST(Restrict, OffGridTimeRepeatsLastValue) {
  auto p = grid_path({0, 1, 2, 3, 4});
  auto r = restrict(p, 0.6);
  EXPECT_DOUBLE_EQ(r.horizon(), 0.6);
  EXPECT_DOUBLE_EQ(r.values().back(), 2.0);
  EXPECT_THROW(restrict(p, 0.0), std::domain_error);
  EXPECT_THROW(restrict(p, 1.5), std::domain_error);
}

TEST(Restrict, Composes) {
  auto p = random_path(3, 101);
  for (double t : {0.9, 0.55, 0.333})
    for (double s : {0.05, 0.2, 0.33, 0.333})
      if (s <= t) {
        EXPECT_EQ(restrict(restrict(p, t), s), restrict(p, s)) << t << " " << s;
      }
}

TEST(JumpSizes, SumOfSquaresIsJumpVariation) {
  auto p = grid_path({0, 1, 1, -1}, {{1, 0.0}, {3, 1.0}});
  auto j = jump_sizes(p);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_DOUBLE_EQ(j[0].size, 1.0);
  EXPECT_DOUBLE_EQ(j[1].size, -2.0);
  EXPECT_DOUBLE_EQ(jump_quadratic_variation(p), 5.0);
  EXPECT_TRUE(jump_sizes(grid_path({0, 1})).empty());
  EXPECT_DOUBLE_EQ(j[0].time, 1.0 / 3.0);
}

TEST(TotalVariation, Examples) {
  EXPECT_DOUBLE_EQ(total_variation(grid_path({2, 2, 2})), 0.0);
  EXPECT_DOUBLE_EQ(total_variation(grid_path({0, 0.25, 0.5, 0.75, 1})), 1.0);
  EXPECT_DOUBLE_EQ(total_variation(grid_path({0, 1, 0, 1})), 3.0);
}

// Oracle: the largest sum over all sub-partitions of the skeleton (2^(n-2) subsets).
TEST(TotalVariation, EqualsSupOverSubpartitions) {
  auto p = random_path(9, 12);
  double best = 0.0;
  std::size_t inner = p.size() - 2;
  for (std::size_t mask = 0; mask < (std::size_t{1} << inner); ++mask) {
    double s = 0.0, prev = p.value(0);
    for (std::size_t i = 1; i < p.size(); ++i) {
      if (i < p.size() - 1 && !(mask >> (i - 1) & 1)) continue;
      s += std::abs(p.value(i) - prev);
      prev = p.value(i);
    }
    best = std::max(best, s);
  }
  EXPECT_NEAR(total_variation(p), best, 1e-12);
}

TEST(PathProperties, VariationBoundsAndQuadraticSplit) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto p = random_path(seed, 80);
    EXPECT_GE(total_variation(p), std::abs(p.values().back() - p.values().front()));
    double all = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) all += std::pow(p.value(i) - p.value(i - 1), 2);
    EXPECT_NEAR(continuous_quadratic_variation(p) + jump_quadratic_variation(p), all, 1e-12);
  }
}

TEST(Csv, RoundTripIsBitExact) {
  auto p = random_path(4, 64);
  std::stringstream ss;
  write_csv(p, ss);
  auto q = read_csv(ss);
  EXPECT_EQ(p, q);
  std::stringstream again;
  write_csv(q, again);
  std::stringstream first;
  write_csv(p, first);
  EXPECT_EQ(first.str(), again.str());
}

TEST(Csv, Errors) {
  std::stringstream empty;
  EXPECT_THROW(read_csv(empty), std::invalid_argument);
  std::stringstream header_only("t,x,jump,pre_x\n");
  EXPECT_THROW(read_csv(header_only), std::invalid_argument);
  std::stringstream bad_pre("t,x,jump,pre_x\n0,0,0,\n0.5,1,1,0.5\n");
  EXPECT_THROW(read_csv(bad_pre), std::invalid_argument);
  std::stringstream missing_pre("t,x,jump,pre_x\n0,0,0,\n0.5,1,1,\n");
  EXPECT_THROW(read_csv(missing_pre), std::invalid_argument);
  std::stringstream non_monotone("t,x,jump,pre_x\n0,0,0,\n0.5,1,0,\n0.4,1,0,\n");
  EXPECT_THROW(read_csv(non_monotone), std::invalid_argument);
  std::stringstream first_jump("t,x,jump,pre_x\n0,0,1,0\n0.5,1,0,\n");
  EXPECT_THROW(read_csv(first_jump), std::invalid_argument);
  std::stringstream garbage("t,x,jump,pre_x\n0,abc,0,\n1,1,0,\n");
  EXPECT_THROW(read_csv(garbage), std::invalid_argument);
  std::stringstream ok("t,x,jump,pre_x\n0,0,0,\n0.5,1,1,0\n1,1.5,0,\n");
  auto p = read_csv(ok);
  ASSERT_EQ(p.jumps().size(), 1u);
  EXPECT_EQ(p.jumps()[0].index, 1u);
}

TEST(PartitionScheme, DyadicRefinesAndMeshShrinks) {
  auto p = random_path(2, 1025);
  auto s = PartitionScheme::dyadic(p, {2, 4, 6, 8, 10});
  EXPECT_TRUE(s.refining());
  EXPECT_TRUE(s.mesh_ok(p, 1.0 / 1000));
  EXPECT_EQ(s.level(4).size(), 1025u);
  EXPECT_EQ(s.level(0), (Partition{0, 256, 512, 768, 1024}));
  // grids that are not a power of two still refine
  auto q = random_path(2, 301);
  auto sq = PartitionScheme::dyadic(q, {1, 3, 5, 9});
  EXPECT_TRUE(sq.refining());
  EXPECT_EQ(sq.level(3).size(), 301u);
}

TEST(PartitionScheme, JumpsAndExplicitLists) {
  auto p = random_path(7, 200);
  ASSERT_FALSE(p.jumps().empty());
  EXPECT_FALSE(PartitionScheme::dyadic(p, {2, 3}).exhausts_jumps());
  auto s = PartitionScheme::dyadic(p, {2, 3}, true);
  EXPECT_TRUE(s.exhausts_jumps());
  EXPECT_TRUE(s.refining());
  auto u = PartitionScheme::uniform(p, {3, 7});
  EXPECT_FALSE(u.refining());
  auto e = PartitionScheme::explicit_times(p, {{0.0, p.times()[100], p.horizon()}});
  EXPECT_EQ(e.level(0), (Partition{0, 100, 199}));
  EXPECT_THROW(PartitionScheme::explicit_times(p, {{0.0, 0.123456, p.horizon()}}), std::invalid_argument);
  EXPECT_THROW(PartitionScheme::explicit_times(p, {{0.0, p.times()[10]}}), std::invalid_argument);
}

TEST(ClipPartition, EndsAtTheCutoff) {
  auto p = grid_path({0, 1, 2, 3, 4, 5, 6, 7, 8});
  Partition part{0, 4, 8};
  EXPECT_EQ(clip_partition(p, part, 0.5), (Partition{0, 4}));
  EXPECT_EQ(clip_partition(p, part, 0.3), (Partition{0, 2}));
  EXPECT_EQ(clip_partition(p, part, 1.0), part);
}
