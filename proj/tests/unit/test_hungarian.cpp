#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "wma/error.hpp"
#include "wma/hungarian.hpp"

namespace wma {
namespace {

TEST(Assignment, OneByOne) {
  const Matching m = solve_assignment(CostMatrix{{0.0}});
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_EQ(m.pairs[0], (MatchedPair{0, 0, 0.0}));
}

TEST(Assignment, TwoByTwo) {
  const Matching m = solve_assignment(CostMatrix{{1, 2}, {3, 1}});
  ASSERT_EQ(m.pairs.size(), 2u);
  EXPECT_EQ(m.pairs[0].new_index, 0u);
  EXPECT_EQ(m.pairs[1].new_index, 1u);
  EXPECT_EQ(m.total_cost(), 2.0);
}

TEST(Assignment, ThreeByThree) {
  const Matching m = solve_assignment(CostMatrix{{4, 1, 3}, {2, 0, 5}, {3, 2, 2}});
  ASSERT_EQ(m.pairs.size(), 3u);
  EXPECT_EQ(m.pairs[0].new_index, 1u);
  EXPECT_EQ(m.pairs[1].new_index, 0u);
  EXPECT_EQ(m.pairs[2].new_index, 2u);
  EXPECT_EQ(m.total_cost(), 5.0);
}

TEST(Assignment, RectangularReportsUnmatched) {
  const Matching wide = solve_assignment(CostMatrix{{5, 0, 5}});
  ASSERT_EQ(wide.pairs.size(), 1u);
  EXPECT_EQ(wide.pairs[0].new_index, 1u);
  EXPECT_EQ(wide.unmatched_new, (std::vector<std::size_t>{0, 2}));

  const Matching tall = solve_assignment(CostMatrix{{5}, {1}});
  ASSERT_EQ(tall.pairs.size(), 1u);
  EXPECT_EQ(tall.pairs[0].old_index, 1u);
  EXPECT_EQ(tall.unmatched_old, (std::vector<std::size_t>{0}));
}

TEST(Assignment, EmptyMatrix) {
  const Matching m = solve_assignment(CostMatrix(0, 3));
  EXPECT_TRUE(m.pairs.empty());
  EXPECT_EQ(m.unmatched_new.size(), 3u);
}

TEST(Assignment, NonFiniteCostIsRejected) {
  EXPECT_THROW(solve_assignment(CostMatrix{{1, std::nan("")}}), NonFiniteCost);
  EXPECT_THROW(solve_assignment(CostMatrix{{std::numeric_limits<double>::infinity()}}), NonFiniteCost);
}

TEST(Assignment, PaddingValueDoesNotChangeRealPairs) {
  const CostMatrix c{{3, 1, 4}, {1, 5, 9}};
  const double a = solve_assignment(c).total_cost();
  const double b = solve_assignment(c, 1000.0).total_cost();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, testing::brute_force_assignment_cost(c));
}

TEST(BruteForceOracle, KnownMinimum) {
  EXPECT_EQ(testing::brute_force_assignment_cost(CostMatrix{{4, 1, 3}, {2, 0, 5}, {3, 2, 2}}), 5.0);
  EXPECT_EQ(testing::brute_force_assignment_cost(CostMatrix{{7}, {2}}), 2.0);
}

}  // namespace
}  // namespace wma
