#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "test_helpers.hpp"
#include "wma/similarity.hpp"

namespace wma {
namespace {

TEST(SimilarityRatio, HandTrace) {
  EXPECT_EQ(matching_characters("abcd", "bcde"), 3u);
  EXPECT_EQ(similarity_ratio("abcd", "bcde"), 0.75);
}

TEST(SimilarityRatio, Extremes) {
  EXPECT_EQ(similarity_ratio("abcd", "abcd"), 1.0);
  EXPECT_EQ(similarity_ratio("a", "b"), 0.0);
  EXPECT_EQ(similarity_ratio("", ""), 1.0);
  EXPECT_EQ(similarity_ratio("", "abc"), 0.0);
}

TEST(SimilarityRatio, LeftAnchorBias) {
  // The earliest longest block in `a` is taken first, which makes the
  // measure order-dependent on some inputs.
  EXPECT_EQ(matching_characters("abxcd", "abcd"), 4u);
  EXPECT_EQ(similarity_ratio("qabxcd", "abycdf"), 2.0 * 4 / 12);
}

// Values frozen from Python's difflib with autojunk disabled.
TEST(SimilarityRatio, MatchesFrozenDifflibValues) {
  const auto doc = nlohmann::json::parse(read_file(testing::fixture("difflib_ratios.json")));
  ASSERT_EQ(doc.at("pairs").size(), 100u);
  for (const auto& pair : doc.at("pairs")) {
    const std::string a = pair.at("a"), b = pair.at("b");
    EXPECT_EQ(matching_characters(a, b), pair.at("matches").get<std::size_t>()) << a << " | " << b;
    EXPECT_EQ(similarity_ratio(a, b), pair.at("ratio").get<double>()) << a << " | " << b;
  }
}

TEST(SimilarityRatio, ReferenceOracleAgreesOnFrozenPairs) {
  const auto doc = nlohmann::json::parse(read_file(testing::fixture("difflib_ratios.json")));
  for (const auto& pair : doc.at("pairs")) {
    const std::string a = pair.at("a"), b = pair.at("b");
    EXPECT_EQ(testing::reference_matches(a, b), pair.at("matches").get<std::size_t>()) << a << " | " << b;
  }
}

}  // namespace
}  // namespace wma
