#include "wma/similarity.hpp"

#include <vector>

namespace wma {
namespace {

struct Block {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t size = 0;
};

// Longest common substring of a[alo, ahi) and b[blo, bhi). Among maximal
// blocks the one starting earliest in a wins, then earliest in b.
Block longest_match(std::string_view a, std::size_t alo, std::size_t ahi,
                    std::string_view b, std::size_t blo, std::size_t bhi,
                    std::vector<std::size_t>& prev, std::vector<std::size_t>& cur) {
  Block best{alo, blo, 0};
  const std::size_t width = bhi - blo;
  prev.assign(width + 1, 0);
  cur.assign(width + 1, 0);
  for (std::size_t i = alo; i < ahi; ++i) {
    for (std::size_t j = blo; j < bhi; ++j) {
      const std::size_t col = j - blo + 1;
      if (a[i] == b[j]) {
        cur[col] = prev[col - 1] + 1;
        if (cur[col] > best.size) best = {i + 1 - cur[col], j + 1 - cur[col], cur[col]};
      } else {
        cur[col] = 0;
      }
    }
    std::swap(prev, cur);
  }
  return best;
}

}  // namespace

std::size_t matching_characters(std::string_view a, std::string_view b) {
  struct Range {
    std::size_t alo, ahi, blo, bhi;
  };
  std::vector<std::size_t> prev;
  std::vector<std::size_t> cur;
  std::vector<Range> pending{{0, a.size(), 0, b.size()}};
  std::size_t matched = 0;
  while (!pending.empty()) {
    const Range r = pending.back();
    pending.pop_back();
    if (r.alo >= r.ahi || r.blo >= r.bhi) continue;
    const Block m = longest_match(a, r.alo, r.ahi, b, r.blo, r.bhi, prev, cur);
    if (m.size == 0) continue;
    matched += m.size;
    pending.push_back({r.alo, m.a, r.blo, m.b});
    pending.push_back({m.a + m.size, r.ahi, m.b + m.size, r.bhi});
  }
  return matched;
}

double similarity_ratio(std::string_view a, std::string_view b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 1.0;
  return 2.0 * static_cast<double>(matching_characters(a, b)) / static_cast<double>(total);
}

}  // namespace wma
