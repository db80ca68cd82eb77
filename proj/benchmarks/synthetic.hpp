#pragma once

#include <random>
#include <string>

namespace wma::bench {

// A flat page of `n` elements with a few roles and short product-like names.
inline std::string synthetic_page(std::size_t n, std::uint64_t seed) {
  static const char* roles[] = {"link", "button", "StaticText", "heading", "textbox"};
  static const char* words[] = {"Blue", "Running", "Shoes", "Cart", "Account", "Search", "Review", "Price", "Red", "Hat"};
  std::mt19937_64 rng(seed);
  std::string text = "[1] RootWebArea 'Bench'\n";
  for (std::size_t i = 0; i < n; ++i) {
    text += "\t[" + std::to_string(i + 2) + "] " + roles[rng() % 5] + " '" + words[rng() % 10] + " " +
            words[rng() % 10] + " " + std::to_string(rng() % 100) + "'\n";
  }
  return text;
}

}  // namespace wma::bench
