#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace wma::testing {

struct CliCall {
  std::vector<std::string> args;
  int exit_code = 0;
  std::string out;
  std::string err;
};

/// Runs the command line in-process and captures both streams.
CliCall run_cli(std::vector<std::string> args);

/// Records a cassette of oracle replies for shop-01 and shop-05 at `cassette`.
/// Returns the recording run.
CliCall record_shop_cassette(const std::filesystem::path& cassette);

/// Every subcommand, offline, writing under `out`. Mock and oracle backends
/// only, plus replay of `cassette`. All paths outside `out` are fixed so two
/// runs into different directories must produce identical bytes.
std::vector<CliCall> run_offline_pipeline(const std::filesystem::path& out, const std::filesystem::path& cassette);

/// Relative paths of files that differ, or exist on one side only.
std::vector<std::string> compare_trees(const std::filesystem::path& a, const std::filesystem::path& b);

}  // namespace wma::testing
