// Writes the scripted oracle backend for a scenario, the file behind
// `--backend mock:<scenario>.oracle.json`.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wma/error.hpp"
#include "wma/io.hpp"
#include "wma/oracle.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate an oracle mock script for a scenario", "wma_gen_oracle"};
  std::string scenario_path;
  std::string out;
  bool constant = false;
  app.add_option("scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out, "Output file (stdout when omitted)");
  app.add_flag("--constant-value", constant, "Score every action 0.5 instead of using the gold path");
  CLI11_PARSE(app, argc, argv);

  try {
    wma::OracleOptions options;
    options.constant_value = constant;
    const std::string text =
        wma::build_oracle_script(wma::load_scenario(scenario_path), options).to_json().dump(2) + "\n";
    if (out.empty()) {
      std::cout << text;
    } else {
      wma::write_file_atomic(out, text);
    }
  } catch (const wma::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
