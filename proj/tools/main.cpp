#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"

namespace {

nlohmann::json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config " + path);
  return nlohmann::json::parse(f);
}

}  // namespace

int main(int argc, char** argv) {
  using homocut::cli::RunOptions;
  CLI::App app{"homocut: homology-constrained minimal cuts and maximal flows"};
  app.require_subcommand(1);

  std::string config_path, out_dir, network, suite;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  bool oracle = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "Output directory");
    cmd->add_option("--seed", seed, "Seed for randomized parts");
    cmd->add_option("--tolerance", tolerance, "Relative duality gap tolerance");
  };
  auto* solve = app.add_subcommand("solve", "Least-gradient minimal cut for a configured problem");
  solve->add_option("--config", config_path, "JSON problem config")->required();
  add_common(solve);
  auto* flow = app.add_subcommand("flow", "Max flow / min cut on a network or packing graphs");
  flow->add_option("--config", config_path, "JSON flow config");
  flow->add_option("network", network, "Network file (alternative to --config)");
  flow->add_flag("--oracle", oracle, "Cross-check against the brute-force minimum cut");
  add_common(flow);
  auto* verify = app.add_subcommand("verify", "Run an invariant suite and write a JUnit summary");
  verify->add_option("suite", suite, "Suite name")->required();
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : homocut::cli::kError;
  }

  RunOptions opts;
  opts.out_dir = out_dir;
  opts.oracle = oracle;
  for (auto* cmd : {solve, flow, verify}) {
    if (cmd->parsed() && cmd->count("--seed")) opts.seed = seed;
    if (cmd->parsed() && cmd->count("--tolerance")) opts.tolerance = tolerance;
  }
  try {
    if (solve->parsed()) return homocut::cli::cmd_solve(load_config(config_path), opts, std::cout, std::cerr);
    if (flow->parsed()) {
      nlohmann::json cfg = config_path.empty() ? nlohmann::json::object() : load_config(config_path);
      if (!network.empty()) cfg["network"] = network;
      return homocut::cli::cmd_flow(cfg, opts, std::cout, std::cerr);
    }
    return homocut::cli::cmd_verify(suite, opts, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return homocut::cli::kError;
  }
}
