#include "arrival/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <future>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace {

namespace sc = arrival::scenario;

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitFailed = 2;

struct Outcome {
  int code = kExitError;
  std::string text;
};

Outcome run_one(const std::string& config, const std::filesystem::path& out_root,
                std::optional<std::uint64_t> seed) {
  Outcome o;
  try {
    const sc::Scenario s = sc::load_scenario(config);
    const auto dir = out_root / s.name;
    std::filesystem::create_directories(dir);
    const sc::RunSummary r = sc::run_scenario(s, dir, seed);
    std::string text;
    for (const auto& c : r.checks) {
      text += (c.passed ? "  PASS " : "  FAIL ") + c.name;
      if (!c.detail.empty()) text += "  (" + c.detail + ")";
      text += "\n";
    }
    text += std::string(r.passed ? "PASS " : "FAIL ") + s.name + " -> " + dir.string() + "\n";
    o.code = r.passed ? kExitPass : kExitFailed;
    o.text = std::move(text);
  } catch (const std::exception& e) {
    o.code = kExitError;
    o.text = "ERROR " + config + ": " + e.what() + "\n";
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Arrival-time distributions for free wave packets"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::string out_dir = "out";
  bool parallel = false;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run scenario files or bundled scenarios");
  run->add_option("config", configs, "YAML file or bundled scenario name")->required();
  run->add_option("--out", out_dir, "Output root; each scenario writes to <out>/<name>/");
  run->add_flag("--parallel", parallel, "Run the scenarios concurrently");
  run->add_option("--seed", seed, "Override the Monte Carlo seed");

  auto* list = app.add_subcommand("list", "List bundled scenarios");

  std::string name;
  auto* desc = app.add_subcommand("describe", "Show a bundled scenario");
  desc->add_option("name", name)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitError;
  }

  try {
    if (*list) {
      for (const auto& n : sc::list_scenarios()) std::cout << n << "\n";
      return kExitPass;
    }
    if (*desc) {
      std::cout << sc::describe(name);
      return kExitPass;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }

  std::vector<Outcome> outcomes(configs.size());
  if (parallel && configs.size() > 1) {
    std::vector<std::future<Outcome>> jobs;
    for (const auto& c : configs)
      jobs.push_back(std::async(std::launch::async, run_one, c, out_dir, seed));
    for (std::size_t i = 0; i < jobs.size(); ++i) outcomes[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < configs.size(); ++i) outcomes[i] = run_one(configs[i], out_dir, seed);
  }

  int code = kExitPass;
  for (const auto& o : outcomes) {
    (o.code == kExitError ? std::cerr : std::cout) << o.text;
    if (o.code == kExitError) code = kExitError;
    else if (o.code == kExitFailed && code == kExitPass) code = kExitFailed;
  }
  return code;
}
