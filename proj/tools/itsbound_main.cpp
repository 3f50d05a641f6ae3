#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "itsbound/report.hpp"

using namespace itsbound;

namespace {

int analyze_one(const std::string& file, bool json, std::uint64_t check, std::uint32_t maxPeriod,
                std::uint64_t cycleCap, std::uint64_t maxSteps, std::uint64_t seed) {
  std::ifstream in(file);
  if (!in.good()) {
    std::cerr << "itsbound: cannot open " << file << "\n";
    return 1;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  Program p;
  try {
    p = parse_program(ss.str());
  } catch (const ParseError& e) {
    std::cerr << "itsbound: " << file << ": " << e.what() << "\n";
    return 1;
  }

  AnalyzeOptions opts;
  opts.period_cap = maxPeriod;
  opts.cycle_cap = cycleCap;
  auto t0 = std::chrono::steady_clock::now();
  GlobalAnalysis g = analyze_program(p, opts);
  double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  AnalysisReport rep = make_report(p, g, ms);
  if (json)
    std::cout << report_json(rep).dump(2) << "\n";
  else
    std::cout << report_text(p, rep);

  if (check) {
    CheckResult cr = run_checks(p, g, check, maxSteps, seed);
    if (!json)
      std::cout << "check: " << cr.trials << " trials, " << cr.violations << " violations\n";
    if (cr.violations) {
      std::cerr << "itsbound: bound contract broken: " << cr.first_note << "\n";
      return 2;
    }
  }
  return 0;
}

int batch_dir(const std::string& dir, const AnalyzeOptions& opts, double timeoutMs) {
  BatchSummary sum;
  try {
    sum = batch_summary(dir, opts, timeoutMs);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "itsbound: " << e.what() << "\n";
    return 1;
  }
  std::cout << batch_table(sum);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  bool batch = false;
  if (!args.empty() && (args[0] == "analyze" || args[0] == "batch")) {
    batch = args[0] == "batch";
    args.erase(args.begin());
  }

  CLI::App app{"size and runtime bounds for integer transition programs"};
  std::string target;
  bool json = false;
  std::uint64_t check = 0, maxSteps = 10000, seed = 1, cycleCap = 10000;
  std::uint32_t maxPeriod = 360;
  double timeoutSec = 60.0;
  app.add_option("target", target, batch ? "directory of .koat files" : ".koat program file")
      ->required();
  app.add_flag("--json", json, "emit the report as JSON");
  app.add_option("--check", check, "verify bound contracts on N random traces");
  app.add_option("--max-period", maxPeriod, "cap for periodic-spectrum detection");
  app.add_option("--max-cycles", cycleCap, "cap for simple cycle enumeration");
  app.add_option("--max-steps", maxSteps, "trace length cap in check mode");
  app.add_option("--seed", seed, "random seed for check mode");
  app.add_option("--timeout", timeoutSec, "per-file budget in seconds (batch)");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (batch) {
      AnalyzeOptions opts;
      opts.period_cap = maxPeriod;
      opts.cycle_cap = cycleCap;
      return batch_dir(target, opts, timeoutSec * 1000.0);
    }
    return analyze_one(target, json, check, maxPeriod, cycleCap, maxSteps, seed);
  } catch (const std::exception& e) {
    std::cerr << "itsbound: internal error: " << e.what() << "\n";
    return 2;
  }
}
