#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "itsbound/global.hpp"
#include "itsbound/parser.hpp"
#include "itsbound/program.hpp"

namespace itsbound {

/// Replays one trace against the bound maps: after every firing each
/// variable's magnitude must stay within the transition's size bound, firing
/// counts within the runtime bounds, and the trace length within the total,
/// all evaluated at the start magnitudes.
inline std::optional<std::string> contract_violation(const Program& p, const GlobalAnalysis& g,
                                                     const std::vector<Int>& s0,
                                                     std::uint64_t maxSteps, std::uint64_t seed) {
  Trace tr = run(p, s0, maxSteps, seed ? seeded_scheduler(seed) : Scheduler{});
  std::vector<Int> m0;
  m0.reserve(s0.size());
  for (const Int& v : s0) m0.push_back(v < 0 ? Int(-v) : v);

  auto note = [&](const std::string& what) {
    std::ostringstream os;
    os << what << " from state (";
    for (std::size_t i = 0; i < s0.size(); ++i) os << (i ? "," : "") << s0[i];
    os << ") seed " << seed;
    return os.str();
  };

  std::vector<std::uint64_t> fired(p.transitions.size(), 0);
  for (const TraceStep& st : tr.steps) {
    ++fired[st.tid];
    for (VarId x = 0; x < p.vars.size(); ++x) {
      Int got = st.after.state[x] < 0 ? Int(-st.after.state[x]) : st.after.state[x];
      if (!NatOrOmega::of(got).leq(bound_eval(g.sb[st.tid][x], m0)))
        return note("size bound broken: t" + std::to_string(st.tid) + " " + p.vars[x]);
    }
  }
  for (std::size_t t = 0; t < p.transitions.size(); ++t)
    if (!NatOrOmega::of(Int(fired[t])).leq(bound_eval(g.rb[t], m0)))
      return note("runtime bound broken: t" + std::to_string(t));
  if (!NatOrOmega::of(Int(tr.steps.size())).leq(bound_eval(g.total, m0)))
    return note("total bound broken");
  return std::nullopt;
}

struct CheckResult {
  std::uint64_t trials = 0;
  std::uint64_t violations = 0;
  std::string first_note;
};

/// Random-state trials; every third one follows the first-enabled schedule,
/// the rest pick transitions pseudo-randomly.
inline CheckResult run_checks(const Program& p, const GlobalAnalysis& g, std::uint64_t trials,
                              std::uint64_t maxSteps, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<long> val(-8, 8);
  CheckResult res;
  for (std::uint64_t i = 0; i < trials; ++i) {
    std::vector<Int> s0;
    s0.reserve(p.vars.size());
    for (std::size_t v = 0; v < p.vars.size(); ++v) s0.push_back(Int(val(rng)));
    ++res.trials;
    auto bad = contract_violation(p, g, s0, maxSteps, i % 3 ? rng() : 0);
    if (bad) {
      ++res.violations;
      if (res.first_note.empty()) res.first_note = *bad;
    }
  }
  return res;
}

struct TransitionReport {
  std::size_t id = 0;
  std::string rb;
  std::string path;
  std::map<std::string, std::string> sb;
};

struct AnalysisReport {
  std::vector<TransitionReport> transitions;
  std::string total_rb;
  std::string klass;
  double time_ms = 0.0;
};

inline AnalysisReport make_report(const Program& p, const GlobalAnalysis& g, double time_ms) {
  AnalysisReport rep;
  rep.time_ms = time_ms;
  rep.total_rb = bound_str(g.total, p.vars);
  rep.klass = asym_class_str(asymptotic_class(g.total));
  for (std::size_t t = 0; t < p.transitions.size(); ++t) {
    TransitionReport tr;
    tr.id = t;
    tr.rb = bound_str(g.rb[t], p.vars);
    tr.path = g.rb_path[t];
    for (VarId x = 0; x < p.vars.size(); ++x) tr.sb[p.vars[x]] = bound_str(g.sb[t][x], p.vars);
    rep.transitions.push_back(std::move(tr));
  }
  return rep;
}

inline nlohmann::json report_json(const AnalysisReport& rep) {
  nlohmann::json j;
  j["transitions"] = nlohmann::json::array();
  for (const TransitionReport& tr : rep.transitions) {
    nlohmann::json jt;
    jt["id"] = tr.id;
    jt["rb"] = tr.rb;
    jt["path"] = tr.path;
    jt["sb"] = tr.sb;
    j["transitions"].push_back(std::move(jt));
  }
  j["total_rb"] = rep.total_rb;
  j["class"] = rep.klass;
  j["time_ms"] = rep.time_ms;
  return j;
}

inline std::string report_text(const Program& p, const AnalysisReport& rep) {
  std::ostringstream os;
  bool fin = true;
  for (const TransitionReport& tr : rep.transitions) {
    const Transition& t = p.transitions[tr.id];
    os << "t" << tr.id << " " << p.locations[t.source] << " -> " << p.locations[t.target]
       << ":  rb = " << tr.rb << "  [" << tr.path << "]\n";
    for (VarId x = 0; x < p.vars.size(); ++x)
      os << "    sb " << p.vars[x] << " = " << tr.sb.at(p.vars[x]) << "\n";
    if (tr.rb == "omega") fin = false;
    for (auto& [k, v] : tr.sb)
      if (v == "omega") fin = false;
  }
  os << "total = " << rep.total_rb << "\n";
  os << "class = " << rep.klass << "\n";
  os << "finite = " << (fin ? "yes" : "no") << "\n";
  return os.str();
}

struct BatchRow {
  std::string file;
  std::string klass;
  double time_ms = 0.0;
};

struct BatchSummary {
  std::vector<BatchRow> rows;
  std::vector<std::string> warnings;  // unparsable files, one note each
  std::map<std::string, std::size_t> counts;
  double avg_ms = 0.0;       // over every analyzed file
  double avg_fin_ms = 0.0;   // over files with a finite total only
};

/// Analyzes every .koat file in the directory (sorted by name).  Files whose
/// wall time exceeds the budget land in the "timeout" class; unparsable
/// files are skipped with a warning.
inline BatchSummary batch_summary(const std::string& dir, const AnalyzeOptions& opts = {},
                                  double timeout_ms = 60000.0) {
  BatchSummary sum;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".koat") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  double tot = 0.0, totFin = 0.0;
  std::size_t fin = 0;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::ostringstream ss;
    ss << in.rdbuf();
    Program p;
    try {
      p = parse_program(ss.str());
    } catch (const ParseError& e) {
      sum.warnings.push_back(f.filename().string() + ": " + e.what());
      continue;
    }
    auto t0 = std::chrono::steady_clock::now();
    GlobalAnalysis g = analyze_program(p, opts);
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
    std::string klass =
        ms > timeout_ms ? "timeout" : asym_class_str(asymptotic_class(g.total));
    sum.rows.push_back({f.filename().string(), klass, ms});
    ++sum.counts[klass];
    tot += ms;
    if (klass != "timeout" && klass != "omega") {
      totFin += ms;
      ++fin;
    }
  }
  if (!sum.rows.empty()) sum.avg_ms = tot / double(sum.rows.size());
  if (fin) sum.avg_fin_ms = totFin / double(fin);
  return sum;
}

inline std::string batch_table(const BatchSummary& sum) {
  std::ostringstream os;
  for (const std::string& w : sum.warnings) os << "warning: skipped " << w << "\n";
  for (const BatchRow& r : sum.rows) {
    os << r.file;
    for (std::size_t i = r.file.size(); i < 32; ++i) os << ' ';
    os << r.klass;
    for (std::size_t i = r.klass.size(); i < 9; ++i) os << ' ';
    os.setf(std::ios::fixed);
    os.precision(2);
    os << r.time_ms << " ms\n";
  }
  static const char* order[] = {"O(1)", "O(n)", "O(n^2)", "O(n^>2)", "EXP", "omega", "timeout"};
  os << "classes:";
  for (const char* c : order) {
    auto it = sum.counts.find(c);
    os << "  " << c << " " << (it == sum.counts.end() ? 0 : it->second);
  }
  os << "\n";
  os.setf(std::ios::fixed);
  os.precision(2);
  os << "files " << sum.rows.size() << ", skipped " << sum.warnings.size() << ", AVG "
     << sum.avg_ms << " ms, AVG+ " << sum.avg_fin_ms << " ms\n";
  return os.str();
}

}  // namespace itsbound
