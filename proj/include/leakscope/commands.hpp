#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "leakscope/csv.hpp"
#include "leakscope/errors.hpp"
#include "leakscope/hydraulics.hpp"
#include "leakscope/isolation.hpp"
#include "leakscope/localization.hpp"
#include "leakscope/scenario.hpp"
#include "leakscope/sensitivity.hpp"

namespace leakscope::cli {

// Output files. Pipes are numbered from 1 in every file; numbers are written
// with 17 significant digits so output is byte-stable across runs.
//
//   simulate        simulate.csv
//   candidates      candidates.csv
//   residual-sweep  residual_sweep.csv, residual_sweep_nominal.csv
//   confusion       confusion.csv
//   isolate         isolate.csv, isolate_spread.csv
//   leakfit         leakfit.csv, leakfit_samples.csv
//   check           check.csv

enum class Command { simulate, candidates, residual_sweep, confusion, isolate, leakfit, check };

inline std::optional<Command> parse_command(std::string_view name) {
  if (name == "simulate") return Command::simulate;
  if (name == "candidates") return Command::candidates;
  if (name == "residual-sweep") return Command::residual_sweep;
  if (name == "confusion") return Command::confusion;
  if (name == "isolate") return Command::isolate;
  if (name == "leakfit") return Command::leakfit;
  if (name == "check") return Command::check;
  return std::nullopt;
}

inline constexpr std::string_view kCommandNames[] = {"simulate", "candidates", "residual-sweep", "confusion",
                                                      "isolate",  "leakfit",    "check"};

struct Overrides {
  std::optional<double> nominal_dh;
  std::optional<double> eps_spread;
  std::optional<double> eps_fit;
};

namespace detail {

using csv::format_index;
using csv::format_number;

inline std::vector<std::string> numbered(std::string const& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t j = 1; j <= n; ++j) out.push_back(prefix + std::to_string(j));
  return out;
}

inline std::vector<std::string> concat(std::vector<std::string> a, std::vector<std::string> const& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

struct Context {
  Scenario const& scenario;
  std::filesystem::path out_dir;
  std::ostream& log;
  double nominal_dh;
  double eps_spread;
  double eps_fit;

  std::size_t n() const { return scenario.pipes.size(); }
  std::string path(char const* file) const { return (out_dir / file).string(); }
};

inline int status_for(std::size_t ok, std::size_t total) { return total == 0 || ok > 0 ? 0 : 1; }

inline int run_simulate(Context const& c) {
  auto const& s = c.scenario;
  auto const entries = sweep(s.pipes, s.leak, s.boundary);
  auto out = csv::open_output(c.path("simulate.csv"));
  csv::Writer w(out, concat(concat({"index", "h_in", "h_out", "dh", "h_leak", "q_leak", "q_in_k", "q_out_k"},
                                   numbered("q_", c.n())),
                            {"q_in", "q_out", "error"}));
  for (std::size_t p = 0; p < entries.size(); ++p) {
    auto const& e = entries[p];
    std::vector<std::string> row{format_index(p + 1), format_number(s.boundary[p].first),
                                 format_number(s.boundary[p].second)};
    if (e.ok()) {
      auto const& st = *e.state;
      for (double v : {st.dh, st.h_leak, st.q_leak, st.q_in_leaking, st.q_out_leaking}) row.push_back(format_number(v));
      for (std::size_t j = 0; j < c.n(); ++j) row.push_back(j == s.leak.pipe ? "" : format_number(st.pipe_flows[j]));
      row.push_back(format_number(e.point->q_in));
      row.push_back(format_number(e.point->q_out));
      row.push_back("");
    } else {
      row.resize(row.size() + 7 + c.n());
      row.push_back(e.error);
    }
    w.row(row);
  }
  return 0;
}

inline int run_candidates(Context const& c) {
  auto const& s = c.scenario;
  auto const entries = sweep(s.pipes, s.leak, s.boundary);
  auto out = csv::open_output(c.path("candidates.csv"));
  csv::Writer w(out, concat(concat({"index", "h_in", "h_out", "dh", "q_in", "q_out"}, numbered("x_", c.n())), {"error"}));
  std::size_t ok = 0;
  for (std::size_t p = 0; p < entries.size(); ++p) {
    auto const& e = entries[p];
    std::vector<std::string> row{format_index(p + 1), format_number(s.boundary[p].first),
                                 format_number(s.boundary[p].second)};
    std::string error = e.error;
    if (e.ok()) {
      auto const& d = *e.point;
      row.push_back(format_number(d.dh()));
      row.push_back(format_number(d.q_in));
      row.push_back(format_number(d.q_out));
      try {
        std::string warnings;
        for (auto const& cand : all_candidates(s.pipes, d)) {
          row.push_back(format_number(cand.position));
          if (!cand.in_range) warnings += "x_" + std::to_string(cand.pipe + 1) + " outside (0,1); ";
        }
        error = warnings;
        ++ok;
      } catch (Error const& ex) {
        row.resize(6 + c.n());
        error = ex.what();
      }
    } else {
      row.resize(6 + c.n());
    }
    row.push_back(error);
    w.row(row);
  }
  return status_for(ok, entries.size());
}

inline DataPoint nominal_point(Context const& c) {
  auto const& s = c.scenario;
  auto const st = solve_leaky_state(s.pipes, s.leak, s.analysis.h_out + c.nominal_dh, s.analysis.h_out);
  return measure(st, s.pipes, s.leak);
}

inline int run_residual_sweep(Context const& c) {
  auto const& s = c.scenario;
  DataPoint const nominal = nominal_point(c);
  auto const frozen = all_candidates(s.pipes, nominal);
  {
    auto out = csv::open_output(c.path("residual_sweep_nominal.csv"));
    csv::Writer w(out, {"pipe", "nominal_dh", "x_nominal", "in_range"});
    for (auto const& cand : frozen) {
      w.row({format_index(cand.pipe + 1), format_number(c.nominal_dh), format_number(cand.position),
             cand.in_range ? "1" : "0"});
    }
  }
  auto out = csv::open_output(c.path("residual_sweep.csv"));
  csv::Writer w(out, concat(concat({"dh", "h_in", "h_out", "q_in", "q_out"}, numbered("rbar_", c.n())), {"error"}));
  std::size_t ok = 0;
  for (double dh : s.analysis.dh_grid) {
    double const h_in = s.analysis.h_out + dh;
    std::vector<std::string> row{format_number(dh), format_number(h_in), format_number(s.analysis.h_out)};
    try {
      auto const d = measure(solve_leaky_state(s.pipes, s.leak, h_in, s.analysis.h_out), s.pipes, s.leak);
      row.push_back(format_number(d.q_in));
      row.push_back(format_number(d.q_out));
      for (auto const& cand : frozen) row.push_back(format_number(residual_bar(s.pipes, cand.pipe, cand.position, d)));
      row.push_back("");
      ++ok;
    } catch (Error const& ex) {
      row.resize(5 + c.n());
      row.push_back(ex.what());
    }
    w.row(row);
  }
  return status_for(ok, s.analysis.dh_grid.size());
}

inline int run_confusion(Context const& c) {
  auto const& s = c.scenario;
  auto const& grid = s.analysis.dh_grid;
  DataPoint const nominal = nominal_point(c);
  std::size_t seed_index = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (std::abs(grid[g] - c.nominal_dh) < std::abs(grid[seed_index] - c.nominal_dh)) seed_index = g;
  }
  std::vector<std::optional<double>> actual(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    try {
      actual[g] = measure(solve_leaky_state(s.pipes, s.leak, s.analysis.h_out + grid[g], s.analysis.h_out), s.pipes,
                          s.leak)
                      .q_in;
    } catch (Error const&) {
    }
  }
  auto out = csv::open_output(c.path("confusion.csv"));
  csv::Writer w(out, {"pipe", "x_i", "dh", "q_in_actual", "q_in_conf", "abs_rbar", "converged"});
  for (std::size_t i = 0; i < c.n(); ++i) {
    if (i == s.leak.pipe) continue;
    double const x_i = candidate_position(s.pipes, i, nominal);
    if (!(x_i > 0.0 && x_i < 1.0)) {
      c.log << "confusion: candidate of pipe " << i + 1 << " outside (0,1), skipped\n";
      continue;
    }
    double const seed = actual[seed_index].value_or(nominal.q_in);
    auto const curve = confusion_flow_curve(s.pipes, i, x_i, s.leak, grid, seed, seed_index);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      w.row({format_index(i + 1), format_number(x_i), format_number(grid[g]),
             actual[g] ? format_number(*actual[g]) : "", format_number(curve.q_in_conf[g]),
             format_number(curve.residual_trace[g]), curve.converged[g] ? "1" : "0"});
    }
  }
  return 0;
}

inline std::string describe(Ambiguous const& a) {
  if (a.pipes.empty()) return "no pipe has a constant candidate";
  std::string out = "several pipes have constant candidates";
  for (auto const& p : a.inherent) {
    out += "; pipes " + std::to_string(p.first + 1) + " and " + std::to_string(p.second + 1) + ": " +
           to_string(p.reason);
  }
  return out;
}

inline int run_isolate(Context const& c) {
  auto const& s = c.scenario;
  auto const data = data_points(sweep(s.pipes, s.leak, s.boundary));
  auto const v = isolate_by_consistency(s.pipes, data, c.eps_spread);
  {
    auto out = csv::open_output(c.path("isolate.csv"));
    csv::Writer w(out, {"verdict", "pipe", "x_hat", "plausible_pipes", "reason"});
    if (auto const* iso = std::get_if<Isolated>(&v.decision)) {
      w.row({"isolated", format_index(iso->pipe + 1), format_number(iso->position), format_index(iso->pipe + 1), ""});
    } else {
      auto const& amb = std::get<Ambiguous>(v.decision);
      std::string plausible;
      for (std::size_t p : amb.pipes) plausible += (plausible.empty() ? "" : " ") + std::to_string(p + 1);
      w.row({"ambiguous", "", "", plausible, describe(amb)});
    }
  }
  auto out = csv::open_output(c.path("isolate_spread.csv"));
  csv::Writer w(out, {"pipe", "spread", "mean", "plausible"});
  for (std::size_t j = 0; j < c.n(); ++j) {
    w.row({format_index(j + 1), format_number(v.spreads[j]), format_number(v.means[j]),
           v.spreads[j] <= c.eps_spread ? "1" : "0"});
  }
  return 0;
}

inline int run_leakfit(Context const& c) {
  auto const& s = c.scenario;
  auto const data = data_points(sweep(s.pipes, s.leak, s.boundary));
  if (data.empty()) throw TooFewPointsError("leakfit needs data points");
  // Candidates are frozen at the first data point.
  std::vector<double> candidates;
  for (auto const& cand : all_candidates(s.pipes, data.front())) candidates.push_back(cand.position);
  {
    auto out = csv::open_output(c.path("leakfit_samples.csv"));
    csv::Writer w(out, concat({"index", "q_leak"}, numbered("h_leak_", c.n())));
    for (std::size_t p = 0; p < data.size(); ++p) {
      std::vector<std::string> row{format_index(p + 1), format_number(apparent_leak_flow(data[p]))};
      for (std::size_t j = 0; j < c.n(); ++j) {
        row.push_back(format_number(apparent_leak_head(s.pipes, j, candidates[j], data[p])));
      }
      w.row(row);
    }
  }
  auto const ranked = isolate_by_leak_fit(s.pipes, data, candidates, s.analysis.h_y, c.eps_fit);
  auto out = csv::open_output(c.path("leakfit.csv"));
  csv::Writer w(out, {"rank", "pipe", "x_j", "C", "beta", "rmse", "negative_head", "accepted", "error"});
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    auto const& f = ranked[r];
    bool const fitted = f.error.empty() && !f.negative_head;
    w.row({format_index(r + 1), format_index(f.pipe + 1), format_number(candidates[f.pipe]),
           fitted ? format_number(f.coefficient) : "", fitted ? format_number(f.exponent) : "",
           fitted ? format_number(f.rmse) : "", f.negative_head ? "1" : "0", f.accepted ? "1" : "0", f.error});
  }
  return 0;
}

inline int run_check(Context const& c) {
  auto out = csv::open_output(c.path("check.csv"));
  csv::Writer w(out, {"pipe_a", "pipe_b", "reason"});
  for (auto const& p : detect_inherent_ambiguity(c.scenario.pipes)) {
    w.row({format_index(p.first + 1), format_index(p.second + 1), to_string(p.reason)});
  }
  return 0;
}

}  // namespace detail

/// Runs one subcommand, writing its CSV files into `out_dir` (created if
/// needed). Returns the process exit status; library errors propagate.
inline int run(Command command, Scenario const& scenario, std::filesystem::path const& out_dir,
               Overrides const& overrides, std::ostream& log) {
  std::filesystem::create_directories(out_dir);
  detail::Context const c{scenario,
                          out_dir,
                          log,
                          overrides.nominal_dh.value_or(scenario.analysis.nominal_dh),
                          overrides.eps_spread.value_or(scenario.analysis.eps_spread),
                          overrides.eps_fit.value_or(scenario.analysis.eps_fit)};
  switch (command) {
    case Command::simulate: return detail::run_simulate(c);
    case Command::candidates: return detail::run_candidates(c);
    case Command::residual_sweep: return detail::run_residual_sweep(c);
    case Command::confusion: return detail::run_confusion(c);
    case Command::isolate: return detail::run_isolate(c);
    case Command::leakfit: return detail::run_leakfit(c);
    case Command::check: return detail::run_check(c);
  }
  return 2;
}

}  // namespace leakscope::cli
