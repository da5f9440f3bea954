#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "leakscope/errors.hpp"
#include "leakscope/headloss.hpp"
#include "leakscope/roots.hpp"

namespace leakscope {

/// Pressure-dependent outflow q = C (h - h_y)^beta, defined for h > h_y.
struct PowerLawLeak {
  double coefficient;
  double exponent;
  double elevation = 0.0;
  friend bool operator==(PowerLawLeak const&, PowerLawLeak const&) = default;
};

/// Constant outflow regardless of the head at the leak.
struct FixedDemand {
  double flow;
  friend bool operator==(FixedDemand const&, FixedDemand const&) = default;
};

using LeakFn = std::variant<PowerLawLeak, FixedDemand>;

inline LeakFn sqrt_leak(double coefficient = 1.0) { return PowerLawLeak{coefficient, 0.5, 0.0}; }

inline void validate(LeakFn const& g) {
  std::visit(detail::overloaded{
                 [](PowerLawLeak const& p) {
                   detail::require_positive(p.coefficient, "leak coefficient");
                   detail::require_positive(p.exponent, "leak exponent");
                   if (!std::isfinite(p.elevation)) throw InvalidArgument("leak elevation must be finite");
                 },
                 [](FixedDemand const& d) {
                   if (!(d.flow >= 0.0) || !std::isfinite(d.flow)) {
                     throw InvalidArgument("fixed leak demand must be non-negative and finite");
                   }
                 }},
             g);
}

/// g(h_leak). Throws InvalidArgument for a power-law leak at or below its elevation.
inline double leak_flow(LeakFn const& g, double h_leak) {
  return std::visit(detail::overloaded{
                        [h_leak](PowerLawLeak const& p) {
                          if (!(h_leak > p.elevation)) {
                            throw InvalidArgument("power-law leak is undefined at or below its elevation head");
                          }
                          return p.coefficient * std::pow(h_leak - p.elevation, p.exponent);
                        },
                        [](FixedDemand const& d) { return d.flow; }},
                    g);
}

/// The true leak: pipe `pipe` (0-based), relative position `position` in (0, 1).
struct LeakSpec {
  std::size_t pipe;
  double position;
  LeakFn law;
};

inline void validate(LeakSpec const& leak, PipeSet const& pipes) {
  pipes.check_index(leak.pipe);
  if (!(leak.position > 0.0 && leak.position < 1.0)) {
    throw InvalidArgument("leak position must lie in the open interval (0, 1)");
  }
  validate(leak.law);
}

/// Steady-state solution of the leaking network.
struct HydraulicState {
  double h_in = 0.0;
  double h_out = 0.0;
  double dh = 0.0;
  /// Flow through each pipe; the entry of the leaking pipe is NaN.
  std::vector<double> pipe_flows;
  double q_in_leaking = 0.0;   // leaking pipe, upstream of the leak
  double q_out_leaking = 0.0;  // leaking pipe, downstream of the leak
  double h_leak = 0.0;
  double q_leak = 0.0;
};

/// One simultaneous reading of the four boundary sensors.
struct DataPoint {
  double h_in = 0.0;
  double h_out = 0.0;
  double q_in = 0.0;
  double q_out = 0.0;

  double dh() const { return h_in - h_out; }
  friend bool operator==(DataPoint const&, DataPoint const&) = default;
};

namespace detail {

// Extension of g below the elevation head by zero outflow; keeps the
// leak-head equation continuous so it can be bracketed.
inline double extended_leak_flow(LeakFn const& g, double h_leak) {
  if (auto const* p = std::get_if<PowerLawLeak>(&g); p && !(h_leak > p->elevation)) return 0.0;
  return leak_flow(g, h_leak);
}

}  // namespace detail

/// Solves the leaking network for the given boundary heads. The unknown is
/// the head at the leak; mass balance at the leak is strictly decreasing in
/// it, so the root is unique and found by bisection down to adjacent doubles.
/// The search starts on [min(h_in, h_out), max(h_in, h_out)] unless
/// `initial` is given, and widens by doubling as needed.
inline HydraulicState solve_leaky_state(PipeSet const& pipes, LeakSpec const& leak, double h_in, double h_out,
                                        std::optional<roots::Bracket> initial = std::nullopt) {
  validate(leak, pipes);
  if (!std::isfinite(h_in) || !std::isfinite(h_out)) throw InvalidArgument("boundary heads must be finite");
  HeadLossFn const& u = pipes[leak.pipe];
  double const x = leak.position;

  auto const upstream = [&](double h_leak) { return invert(u, (h_in - h_leak) / x); };
  auto const downstream = [&](double h_leak) { return invert(u, (h_leak - h_out) / (1.0 - x)); };
  auto const imbalance = [&](double h_leak) {
    return upstream(h_leak) - downstream(h_leak) - detail::extended_leak_flow(leak.law, h_leak);
  };

  roots::Bracket const start = initial.value_or(roots::Bracket{std::min(h_in, h_out), std::max(h_in, h_out)});
  double const h_leak = roots::find_root(imbalance, start.lo, start.hi, 0.0);
  if (auto const* p = std::get_if<PowerLawLeak>(&leak.law); p && !(h_leak > p->elevation)) {
    throw NoRootError("leak head " + std::to_string(h_leak) + " does not exceed the leak elevation " +
                      std::to_string(p->elevation) + " for these boundary heads");
  }

  HydraulicState state;
  state.h_in = h_in;
  state.h_out = h_out;
  state.dh = h_in - h_out;
  state.h_leak = h_leak;
  state.q_in_leaking = upstream(h_leak);
  state.q_out_leaking = downstream(h_leak);
  state.q_leak = state.q_in_leaking - state.q_out_leaking;
  state.pipe_flows.resize(pipes.size());
  for (std::size_t i = 0; i < pipes.size(); ++i) {
    state.pipe_flows[i] = i == leak.pipe ? std::numeric_limits<double>::quiet_NaN() : invert(pipes[i], state.dh);
  }
  return state;
}

/// Boundary sensor readings of a solved state.
inline DataPoint measure(HydraulicState const& state, PipeSet const& pipes, LeakSpec const& leak) {
  double through_others = 0.0;
  for (std::size_t i = 0; i < pipes.size(); ++i) {
    if (i != leak.pipe) through_others += state.pipe_flows[i];
  }
  return {state.h_in, state.h_out, state.q_in_leaking + through_others, state.q_out_leaking + through_others};
}

struct SweepEntry {
  std::optional<HydraulicState> state;
  std::optional<DataPoint> point;
  std::string error;  // empty on success

  bool ok() const { return point.has_value(); }
};

/// Solves one state per (h_in, h_out) pair, in order. Individual failures
/// are recorded in their entry; throws only when every pair fails.
inline std::vector<SweepEntry> sweep(PipeSet const& pipes, LeakSpec const& leak,
                                     std::vector<std::pair<double, double>> const& boundary) {
  validate(leak, pipes);
  std::vector<SweepEntry> entries(boundary.size());
  std::size_t failures = 0;
  for (std::size_t n = 0; n < boundary.size(); ++n) {
    try {
      auto state = solve_leaky_state(pipes, leak, boundary[n].first, boundary[n].second);
      entries[n].point = measure(state, pipes, leak);
      entries[n].state = std::move(state);
    } catch (Error const& e) {
      entries[n].error = e.what();
      ++failures;
    }
  }
  if (!boundary.empty() && failures == boundary.size()) {
    std::string message = "every boundary pair failed to solve:";
    for (std::size_t n = 0; n < entries.size(); ++n) {
      message += " [" + std::to_string(n) + "] " + entries[n].error + ";";
    }
    throw NoRootError(message);
  }
  return entries;
}

/// Successful data points of a sweep, order preserved.
inline std::vector<DataPoint> data_points(std::vector<SweepEntry> const& entries) {
  std::vector<DataPoint> out;
  out.reserve(entries.size());
  for (auto const& e : entries) {
    if (e.point) out.push_back(*e.point);
  }
  return out;
}

/// Head at relative position z along pipe i; piecewise linear in z.
inline double head_profile(HydraulicState const& state, PipeSet const& pipes, LeakSpec const& leak,
                           std::size_t i, double z) {
  pipes.check_index(i);
  if (!(z >= 0.0 && z <= 1.0)) throw InvalidArgument("relative position must lie in [0, 1]");
  if (i != leak.pipe) return state.h_in - z * state.dh;
  double const x = leak.position;
  if (z <= x) return state.h_in - (z / x) * (state.h_in - state.h_leak);
  return state.h_leak - ((z - x) / (1.0 - x)) * (state.h_leak - state.h_out);
}

}  // namespace leakscope
