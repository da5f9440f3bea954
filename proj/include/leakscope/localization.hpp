#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "leakscope/errors.hpp"
#include "leakscope/headloss.hpp"
#include "leakscope/hydraulics.hpp"
#include "leakscope/roots.hpp"

namespace leakscope {

/// The single position in pipe `pipe` consistent with one data point.
struct LeakCandidate {
  std::size_t pipe;
  double position;
  double residual_check;  // r_j at (position, data); ~0 by construction
  bool in_range;          // false when position falls outside (0, 1): data not from a single leak
};

namespace detail {

inline void require_interior(double x) {
  if (!(x > 0.0 && x < 1.0)) throw InvalidArgument("relative position must lie in the open interval (0, 1)");
}

}  // namespace detail

/// Head-space residual r_j: zero iff a leak at x_j in pipe j explains the data.
/// Linear in x_j.
inline double residual(PipeSet const& pipes, std::size_t j, double x_j, DataPoint const& d) {
  double const dh = d.dh();
  double const others = admittance_excluding(pipes, j, dh);
  HeadLossFn const& u = pipes[j];
  return dh - x_j * evaluate(u, d.q_in - others) - (1.0 - x_j) * evaluate(u, d.q_out - others);
}

/// Closed-form root of r_j in x_j. Throws NoLeakError when q_in == q_out.
inline double candidate_position(PipeSet const& pipes, std::size_t j, DataPoint const& d) {
  pipes.check_index(j);
  if (d.q_in == d.q_out) throw NoLeakError("q_in equals q_out: the data point shows no leak");
  double const dh = d.dh();
  double const others = admittance_excluding(pipes, j, dh);
  HeadLossFn const& u = pipes[j];
  double const upstream = evaluate(u, d.q_in - others);
  double const downstream = evaluate(u, d.q_out - others);
  return (dh - downstream) / (upstream - downstream);
}

inline std::vector<LeakCandidate> all_candidates(PipeSet const& pipes, DataPoint const& d) {
  std::vector<LeakCandidate> out;
  out.reserve(pipes.size());
  for (std::size_t j = 0; j < pipes.size(); ++j) {
    double const x = candidate_position(pipes, j, d);
    out.push_back({j, x, residual(pipes, j, x, d), x > 0.0 && x < 1.0});
  }
  return out;
}

/// Outflow predicted from (dh, q_in) under the hypothesis "leak in pipe j at x_j".
inline double estimate_outflow(PipeSet const& pipes, std::size_t j, double x_j, double dh, double q_in) {
  pipes.check_index(j);
  detail::require_interior(x_j);
  double const others = admittance_excluding(pipes, j, dh);
  HeadLossFn const& u = pipes[j];
  double const head = dh / (1.0 - x_j) - (x_j / (1.0 - x_j)) * evaluate(u, q_in - others);
  return invert(u, head) + others;
}

/// Inflow predicted from (dh, q_out); mirror image of estimate_outflow.
inline double estimate_inflow(PipeSet const& pipes, std::size_t j, double x_j, double dh, double q_out) {
  pipes.check_index(j);
  detail::require_interior(x_j);
  double const others = admittance_excluding(pipes, j, dh);
  HeadLossFn const& u = pipes[j];
  double const head = dh / x_j - ((1.0 - x_j) / x_j) * evaluate(u, q_out - others);
  return invert(u, head) + others;
}

/// Flow-space residual q_out - q_out_hat; vanishes exactly when r_j does.
inline double residual_bar(PipeSet const& pipes, std::size_t j, double x_j, DataPoint const& d) {
  return d.q_out - estimate_outflow(pipes, j, x_j, d.dh(), d.q_in);
}

enum class Sensor { h_in, h_out, q_in, q_out };

inline char const* to_string(Sensor s) {
  switch (s) {
    case Sensor::h_in: return "h_in";
    case Sensor::h_out: return "h_out";
    case Sensor::q_in: return "q_in";
    case Sensor::q_out: return "q_out";
  }
  return "?";
}

/// A data point with exactly one reading missing.
class PartialDataPoint {
 public:
  PartialDataPoint(Sensor missing, DataPoint const& known) : missing_(missing), known_(known) {}

  /// Builds from four optionals; exactly one must be empty.
  static PartialDataPoint from_optionals(std::optional<double> h_in, std::optional<double> h_out,
                                         std::optional<double> q_in, std::optional<double> q_out) {
    int const absent = !h_in + !h_out + !q_in + !q_out;
    if (absent != 1) throw InvalidArgument("a partial data point must have exactly one missing reading");
    Sensor const missing = !h_in ? Sensor::h_in : !h_out ? Sensor::h_out : !q_in ? Sensor::q_in : Sensor::q_out;
    return PartialDataPoint(missing, {h_in.value_or(0.0), h_out.value_or(0.0), q_in.value_or(0.0), q_out.value_or(0.0)});
  }

  Sensor missing() const { return missing_; }
  DataPoint const& known() const { return known_; }

 private:
  Sensor missing_;
  DataPoint known_;  // the missing field is ignored
};

/// Fills in the missing reading so that r_j(x_j, .) = 0. Flows are closed
/// form; heads are found by bisection (r_j is monotone and unbounded in each
/// head). Any x_j in (0, 1) admits a completion, so three sensors never
/// refute a hypothesis.
inline DataPoint complete_data_point(PipeSet const& pipes, std::size_t j, double x_j, PartialDataPoint const& p) {
  pipes.check_index(j);
  detail::require_interior(x_j);
  DataPoint d = p.known();
  switch (p.missing()) {
    case Sensor::q_out:
      d.q_out = estimate_outflow(pipes, j, x_j, d.dh(), d.q_in);
      break;
    case Sensor::q_in:
      d.q_in = estimate_inflow(pipes, j, x_j, d.dh(), d.q_out);
      break;
    case Sensor::h_in: {
      auto const r = [&](double h) { return residual(pipes, j, x_j, {h, d.h_out, d.q_in, d.q_out}); };
      d.h_in = roots::find_root(r, d.h_out - 1.0, d.h_out + 1.0, 0.0);
      break;
    }
    case Sensor::h_out: {
      auto const r = [&](double h) { return residual(pipes, j, x_j, {d.h_in, h, d.q_in, d.q_out}); };
      d.h_out = roots::find_root(r, d.h_in - 1.0, d.h_in + 1.0, 0.0);
      break;
    }
  }
  return d;
}

}  // namespace leakscope
