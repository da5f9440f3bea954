#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "leakscope/errors.hpp"
#include "leakscope/headloss.hpp"
#include "leakscope/hydraulics.hpp"
#include "leakscope/localization.hpp"
#include "leakscope/roots.hpp"

namespace leakscope {

/// First-order head-loss sensitivities of the pipe sections up- and
/// downstream of a hypothesized leak, plus the zero-flow resistance U'(0).
struct SectionResistances {
  double r_in;
  double r_out;
  double r_zero;

  /// R_in / R_out, defined only for R_out > 0.
  std::optional<double> ratio() const {
    if (r_out > 0.0) return r_in / r_out;
    return std::nullopt;
  }
};

/// Partial derivatives of the flow-space residual of pipe i when pipe k
/// truly leaks, with (dh, q_in) as the independent inputs.
struct ResidualDifferential {
  double d_dqin;
  double d_ddh;
};

namespace detail {

struct OperatingResistances {
  double r_in;
  double r_out;
};

inline OperatingResistances operating_resistances(PipeSet const& pipes, std::size_t i, double x_i,
                                                  double dh, double q_in, double q_out) {
  double const others = admittance_excluding(pipes, i, dh);
  HeadLossFn const& u = pipes[i];
  return {x_i * derivative(u, q_in - others), (1.0 - x_i) * derivative(u, q_out - others)};
}

// d q_out_hat(j, x_j, dh, q_in) / d q_in = -R_in / R_out, evaluated at the
// predicted outflow.
inline double outflow_slope_in_qin(PipeSet const& pipes, std::size_t j, double x_j, double dh, double q_in) {
  double const q_out = estimate_outflow(pipes, j, x_j, dh, q_in);
  auto const r = operating_resistances(pipes, j, x_j, dh, q_in, q_out);
  return -r.r_in / r.r_out;
}

}  // namespace detail

inline SectionResistances section_resistances(PipeSet const& pipes, std::size_t i, double x_i,
                                              DataPoint const& d) {
  pipes.check_index(i);
  auto const r = detail::operating_resistances(pipes, i, x_i, d.dh(), d.q_in, d.q_out);
  return {r.r_in, r.r_out, derivative(pipes[i], 0.0)};
}

/// Analytic differential of the flow-space residual of hypothesis (i, x_i)
/// against the truth (k, x), at data point d.
inline ResidualDifferential residual_differential(PipeSet const& pipes, std::size_t i, double x_i,
                                                  std::size_t k, double x, DataPoint const& d) {
  pipes.check_index(i);
  pipes.check_index(k);
  double const dh = d.dh();
  auto const ri = detail::operating_resistances(pipes, i, x_i, dh, d.q_in, d.q_out);
  auto const rk = detail::operating_resistances(pipes, k, x, dh, d.q_in, d.q_out);
  if (!(ri.r_out > 0.0) || !(rk.r_out > 0.0)) {
    throw DerivativeError("downstream section resistance vanishes; the residual differential is undefined");
  }
  double const gi = admittance_derivative_excluding(pipes, i, dh);
  double const gk = admittance_derivative_excluding(pipes, k, dh);
  return {ri.r_in / ri.r_out - rk.r_in / rk.r_out,
          (1.0 + gk * (rk.r_in + rk.r_out)) / rk.r_out - (1.0 + gi * (ri.r_in + ri.r_out)) / ri.r_out};
}

/// Inflow trajectory along which the hypothesis (i, x_i) stays consistent
/// with the data while the truth is `truth`.
struct ConfusionFlowCurve {
  std::size_t pipe;
  std::vector<double> dh_grid;
  std::vector<double> q_in_conf;
  std::vector<double> residual_trace;  // |r_bar_i| at the solution
  std::vector<bool> converged;
};

struct ConfusionSolverOptions {
  double tolerance = 1e-10;
  int max_iterations = 100;
};

/// Solves r_bar_i(x_i, dh, q_in, q_out_hat(truth, dh, q_in)) = 0 for q_in at
/// every grid point. The solve at `seed_index` starts from `seed_qin`; the
/// rest of the grid is walked outward from there, each point seeded with its
/// neighbour's solution. Damped Newton first, then bisection on a bracket of
/// width 4 |q_leak| around the seed. Failures are flagged, not thrown.
inline ConfusionFlowCurve confusion_flow_curve(PipeSet const& pipes, std::size_t i, double x_i,
                                               LeakSpec const& truth, std::vector<double> const& dh_grid,
                                               double seed_qin, std::size_t seed_index = 0,
                                               ConfusionSolverOptions const& options = {}) {
  pipes.check_index(i);
  validate(truth, pipes);
  detail::require_interior(x_i);
  ConfusionFlowCurve curve{i, dh_grid, std::vector<double>(dh_grid.size(), std::nan("")),
                           std::vector<double>(dh_grid.size(), std::nan("")),
                           std::vector<bool>(dh_grid.size(), false)};
  if (dh_grid.empty()) return curve;
  if (seed_index >= dh_grid.size()) throw IndexError("confusion-flow seed index outside the grid");

  std::size_t const k = truth.pipe;
  double const x = truth.position;

  auto const solve_at = [&](std::size_t n, double seed) -> double {
    double const dh = dh_grid[n];
    auto const mismatch = [&](double q_in) {
      try {
        return estimate_outflow(pipes, k, x, dh, q_in) - estimate_outflow(pipes, i, x_i, dh, q_in);
      } catch (Error const&) {
        return std::nan("");
      }
    };
    auto const slope = [&](double q_in) {
      try {
        return detail::outflow_slope_in_qin(pipes, k, x, dh, q_in) -
               detail::outflow_slope_in_qin(pipes, i, x_i, dh, q_in);
      } catch (Error const&) {
        return std::nan("");
      }
    };

    auto const newton = roots::damped_newton(mismatch, slope, seed, options.tolerance, options.max_iterations);
    double q_in = newton.root;
    double value = newton.residual;
    if (!newton.converged) {
      double half_width = 2.0 * std::abs(seed - estimate_outflow(pipes, k, x, dh, seed));
      if (!(half_width > 0.0) || !std::isfinite(half_width)) half_width = 1.0;
      try {
        q_in = roots::bisect(mismatch, {seed - half_width, seed + half_width}, 0.0, 200);
        value = mismatch(q_in);
      } catch (Error const&) {
        q_in = newton.root;
      }
    }
    curve.q_in_conf[n] = q_in;
    curve.residual_trace[n] = std::abs(value);
    curve.converged[n] = std::isfinite(value) && std::abs(value) <= options.tolerance;
    return curve.converged[n] ? q_in : seed;
  };

  double const anchor = solve_at(seed_index, seed_qin);
  double seed = anchor;
  for (std::size_t n = seed_index + 1; n < dh_grid.size(); ++n) seed = solve_at(n, seed);
  seed = anchor;
  for (std::size_t n = seed_index; n-- > 0;) seed = solve_at(n, seed);
  return curve;
}

/// Sensitivity of r_bar_i to dh at a zero-head-loss state with proportional
/// head losses U_k = c U_i, together with its two non-vanishing conditions.
struct ZeroDhSensitivity {
  double per_unit_dh;
  bool outlet_resistances_differ;  // R_out,i != R_out,k
  bool sections_nonlinear;         // R_in,i + R_out,i != R_0,i
};

/// c with U_k = c U_i for structurally proportional head losses.
inline std::optional<double> proportionality_constant(HeadLossFn const& u_k, HeadLossFn const& u_i) {
  return std::visit(
      detail::overloaded{
          [](Linear const& a, Linear const& b) -> std::optional<double> { return a.resistance / b.resistance; },
          [](SignedQuadratic const& a, SignedQuadratic const& b) -> std::optional<double> {
            return a.coefficient / b.coefficient;
          },
          [](QuadraticPlusLinear const& a, QuadraticPlusLinear const& b) -> std::optional<double> {
            return a.coefficient / b.coefficient;
          },
          [](PowerLaw const& a, PowerLaw const& b) -> std::optional<double> {
            if (a.exponent != b.exponent) return std::nullopt;
            return a.coefficient / b.coefficient;
          },
          [](auto const&, auto const&) -> std::optional<double> { return std::nullopt; }},
      u_k, u_i);
}

/// d r_bar_i / d dh at a dh = 0 state, leak truly in pipe k at x. Under the
/// preconditions the candidate of pipe i coincides with x, so the section
/// resistances of both pipes are taken at x.
inline ZeroDhSensitivity zero_dh_sensitivity(PipeSet const& pipes, std::size_t i, std::size_t k, double x,
                                             DataPoint const& d) {
  pipes.check_index(i);
  pipes.check_index(k);
  detail::require_interior(x);
  if (i == k) throw PreconditionError("zero-dh sensitivity compares two distinct pipes");
  if (!(std::abs(d.dh()) <= 1e-12)) throw PreconditionError("zero-dh sensitivity requires |dh| <= 1e-12");
  auto const c = proportionality_constant(pipes[k], pipes[i]);
  if (!c) throw PreconditionError("head losses of pipes i and k are not proportional");

  auto const ri = detail::operating_resistances(pipes, i, x, d.dh(), d.q_in, d.q_out);
  auto const rk = detail::operating_resistances(pipes, k, x, d.dh(), d.q_in, d.q_out);
  double const r_zero = derivative(pipes[i], 0.0);
  if (!(ri.r_out > 0.0) || !(rk.r_out > 0.0)) {
    throw DerivativeError("downstream section resistance vanishes at the zero-dh state");
  }
  if (!(r_zero > 0.0)) throw DerivativeError("zero-flow resistance U'(0) vanishes; the sensitivity is unbounded");

  bool const differ = ri.r_out != rk.r_out;
  // U' is constant for a linear loss, so R_in + R_out = R_0 holds identically.
  bool const nonlinear = !is_linear(pipes[i]) && ri.r_in + ri.r_out != r_zero;
  double const outlet_factor = differ ? 1.0 / rk.r_out - 1.0 / ri.r_out : 0.0;
  double const shape_factor = nonlinear ? 1.0 - (ri.r_in + ri.r_out) / r_zero : 0.0;
  return {outlet_factor * shape_factor, differ, nonlinear};
}

enum class AmbiguityReason { identical, linear };

inline char const* to_string(AmbiguityReason r) {
  return r == AmbiguityReason::identical ? "identical" : "linear";
}

struct AmbiguousPair {
  std::size_t first;
  std::size_t second;
  AmbiguityReason reason;
};

/// Pipe pairs that no data can tell apart: structurally identical head
/// losses (exact parameter equality), or both linear.
inline std::vector<AmbiguousPair> detect_inherent_ambiguity(PipeSet const& pipes) {
  std::vector<AmbiguousPair> out;
  for (std::size_t a = 0; a < pipes.size(); ++a) {
    for (std::size_t b = a + 1; b < pipes.size(); ++b) {
      if (pipes[a] == pipes[b]) {
        out.push_back({a, b, AmbiguityReason::identical});
      } else if (is_linear(pipes[a]) && is_linear(pipes[b])) {
        out.push_back({a, b, AmbiguityReason::linear});
      }
    }
  }
  return out;
}

}  // namespace leakscope
