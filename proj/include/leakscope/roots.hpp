#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <string>
#include <utility>

#include "leakscope/errors.hpp"

namespace leakscope::roots {

template <typename F>
concept ScalarFunction = std::invocable<F const&, double> &&
    std::convertible_to<std::invoke_result_t<F const&, double>, double>;

struct Bracket {
  double lo;
  double hi;
};

inline bool opposite_signs(double a, double b) {
  return (a <= 0.0 && b >= 0.0) || (a >= 0.0 && b <= 0.0);
}

/// Widens [lo, hi] symmetrically, doubling its width each step, until f
/// changes sign across it. Throws NoRootError after `max_doublings` tries.
template <ScalarFunction F>
Bracket expand_bracket(F const& f, double lo, double hi, int max_doublings = 60) {
  if (hi < lo) std::swap(lo, hi);
  double width = hi - lo;
  if (width <= 0.0) {
    lo -= 0.5;
    hi += 0.5;
    width = 1.0;
  }
  double f_lo = f(lo);
  double f_hi = f(hi);
  for (int i = 0; i < max_doublings; ++i) {
    if (opposite_signs(f_lo, f_hi)) return {lo, hi};
    lo -= 0.5 * width;
    hi += 0.5 * width;
    width *= 2.0;
    f_lo = f(lo);
    f_hi = f(hi);
  }
  if (opposite_signs(f_lo, f_hi)) return {lo, hi};
  throw NoRootError("no sign change found after " + std::to_string(max_doublings) +
                    " bracket expansions");
}

/// Bisection on a sign-changing bracket. Stops when the bracket is no wider
/// than `tolerance`, when it has collapsed to adjacent doubles, or after
/// `max_iterations`. Returns whichever evaluated point has the smallest |f|.
template <ScalarFunction F>
double bisect(F const& f, Bracket bracket, double tolerance, int max_iterations = 200) {
  double lo = bracket.lo;
  double hi = bracket.hi;
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (!opposite_signs(f_lo, f_hi)) {
    throw NoRootError("bisection bracket does not straddle a root");
  }
  for (int i = 0; i < max_iterations && hi - lo > tolerance; ++i) {
    double const mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    double const f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if (opposite_signs(f_lo, f_mid)) {
      hi = mid;
      f_hi = f_mid;
    } else {
      lo = mid;
      f_lo = f_mid;
    }
  }
  return std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
}

/// Expand-then-bisect in one call.
template <ScalarFunction F>
double find_root(F const& f, double lo, double hi, double tolerance,
                 int max_doublings = 60, int max_iterations = 200) {
  return bisect(f, expand_bracket(f, lo, hi, max_doublings), tolerance, max_iterations);
}

struct NewtonResult {
  double root = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Newton iteration with step halving: a step is accepted only once it
/// decreases |f|. Gives up on a vanishing or non-finite slope.
template <ScalarFunction F, ScalarFunction DF>
NewtonResult damped_newton(F const& f, DF const& df, double x0, double tolerance,
                           int max_iterations = 100) {
  NewtonResult out;
  double x = x0;
  double fx = f(x);
  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it;
    if (!std::isfinite(fx)) break;
    if (std::abs(fx) <= tolerance) {
      out.converged = true;
      break;
    }
    double const slope = df(x);
    if (!std::isfinite(slope) || slope == 0.0) break;
    double step = fx / slope;
    bool accepted = false;
    for (int halvings = 0; halvings < 40; ++halvings) {
      double const trial = x - step;
      double const f_trial = f(trial);
      if (std::isfinite(f_trial) && std::abs(f_trial) < std::abs(fx)) {
        x = trial;
        fx = f_trial;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  if (!out.converged && std::abs(fx) <= tolerance) out.converged = true;
  out.root = x;
  out.residual = fx;
  return out;
}

}  // namespace leakscope::roots
