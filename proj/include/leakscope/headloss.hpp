#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "leakscope/errors.hpp"
#include "leakscope/roots.hpp"

namespace leakscope {

// Head loss per unit relative length as a function of pipe flow. Every
// variant is odd and strictly increasing on the whole real line.

/// U(q) = R q (laminar).
struct Linear {
  double resistance;
  friend bool operator==(Linear const&, Linear const&) = default;
};

/// U(q) = c |q| q.
struct SignedQuadratic {
  double coefficient;
  friend bool operator==(SignedQuadratic const&, SignedQuadratic const&) = default;
};

/// U(q) = c (q |q| + q).
struct QuadraticPlusLinear {
  double coefficient;
  friend bool operator==(QuadraticPlusLinear const&, QuadraticPlusLinear const&) = default;
};

/// U(q) = c sign(q) |q|^gamma.
struct PowerLaw {
  double coefficient;
  double exponent;
  friend bool operator==(PowerLaw const&, PowerLaw const&) = default;
};

using HeadLossFn = std::variant<Linear, SignedQuadratic, QuadraticPlusLinear, PowerLaw>;

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline double require_positive(double value, char const* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw InvalidArgument(std::string(what) + " must be positive and finite");
  }
  return value;
}

}  // namespace detail

inline HeadLossFn make_linear(double resistance) {
  return Linear{detail::require_positive(resistance, "resistance")};
}
inline HeadLossFn make_signed_quadratic(double c) {
  return SignedQuadratic{detail::require_positive(c, "coefficient")};
}
inline HeadLossFn make_quadratic_plus_linear(double c) {
  return QuadraticPlusLinear{detail::require_positive(c, "coefficient")};
}
inline HeadLossFn make_power_law(double c, double gamma) {
  return PowerLaw{detail::require_positive(c, "coefficient"),
                  detail::require_positive(gamma, "exponent")};
}

/// Throws InvalidArgument unless every parameter is positive and finite.
inline void validate(HeadLossFn const& u) {
  std::visit(detail::overloaded{
                 [](Linear const& l) { detail::require_positive(l.resistance, "resistance"); },
                 [](SignedQuadratic const& s) { detail::require_positive(s.coefficient, "coefficient"); },
                 [](QuadraticPlusLinear const& s) { detail::require_positive(s.coefficient, "coefficient"); },
                 [](PowerLaw const& p) {
                   detail::require_positive(p.coefficient, "coefficient");
                   detail::require_positive(p.exponent, "exponent");
                 }},
             u);
}

inline std::string_view type_name(HeadLossFn const& u) {
  return std::visit(detail::overloaded{
                        [](Linear const&) { return std::string_view{"linear"}; },
                        [](SignedQuadratic const&) { return std::string_view{"signed_quadratic"}; },
                        [](QuadraticPlusLinear const&) { return std::string_view{"quadratic_plus_linear"}; },
                        [](PowerLaw const&) { return std::string_view{"power_law"}; }},
                    u);
}

inline bool is_linear(HeadLossFn const& u) { return std::holds_alternative<Linear>(u); }

inline double evaluate(HeadLossFn const& u, double q) {
  return std::visit(detail::overloaded{
                        [q](Linear const& l) { return l.resistance * q; },
                        [q](SignedQuadratic const& s) { return s.coefficient * std::abs(q) * q; },
                        [q](QuadraticPlusLinear const& s) { return s.coefficient * (q * std::abs(q) + q); },
                        [q](PowerLaw const& p) {
                          return std::copysign(p.coefficient * std::pow(std::abs(q), p.exponent), q);
                        }},
                    u);
}

/// Inverse by bracketed bisection; works for any strictly increasing odd U.
/// The closed forms in invert() are preferred, this is the fallback.
inline double invert_numerically(HeadLossFn const& u, double h) {
  if (h == 0.0) return 0.0;
  auto const residual = [&](double q) { return evaluate(u, q) - h; };
  double const sign = h > 0.0 ? 1.0 : -1.0;
  double bound = 1.0;
  for (int i = 0; i < 1100 && sign * residual(sign * bound) < 0.0; ++i) bound *= 2.0;
  roots::Bracket const bracket = sign > 0.0 ? roots::Bracket{0.0, bound} : roots::Bracket{-bound, 0.0};
  return roots::bisect(residual, bracket, 0.0, 2000);
}

inline double invert(HeadLossFn const& u, double h) {
  double const q = std::visit(
      detail::overloaded{
          [h](Linear const& l) { return h / l.resistance; },
          [h](SignedQuadratic const& s) { return std::copysign(std::sqrt(std::abs(h) / s.coefficient), h); },
          [h](QuadraticPlusLinear const& s) {
            // Positive root of q^2 + q - a = 0, written to avoid cancellation.
            double const a = std::abs(h) / s.coefficient;
            return std::copysign(2.0 * a / (1.0 + std::sqrt(1.0 + 4.0 * a)), h);
          },
          [h](PowerLaw const& p) {
            return std::copysign(std::pow(std::abs(h) / p.coefficient, 1.0 / p.exponent), h);
          }},
      u);
  return std::isfinite(q) ? q : invert_numerically(u, h);
}

/// U'(q). Throws DerivativeError for a power law with exponent < 1 at q = 0.
inline double derivative(HeadLossFn const& u, double q) {
  return std::visit(
      detail::overloaded{
          [](Linear const& l) { return l.resistance; },
          [q](SignedQuadratic const& s) { return 2.0 * s.coefficient * std::abs(q); },
          [q](QuadraticPlusLinear const& s) { return s.coefficient * (2.0 * std::abs(q) + 1.0); },
          [q](PowerLaw const& p) {
            if (q == 0.0) {
              if (p.exponent < 1.0) throw DerivativeError("power-law head loss has unbounded slope at q = 0");
              return p.exponent == 1.0 ? p.coefficient : 0.0;
            }
            return p.coefficient * p.exponent * std::pow(std::abs(q), p.exponent - 1.0);
          }},
      u);
}

/// The parallel pipes between inlet and outlet junctions.
class PipeSet {
 public:
  explicit PipeSet(std::vector<HeadLossFn> pipes,
                   std::optional<std::vector<double>> lengths = std::nullopt)
      : pipes_(std::move(pipes)), lengths_(std::move(lengths)) {
    if (pipes_.empty()) throw InvalidArgument("a pipe set needs at least one pipe");
    for (auto const& u : pipes_) validate(u);
    if (lengths_) {
      if (lengths_->size() != pipes_.size()) {
        throw InvalidArgument("pipe lengths must match the number of pipes");
      }
      for (double length : *lengths_) detail::require_positive(length, "pipe length");
    }
  }

  std::size_t size() const { return pipes_.size(); }
  HeadLossFn const& operator[](std::size_t i) const { return pipes_[i]; }
  HeadLossFn const& at(std::size_t i) const {
    check_index(i);
    return pipes_[i];
  }
  std::vector<HeadLossFn> const& pipes() const { return pipes_; }
  std::optional<std::vector<double>> const& lengths() const { return lengths_; }

  /// Absolute position x L_i; throws if no lengths are attached.
  double absolute_position(std::size_t i, double relative) const {
    check_index(i);
    if (!lengths_) throw InvalidArgument("pipe lengths are not set");
    return relative * (*lengths_)[i];
  }

  void check_index(std::size_t i) const {
    if (i >= pipes_.size()) {
      throw IndexError("pipe index " + std::to_string(i) + " out of range for " +
                       std::to_string(pipes_.size()) + " pipes");
    }
  }

  auto begin() const { return pipes_.begin(); }
  auto end() const { return pipes_.end(); }

 private:
  std::vector<HeadLossFn> pipes_;
  std::optional<std::vector<double>> lengths_;
};

/// Flow admittance G_{-j}(dh): total flow through every pipe except `j`
/// when none of them leaks and the head loss across the network is `dh`.
inline double admittance_excluding(PipeSet const& pipes, std::size_t j, double dh) {
  pipes.check_index(j);
  double total = 0.0;
  for (std::size_t i = 0; i < pipes.size(); ++i) {
    if (i != j) total += invert(pipes[i], dh);
  }
  return total;
}

/// G'_{-j}(dh) by the inverse function rule.
inline double admittance_derivative_excluding(PipeSet const& pipes, std::size_t j, double dh) {
  pipes.check_index(j);
  double total = 0.0;
  for (std::size_t i = 0; i < pipes.size(); ++i) {
    if (i == j) continue;
    double const slope = derivative(pipes[i], invert(pipes[i], dh));
    if (slope == 0.0) {
      throw DerivativeError("head loss slope of pipe " + std::to_string(i) +
                            " vanishes at the operating flow");
    }
    total += 1.0 / slope;
  }
  return total;
}

}  // namespace leakscope
