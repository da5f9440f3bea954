#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "leakscope/errors.hpp"
#include "leakscope/headloss.hpp"
#include "leakscope/hydraulics.hpp"
#include "leakscope/localization.hpp"
#include "leakscope/sensitivity.hpp"

namespace leakscope {

inline constexpr double kDefaultSpreadTolerance = 1e-6;
inline constexpr double kDefaultFitTolerance = 1e-6;

struct Isolated {
  std::size_t pipe;
  double position;  // mean of the pipe's candidate series
};

struct Ambiguous {
  /// Pipes whose candidate stayed constant; empty when none did.
  std::vector<std::size_t> pipes;
  /// Structural reasons among those pipes (identical or linear pairs).
  std::vector<AmbiguousPair> inherent;
};

struct IsolationVerdict {
  std::vector<std::vector<double>> series;  // [pipe][data point] candidate positions
  std::vector<double> spreads;              // max - min of each series
  std::vector<double> means;
  std::variant<Isolated, Ambiguous> decision;

  bool isolated() const { return std::holds_alternative<Isolated>(decision); }
};

/// Isolates the leaking pipe as the only one whose leak candidate does not
/// move between hydraulic states. The true pipe's candidate is constant by
/// construction; other pipes' candidates drift unless the pair is inherently
/// ambiguous.
inline IsolationVerdict isolate_by_consistency(PipeSet const& pipes, std::vector<DataPoint> const& data,
                                               double eps_spread = kDefaultSpreadTolerance) {
  if (data.size() < 2) throw TooFewPointsError("consistency isolation needs at least two data points");
  std::size_t const n = pipes.size();
  IsolationVerdict v;
  v.series.assign(n, std::vector<double>(data.size()));
  for (std::size_t p = 0; p < data.size(); ++p) {
    for (std::size_t j = 0; j < n; ++j) v.series[j][p] = candidate_position(pipes, j, data[p]);
  }

  std::vector<std::size_t> plausible;
  for (std::size_t j = 0; j < n; ++j) {
    auto const& s = v.series[j];
    bool const finite = std::all_of(s.begin(), s.end(), [](double x) { return std::isfinite(x); });
    auto const [lo, hi] = std::minmax_element(s.begin(), s.end());
    double sum = 0.0;
    for (double x : s) sum += x;
    v.spreads.push_back(finite ? *hi - *lo : std::numeric_limits<double>::infinity());
    v.means.push_back(sum / static_cast<double>(s.size()));
    if (v.spreads.back() <= eps_spread) plausible.push_back(j);
  }

  if (plausible.size() == 1) {
    v.decision = Isolated{plausible.front(), v.means[plausible.front()]};
    return v;
  }
  Ambiguous amb{plausible, {}};
  for (auto const& pair : detect_inherent_ambiguity(pipes)) {
    bool const a = std::find(plausible.begin(), plausible.end(), pair.first) != plausible.end();
    bool const b = std::find(plausible.begin(), plausible.end(), pair.second) != plausible.end();
    if (a && b) amb.inherent.push_back(pair);
  }
  v.decision = std::move(amb);
  return v;
}

/// Head at the leak implied by the hypothesis "leak in pipe j at x_j",
/// computed from the upstream section.
inline double apparent_leak_head(PipeSet const& pipes, std::size_t j, double x_j, DataPoint const& d) {
  pipes.check_index(j);
  detail::require_interior(x_j);
  double const others = admittance_excluding(pipes, j, d.dh());
  return d.h_in - x_j * evaluate(pipes[j], d.q_in - others);
}

/// Leak outflow; the same for every hypothesized pipe.
inline double apparent_leak_flow(DataPoint const& d) { return d.q_in - d.q_out; }

struct LeakSample {
  double head;
  double flow;
};

struct LeakFitResult {
  std::size_t pipe = 0;
  double coefficient = std::numeric_limits<double>::quiet_NaN();
  double exponent = std::numeric_limits<double>::quiet_NaN();
  double rmse = std::numeric_limits<double>::quiet_NaN();  // in flow units
  bool negative_head = false;
  bool accepted = false;
  std::string error;  // set by isolate_by_leak_fit when the fit could not run
};

/// Fits q = C (h - h_y)^beta by ordinary least squares on
/// log q = log C + beta log(h - h_y). A sample at or below the elevation
/// head rejects the hypothesis outright. The misfit is reported in q-space.
inline LeakFitResult fit_leak_function(std::vector<LeakSample> const& samples, double h_y,
                                       double eps_fit = kDefaultFitTolerance) {
  if (samples.size() < 3) throw DegenerateSampleError("a leak-function fit needs at least three samples");
  LeakFitResult out;
  for (auto const& s : samples) {
    if (!(s.head - h_y > 0.0)) {
      out.negative_head = true;
      return out;
    }
  }
  for (auto const& s : samples) {
    if (!(s.flow > 0.0)) throw DegenerateSampleError("leak-function fit needs strictly positive leak flows");
  }

  double const count = static_cast<double>(samples.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (auto const& s : samples) {
    mean_x += std::log(s.head - h_y);
    mean_y += std::log(s.flow);
  }
  mean_x /= count;
  mean_y /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  for (auto const& s : samples) {
    double const dx = std::log(s.head - h_y) - mean_x;
    sxx += dx * dx;
    sxy += dx * (std::log(s.flow) - mean_y);
  }
  if (!(sxx > 0.0)) throw DegenerateSampleError("leak heads have zero spread in log space");

  out.exponent = sxy / sxx;
  out.coefficient = std::exp(mean_y - out.exponent * mean_x);
  double sq = 0.0;
  for (auto const& s : samples) {
    double const e = s.flow - out.coefficient * std::pow(s.head - h_y, out.exponent);
    sq += e * e;
  }
  out.rmse = std::sqrt(sq / count);
  out.accepted = out.rmse <= eps_fit;
  return out;
}

/// Fits a power-law leak function per hypothesized pipe and ranks the
/// hypotheses: successful fits by rmse, then negative-head rejections, then
/// fits that could not run. Ties go to the lower pipe index.
inline std::vector<LeakFitResult> isolate_by_leak_fit(PipeSet const& pipes, std::vector<DataPoint> const& data,
                                                      std::vector<double> const& candidates,
                                                      std::vector<double> const& h_y,
                                                      double eps_fit = kDefaultFitTolerance) {
  std::size_t const n = pipes.size();
  if (data.size() < 3) throw TooFewPointsError("leak-function isolation needs at least three data points");
  if (candidates.size() != n || h_y.size() != n) {
    throw InvalidArgument("candidate positions and elevation heads must be given for every pipe");
  }
  std::vector<LeakFitResult> results;
  for (std::size_t j = 0; j < n; ++j) {
    LeakFitResult r;
    try {
      std::vector<LeakSample> samples;
      samples.reserve(data.size());
      for (auto const& d : data) samples.push_back({apparent_leak_head(pipes, j, candidates[j], d), apparent_leak_flow(d)});
      r = fit_leak_function(samples, h_y[j], eps_fit);
    } catch (Error const& e) {
      r = LeakFitResult{};
      r.error = e.what();
    }
    r.pipe = j;
    results.push_back(r);
  }
  auto const category = [](LeakFitResult const& r) { return !r.error.empty() ? 2 : r.negative_head ? 1 : 0; };
  std::stable_sort(results.begin(), results.end(), [&](LeakFitResult const& a, LeakFitResult const& b) {
    int const ca = category(a);
    int const cb = category(b);
    if (ca != cb) return ca < cb;
    if (ca == 0 && a.rmse != b.rmse) return a.rmse < b.rmse;
    return a.pipe < b.pipe;
  });
  return results;
}

}  // namespace leakscope
