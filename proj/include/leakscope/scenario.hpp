#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "leakscope/errors.hpp"
#include "leakscope/headloss.hpp"
#include "leakscope/hydraulics.hpp"
#include "leakscope/isolation.hpp"

namespace leakscope {

/// Raised for unreadable or invalid scenario files; lists every violation.
class ScenarioError : public Error {
 public:
  explicit ScenarioError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  std::vector<std::string> const& violations() const { return violations_; }

 private:
  static std::string join(std::vector<std::string> const& v) {
    std::string out = "invalid scenario:";
    for (auto const& s : v) out += "\n  " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

struct AnalysisOptions {
  double eps_spread = kDefaultSpreadTolerance;
  double eps_fit = kDefaultFitTolerance;
  double nominal_dh = 1.0;
  double h_out = 1.0;              // outlet head held fixed in dh sweeps
  std::vector<double> dh_grid;     // dh samples for residual sweeps and confusion flows
  std::vector<double> h_y;         // elevation head per pipe for leak fits
};

struct Scenario {
  PipeSet pipes;
  LeakSpec leak;
  std::vector<std::pair<double, double>> boundary;  // (h_in, h_out)
  AnalysisOptions analysis;
};

/// `steps` evenly spaced values from `from` to `to`, both ends included.
inline std::vector<double> linear_grid(double from, double to, std::size_t steps) {
  std::vector<double> out;
  out.reserve(steps);
  if (steps == 1) out.push_back(from);
  for (std::size_t i = 0; steps > 1 && i < steps; ++i) {
    out.push_back(i + 1 == steps ? to : from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1));
  }
  return out;
}

namespace detail {

using nlohmann::json;

// Collects violations instead of stopping at the first one.
class ScenarioReader {
 public:
  std::vector<std::string> violations;

  void fail(std::string const& path, std::string const& message) { violations.push_back(path + ": " + message); }

  std::optional<double> number(json const& obj, std::string const& key, std::string const& path,
                               bool required = true) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(path + "." + key, "missing");
      return std::nullopt;
    }
    if (!it->is_number()) {
      fail(path + "." + key, "must be a number");
      return std::nullopt;
    }
    double const v = it->get<double>();
    if (!std::isfinite(v)) {
      fail(path + "." + key, "must be finite");
      return std::nullopt;
    }
    return v;
  }

  std::optional<double> positive(json const& obj, std::string const& key, std::string const& path) {
    auto v = number(obj, key, path);
    if (v && !(*v > 0.0)) {
      fail(path + "." + key, "must be positive");
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::size_t> count(json const& obj, std::string const& key, std::string const& path) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      fail(path + "." + key, "missing");
      return std::nullopt;
    }
    if (!it->is_number_integer() || it->get<long long>() < 1) {
      fail(path + "." + key, "must be a positive integer");
      return std::nullopt;
    }
    return static_cast<std::size_t>(it->get<long long>());
  }

  std::optional<HeadLossFn> head_loss(json const& p, std::string const& path) {
    if (!p.is_object()) {
      fail(path, "must be an object");
      return std::nullopt;
    }
    auto t = p.find("type");
    if (t == p.end() || !t->is_string()) {
      fail(path + ".type", "missing or not a string");
      return std::nullopt;
    }
    std::string const type = t->get<std::string>();
    if (type == "linear") {
      if (auto r = positive(p, "R", path)) return Linear{*r};
    } else if (type == "signed_quadratic") {
      if (auto c = positive(p, "c", path)) return SignedQuadratic{*c};
    } else if (type == "quadratic_plus_linear") {
      if (auto c = positive(p, "c", path)) return QuadraticPlusLinear{*c};
    } else if (type == "power_law") {
      auto c = positive(p, "c", path);
      auto g = positive(p, "gamma", path);
      if (c && g) return PowerLaw{*c, *g};
    } else {
      fail(path + ".type", "unknown head loss type '" + type + "'");
    }
    return std::nullopt;
  }

  std::optional<LeakFn> leak_law(json const& f, std::string const& path) {
    if (!f.is_object()) {
      fail(path, "must be an object");
      return std::nullopt;
    }
    auto t = f.find("type");
    if (t == f.end() || !t->is_string()) {
      fail(path + ".type", "missing or not a string");
      return std::nullopt;
    }
    std::string const type = t->get<std::string>();
    if (type == "power_law" || type == "sqrt") {
      std::optional<double> c = f.contains("C") ? positive(f, "C", path) : std::optional<double>(1.0);
      std::optional<double> beta = type == "sqrt" ? std::optional<double>(0.5) : positive(f, "beta", path);
      std::optional<double> h_y = f.contains("h_y") ? number(f, "h_y", path) : std::optional<double>(0.0);
      if (type == "power_law" && !f.contains("C")) fail(path + ".C", "missing");
      if (c && beta && h_y) return PowerLawLeak{*c, *beta, *h_y};
    } else if (type == "fixed_demand") {
      auto q = number(f, "q_leak", path);
      if (q && !(*q >= 0.0)) fail(path + ".q_leak", "must be non-negative");
      else if (q) return FixedDemand{*q};
    } else {
      fail(path + ".type", "unknown leak function type '" + type + "'");
    }
    return std::nullopt;
  }

  std::optional<std::vector<double>> grid(json const& g, std::string const& path) {
    if (g.is_array()) {
      std::vector<double> out;
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!g[i].is_number()) {
          fail(path + "[" + std::to_string(i) + "]", "must be a number");
          return std::nullopt;
        }
        out.push_back(g[i].get<double>());
      }
      return out;
    }
    if (g.is_object()) {
      auto from = number(g, "from", path);
      auto to = number(g, "to", path);
      auto steps = count(g, "steps", path);
      if (from && to && steps) return linear_grid(*from, *to, *steps);
      return std::nullopt;
    }
    fail(path, "must be a list of numbers or a {from, to, steps} range");
    return std::nullopt;
  }
};

}  // namespace detail

/// Validates and builds a scenario from a parsed JSON document.
inline Scenario scenario_from_json(nlohmann::json const& doc) {
  detail::ScenarioReader rd;
  if (!doc.is_object()) throw ScenarioError({"<root>: must be an object"});

  std::vector<HeadLossFn> losses;
  std::vector<double> lengths;
  bool any_length = false;
  auto pipes_it = doc.find("pipes");
  if (pipes_it == doc.end() || !pipes_it->is_array() || pipes_it->empty()) {
    rd.fail("pipes", "must be a non-empty list");
  } else {
    for (std::size_t i = 0; i < pipes_it->size(); ++i) {
      std::string const path = "pipes[" + std::to_string(i) + "]";
      auto const& p = (*pipes_it)[i];
      if (auto u = rd.head_loss(p, path)) losses.push_back(*u);
      if (p.is_object() && p.contains("length")) {
        any_length = true;
        if (auto l = rd.positive(p, "length", path)) lengths.push_back(*l);
      }
    }
    if (any_length && lengths.size() != pipes_it->size()) rd.fail("pipes", "lengths must be given for every pipe or none");
  }
  std::size_t const n = pipes_it != doc.end() && pipes_it->is_array() ? pipes_it->size() : 0;

  std::optional<std::size_t> k;
  double x = 0.0;  // only read once every violation check passed
  std::optional<LeakFn> law;
  auto leak_it = doc.find("leak");
  if (leak_it == doc.end() || !leak_it->is_object()) {
    rd.fail("leak", "missing or not an object");
  } else {
    auto const& l = *leak_it;
    if (!l.contains("k")) {
      rd.fail("leak.k", "missing");
    } else if (!l["k"].is_number_integer()) {
      rd.fail("leak.k", "must be an integer pipe number");
    } else {
      long long const kk = l["k"].get<long long>();
      if (kk < 1 || static_cast<std::size_t>(kk) > n) {
        rd.fail("leak.k", "pipe " + std::to_string(kk) + " out of range 1.." + std::to_string(n));
      } else {
        k = static_cast<std::size_t>(kk - 1);
      }
    }
    auto const position = rd.number(l, "x", "leak");
    if (position) x = *position;
    if (position && !(x > 0.0 && x < 1.0)) {
      rd.fail("leak.x", "must lie in the open interval (0, 1)");
    }
    if (!l.contains("function")) {
      rd.fail("leak.function", "missing");
    } else {
      law = rd.leak_law(l["function"], "leak.function");
    }
  }

  std::vector<std::pair<double, double>> boundary;
  auto b_it = doc.find("boundary");
  if (b_it == doc.end()) {
    rd.fail("boundary", "missing");
  } else if (b_it->is_array()) {
    for (std::size_t i = 0; i < b_it->size(); ++i) {
      auto const& pair = (*b_it)[i];
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
        rd.fail("boundary[" + std::to_string(i) + "]", "must be a pair [h_in, h_out]");
        continue;
      }
      boundary.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
  } else if (b_it->is_object()) {
    auto h_out = rd.number(*b_it, "h_out", "boundary");
    std::optional<std::vector<double>> h_in;
    if (!b_it->contains("h_in")) rd.fail("boundary.h_in", "missing");
    else h_in = rd.grid((*b_it)["h_in"], "boundary.h_in");
    if (h_out && h_in) {
      for (double h : *h_in) boundary.emplace_back(h, *h_out);
    }
  } else {
    rd.fail("boundary", "must be a list of [h_in, h_out] pairs or a range");
  }

  AnalysisOptions analysis;
  if (!boundary.empty()) {
    analysis.nominal_dh = boundary.front().first - boundary.front().second;
    analysis.h_out = boundary.front().second;
  }
  analysis.h_y.assign(n, 0.0);
  auto a_it = doc.find("analysis");
  if (a_it != doc.end()) {
    if (!a_it->is_object()) {
      rd.fail("analysis", "must be an object");
    } else {
      auto const& a = *a_it;
      if (a.contains("eps_spread")) {
        if (auto v = rd.positive(a, "eps_spread", "analysis")) analysis.eps_spread = *v;
      }
      if (a.contains("eps_fit")) {
        if (auto v = rd.positive(a, "eps_fit", "analysis")) analysis.eps_fit = *v;
      }
      if (a.contains("nominal_dh")) {
        if (auto v = rd.number(a, "nominal_dh", "analysis")) analysis.nominal_dh = *v;
      }
      if (a.contains("h_out")) {
        if (auto v = rd.number(a, "h_out", "analysis")) analysis.h_out = *v;
      }
      if (a.contains("dh_grid")) {
        if (auto g = rd.grid(a["dh_grid"], "analysis.dh_grid")) analysis.dh_grid = *g;
      }
      if (a.contains("h_y")) {
        auto g = rd.grid(a["h_y"], "analysis.h_y");
        if (g && g->size() != n) rd.fail("analysis.h_y", "needs one elevation per pipe");
        else if (g) analysis.h_y = *g;
      }
    }
  }
  if (analysis.dh_grid.empty()) {
    analysis.dh_grid = linear_grid(analysis.nominal_dh - 1.0, analysis.nominal_dh + 1.0, 41);
  }

  if (!rd.violations.empty()) throw ScenarioError(rd.violations);
  try {
    PipeSet pipes(std::move(losses), any_length ? std::optional(std::move(lengths)) : std::nullopt);
    LeakSpec leak{*k, x, *law};
    validate(leak, pipes);
    return Scenario{std::move(pipes), std::move(leak), std::move(boundary), std::move(analysis)};
  } catch (Error const& e) {
    throw ScenarioError({std::string("<root>: ") + e.what()});
  }
}

inline Scenario parse_scenario_text(std::string const& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (nlohmann::json::parse_error const& e) {
    throw ScenarioError({std::string("parse error: ") + e.what()});
  }
  return scenario_from_json(doc);
}

inline Scenario parse_scenario(std::string const& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError({path + ": cannot open scenario file"});
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str());
}

}  // namespace leakscope
