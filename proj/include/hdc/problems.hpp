#pragma once
/**
 * @file problems.hpp
 * @brief Stiff ODE benchmarks: Bernoulli, oscillatory, B5, E5, Robertson and
 * van der Pol, addressable by name with parameter overrides.
 */

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdc/ivp.hpp"

namespace hdc {

using ParamMap = std::map<std::string, double>;

namespace detail {
inline double param_or(const ParamMap& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

// u^20 with five multiplications.
inline double pow20(double u) {
  const double u2 = u * u;
  const double u4 = u2 * u2;
  const double u8 = u4 * u4;
  const double u16 = u8 * u8;
  return u16 * u4;
}
}  // namespace detail

/// u' = -0.1 u - 1000 u^20, u(0) = 1 on [0, 10]; u = (10001 e^{1.9t} - 10000)^{-1/19}.
inline OdeProblem bernoulli(double t_end = 10.0) {
  OdeProblem p;
  p.name = "bernoulli";
  p.tag = "bernoulli(T=" + format_exact(t_end) + ")";
  p.dim = 1;
  p.t_end = t_end;
  p.initial = {1.0};
  p.rhs = [](double, std::span<const double> u, std::span<double> du) {
    du[0] = -0.1 * u[0] - 1000.0 * detail::pow20(u[0]);
  };
  p.exact = [](double t, std::span<double> out) {
    out[0] = std::pow(10001.0 * std::exp(1.9 * t) - 10000.0, -1.0 / 19.0);
  };
  return p;
}

/// u' = lambda u cos t, u(0) = 1; u = exp(lambda sin t).
inline OdeProblem oscillatory(double lambda = 10.0, double t_end = 1e6) {
  OdeProblem p;
  p.name = "oscillatory";
  p.tag = "oscillatory(lambda=" + format_exact(lambda) + ",T=" + format_exact(t_end) + ")";
  p.dim = 1;
  p.t_end = t_end;
  p.initial = {1.0};
  p.rhs = [lambda](double t, std::span<const double> u, std::span<double> du) {
    du[0] = lambda * u[0] * std::cos(t);
  };
  p.exact = [lambda](double t, std::span<double> out) { out[0] = std::exp(lambda * std::sin(t)); };
  return p;
}

/// Block-diagonal linear system with eigenvalues -10 +- alpha i, -4, -1, -0.5, -0.1.
inline OdeProblem b5(double alpha = 5000.0, double t_end = 20.0) {
  OdeProblem p;
  p.name = "b5";
  p.tag = "b5(alpha=" + format_exact(alpha) + ",T=" + format_exact(t_end) + ")";
  p.dim = 6;
  p.t_end = t_end;
  p.initial.assign(6, 1.0);
  p.rhs = [alpha](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = -10.0 * y[0] + alpha * y[1];
    dy[1] = -alpha * y[0] - 10.0 * y[1];
    dy[2] = -4.0 * y[2];
    dy[3] = -y[3];
    dy[4] = -0.5 * y[4];
    dy[5] = -0.1 * y[5];
  };
  p.exact = [alpha](double t, std::span<double> y) {
    const double damp = std::exp(-10.0 * t);
    const double c = std::cos(alpha * t);
    const double s = std::sin(alpha * t);
    y[0] = damp * (c + s);
    y[1] = damp * (c - s);
    y[2] = std::exp(-4.0 * t);
    y[3] = std::exp(-t);
    y[4] = std::exp(-0.5 * t);
    y[5] = std::exp(-0.1 * t);
  };
  return p;
}

enum class E5Form { Printed, Classical };

/**
 * E5 chemical kinetics, four species on [0, 1000].
 *
 * `Printed` couples y1 y2 in the B terms and grows y4 with +C y4. That system
 * is unstable: y3 turns negative and y2 grows without bound. `Classical`
 * couples y1 y3 and damps y4 with -C y4. Its solution stays within
 * [1.6e-3, 1.76e-3] x [0, 1.5e-10] x [0, 8.3e-12] x [0, 1.4e-10] and its
 * stiffest eigenvalue is about -B y1 - C = -2.05e4.
 */
inline OdeProblem e5(double t_end = 1000.0, E5Form form = E5Form::Printed) {
  OdeProblem p;
  p.name = "e5";
  p.tag = "e5(T=" + format_exact(t_end) + ",classical=" + (form == E5Form::Classical ? "1" : "0") + ")";
  p.dim = 4;
  p.t_end = t_end;
  p.initial = {1.76e-3, 0.0, 0.0, 0.0};
  p.rhs = [form](double, std::span<const double> y, std::span<double> dy) {
    constexpr double A = 7.89e-10;
    constexpr double B = 1.1e7;
    constexpr double MC = 1.13e9;
    constexpr double C = 1.13e3;
    const bool classical = form == E5Form::Classical;
    const double r1 = A * y[0];
    const double r2 = B * y[0] * (classical ? y[2] : y[1]);
    const double r3 = MC * y[1] * y[2];
    dy[0] = -r1 - r2;
    dy[1] = r1 - r3;
    dy[2] = r1 - r2 + C * y[3] - r3;
    dy[3] = r2 + (classical ? -C : C) * y[3];
  };
  return p;
}

/// Robertson kinetics, y(0) = (1, 0, 0). The components sum to a conserved 1.
inline OdeProblem robertson(double t_end = 1e5) {
  OdeProblem p;
  p.name = "robertson";
  p.tag = "robertson(T=" + format_exact(t_end) + ")";
  p.dim = 3;
  p.t_end = t_end;
  p.initial = {1.0, 0.0, 0.0};
  p.rhs = [](double, std::span<const double> y, std::span<double> dy) {
    const double slow = 0.04 * y[0];
    const double mid = 1e4 * y[1] * y[2];
    const double fast = 3e7 * y[1] * y[1];
    dy[0] = -slow + mid;
    dy[1] = slow - mid - fast;
    dy[2] = fast;
  };
  return p;
}

/// y1' = y2, y2' = mu (1 - y1^2) y2 - y1, y(0) = (2, 0).
inline OdeProblem van_der_pol(double mu = 1000.0, double t_end = 3000.0) {
  OdeProblem p;
  p.name = "vdp";
  p.tag = "vdp(mu=" + format_exact(mu) + ",T=" + format_exact(t_end) + ")";
  p.dim = 2;
  p.t_end = t_end;
  p.initial = {2.0, 0.0};
  p.rhs = [mu](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = mu * (1.0 - y[0] * y[0]) * y[1] - y[0];
  };
  return p;
}

struct ProblemInfo {
  std::string name;
  std::string params;  // human-readable list of overridable parameters
  std::string summary;
};

inline const std::vector<ProblemInfo>& ode_problem_catalog() {
  static const std::vector<ProblemInfo> cat = {
      {"bernoulli", "T=10", "u' = -0.1u - 1000u^20, exact solution"},
      {"oscillatory", "lambda=10 T=1e6", "u' = lambda u cos t, exact solution"},
      {"b5", "alpha=5000 T=20", "6x6 linear, complex eigenvalues, exact solution"},
      {"e5", "T=1000 classical=0", "chemical kinetics, reference via oracle"},
      {"robertson", "T=1e5", "Robertson kinetics, reference via oracle"},
      {"vdp", "mu=1000 T=3000", "van der Pol oscillator, reference via oracle"},
  };
  return cat;
}

/// Build an ODE benchmark by name. Unknown names or parameters throw std::invalid_argument.
inline OdeProblem make_ode_problem(const std::string& name, const ParamMap& params = {}) {
  auto check_keys = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : params) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || k == a;
      if (!ok) throw std::invalid_argument("problem '" + name + "' has no parameter '" + k + "'");
    }
  };
  using detail::param_or;
  if (name == "bernoulli") {
    check_keys({"T"});
    return bernoulli(param_or(params, "T", 10.0));
  }
  if (name == "oscillatory") {
    check_keys({"lambda", "T"});
    return oscillatory(param_or(params, "lambda", 10.0), param_or(params, "T", 1e6));
  }
  if (name == "b5") {
    check_keys({"alpha", "T"});
    return b5(param_or(params, "alpha", 5000.0), param_or(params, "T", 20.0));
  }
  if (name == "e5") {
    check_keys({"T", "classical"});
    const double c = param_or(params, "classical", 0.0);
    if (c != 0.0 && c != 1.0) throw std::invalid_argument("e5: classical must be 0 or 1");
    return e5(param_or(params, "T", 1000.0), c == 1.0 ? E5Form::Classical : E5Form::Printed);
  }
  if (name == "robertson") {
    check_keys({"T"});
    return robertson(param_or(params, "T", 1e5));
  }
  if (name == "vdp" || name == "van_der_pol") {
    check_keys({"mu", "T"});
    return van_der_pol(param_or(params, "mu", 1000.0), param_or(params, "T", 3000.0));
  }
  throw std::invalid_argument("unknown problem '" + name + "'");
}

}  // namespace hdc
