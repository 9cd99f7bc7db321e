#pragma once
/**
 * @file steppers.hpp
 * @brief Explicit one-step methods and the uniform-step driver.
 *
 * Four methods are provided: the explicit midpoint rule, classical RK4,
 * Luther's seven-stage sixth-order Runge-Kutta method, and the hybrid
 * deferred-correction method DC6RK2/4, which corrects the explicit midpoint
 * rule with five RK4 substeps of size k/5:
 *
 *   v_0 = u_n,  v_i = RK4(v_{i-1}, h)  (i = 1..5, h = k/5)
 *   a   = 125/384 (-3 v_0 -   v_1 +  18 v_2 -  18 v_3 +  v_4 +  3 v_5)
 *   b   =  25/768 (145 v_0 - 387 v_1 + 402 v_2 - 238 v_3 + 93 v_4 - 15 v_5)
 *   u_{n+1} = u_n + a + k F(t_n + k/2, u_n + (k/2) F(t_n, u_n) + b)
 *
 * F(t_n, u_n) is the first stage of the first RK4 substep and is reused, so a
 * step costs 5*4 + 1 = 21 right-hand-side evaluations.
 */

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hdc/ivp.hpp"

namespace hdc {

enum class StepperKind { Rk2Midpoint, Rk4, Rk6, Dc6Rk24 };

inline constexpr std::array<StepperKind, 4> kAllSteppers = {
    StepperKind::Rk2Midpoint, StepperKind::Rk4, StepperKind::Rk6, StepperKind::Dc6Rk24};

constexpr int evals_per_step(StepperKind kind) {
  switch (kind) {
    case StepperKind::Rk2Midpoint: return 2;
    case StepperKind::Rk4: return 4;
    case StepperKind::Rk6: return 7;
    case StepperKind::Dc6Rk24: return 21;
  }
  return 0;
}

constexpr std::string_view to_string(StepperKind kind) {
  switch (kind) {
    case StepperKind::Rk2Midpoint: return "RK2";
    case StepperKind::Rk4: return "RK4";
    case StepperKind::Rk6: return "RK6";
    case StepperKind::Dc6Rk24: return "DC6RK24";
  }
  return "?";
}

/// Accepts the canonical names plus common spellings ("DC6RK2/4", "midpoint").
inline std::optional<StepperKind> parse_stepper(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c == '/' || c == '_' || c == '-') continue;
    key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (key == "RK2" || key == "MIDPOINT" || key == "RK2MIDPOINT") return StepperKind::Rk2Midpoint;
  if (key == "RK4") return StepperKind::Rk4;
  if (key == "RK6" || key == "LUTHER") return StepperKind::Rk6;
  if (key == "DC6RK24" || key == "DC6") return StepperKind::Dc6Rk24;
  return std::nullopt;
}

namespace detail {

// out = u + c * x
inline void axpy(std::span<const double> u, double c, std::span<const double> x,
                 std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = u[i] + c * x[i];
}

struct Rk6Tableau {
  std::array<double, 7> c{};
  std::array<std::array<double, 7>, 7> a{};
  std::array<double, 7> b{};
};

// Luther (1968), seven stages, order six.
inline const Rk6Tableau& luther_tableau() {
  static const Rk6Tableau tab = [] {
    const double s = std::sqrt(21.0);
    Rk6Tableau t;
    t.a[1] = {1.0};
    t.a[2] = {3.0 / 8.0, 1.0 / 8.0};
    t.a[3] = {8.0 / 27.0, 2.0 / 27.0, 8.0 / 27.0};
    t.a[4] = {(-21.0 + 9.0 * s) / 392.0, (-56.0 + 8.0 * s) / 392.0, (336.0 - 48.0 * s) / 392.0,
              (-63.0 + 3.0 * s) / 392.0};
    t.a[5] = {(-1155.0 - 255.0 * s) / 1960.0, (-280.0 - 40.0 * s) / 1960.0, (-320.0 * s) / 1960.0,
              (63.0 + 363.0 * s) / 1960.0, (2352.0 + 392.0 * s) / 1960.0};
    t.a[6] = {(330.0 + 105.0 * s) / 180.0, 120.0 / 180.0, (-200.0 + 280.0 * s) / 180.0,
              (126.0 - 189.0 * s) / 180.0, (-686.0 - 126.0 * s) / 180.0, (490.0 - 70.0 * s) / 180.0};
    t.b = {9.0 / 180.0, 0.0, 64.0 / 180.0, 0.0, 49.0 / 180.0, 49.0 / 180.0, 9.0 / 180.0};
    t.c = {0.0, 1.0, 0.5, 2.0 / 3.0, (7.0 - s) / 14.0, (7.0 + s) / 14.0, 1.0};
    return t;
  }();
  return tab;
}

}  // namespace detail

/// Correction stencils of DC6RK2/4 as exact integer weights and a rational scale.
struct CorrectionStencil {
  std::array<int, 6> weights;
  int scale_num;
  int scale_den;

  double scale() const { return static_cast<double>(scale_num) / scale_den; }
};

inline constexpr CorrectionStencil kStencilA{{-3, -1, 18, -18, 1, 3}, 125, 384};
inline constexpr CorrectionStencil kStencilB{{145, -387, 402, -238, 93, -15}, 25, 768};

/**
 * Scratch storage for one trajectory. Reused across steps so the inner loop
 * does not allocate.
 */
class StepWorkspace {
 public:
  explicit StepWorkspace(std::size_t dim)
      : dim_(dim), tmp_(dim), next_(dim), f0_(dim) {
    for (auto& s : stage_) s.assign(dim, 0.0);
    for (auto& v : sub_) v.assign(dim, 0.0);
    for (auto& v : inc_) v.assign(dim, 0.0);
  }

  std::size_t dim() const { return dim_; }

  /// u <- u + k F(t + k/2, u + (k/2) F(t, u))
  template <class F>
  void midpoint(F&& rhs, double t, std::span<double> u, double k) {
    auto& k1 = stage_[0];
    rhs(t, std::span<const double>(u), std::span<double>(k1));
    detail::axpy(u, 0.5 * k, k1, tmp_);
    rhs(t + 0.5 * k, std::span<const double>(tmp_), std::span<double>(k1));
    for (std::size_t i = 0; i < dim_; ++i) u[i] += k * k1[i];
  }

  /**
   * out <- one classical RK4 step from (t, u). If `k1_given` is non-empty it
   * is used as F(t, u) instead of evaluating it; otherwise K1 is evaluated
   * into `k1_out` when that is non-empty.
   */
  template <class F>
  void rk4(F&& rhs, double t, std::span<const double> u, double k, std::span<double> out,
           std::span<const double> k1_given = {}, std::span<double> k1_out = {},
           std::span<double> inc_out = {}) {
    auto& k1 = stage_[0];
    auto& k2 = stage_[1];
    auto& k3 = stage_[2];
    auto& k4 = stage_[3];
    if (!k1_given.empty()) {
      std::copy(k1_given.begin(), k1_given.end(), k1.begin());
    } else {
      rhs(t, u, std::span<double>(k1));
    }
    if (!k1_out.empty()) std::copy(k1.begin(), k1.end(), k1_out.begin());
    const double half = 0.5 * k;
    detail::axpy(u, half, k1, tmp_);
    rhs(t + half, std::span<const double>(tmp_), std::span<double>(k2));
    detail::axpy(u, half, k2, tmp_);
    rhs(t + half, std::span<const double>(tmp_), std::span<double>(k3));
    detail::axpy(u, k, k3, tmp_);
    rhs(t + k, std::span<const double>(tmp_), std::span<double>(k4));
    const double w = k / 6.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double d = w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!inc_out.empty()) inc_out[i] = d;
      out[i] = u[i] + d;
    }
  }

  template <class F>
  void rk6(F&& rhs, double t, std::span<double> u, double k) {
    const auto& tab = detail::luther_tableau();
    for (std::size_t s = 0; s < 7; ++s) {
      for (std::size_t i = 0; i < dim_; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < s; ++j) acc += tab.a[s][j] * stage_[j][i];
        tmp_[i] = u[i] + k * acc;
      }
      rhs(t + tab.c[s] * k, std::span<const double>(tmp_), std::span<double>(stage_[s]));
    }
    for (std::size_t i = 0; i < dim_; ++i) {
      double acc = 0.0;
      for (std::size_t s = 0; s < 7; ++s) acc += tab.b[s] * stage_[s][i];
      u[i] += k * acc;
    }
  }

  /// One DC6RK2/4 step in place. The substep states and corrections stay
  /// readable through `substates()`, `correction_a()` and `correction_b()`.
  template <class F>
  void dc6(F&& rhs, double t, std::span<double> u, double k) {
    const double h = k / 5.0;
    std::copy(u.begin(), u.end(), sub_[0].begin());
    rk4(rhs, t, sub_[0], h, sub_[1], {}, f0_, inc_[0]);
    for (std::size_t i = 2; i <= 5; ++i)
      rk4(rhs, t + static_cast<double>(i - 1) * h, sub_[i - 1], h, sub_[i], {}, {}, inc_[i - 1]);

    // The weights sum to zero, so sum_j w_j v_j = sum_j T_j (v_j - v_{j-1})
    // with tail sums T_j. Working on the increments avoids cancelling O(1)
    // states against each other.
    static constexpr auto tails = [](const CorrectionStencil& st) {
      std::array<double, 5> t{};
      double acc = 0.0;
      for (std::size_t j = 5; j >= 1; --j) {
        acc += st.weights[j];
        t[j - 1] = acc;
      }
      return t;
    };
    static constexpr auto ta = tails(kStencilA);
    static constexpr auto tb = tails(kStencilB);
    auto& a = stage_[4];
    auto& b = stage_[5];
    const double sa = kStencilA.scale();
    const double sb = kStencilB.scale();
    for (std::size_t i = 0; i < dim_; ++i) {
      double wa = 0.0;
      double wb = 0.0;
      for (std::size_t j = 0; j < 5; ++j) {
        wa += ta[j] * inc_[j][i];
        wb += tb[j] * inc_[j][i];
      }
      a[i] = sa * wa;
      b[i] = sb * wb;
      tmp_[i] = u[i] + 0.5 * k * f0_[i] + b[i];
    }
    auto& fm = stage_[6];
    rhs(t + 0.5 * k, std::span<const double>(tmp_), std::span<double>(fm));
    for (std::size_t i = 0; i < dim_; ++i) u[i] = u[i] + a[i] + k * fm[i];
  }

  template <class F>
  void advance(StepperKind kind, F&& rhs, double t, std::span<double> u, double k) {
    switch (kind) {
      case StepperKind::Rk2Midpoint: midpoint(rhs, t, u, k); return;
      case StepperKind::Rk4:
        rk4(rhs, t, u, k, next_);
        std::copy(next_.begin(), next_.end(), u.begin());
        return;
      case StepperKind::Rk6: rk6(rhs, t, u, k); return;
      case StepperKind::Dc6Rk24: dc6(rhs, t, u, k); return;
    }
  }

  const std::array<State, 6>& substates() const { return sub_; }
  const State& correction_a() const { return stage_[4]; }
  const State& correction_b() const { return stage_[5]; }
  const State& first_stage() const { return f0_; }

 private:
  std::size_t dim_;
  std::array<State, 7> stage_;
  std::array<State, 6> sub_;
  std::array<State, 5> inc_;
  State tmp_, next_, f0_;
};

// ---------------------------------------------------------------------------
// Free-function forms, convenient for tests and one-off use.
// ---------------------------------------------------------------------------

struct Rk4Result {
  State u_next;
  State k1;
};

template <class F>
Rk4Result rk4_step(F&& rhs, double t, std::span<const double> u, double k) {
  StepWorkspace ws(u.size());
  Rk4Result r{State(u.size()), State(u.size())};
  ws.rk4(rhs, t, u, k, r.u_next, {}, r.k1);
  return r;
}

template <class F>
State midpoint_step(F&& rhs, double t, std::span<const double> u, double k) {
  StepWorkspace ws(u.size());
  State out(u.begin(), u.end());
  ws.midpoint(rhs, t, out, k);
  return out;
}

template <class F>
State rk6_step(F&& rhs, double t, std::span<const double> u, double k) {
  StepWorkspace ws(u.size());
  State out(u.begin(), u.end());
  ws.rk6(rhs, t, out, k);
  return out;
}

template <class F>
State dc6_step(F&& rhs, double t, std::span<const double> u, double k) {
  StepWorkspace ws(u.size());
  State out(u.begin(), u.end());
  ws.dc6(rhs, t, out, k);
  return out;
}

/// Intermediate quantities of one DC6RK2/4 step.
struct DcStepWork {
  double substep = 0.0;
  std::array<State, 6> sub_states;
  State a;
  State b;
  State u_next;
};

template <class F>
DcStepWork dc6_step_detailed(F&& rhs, double t, std::span<const double> u, double k) {
  StepWorkspace ws(u.size());
  DcStepWork w;
  w.u_next.assign(u.begin(), u.end());
  ws.dc6(rhs, t, w.u_next, k);
  w.substep = k / 5.0;
  w.sub_states = ws.substates();
  w.a = ws.correction_a();
  w.b = ws.correction_b();
  return w;
}

template <class F>
State apply_stepper(StepperKind kind, F&& rhs, double t, std::span<const double> u, double k) {
  StepWorkspace ws(u.size());
  State out(u.begin(), u.end());
  ws.advance(kind, rhs, t, out, k);
  return out;
}

// ---------------------------------------------------------------------------
// Uniform-step driver
// ---------------------------------------------------------------------------

/**
 * March from t = 0 to T with k = T/N, storing the states at the given step
 * indices (strictly increasing, within [0, N]). Stops at the first step whose
 * result fails `check_finite`.
 */
inline TrajectoryRun integrate_at(const OdeProblem& problem, StepperKind kind, std::size_t n_steps,
                                  std::span<const std::size_t> indices) {
  if (n_steps < 1) throw std::invalid_argument("integrate: n_steps must be >= 1");
  if (problem.initial.size() != problem.dim) throw std::invalid_argument("integrate: bad initial state");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] > n_steps || (i > 0 && indices[i] <= indices[i - 1]))
      throw std::invalid_argument("integrate: sample indices must increase within [0, N]");
  }

  TrajectoryRun run;
  run.n_steps = n_steps;
  run.step = problem.t_end / static_cast<double>(n_steps);
  const double k = run.step;

  std::uint64_t evals = 0;
  auto counted = [&](double t, std::span<const double> u, std::span<double> du) {
    ++evals;
    problem.rhs(t, u, du);
  };

  State u = problem.initial;
  StepWorkspace ws(problem.dim);
  std::size_t next_sample = 0;
  auto record = [&](std::size_t n) {
    if (next_sample < indices.size() && indices[next_sample] == n) {
      run.sample_steps.push_back(n);
      run.sample_times.push_back(static_cast<double>(n) * k);
      run.sample_states.push_back(u);
      ++next_sample;
    }
  };

  record(0);
  for (std::size_t n = 0; n < n_steps; ++n) {
    ws.advance(kind, counted, static_cast<double>(n) * k, u, k);
    if (!check_finite(u)) {
      run.status = RunStatus::Diverged;
      run.diverged_at_step = n + 1;
      break;
    }
    record(n + 1);
  }
  run.rhs_evals = evals;
  return run;
}

inline TrajectoryRun integrate(const OdeProblem& problem, StepperKind kind, std::size_t n_steps,
                               std::size_t max_samples = kOdeSampleCap) {
  const auto idx = sample_indices(n_steps, max_samples);
  return integrate_at(problem, kind, n_steps, idx);
}

/// N = T/k, rejecting steps that do not divide the horizon.
inline std::size_t steps_for(double t_end, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("step size must be positive");
  const double n = t_end / k;
  const double rounded = std::round(n);
  if (rounded < 1.0 || std::abs(n - rounded) > 1e-6 * std::max(1.0, rounded))
    throw std::invalid_argument("step size does not divide the time interval");
  return static_cast<std::size_t>(rounded);
}

}  // namespace hdc
