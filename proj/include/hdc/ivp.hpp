#pragma once
/**
 * @file ivp.hpp
 * @brief Initial value problem data model, error norms and order estimates.
 *
 * Everything here is shared by the steppers, the reference generator and the
 * experiment runner. States are plain `std::vector<double>`; right-hand sides
 * write into a caller-provided output span so the steppers can reuse scratch
 * buffers across steps.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hdc {

using State = std::vector<double>;

/// du = F(t, u). Must not retain the spans.
using Rhs = std::function<void(double t, std::span<const double> u, std::span<double> du)>;

/// Closed-form solution u(t), written into `out`.
using ExactSolution = std::function<void(double t, std::span<double> out)>;

/// Components with |u_i| above this are treated as blown up.
inline constexpr double kDivergenceBound = 1e16;

/// Default sampling caps used when computing error norms.
inline constexpr std::size_t kOdeSampleCap = 60000;
inline constexpr std::size_t kPdeSampleCap = 100;

struct OdeProblem {
  std::string name;
  /// Canonical "name(param=value,...)" string; identifies cached references.
  std::string tag;
  std::size_t dim = 0;
  double t_end = 0.0;
  State initial;
  Rhs rhs;
  std::optional<ExactSolution> exact;

  State eval_rhs(double t, std::span<const double> u) const {
    State du(dim);
    rhs(t, u, du);
    return du;
  }

  State exact_at(double t) const {
    if (!exact) throw std::logic_error("problem '" + name + "' has no exact solution");
    State out(dim);
    (*exact)(t, out);
    return out;
  }
};

/// "%.17g" rendering used for canonical tags and lossless CSV fields.
inline std::string format_exact(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

enum class RunStatus { Completed, Diverged };

/**
 * Sampled output of a uniform-step integration.
 *
 * When `status == Diverged`, `diverged_at_step` holds the index n of the first
 * step whose result failed `check_finite`; that state is not stored.
 */
struct TrajectoryRun {
  double step = 0.0;
  std::size_t n_steps = 0;
  std::vector<std::size_t> sample_steps;
  std::vector<double> sample_times;
  std::vector<State> sample_states;
  std::uint64_t rhs_evals = 0;
  RunStatus status = RunStatus::Completed;
  std::size_t diverged_at_step = 0;

  bool completed() const { return status == RunStatus::Completed; }
};

/**
 * Evenly spread step indices in [0, n_steps], always including both ends.
 *
 * Index j is round(j * n_steps / (S - 1)) with S = min(n_steps + 1,
 * max_samples). Because the spacing is at least one step the rounded values
 * are already strictly increasing.
 */
inline std::vector<std::size_t> sample_indices(std::size_t n_steps, std::size_t max_samples) {
  if (n_steps < 1) throw std::invalid_argument("sample_indices: n_steps must be positive");
  if (max_samples < 2) throw std::invalid_argument("sample_indices: max_samples must be >= 2");
  if (n_steps + 1 <= max_samples) {
    std::vector<std::size_t> all(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i) all[i] = i;
    return all;
  }
  const std::uint64_t gaps = max_samples - 1;
  std::vector<std::size_t> out;
  out.reserve(max_samples);
  for (std::uint64_t j = 0; j < max_samples; ++j) {
    // floor(j*N/gaps + 1/2) in integer arithmetic
    const auto idx = static_cast<std::size_t>((2 * j * n_steps + gaps) / (2 * gaps));
    if (out.empty() || idx != out.back()) out.push_back(idx);
  }
  return out;
}

/// True iff every component is finite and bounded by `bound` in magnitude.
inline bool check_finite(std::span<const double> u, double bound = kDivergenceBound) {
  for (double x : u) {
    if (!std::isfinite(x) || std::abs(x) > bound) return false;
  }
  return true;
}

/// Component-wise max over the stored samples of |state - exact(t)|.
inline State max_abs_error(const TrajectoryRun& run, const ExactSolution& exact) {
  if (!run.completed()) throw std::invalid_argument("max_abs_error: run diverged");
  if (run.sample_states.empty()) return {};
  const std::size_t d = run.sample_states.front().size();
  State err(d, 0.0);
  State ref(d);
  for (std::size_t s = 0; s < run.sample_times.size(); ++s) {
    exact(run.sample_times[s], ref);
    const State& u = run.sample_states[s];
    for (std::size_t i = 0; i < d; ++i) err[i] = std::max(err[i], std::abs(u[i] - ref[i]));
  }
  return err;
}

/// Component-wise max error against reference states sampled at the same times.
inline State max_abs_error(const TrajectoryRun& run, std::span<const State> reference) {
  if (!run.completed()) throw std::invalid_argument("max_abs_error: run diverged");
  if (reference.size() != run.sample_states.size())
    throw std::invalid_argument("max_abs_error: sample count mismatch");
  if (run.sample_states.empty()) return {};
  const std::size_t d = run.sample_states.front().size();
  State err(d, 0.0);
  for (std::size_t s = 0; s < reference.size(); ++s) {
    if (reference[s].size() != d) throw std::invalid_argument("max_abs_error: dimension mismatch");
    for (std::size_t i = 0; i < d; ++i)
      err[i] = std::max(err[i], std::abs(run.sample_states[s][i] - reference[s][i]));
  }
  return err;
}

namespace detail {
inline double euclidean_distance(std::span<const double> a, std::span<const double> b,
                                 std::size_t begin, std::size_t end) {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}
}  // namespace detail

/**
 * Max over samples of the Euclidean norm of the state difference.
 *
 * `blocks` splits the state into equally sized contiguous groups (species of
 * a reaction-diffusion system); one norm is returned per block.
 */
inline State euclidean_error(const TrajectoryRun& run, std::span<const State> reference,
                             std::size_t blocks = 1) {
  if (!run.completed()) throw std::invalid_argument("euclidean_error: run diverged");
  if (reference.size() != run.sample_states.size())
    throw std::invalid_argument("euclidean_error: sample count mismatch");
  if (blocks == 0) throw std::invalid_argument("euclidean_error: blocks must be positive");
  State err(blocks, 0.0);
  for (std::size_t s = 0; s < reference.size(); ++s) {
    const State& u = run.sample_states[s];
    if (reference[s].size() != u.size() || u.size() % blocks != 0)
      throw std::invalid_argument("euclidean_error: dimension mismatch");
    const std::size_t width = u.size() / blocks;
    for (std::size_t b = 0; b < blocks; ++b)
      err[b] = std::max(err[b], detail::euclidean_distance(u, reference[s], b * width, (b + 1) * width));
  }
  return err;
}

/// Euclidean error against a closed-form solution evaluated at the sample times.
inline State euclidean_error(const TrajectoryRun& run, const ExactSolution& exact,
                             std::size_t blocks = 1) {
  std::vector<State> ref;
  ref.reserve(run.sample_times.size());
  for (double t : run.sample_times) {
    State r(run.sample_states.empty() ? 0 : run.sample_states.front().size());
    exact(t, r);
    ref.push_back(std::move(r));
  }
  return euclidean_error(run, ref, blocks);
}

/**
 * ln(e_coarse / e_fine) / ln(k_coarse / k_fine).
 *
 * Returns nullopt when either error is zero, negative or not finite; tables
 * render that as a blank order.
 */
inline std::optional<double> observed_order(double e_coarse, double k_coarse, double e_fine,
                                            double k_fine) {
  if (!(e_coarse > 0.0) || !(e_fine > 0.0) || !std::isfinite(e_coarse) || !std::isfinite(e_fine))
    return std::nullopt;
  if (!(k_coarse > 0.0) || !(k_fine > 0.0) || !(k_coarse > k_fine)) return std::nullopt;
  return std::log(e_coarse / e_fine) / std::log(k_coarse / k_fine);
}

/// One row of a convergence table. Diverged rows carry NaN errors.
struct ConvergenceRecord {
  double step = 0.0;
  std::size_t n_steps = 0;
  State errors;
  std::vector<std::optional<double>> orders;
  bool diverged = false;
};

/**
 * Fill in `orders` for each record from its predecessor (the next coarser
 * step). Records must be ordered by decreasing step.
 */
inline void assign_orders(std::vector<ConvergenceRecord>& rows) {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    rows[r].orders.assign(rows[r].errors.size(), std::nullopt);
    if (r == 0 || rows[r].diverged || rows[r - 1].diverged) continue;
    const auto& prev = rows[r - 1];
    for (std::size_t i = 0; i < rows[r].errors.size() && i < prev.errors.size(); ++i)
      rows[r].orders[i] = observed_order(prev.errors[i], prev.step, rows[r].errors[i], rows[r].step);
  }
}

}  // namespace hdc
