#pragma once
/**
 * @file pde.hpp
 * @brief Sixth-order finite-difference semidiscretization of 1-D
 * reaction-diffusion equations u_t - mu u_xx + f(x, t, u) = 0.
 *
 * The method of lines gives U' = -(mu / (180 h^2)) M U - F(U, t), where M is
 * the Neumann matrix A (size M+1, nodes 0..M) or the Dirichlet matrix B
 * (size M-1, nodes 1..M-1). Both approximate -180 h^2 d^2/dx^2: interior rows
 * carry the centered stencil [-2, 27, -270, 490, -270, 27, -2], the first and
 * last few rows are one-sided closures. B is A with its first and last rows
 * and columns removed.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hdc/ivp.hpp"

namespace hdc {

enum class BoundaryKind { Dirichlet, Neumann };

inline constexpr std::string_view to_string(BoundaryKind bc) {
  return bc == BoundaryKind::Dirichlet ? "DBC" : "NBC";
}

/// A stencil entry stored as an exact ratio num/den.
struct Coefficient {
  long num;
  long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

namespace detail {

struct ClosureRow {
  std::size_t first_col;
  std::vector<Coefficient> coeffs;
};

inline constexpr std::array<long, 7> kCenteredStencil = {-2, 27, -270, 490, -270, 27, -2};

// Top rows of the Neumann matrix as printed. Row 3 is already centered but is
// kept here so that removing column 0 yields the Dirichlet closure.
inline const std::vector<ClosureRow>& neumann_top_rows() {
  static const std::vector<ClosureRow> rows = {
      {0, {{360}, {-9958, 7}, {6077}, {-15126}, {21290}, {-18310}, {9609}, {-2842}, {2552, 7}}},
      {0, {{-126}, {70}, {486}, {-855}, {670}, {-324}, {90}, {-11}}},
      {0, {{11}, {-214}, {378}, {-130}, {-85}, {54}, {-16}, {2}}},
      {0, {{-2}, {27}, {-270}, {490}, {-270}, {27}, {-2}}},
  };
  return rows;
}

// Top rows of the Dirichlet matrix: Neumann rows 1..3 without column 0.
inline const std::vector<ClosureRow>& dirichlet_top_rows() {
  static const std::vector<ClosureRow> rows = [] {
    std::vector<ClosureRow> out;
    const auto& n = neumann_top_rows();
    for (std::size_t r = 1; r < n.size(); ++r)
      out.push_back({0, std::vector<Coefficient>(n[r].coeffs.begin() + 1, n[r].coeffs.end())});
    return out;
  }();
  return rows;
}

}  // namespace detail

/**
 * Banded sixth-order operator with explicit closure rows.
 *
 * Row i of the bottom closure is the mirror of top row i: entry (n-1-i,
 * n-1-j) equals entry (i, j). Rows in between use the centered stencil.
 * Application costs O(size).
 */
class Fd6Operator {
 public:
  Fd6Operator(BoundaryKind bc, std::size_t intervals, double h, double mu)
      : bc_(bc), intervals_(intervals), h_(h), mu_(mu) {
    if (intervals < 12) throw std::invalid_argument("Fd6Operator: need at least 12 grid intervals");
    if (!(h > 0.0)) throw std::invalid_argument("Fd6Operator: grid spacing must be positive");
    size_ = bc == BoundaryKind::Neumann ? intervals + 1 : intervals - 1;
    const auto& top = bc == BoundaryKind::Neumann ? detail::neumann_top_rows() : detail::dirichlet_top_rows();
    for (const auto& row : top) {
      std::vector<double> vals;
      for (const auto& c : row.coeffs) vals.push_back(c.value());
      top_.push_back({row.first_col, std::move(vals)});
    }
    scale_ = mu_ / (180.0 * h_ * h_);
  }

  BoundaryKind bc() const { return bc_; }
  std::size_t size() const { return size_; }
  std::size_t intervals() const { return intervals_; }
  double h() const { return h_; }
  double mu() const { return mu_; }
  double scale() const { return scale_; }

  /// Matrix entry (unscaled integer/rational stencil value).
  double entry(std::size_t row, std::size_t col) const {
    if (row >= size_ || col >= size_) throw std::out_of_range("Fd6Operator::entry");
    const std::size_t nt = top_.size();
    if (row < nt) return closure_entry(row, col);
    if (row >= size_ - nt) return closure_entry(size_ - 1 - row, size_ - 1 - col);
    const long offset = static_cast<long>(col) - static_cast<long>(row) + 3;
    if (offset < 0 || offset > 6) return 0.0;
    return static_cast<double>(detail::kCenteredStencil[static_cast<std::size_t>(offset)]);
  }

  /// Dense copy of the unscaled matrix; for tests and inspection.
  std::vector<std::vector<double>> dense() const {
    std::vector<std::vector<double>> m(size_, std::vector<double>(size_, 0.0));
    for (std::size_t r = 0; r < size_; ++r)
      for (std::size_t c = 0; c < size_; ++c) m[r][c] = entry(r, c);
    return m;
  }

  /// out = (mu / (180 h^2)) * M * u
  void apply(std::span<const double> u, std::span<double> out) const {
    if (u.size() != size_ || out.size() != size_)
      throw std::invalid_argument("Fd6Operator::apply: length mismatch");
    const std::size_t nt = top_.size();
    for (std::size_t r = 0; r < nt; ++r) {
      const auto& row = top_[r];
      double acc = 0.0;
      double acc_mirror = 0.0;
      for (std::size_t j = 0; j < row.coeffs.size(); ++j) {
        acc += row.coeffs[j] * u[row.first_col + j];
        acc_mirror += row.coeffs[j] * u[size_ - 1 - row.first_col - j];
      }
      out[r] = scale_ * acc;
      out[size_ - 1 - r] = scale_ * acc_mirror;
    }
    for (std::size_t r = nt; r + nt < size_; ++r) {
      const double* p = u.data() + (r - 3);
      const double acc = -2.0 * (p[0] + p[6]) + 27.0 * (p[1] + p[5]) - 270.0 * (p[2] + p[4]) + 490.0 * p[3];
      out[r] = scale_ * acc;
    }
  }

  std::vector<double> apply(std::span<const double> u) const {
    std::vector<double> out(size_);
    apply(u, out);
    return out;
  }

 private:
  struct Row {
    std::size_t first_col;
    std::vector<double> coeffs;
  };

  double closure_entry(std::size_t row, std::size_t col) const {
    const auto& r = top_[row];
    if (col < r.first_col || col >= r.first_col + r.coeffs.size()) return 0.0;
    return r.coeffs[col - r.first_col];
  }

  BoundaryKind bc_;
  std::size_t intervals_;
  double h_;
  double mu_;
  double scale_ = 0.0;
  std::size_t size_ = 0;
  std::vector<Row> top_;
};

/// Neumann matrix A on [0, 1] with M intervals (size M+1).
inline Fd6Operator neumann_matrix(std::size_t m, double mu = 1.0, double length = 1.0) {
  return Fd6Operator(BoundaryKind::Neumann, m, length / static_cast<double>(m), mu);
}

/// Dirichlet matrix B on [0, 1] with M intervals (size M-1).
inline Fd6Operator dirichlet_matrix(std::size_t m, double mu = 1.0, double length = 1.0) {
  return Fd6Operator(BoundaryKind::Dirichlet, m, length / static_cast<double>(m), mu);
}

inline std::vector<double> apply_operator(const Fd6Operator& op, std::span<const double> u) {
  return op.apply(u);
}

/// Grid positions of the unknowns of `op` on [0, M h].
inline std::vector<double> unknown_nodes(const Fd6Operator& op) {
  std::vector<double> x(op.size());
  const std::size_t offset = op.bc() == BoundaryKind::Dirichlet ? 1 : 0;
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = static_cast<double>(j + offset) * op.h();
  return x;
}

/**
 * A semidiscretized reaction-diffusion system ready for the steppers.
 *
 * `as_ode` advances the homogenized unknowns (one contiguous block per
 * species). `physical` maps a state back to the physical solution on the full
 * grid, boundary nodes included, one profile per species.
 */
struct RdProblem {
  std::string name;
  BoundaryKind bc = BoundaryKind::Neumann;
  std::size_t intervals = 0;
  std::size_t species = 1;
  std::vector<Fd6Operator> operators;
  OdeProblem as_ode;
  std::function<std::vector<std::vector<double>>(double t, std::span<const double> state)> physical;

  std::vector<double> grid() const {
    std::vector<double> x(intervals + 1);
    for (std::size_t j = 0; j <= intervals; ++j)
      x[j] = static_cast<double>(j) / static_cast<double>(intervals);
    return x;
  }
};

// ---------------------------------------------------------------------------
// Fisher equation u_t - u_xx - 6 u (1 - u) = 0 on [0, 1],
// exact u = (1 + e^{x - 5t})^{-2}, boundary data from the exact solution.
// ---------------------------------------------------------------------------

namespace fisher {

inline double exact(double x, double t) {
  const double e = std::exp(x - 5.0 * t);
  return 1.0 / ((1.0 + e) * (1.0 + e));
}
inline double exact_t(double x, double t) {
  const double e = std::exp(x - 5.0 * t);
  return 10.0 * e / std::pow(1.0 + e, 3);
}
inline double exact_x(double x, double t) {
  const double e = std::exp(x - 5.0 * t);
  return -2.0 * e / std::pow(1.0 + e, 3);
}
inline double exact_xt(double x, double t) {
  const double e = std::exp(x - 5.0 * t);
  return 10.0 * e * (1.0 - 2.0 * e) / std::pow(1.0 + e, 4);
}
inline double exact_xx(double x, double t) {
  const double e = std::exp(x - 5.0 * t);
  return 2.0 * e * (2.0 * e - 1.0) / std::pow(1.0 + e, 4);
}

/**
 * Boundary lift phi(x, t). DBC: (1 - x) u(0, t) + x u(1, t). NBC:
 * (x - x^2/2) u_x(0, t) + (x^2/2) u_x(1, t).
 */
struct Lift {
  BoundaryKind bc;
  double value(double x, double t) const {
    if (bc == BoundaryKind::Dirichlet) return (1.0 - x) * exact(0.0, t) + x * exact(1.0, t);
    return (x - 0.5 * x * x) * exact_x(0.0, t) + 0.5 * x * x * exact_x(1.0, t);
  }
  double time_derivative(double x, double t) const {
    if (bc == BoundaryKind::Dirichlet) return (1.0 - x) * exact_t(0.0, t) + x * exact_t(1.0, t);
    return (x - 0.5 * x * x) * exact_xt(0.0, t) + 0.5 * x * x * exact_xt(1.0, t);
  }
  /// phi_xx, constant in x.
  double second_derivative(double t) const {
    if (bc == BoundaryKind::Dirichlet) return 0.0;
    return exact_x(1.0, t) - exact_x(0.0, t);
  }
};

inline double reaction(double u) { return -6.0 * u * (1.0 - u); }

}  // namespace fisher

inline RdProblem fisher_problem(std::size_t m, BoundaryKind bc, double t_end = 10.0) {
  RdProblem p;
  p.name = "fisher";
  p.bc = bc;
  p.intervals = m;
  p.operators.push_back(bc == BoundaryKind::Neumann ? neumann_matrix(m) : dirichlet_matrix(m));
  const Fd6Operator& op = p.operators.front();
  const auto x = unknown_nodes(op);
  const fisher::Lift lift{bc};

  OdeProblem& ode = p.as_ode;
  ode.name = "fisher";
  ode.tag = "fisher(M=" + std::to_string(m) + ",bc=" + std::string(to_string(bc)) +
            ",T=" + format_exact(t_end) + ")";
  ode.dim = op.size();
  ode.t_end = t_end;
  ode.initial.resize(ode.dim);
  for (std::size_t j = 0; j < ode.dim; ++j) ode.initial[j] = fisher::exact(x[j], 0.0) - lift.value(x[j], 0.0);

  ode.rhs = [op, x, lift](double t, std::span<const double> w, std::span<double> dw) {
    op.apply(w, dw);
    const double phi_xx = lift.second_derivative(t);
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double u = w[j] + lift.value(x[j], t);
      dw[j] = -dw[j] - fisher::reaction(u) + phi_xx - lift.time_derivative(x[j], t);
    }
  };
  ode.exact = [x, lift](double t, std::span<double> out) {
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = fisher::exact(x[j], t) - lift.value(x[j], t);
  };
  p.physical = [x, lift, m, bc](double t, std::span<const double> w) {
    std::vector<double> prof(m + 1);
    const double hx = 1.0 / static_cast<double>(m);
    for (std::size_t j = 0; j <= m; ++j) prof[j] = lift.value(static_cast<double>(j) * hx, t);
    const std::size_t off = bc == BoundaryKind::Dirichlet ? 1 : 0;
    for (std::size_t j = 0; j < w.size(); ++j) prof[j + off] = w[j] + lift.value(x[j], t);
    return std::vector<std::vector<double>>{prof};
  };
  return p;
}

// ---------------------------------------------------------------------------
// Bistable equation u_t - u_xx + 1e4 u (u - 1)(u - 0.25) = 0, homogeneous NBC,
// u0 = exp(-100 x^2), T = 0.0295.
// ---------------------------------------------------------------------------

inline double bistable_reaction(double u) { return 1e4 * u * (u - 1.0) * (u - 0.25); }

inline RdProblem bistable_problem(std::size_t m, double t_end = 0.0295) {
  RdProblem p;
  p.name = "bistable";
  p.bc = BoundaryKind::Neumann;
  p.intervals = m;
  p.operators.push_back(neumann_matrix(m));
  const Fd6Operator& op = p.operators.front();
  const auto x = unknown_nodes(op);

  OdeProblem& ode = p.as_ode;
  ode.name = "bistable";
  ode.tag = "bistable(M=" + std::to_string(m) + ",T=" + format_exact(t_end) + ")";
  ode.dim = op.size();
  ode.t_end = t_end;
  ode.initial.resize(ode.dim);
  for (std::size_t j = 0; j < ode.dim; ++j) ode.initial[j] = std::exp(-100.0 * x[j] * x[j]);
  ode.rhs = [op](double, std::span<const double> u, std::span<double> du) {
    op.apply(u, du);
    for (std::size_t j = 0; j < u.size(); ++j) du[j] = -du[j] - bistable_reaction(u[j]);
  };
  p.physical = [](double, std::span<const double> u) {
    return std::vector<std::vector<double>>{std::vector<double>(u.begin(), u.end())};
  };
  return p;
}

// ---------------------------------------------------------------------------
// Robertson kinetics with diffusion, three species, DBC u = 1, v = w = 0.
// Unknowns are U = u - 1, V = v, W = w on nodes 1..M-1.
// ---------------------------------------------------------------------------

struct ThreeSpeciesRates {
  double tau1 = 4e-2;
  double tau2 = 1e4;
  double tau3 = 4e-2;
  double tau4 = 1e4;
  double tau5 = 3e7;
  double tau6 = 3e7;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
};

/// Reaction terms (F1, F2, F3) in u_t - alpha u_xx + F1 = 0 etc., physical variables.
inline std::array<double, 3> three_species_reaction(const ThreeSpeciesRates& r, double u, double v,
                                                    double w) {
  return {r.tau1 * u - r.tau2 * v * w, -r.tau3 * u + r.tau4 * v * w + r.tau5 * v * v, -r.tau6 * v * v};
}

inline RdProblem three_species_problem(std::size_t m, double t_end = 1.0, ThreeSpeciesRates rates = {}) {
  RdProblem p;
  p.name = "three_species";
  p.bc = BoundaryKind::Dirichlet;
  p.intervals = m;
  p.species = 3;
  p.operators = {dirichlet_matrix(m, rates.alpha), dirichlet_matrix(m, rates.beta),
                 dirichlet_matrix(m, rates.gamma)};
  const auto x = unknown_nodes(p.operators.front());
  const std::size_t n = x.size();

  OdeProblem& ode = p.as_ode;
  ode.name = "three_species";
  ode.tag = "three_species(M=" + std::to_string(m) + ",T=" + format_exact(t_end) + ")";
  ode.dim = 3 * n;
  ode.t_end = t_end;
  ode.initial.assign(ode.dim, 0.0);
  for (std::size_t j = 0; j < n; ++j) ode.initial[j] = std::sin(2.0 * std::numbers::pi * x[j]);

  ode.rhs = [ops = p.operators, rates, n](double, std::span<const double> y, std::span<double> dy) {
    for (std::size_t s = 0; s < 3; ++s) ops[s].apply(y.subspan(s * n, n), dy.subspan(s * n, n));
    for (std::size_t j = 0; j < n; ++j) {
      const auto f = three_species_reaction(rates, y[j] + 1.0, y[n + j], y[2 * n + j]);
      for (std::size_t s = 0; s < 3; ++s) dy[s * n + j] = -dy[s * n + j] - f[s];
    }
  };
  p.physical = [m, n](double, std::span<const double> y) {
    std::vector<std::vector<double>> out(3, std::vector<double>(m + 1, 0.0));
    out[0].front() = 1.0;
    out[0].back() = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      out[0][j + 1] = y[j] + 1.0;
      out[1][j + 1] = y[n + j];
      out[2][j + 1] = y[2 * n + j];
    }
    return out;
  };
  return p;
}

/// Build a PDE benchmark by name ("fisher", "bistable", "three_species").
inline RdProblem make_pde_problem(const std::string& name, std::size_t m, BoundaryKind bc,
                                  std::optional<double> t_end = std::nullopt) {
  if (name == "fisher") return fisher_problem(m, bc, t_end.value_or(10.0));
  if (name == "bistable") return bistable_problem(m, t_end.value_or(0.0295));
  if (name == "three_species" || name == "robertson_diffusion")
    return three_species_problem(m, t_end.value_or(1.0));
  throw std::invalid_argument("unknown PDE problem '" + name + "'");
}

/// Position where a profile first drops through `level` (linear interpolation), or nullopt.
inline std::optional<double> front_position(std::span<const double> x, std::span<const double> u,
                                            double level = 0.5) {
  for (std::size_t j = 0; j + 1 < u.size(); ++j) {
    if ((u[j] - level) * (u[j + 1] - level) <= 0.0 && u[j] != u[j + 1]) {
      const double s = (level - u[j]) / (u[j + 1] - u[j]);
      return x[j] + s * (x[j + 1] - x[j]);
    }
  }
  return std::nullopt;
}

}  // namespace hdc
