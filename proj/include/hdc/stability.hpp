#pragma once
/**
 * @file stability.hpp
 * @brief Linear stability functions, their exact expansion, and region metrics.
 *
 * Applied to u' = lambda u with z = lambda k, DC6RK2/4 multiplies the state by
 *
 *   R(z) = 1 + z + z^2/2 + r(z) + z s(z),
 *
 * where q is the RK4 stability polynomial and r, s are the correction stencils
 * applied to the powers q(z/5)^i. R has degree 21.
 */

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdc/steppers.hpp"

namespace hdc {

using Complex = std::complex<double>;
using Rational = boost::multiprecision::cpp_rational;

// ---------------------------------------------------------------------------
// Direct evaluation through the q/r/s composition
// ---------------------------------------------------------------------------

inline Complex q_rk4(Complex z) {
  return 1.0 + z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)));
}

namespace detail {
inline Complex stencil_on_powers(const CorrectionStencil& st, Complex z) {
  const Complex q = q_rk4(z / 5.0);
  Complex acc = 0.0;
  Complex qp = 1.0;
  for (int w : st.weights) {
    acc += static_cast<double>(w) * qp;
    qp *= q;
  }
  return st.scale() * acc;
}
}  // namespace detail

inline Complex r_correction(Complex z) { return detail::stencil_on_powers(kStencilA, z); }
inline Complex s_correction(Complex z) { return detail::stencil_on_powers(kStencilB, z); }

inline Complex big_r(Complex z) {
  return 1.0 + z + 0.5 * z * z + r_correction(z) + z * s_correction(z);
}

// ---------------------------------------------------------------------------
// Exact expansion
// ---------------------------------------------------------------------------

/// Real polynomial p(z) = sum c_j z^j.
struct StabilityPolynomial {
  std::vector<double> coeffs;

  std::size_t degree() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }

  Complex operator()(Complex z) const {
    Complex acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  double modulus(Complex z) const { return std::abs((*this)(z)); }
};

namespace detail {

using RationalPoly = std::vector<Rational>;

inline RationalPoly poly_mul(const RationalPoly& a, const RationalPoly& b) {
  RationalPoly out(a.size() + b.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

inline void poly_add_scaled(RationalPoly& acc, const RationalPoly& p, const Rational& c,
                            std::size_t shift = 0) {
  if (acc.size() < p.size() + shift) acc.resize(p.size() + shift, Rational(0));
  for (std::size_t i = 0; i < p.size(); ++i) acc[i + shift] += c * p[i];
}

inline RationalPoly taylor_poly(int degree, const Rational& scale) {
  RationalPoly p;
  Rational term(1);
  Rational fact(1);
  Rational pow(1);
  for (int j = 0; j <= degree; ++j) {
    if (j > 0) {
      fact *= j;
      pow *= scale;
    }
    term = pow / fact;
    p.push_back(term);
  }
  return p;
}

inline RationalPoly stencil_poly(const CorrectionStencil& st, const RationalPoly& q) {
  RationalPoly acc{Rational(0)};
  RationalPoly qp{Rational(1)};
  for (int w : st.weights) {
    poly_add_scaled(acc, qp, Rational(w));
    qp = poly_mul(qp, q);
  }
  for (auto& c : acc) c *= Rational(st.scale_num, st.scale_den);
  return acc;
}

/// a + b sqrt(21), exact.
struct Surd21 {
  Rational a{0};
  Rational b{0};

  friend Surd21 operator+(const Surd21& x, const Surd21& y) { return {x.a + y.a, x.b + y.b}; }
  friend Surd21 operator*(const Surd21& x, const Surd21& y) {
    return {x.a * y.a + 21 * x.b * y.b, x.a * y.b + x.b * y.a};
  }
};

inline Surd21 surd(long long a_num, long long b_num, long long den) {
  return {Rational(a_num, den), Rational(b_num, den)};
}

// Luther's tableau in Q(sqrt 21); mirrors detail::luther_tableau().
inline std::vector<Rational> luther_stability_coefficients() {
  std::array<std::array<Surd21, 7>, 7> a{};
  a[1][0] = surd(1, 0, 1);
  a[2][0] = surd(3, 0, 8);
  a[2][1] = surd(1, 0, 8);
  a[3][0] = surd(8, 0, 27);
  a[3][1] = surd(2, 0, 27);
  a[3][2] = surd(8, 0, 27);
  a[4][0] = surd(-21, 9, 392);
  a[4][1] = surd(-56, 8, 392);
  a[4][2] = surd(336, -48, 392);
  a[4][3] = surd(-63, 3, 392);
  a[5][0] = surd(-1155, -255, 1960);
  a[5][1] = surd(-280, -40, 1960);
  a[5][2] = surd(0, -320, 1960);
  a[5][3] = surd(63, 363, 1960);
  a[5][4] = surd(2352, 392, 1960);
  a[6][0] = surd(330, 105, 180);
  a[6][1] = surd(120, 0, 180);
  a[6][2] = surd(-200, 280, 180);
  a[6][3] = surd(126, -189, 180);
  a[6][4] = surd(-686, -126, 180);
  a[6][5] = surd(490, -70, 180);
  const std::array<Surd21, 7> b = {surd(9, 0, 180), surd(0, 0, 1), surd(64, 0, 180), surd(0, 0, 1),
                                   surd(49, 0, 180), surd(49, 0, 180), surd(9, 0, 180)};

  // c_j = b^T A^{j-1} e, j >= 1
  std::vector<Rational> coeffs{Rational(1)};
  std::array<Surd21, 7> v;
  v.fill(surd(1, 0, 1));
  for (int j = 1; j <= 7; ++j) {
    Surd21 cj;
    for (std::size_t s = 0; s < 7; ++s) cj = cj + b[s] * v[s];
    if (cj.b != 0) throw std::logic_error("RK6 stability coefficient is irrational");
    coeffs.push_back(cj.a);
    std::array<Surd21, 7> next{};
    for (std::size_t s = 0; s < 7; ++s)
      for (std::size_t t = 0; t < s; ++t) next[s] = next[s] + a[s][t] * v[t];
    v = next;
  }
  return coeffs;
}

}  // namespace detail

/**
 * Exact coefficients of the stability polynomial of `kind`, lowest degree
 * first. DC6RK2/4 is expanded from the q/r/s composition; RK6 from its
 * tableau, carried out in Q(sqrt 21).
 */
inline std::vector<Rational> exact_stability_coefficients(StepperKind kind) {
  switch (kind) {
    case StepperKind::Rk2Midpoint: return detail::taylor_poly(2, Rational(1));
    case StepperKind::Rk4: return detail::taylor_poly(4, Rational(1));
    case StepperKind::Rk6: return detail::luther_stability_coefficients();
    case StepperKind::Dc6Rk24: {
      const auto q5 = detail::taylor_poly(4, Rational(1, 5));  // q(z/5)
      auto r = detail::stencil_poly(kStencilA, q5);
      const auto s = detail::stencil_poly(kStencilB, q5);
      detail::poly_add_scaled(r, {Rational(1), Rational(1), Rational(1, 2)}, Rational(1));
      detail::poly_add_scaled(r, s, Rational(1), 1);
      while (r.size() > 1 && r.back() == 0) r.pop_back();
      return r;
    }
  }
  return {};
}

inline StabilityPolynomial expand_coefficients(StepperKind kind) {
  StabilityPolynomial p;
  for (const auto& c : exact_stability_coefficients(kind)) p.coeffs.push_back(static_cast<double>(c));
  return p;
}

namespace detail {
/// Horner evaluation of exact coefficients in 50-digit arithmetic, rounded once.
inline Complex evaluate_exact(const std::vector<Rational>& coeffs, Complex z) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  const Big zr = z.real(), zi = z.imag();
  Big re = 0, im = 0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    const Big nr = re * zr - im * zi + Big(*it);
    im = re * zi + im * zr;
    re = nr;
  }
  return {static_cast<double>(re), static_cast<double>(im)};
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Rasters and region metrics
// ---------------------------------------------------------------------------

struct RasterSpec {
  double re_min = -6.0;
  double re_max = 1.0;
  double im_min = -5.0;
  double im_max = 5.0;
  std::size_t nx = 701;
  std::size_t ny = 1001;

  Complex point(std::size_t i, std::size_t j) const {
    const double re = re_min + static_cast<double>(i) * (re_max - re_min) / static_cast<double>(nx - 1);
    const double im = im_min + static_cast<double>(j) * (im_max - im_min) / static_cast<double>(ny - 1);
    return {re, im};
  }
};

/// inside(i, j) = |p(z_ij)| <= 1; i runs along the real axis, j along the imaginary axis.
struct RegionRaster {
  RasterSpec spec;
  std::vector<std::uint8_t> cells;  // j-major: cells[j * nx + i]

  bool inside(std::size_t i, std::size_t j) const { return cells[j * spec.nx + i] != 0; }
  std::size_t count_inside() const {
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
  }
};

inline void validate(const RasterSpec& spec) {
  if (spec.nx < 2 || spec.ny < 2) throw std::invalid_argument("raster needs at least 2x2 points");
  if (!(spec.re_max > spec.re_min) || !(spec.im_max > spec.im_min))
    throw std::invalid_argument("raster ranges must be nonempty");
}

inline RegionRaster stability_raster(const StabilityPolynomial& poly, const RasterSpec& spec = {}) {
  validate(spec);
  RegionRaster r{spec, std::vector<std::uint8_t>(spec.nx * spec.ny, 0)};
  for (std::size_t j = 0; j < spec.ny; ++j)
    for (std::size_t i = 0; i < spec.nx; ++i)
      r.cells[j * spec.nx + i] = poly.modulus(spec.point(i, j)) <= 1.0 ? 1 : 0;
  return r;
}

/**
 * Leftmost x* < 0 such that |p(x)| <= 1 on all of [x*, 0]. Scans leftwards
 * from the origin and bisects the first crossing.
 */
inline std::optional<double> real_axis_boundary(const StabilityPolynomial& poly,
                                                double scan_step = 1e-4, double tol = 1e-6,
                                                double scan_limit = 100.0) {
  auto outside = [&](double x) { return poly.modulus({x, 0.0}) > 1.0; };
  double inside_x = 0.0;
  const auto max_steps = static_cast<std::size_t>(scan_limit / scan_step);
  for (std::size_t n = 1; n <= max_steps; ++n) {
    const double x = -static_cast<double>(n) * scan_step;
    if (outside(x)) {
      if (x > -0.01) return std::nullopt;
      double lo = x;         // outside
      double hi = inside_x;  // inside
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (outside(mid) ? lo : hi) = mid;
      }
      return hi;
    }
    inside_x = x;
  }
  return std::nullopt;
}

/**
 * Largest |Im z| over the boundary of {|p| <= 1}, from a 2001x2001 raster on
 * [-6, 0.5] x [-5.5, 5.5]. In every column the topmost inside cell is bisected
 * against the cell above it.
 */
inline std::optional<double> imaginary_extent(const StabilityPolynomial& poly, double tol = 1e-9,
                                              const RasterSpec& spec = {-6.0, 0.5, -5.5, 5.5, 2001,
                                                                        2001}) {
  validate(spec);
  std::optional<double> best;
  for (std::size_t i = 0; i < spec.nx; ++i) {
    std::optional<std::size_t> top;
    for (std::size_t j = spec.ny; j-- > 0;) {
      if (poly.modulus(spec.point(i, j)) <= 1.0) {
        top = j;
        break;
      }
    }
    if (!top) continue;
    const double re = spec.point(i, 0).real();
    double extent;
    if (*top + 1 == spec.ny) {
      extent = spec.point(i, *top).imag();
    } else {
      double lo = spec.point(i, *top).imag();      // inside
      double hi = spec.point(i, *top + 1).imag();  // outside
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (poly.modulus({re, mid}) <= 1.0 ? lo : hi) = mid;
      }
      extent = lo;
    }
    extent = std::abs(extent);
    if (!best || extent > *best) best = extent;
  }
  return best;
}

/// Grid points where `inner` is strictly stable but `outer` is strictly not.
inline std::vector<Complex> containment_check(const StabilityPolynomial& inner,
                                              const StabilityPolynomial& outer,
                                              const RasterSpec& spec = {}, double eps = 1e-9) {
  validate(spec);
  std::vector<Complex> violations;
  for (std::size_t j = 0; j < spec.ny; ++j) {
    for (std::size_t i = 0; i < spec.nx; ++i) {
      const Complex z = spec.point(i, j);
      if (inner.modulus(z) <= 1.0 - eps && outer.modulus(z) > 1.0 + eps) violations.push_back(z);
    }
  }
  return violations;
}

/// Inside cells with at least one outside 4-neighbour (or on the raster edge).
inline std::vector<Complex> boundary_points(const RegionRaster& r) {
  std::vector<Complex> pts;
  const auto& s = r.spec;
  for (std::size_t j = 0; j < s.ny; ++j) {
    for (std::size_t i = 0; i < s.nx; ++i) {
      if (!r.inside(i, j)) continue;
      const bool edge = i == 0 || j == 0 || i + 1 == s.nx || j + 1 == s.ny;
      if (edge || !r.inside(i - 1, j) || !r.inside(i + 1, j) || !r.inside(i, j - 1) ||
          !r.inside(i, j + 1))
        pts.push_back(s.point(i, j));
    }
  }
  return pts;
}

/// Binary PGM (P5): inside = 0, outside = 255, top row is Im = im_max.
inline void write_pgm(const RegionRaster& r, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "P5\n" << r.spec.nx << ' ' << r.spec.ny << "\n255\n";
  std::vector<char> row(r.spec.nx);
  for (std::size_t j = r.spec.ny; j-- > 0;) {
    for (std::size_t i = 0; i < r.spec.nx; ++i) row[i] = r.inside(i, j) ? char(0) : char(255);
    os.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace hdc
