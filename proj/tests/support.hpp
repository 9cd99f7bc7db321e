#pragma once
/**
 * @file support.hpp
 * @brief High-precision oracles shared by the unit tests and the acceptance
 * suite.
 *
 * The stencil and DCC properties concern truncation errors that sit below
 * double roundoff at the step sizes of interest, so they are evaluated in
 * 50-digit arithmetic with exact samples.
 */

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <array>
#include <cstddef>
#include <vector>

#include "hdc/steppers.hpp"

namespace hdc::hp {

using Big = boost::multiprecision::cpp_bin_float_50;

/// |stencil(e^{t + i k/5}) - target| for the a (E1) or b (E2) correction.
inline double stencil_error(const CorrectionStencil& st, bool is_a, double t_d, double k_d) {
  const Big t = t_d, k = k_d;
  Big acc = 0;
  for (int i = 0; i < 6; ++i) acc += st.weights[i] * exp(t + i * k / 5);
  const Big value = Big(st.scale_num) / st.scale_den * acc;
  const Big target = is_a ? exp(t + k) - exp(t) - k * exp(t + k / 2) : exp(t + k / 2) - exp(t) - k / 2 * exp(t);
  return static_cast<double>(abs(value - target));
}

/**
 * RK4 on u' = lambda cos(t) u, u(0) = 1 over [0, T] in 50-digit arithmetic;
 * returns the error sequence u^n - exp(lambda sin t_n), n = 0..N.
 */
inline std::vector<Big> rk4_error_sequence(double lambda_d, double t_end_d, std::size_t n) {
  const Big lambda = lambda_d, k = Big(t_end_d) / n;
  auto f = [&](const Big& t, const Big& u) { return lambda * cos(t) * u; };
  std::vector<Big> e(n + 1);
  Big u = 1;
  for (std::size_t i = 0; i <= n; ++i) {
    const Big t = k * i;
    e[i] = u - exp(lambda * sin(t));
    if (i == n) break;
    const Big k1 = f(t, u);
    const Big k2 = f(t + k / 2, u + k / 2 * k1);
    const Big k3 = f(t + k / 2, u + k / 2 * k2);
    const Big k4 = f(t + k, u + k * k3);
    u += k / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return e;
}

/// max_n |D_+^m e_n| with step k.
inline double max_forward_difference(std::vector<Big> e, double k_d, int m) {
  const Big k = k_d;
  for (int d = 0; d < m; ++d) {
    for (std::size_t i = 0; i + 1 < e.size(); ++i) e[i] = (e[i + 1] - e[i]) / k;
    e.pop_back();
  }
  Big mx = 0;
  for (const auto& x : e) mx = std::max(mx, Big(abs(x)));
  return static_cast<double>(mx);
}

}  // namespace hdc::hp
