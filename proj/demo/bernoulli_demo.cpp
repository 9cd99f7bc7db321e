// Integrates the stiff Bernoulli problem with each method at a few step sizes
// and prints the max-abs error and observed order.
//
//   ./hdc_demo

#include <cstdio>
#include <optional>

#include "hdc/hdc.hpp"

int main() {
  const hdc::OdeProblem p = hdc::bernoulli();
  const double steps[] = {4e-3, 2e-3, 1e-3, 1e-4};

  for (hdc::StepperKind kind : hdc::kAllSteppers) {
    std::printf("%s\n", std::string(hdc::to_string(kind)).c_str());
    std::optional<double> prev_err;
    double prev_k = 0.0;
    for (double k : steps) {
      const auto run = hdc::integrate(p, kind, hdc::steps_for(p.t_end, k));
      if (!run.completed()) {
        std::printf("  k=%-8g  --  (diverged at step %zu)\n", k, run.diverged_at_step);
        prev_err.reset();
        continue;
      }
      const double err = hdc::max_abs_error(run, *p.exact)[0];
      std::printf("  k=%-8g  %.3e", k, err);
      if (prev_err)
        if (auto q = hdc::observed_order(*prev_err, prev_k, err, k)) std::printf("  (%.2f)", *q);
      std::printf("  [%llu rhs evals]\n", static_cast<unsigned long long>(run.rhs_evals));
      prev_err = err;
      prev_k = k;
    }
  }
  return 0;
}
