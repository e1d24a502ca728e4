#pragma once

#include <functional>
#include <vector>

#include "maem/tensor.hpp"

namespace maem::ad {

// One entry per input coordinate.
struct GradCheckEntry {
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
  bool skipped = false;  // non-differentiable point detected between probes
};

struct GradCheckReport {
  double max_rel_err = 0.0;  // over non-skipped coordinates
  bool pass = false;
  long skipped = 0;
  std::vector<GradCheckEntry> entries;
};

// Compares the analytic gradient of the scalar-valued `f` at `x` against
// central finite differences. A coordinate where the forward and backward
// one-sided differences disagree strongly (a kink between the probes, e.g.
// relu at 0) is reported as skipped rather than failed.
GradCheckReport check_gradients(
    const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double eps,
    double tol);

}  // namespace maem::ad
