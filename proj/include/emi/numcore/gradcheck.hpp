#pragma once

#include "emi/numcore/graph.hpp"

#include <functional>
#include <string>
#include <vector>

namespace emi::num {

struct GradCheckOptions {
  double step = 1e-5;
  double rel_tol = 1e-4;
  // Entries where both gradients are below this magnitude compare absolutely.
  double abs_floor = 1e-6;
};

struct GradCheckResult {
  bool ok = true;
  double max_error = 0.0;
  std::size_t entries = 0;
  std::string worst;  // "param[i] (r,c): analytic vs numeric"
};

// Builds the scalar loss with `build` on a fresh graph, takes reverse-mode
// gradients for each matrix in `params` (bound with Graph::parameter inside
// `build`) and compares every entry against central finite differences.
GradCheckResult check_gradients(const std::function<Var(Graph&)>& build,
                                const std::vector<Matrix*>& params,
                                const GradCheckOptions& options = {});

}  // namespace emi::num
