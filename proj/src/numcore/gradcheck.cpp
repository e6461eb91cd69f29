#include "emi/numcore/gradcheck.hpp"

#include <cmath>
#include <cstdio>

namespace emi::num {

namespace {

double evaluate(const std::function<Var(Graph&)>& build) {
  Graph g;
  return build(g).scalar();
}

}  // namespace

GradCheckResult check_gradients(const std::function<Var(Graph&)>& build,
                                const std::vector<Matrix*>& params,
                                const GradCheckOptions& options) {
  std::vector<Matrix> analytic;
  {
    Graph g;
    const Var loss = build(g);
    const Gradients grads = g.backward(loss);
    for (const Matrix* p : params) {
      analytic.push_back(grads.contains(*p) ? grads.of(*p) : Matrix::Zero(p->rows(), p->cols()));
    }
  }

  GradCheckResult result;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Matrix& p = *params[pi];
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.cols(); ++c) {
        const double saved = p(r, c);
        p(r, c) = saved + options.step;
        const double up = evaluate(build);
        p(r, c) = saved - options.step;
        const double down = evaluate(build);
        p(r, c) = saved;

        const double numeric = (up - down) / (2.0 * options.step);
        const double a = analytic[pi](r, c);
        const double scale = std::max(std::abs(a), std::abs(numeric));
        const double err = scale < options.abs_floor ? std::abs(a - numeric)
                                                     : std::abs(a - numeric) / scale;
        ++result.entries;
        if (err > result.max_error) {
          result.max_error = err;
          char buf[160];
          std::snprintf(buf, sizeof(buf), "param[%zu] (%ld,%ld): %.10g vs %.10g", pi,
                        static_cast<long>(r), static_cast<long>(c), a, numeric);
          result.worst = buf;
        }
      }
    }
  }
  result.ok = result.max_error <= options.rel_tol;
  return result;
}

}  // namespace emi::num
