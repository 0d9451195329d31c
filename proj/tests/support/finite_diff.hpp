#ifndef REACFUSE_TESTS_FINITE_DIFF_HPP
#define REACFUSE_TESTS_FINITE_DIFF_HPP

// Central finite-difference gradient checker at 64-bit precision. Samples
// coordinates across all parameters rather than sweeping full Jacobians.

#include <cmath>
#include <functional>
#include <vector>

#include "reacfuse/rng.hpp"
#include "reacfuse/tensor.hpp"

namespace fdcheck {

using reacfuse::Rng;
using reacfuse::core::NoGrad;
using reacfuse::core::Tensor;

struct Report {
  int checked = 0;
  int failed = 0;
  double worst = 0;
};

// loss_fn must rebuild the graph from the parameter tensors' current values.
inline Report check_gradients(std::vector<Tensor<double>> params,
                              const std::function<Tensor<double>()>& loss_fn,
                              int samples_per_param = 6, double tol = 1e-4,
                              std::uint64_t seed = 1234) {
  for (auto& p : params) {
    auto& g = p.grad();
    std::fill(g.begin(), g.end(), 0.0);
  }
  {
    Tensor<double> loss = loss_fn();
    reacfuse::core::backward(loss);
  }
  std::vector<std::vector<double>> analytic;
  for (auto& p : params) analytic.push_back(p.grad());

  Rng rng(seed);
  Report rep;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& vals = params[pi].values();
    if (vals.empty()) continue;
    for (int s = 0; s < samples_per_param; ++s) {
      std::size_t i = rng.below(vals.size());
      double v = vals[i];
      double h = 1e-5 * std::max(1.0, std::abs(v));
      double plus, minus;
      {
        NoGrad ng;
        vals[i] = v + h;
        plus = loss_fn().item();
        vals[i] = v - h;
        minus = loss_fn().item();
        vals[i] = v;
      }
      double fd = (plus - minus) / (2 * h);
      double an = analytic[pi][i];
      double err = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1.0});
      rep.worst = std::max(rep.worst, err);
      ++rep.checked;
      if (!(err < tol)) ++rep.failed;
    }
  }
  return rep;
}

}  // namespace fdcheck

#endif
