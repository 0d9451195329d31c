#ifndef REACFUSE_ADAM_HPP
#define REACFUSE_ADAM_HPP

#include <cmath>
#include <vector>

#include "reacfuse/tensor.hpp"

namespace reacfuse::core {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard Adam with bias correction over a fixed parameter list.
template <typename S>
class Adam {
public:
  Adam(std::vector<Tensor<S>> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
      m_.emplace_back(p.numel(), S(0));
      v_.emplace_back(p.numel(), S(0));
    }
  }

  void zero_grad() {
    for (auto& p : params_) {
      auto& g = p.grad();
      std::fill(g.begin(), g.end(), S(0));
    }
  }

  void step() {
    ++step_;
    const S b1 = static_cast<S>(cfg_.beta1), b2 = static_cast<S>(cfg_.beta2);
    const S corr1 = S(1) - static_cast<S>(std::pow(cfg_.beta1, step_));
    const S corr2 = S(1) - static_cast<S>(std::pow(cfg_.beta2, step_));
    const S lr = static_cast<S>(cfg_.lr);
    const S eps = static_cast<S>(cfg_.eps);
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
      auto& p = params_[pi].values();
      auto& g = params_[pi].grad();
      auto& m = m_[pi];
      auto& v = v_[pi];
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = b1 * m[i] + (S(1) - b1) * g[i];
        v[i] = b2 * v[i] + (S(1) - b2) * g[i] * g[i];
        S mhat = m[i] / corr1;
        S vhat = v[i] / corr2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }

  long step_count() const { return step_; }
  const AdamConfig& config() const { return cfg_; }

private:
  std::vector<Tensor<S>> params_;
  AdamConfig cfg_;
  std::vector<std::vector<S>> m_, v_;
  long step_ = 0;
};

}  // namespace reacfuse::core

#endif
