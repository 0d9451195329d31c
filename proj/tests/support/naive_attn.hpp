#ifndef REACFUSE_TESTS_NAIVE_ATTN_HPP
#define REACFUSE_TESTS_NAIVE_ATTN_HPP

// Dense double-loop attention reference, independent of the tensor engine.

#include <cmath>
#include <limits>
#include <vector>

namespace naiveref {

// q: n x d, k/v: m x d (row-major). bias/mask entries may be empty vectors.
// mask[i*m+j] = 1 allowed. Returns n x d context.
inline std::vector<double> attention(const std::vector<double>& q, const std::vector<double>& k,
                                     const std::vector<double>& v, int n, int m, int d,
                                     const std::vector<double>& bias,
                                     const std::vector<unsigned char>& mask) {
  std::vector<double> out(static_cast<std::size_t>(n) * d, 0.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < n; ++i) {
    std::vector<double> logits(static_cast<std::size_t>(m));
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
      double dot = 0;
      for (int c = 0; c < d; ++c)
        dot += q[static_cast<std::size_t>(i * d + c)] * k[static_cast<std::size_t>(j * d + c)];
      double l = dot * scale;
      if (!bias.empty()) l += bias[static_cast<std::size_t>(i * m + j)];
      if (!mask.empty() && !mask[static_cast<std::size_t>(i * m + j)])
        l = -std::numeric_limits<double>::infinity();
      logits[static_cast<std::size_t>(j)] = l;
      mx = std::max(mx, l);
    }
    double denom = 0;
    for (int j = 0; j < m; ++j) {
      double& l = logits[static_cast<std::size_t>(j)];
      l = std::isinf(l) && l < 0 ? 0.0 : std::exp(l - mx);
      denom += l;
    }
    for (int j = 0; j < m; ++j)
      for (int c = 0; c < d; ++c)
        out[static_cast<std::size_t>(i * d + c)] +=
            logits[static_cast<std::size_t>(j)] / denom * v[static_cast<std::size_t>(j * d + c)];
  }
  return out;
}

}  // namespace naiveref

#endif
