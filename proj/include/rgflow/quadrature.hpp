#pragma once

#include <vector>

namespace rgflow {

// Gauss-Hermite rule with weight exp(-x^2): integral f(x) e^{-x^2} dx
// ~ sum w_i f(x_i). Nodes ascend; weights sum to sqrt(pi).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Cached, thread-safe; n >= 1.
const GaussHermiteRule& gauss_hermite(int n);

}  // namespace rgflow
