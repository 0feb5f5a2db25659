#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace edgeprop {

// Adam with the original defaults; operates on flattened parameter vectors.
struct AdamState {
    std::uint64_t step = 0;
    std::vector<double> m;
    std::vector<double> v;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr);

}  // namespace edgeprop
