#pragma once

#include <cstdint>
#include <random>

#include "edgeprop/matrix.hpp"

namespace edgeprop {

// Single-hidden-layer perceptron: Y = relu(X*W1 + b1)*W2 + b2.
// No output nonlinearity; callers compose one where needed.
struct MLPParams {
    Matrix w1;  // d_in x d_hidden
    Vector b1;  // d_hidden
    Matrix w2;  // d_hidden x d_out
    Vector b2;  // d_out

    std::size_t d_in() const { return w1.rows(); }
    std::size_t d_hidden() const { return w1.cols(); }
    std::size_t d_out() const { return w2.cols(); }
};

struct MLPCache {
    Matrix input;       // X
    Matrix hidden_pre;  // X*W1 + b1 (pre-relu)
};

struct MLPForward {
    Matrix output;
    MLPCache cache;
};

struct MLPGrads {
    Matrix dx;
    MLPParams grads;
};

// Glorot-uniform weights, zero biases.
MLPParams glorot_init(std::size_t d_in, std::size_t d_hidden, std::size_t d_out,
                      std::mt19937_64& rng);

MLPForward mlp_forward(const MLPParams& p, const Matrix& x);
MLPGrads mlp_backward(const MLPParams& p, const MLPCache& cache, const Matrix& dy);

}  // namespace edgeprop
