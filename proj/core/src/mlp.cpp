#include "edgeprop/mlp.hpp"

#include <cmath>

namespace edgeprop {

MLPParams glorot_init(std::size_t d_in, std::size_t d_hidden, std::size_t d_out,
                      std::mt19937_64& rng) {
    MLPParams p;
    auto fill = [&rng](Matrix& w) {
        const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (double& v : w.data()) v = u(rng);
    };
    p.w1 = Matrix(d_in, d_hidden);
    p.b1 = Vector(d_hidden, 0.0);
    p.w2 = Matrix(d_hidden, d_out);
    p.b2 = Vector(d_out, 0.0);
    fill(p.w1);
    fill(p.w2);
    return p;
}

MLPForward mlp_forward(const MLPParams& p, const Matrix& x) {
    if (x.cols() != p.d_in()) throw ShapeError("mlp_forward: input dimension mismatch");
    MLPForward out;
    out.cache.input = x;
    Matrix h = matmul(x, p.w1);
    for (std::size_t r = 0; r < h.rows(); ++r)
        for (std::size_t c = 0; c < h.cols(); ++c) h(r, c) += p.b1[c];
    out.cache.hidden_pre = h;
    // relu; subgradient at 0 is 0 (handled in backward via strict >)
    for (double& v : h.data())
        if (v < 0.0) v = 0.0;
    Matrix y = matmul(h, p.w2);
    for (std::size_t r = 0; r < y.rows(); ++r)
        for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += p.b2[c];
    out.output = std::move(y);
    return out;
}

MLPGrads mlp_backward(const MLPParams& p, const MLPCache& cache, const Matrix& dy) {
    if (dy.cols() != p.d_out() || dy.rows() != cache.input.rows())
        throw ShapeError("mlp_backward: dY shape mismatch");
    MLPGrads out;
    Matrix h = cache.hidden_pre;
    for (double& v : h.data())
        if (v < 0.0) v = 0.0;
    out.grads.w2 = matmul_at_b(h, dy);
    out.grads.b2 = Vector(p.d_out(), 0.0);
    for (std::size_t r = 0; r < dy.rows(); ++r)
        for (std::size_t c = 0; c < dy.cols(); ++c) out.grads.b2[c] += dy(r, c);

    Matrix dh = matmul_a_bt(dy, p.w2);
    for (std::size_t i = 0; i < dh.size(); ++i)
        if (cache.hidden_pre.data()[i] <= 0.0) dh.data()[i] = 0.0;

    out.grads.w1 = matmul_at_b(cache.input, dh);
    out.grads.b1 = Vector(p.d_hidden(), 0.0);
    for (std::size_t r = 0; r < dh.rows(); ++r)
        for (std::size_t c = 0; c < dh.cols(); ++c) out.grads.b1[c] += dh(r, c);

    out.dx = matmul_a_bt(dh, p.w1);
    return out;
}

}  // namespace edgeprop
