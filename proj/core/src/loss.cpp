#include "edgeprop/loss.hpp"

#include <algorithm>
#include <cmath>

#include "edgeprop/errors.hpp"

namespace edgeprop {

LossResult softmax_cross_entropy(std::span<const double> logits, std::size_t label) {
    if (logits.size() < 2) throw ShapeError("softmax_cross_entropy: need at least 2 classes");
    if (label >= logits.size()) throw ShapeError("softmax_cross_entropy: label out of range");
    for (double v : logits)
        if (!std::isfinite(v)) throw NumericError("softmax_cross_entropy: non-finite logit");

    const double mx = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    LossResult out;
    out.dlogits.resize(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) {
        out.dlogits[c] = std::exp(logits[c] - mx);
        denom += out.dlogits[c];
    }
    out.loss = -(logits[label] - mx - std::log(denom));
    for (std::size_t c = 0; c < logits.size(); ++c) out.dlogits[c] /= denom;
    out.dlogits[label] -= 1.0;
    return out;
}

}  // namespace edgeprop
