#pragma once

#include <span>
#include <vector>

namespace edgeprop {

struct LossResult {
    double loss;
    std::vector<double> dlogits;
};

// Max-shifted softmax cross entropy; loss = -log softmax(logits)[label],
// dlogits = softmax(logits) - onehot(label).
LossResult softmax_cross_entropy(std::span<const double> logits, std::size_t label);

}  // namespace edgeprop
