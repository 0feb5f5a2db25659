#pragma once

#include <cstdint>
#include <vector>

namespace edgeprop {

struct MetricsReport {
    double accuracy = 0.0;
    std::vector<double> precision, recall, f1;  // per class
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
    std::vector<std::vector<std::uint64_t>> confusion;  // [true][pred]
    std::vector<std::uint64_t> support;                 // per-class true counts
};

// Zero-denominator classes score 0; macro scores are unweighted means over
// all classes.
MetricsReport metrics_from_confusion(const std::vector<std::vector<std::uint64_t>>& confusion);

}  // namespace edgeprop
