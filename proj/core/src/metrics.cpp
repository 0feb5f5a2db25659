#include "edgeprop/metrics.hpp"

#include "edgeprop/errors.hpp"

namespace edgeprop {

MetricsReport metrics_from_confusion(const std::vector<std::vector<std::uint64_t>>& confusion) {
    const std::size_t c = confusion.size();
    if (c == 0) throw ShapeError("metrics_from_confusion: empty confusion matrix");
    MetricsReport r;
    r.confusion = confusion;
    r.precision.assign(c, 0.0);
    r.recall.assign(c, 0.0);
    r.f1.assign(c, 0.0);
    r.support.assign(c, 0);

    std::uint64_t total = 0, correct = 0;
    for (std::size_t i = 0; i < c; ++i) {
        if (confusion[i].size() != c)
            throw ShapeError("metrics_from_confusion: matrix not square");
        for (std::size_t j = 0; j < c; ++j) {
            total += confusion[i][j];
            r.support[i] += confusion[i][j];
        }
        correct += confusion[i][i];
    }
    r.accuracy = total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);

    for (std::size_t i = 0; i < c; ++i) {
        std::uint64_t tp = confusion[i][i], fp = 0, fn = 0;
        for (std::size_t j = 0; j < c; ++j) {
            if (j == i) continue;
            fp += confusion[j][i];
            fn += confusion[i][j];
        }
        if (tp + fp > 0) r.precision[i] = static_cast<double>(tp) / static_cast<double>(tp + fp);
        if (tp + fn > 0) r.recall[i] = static_cast<double>(tp) / static_cast<double>(tp + fn);
        if (r.precision[i] + r.recall[i] > 0.0)
            r.f1[i] = 2.0 * r.precision[i] * r.recall[i] / (r.precision[i] + r.recall[i]);
        r.macro_precision += r.precision[i];
        r.macro_recall += r.recall[i];
        r.macro_f1 += r.f1[i];
    }
    r.macro_precision /= static_cast<double>(c);
    r.macro_recall /= static_cast<double>(c);
    r.macro_f1 /= static_cast<double>(c);
    return r;
}

}  // namespace edgeprop
