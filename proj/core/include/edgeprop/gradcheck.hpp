#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "edgeprop/errors.hpp"

namespace edgeprop {

// Central finite differences per coordinate against an analytic gradient.
// Relative error denominator is max(1e-12, |a| + |b|).
inline double grad_check(const std::function<double(const std::vector<double>&)>& f,
                         const std::vector<double>& analytic_grad, std::vector<double> params,
                         double h) {
    if (analytic_grad.size() != params.size())
        throw ShapeError("grad_check: gradient/parameter sizes differ");
    if (h <= 0.0) throw NumericError("grad_check: step must be positive");
    double max_err = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double orig = params[i];
        params[i] = orig + h;
        const double fp = f(params);
        params[i] = orig - h;
        const double fm = f(params);
        params[i] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw NumericError("grad_check: non-finite objective");
        const double fd = (fp - fm) / (2.0 * h);
        const double a = analytic_grad[i];
        const double err = std::abs(fd - a) / std::max(1e-12, std::abs(fd) + std::abs(a));
        max_err = std::max(max_err, err);
    }
    return max_err;
}

}  // namespace edgeprop
