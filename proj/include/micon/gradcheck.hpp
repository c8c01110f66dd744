#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "micon/mlp.hpp"

namespace micon::math {

// Verifies analytic gradients against central finite differences.
//
// loss_fn must recompute the scalar loss from the current parameter values
// AND refresh the gradient buffers of `params` when `with_grad` is true (the
// checker calls it once with gradients, then twice per coordinate without).
// Returns the max over coordinates of |analytic - numeric| / max(1, |analytic|).
inline double grad_check(const std::function<double(bool with_grad)>& loss_fn,
                         const std::vector<ParamRef>& params, double h = 1e-5) {
    if (h < 1e-6 || h > 1e-3) throw std::invalid_argument("grad_check: h must be in [1e-6, 1e-3]");
    const double base = loss_fn(true);
    if (!std::isfinite(base)) throw std::runtime_error("grad_check: non-finite loss");
    // snapshot analytic grads before the perturbation passes overwrite them
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params) analytic.push_back(*p.grad);

    double max_rel = 0.0;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        auto& value = *params[pi].value;
        for (size_t i = 0; i < value.size(); ++i) {
            const double orig = value[i];
            value[i] = orig + h;
            const double fp = loss_fn(false);
            value[i] = orig - h;
            const double fm = loss_fn(false);
            value[i] = orig;
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw std::runtime_error("grad_check: non-finite loss at perturbed point");
            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic[pi][i];
            const double rel = std::abs(a - numeric) / std::max(1.0, std::abs(a));
            if (rel > max_rel) max_rel = rel;
        }
    }
    return max_rel;
}

}  // namespace micon::math
