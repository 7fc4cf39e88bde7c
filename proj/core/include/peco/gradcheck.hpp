#pragma once

#include <cstddef>

#include "peco/nn.hpp"
#include "peco/tensor.hpp"

namespace peco::nn {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t worst_param = 0;
    std::size_t param_count = 0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Compares the analytic parameter gradient against central finite
/// differences for the scalar loss L = 0.5 * sum(output^2). Intended for
/// small networks (<= 1e4 parameters); cost is 2 forwards per parameter.
/// Relative error per parameter: |a - n| / max(|a| + |n|, 1e-6).
GradCheckReport gradient_check(const Network& net, const Tensor& input, double tolerance,
                               double fd_step = 1e-5);

} // namespace peco::nn
