#include "peco/gradcheck.hpp"

#include <cmath>

#include "peco/errors.hpp"

namespace peco::nn {

namespace {

double half_sum_squares(const Tensor& t) {
    double s = 0.0;
    for (double v : t.data) s += v * v;
    return 0.5 * s;
}

} // namespace

GradCheckReport gradient_check(const Network& net, const Tensor& input, double tolerance,
                               double fd_step) {
    if (net.param_count() > 10000)
        throw InvalidArgument("gradient_check: network too large for finite differences");

    ForwardCache cache;
    const Tensor out = net.forward(input, &cache);
    const std::vector<double> analytic = net.backward(cache, out); // dL/dy = y for L = 0.5*sum(y^2)

    Network probe = net; // perturbed copy; original stays untouched
    auto params = probe.params_mutable();

    GradCheckReport report;
    report.param_count = net.param_count();
    report.tolerance = tolerance;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + fd_step;
        const double lp = half_sum_squares(probe.forward(input));
        params[i] = saved - fd_step;
        const double lm = half_sum_squares(probe.forward(input));
        params[i] = saved;
        const double numeric = (lp - lm) / (2.0 * fd_step);
        const double denom = std::max(std::abs(analytic[i]) + std::abs(numeric), 1e-6);
        const double rel = std::abs(analytic[i] - numeric) / denom;
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_param = i;
        }
    }
    report.pass = report.max_rel_error <= tolerance;
    return report;
}

} // namespace peco::nn
