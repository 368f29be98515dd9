#include "pstereo/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "pstereo/errors.hpp"

namespace pstereo {

GradCheckResult check_gradient(std::vector<double>& params,
                               const std::function<double()>& eval,
                               const std::vector<double>& analytic,
                               double step, double tolerance) {
    if (params.size() != analytic.size())
        throw DimensionError("check_gradient: parameter and gradient sizes differ");
    if (!(step > 0.0))
        throw DomainError("check_gradient: step must be positive");

    std::vector<double> fd(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + step;
        const double plus = eval();
        params[i] = saved - step;
        const double minus = eval();
        params[i] = saved;
        fd[i] = (plus - minus) / (2.0 * step);
    }

    double norm = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i)
        norm = std::max({norm, std::abs(fd[i]), std::abs(analytic[i])});
    const double denom = std::max(norm, 1e-12);

    GradCheckResult result;
    for (std::size_t i = 0; i < fd.size(); ++i) {
        const double abs_err = std::abs(fd[i] - analytic[i]);
        const double rel_err = abs_err / denom;
        if (rel_err > result.max_rel_error) {
            result.max_rel_error = rel_err;
            result.worst_index = i;
        }
        result.max_abs_error = std::max(result.max_abs_error, abs_err);
    }
    result.passed = result.max_rel_error <= tolerance;
    return result;
}

}  // namespace pstereo
