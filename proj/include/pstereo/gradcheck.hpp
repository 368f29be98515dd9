#pragma once

#include <functional>
#include <vector>

namespace pstereo {

struct GradCheckResult {
    bool passed = false;
    double max_rel_error = 0.0;  // worst |fd - analytic| / max-norm of both
    double max_abs_error = 0.0;
    std::size_t worst_index = 0;
};

// Central-difference check of an analytic gradient. `eval` must return the
// scalar objective as a function of the current contents of `params`; each
// parameter is probed at +/- step and restored afterwards. The relative metric
// divides every entry's error by the max-norm over both gradients, so entries
// that are individually near zero do not blow it up.
GradCheckResult check_gradient(std::vector<double>& params,
                               const std::function<double()>& eval,
                               const std::vector<double>& analytic,
                               double step = 1e-5, double tolerance = 1e-6);

}  // namespace pstereo
