#pragma once

#include <ostream>

namespace lp2dh {

// Fast invariant battery printed as a pass/fail table. Returns the number of
// failed checks. `perturb_gradient` deliberately corrupts the analytic
// gradient so the finite-difference check must fail (negative control).
int run_selftest(std::ostream& out, bool perturb_gradient = false);

}  // namespace lp2dh
