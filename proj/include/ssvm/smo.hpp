#pragma once

#include "ssvm/model.hpp"
#include "ssvm/types.hpp"

namespace ssvm {

/// Batch SMO configuration. The solver stops when the maximal KKT violation
/// (gradient gap across the working pair) drops to `tolerance`, or after
/// max_passes * n pair updates, whichever comes first.
struct SmoConfig {
    double C = 1.0;
    KernelSpec kernel;
    double tolerance = 1e-3;
    int max_passes = 1000;
};

struct SmoResult {
    Model model;
    bool converged = true;
    long iterations = 0;
    double dual_objective = 0.0;
};

/// Minimal maximal-violating-pair SMO. Exists to be obviously correct; used
/// as the batch baseline and as the correctness oracle for the online
/// solvers.
SmoResult smo_solve(const Dataset& dataset, const SmoConfig& config);

}  // namespace ssvm
