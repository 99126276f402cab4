#pragma once

#include <functional>
#include <vector>

#include "dqpt/imps.hpp"
#include "dqpt/models.hpp"

namespace dqpt {

struct StepOptions {
    Eigen::Index chi_max = 256;
    double sv_threshold = 1e-9;
    double regauge_tol = 1e-8;  // lazy re-canonicalization trigger
    double fail_tol = 1e-6;     // evolution failure after a re-gauge attempt
};

struct StepStats {
    double time = 0;
    Eigen::Index chi_a = 0, chi_b = 0;
    double discarded = 0;  // weight discarded in this step
    double canonical_error = 0;
    bool overflow_warning = false;  // chi_max hit with above-threshold values dropped
    bool regauged = false;
};

/// One second-order Trotter step: half single-site gates, two-site gate on
/// the A bond, two-site gate on the B bond, half single-site gates, with SVD
/// re-factorization and truncation at each bond.
IMpsState step(const IMpsState& s, const TrotterGateSet& g, const StepOptions& opt,
               StepStats* stats = nullptr);

using StepObserver = std::function<void(const IMpsState&, const StepStats&)>;

struct EvolveOptions {
    double dt = 0.01;
    double t_max = 1.0;
    Eigen::Index chi_max = 256;
    double sv_threshold = 1e-9;
    int trotter_order = 2;
};

struct EvolveResult {
    std::vector<StepStats> steps;  // includes the t = 0 entry
    IMpsState final_state;
};

/// Runs ceil(t_max/dt) steps, firing the observer on every snapshot
/// (including t = 0). Deterministic given identical inputs.
EvolveResult evolve(const IMpsState& initial, const SpinModel& model, const EvolveOptions& opt,
                    const StepObserver& observer = {});

}  // namespace dqpt
