#pragma once

#include <string>

#include "dqpt/imps.hpp"
#include "dqpt/numerics.hpp"

namespace dqpt {

enum class Pauli { X, Y, Z };

const Eigen::Matrix2cd& pauli(Pauli a);

enum class Family { Ising, XXZ };

/// Couplings of H = sum_i [ sum_a J_a s^a_i s^a_{i+1} + h_x s^x_i + h_z s^z_i ].
/// Ising: J_z = J, J_x = J_y = 0. XXZ enforces J_x = J_y; h_y is fixed to 0.
struct SpinModel {
    Family family = Family::Ising;
    double jx = 0, jy = 0, jz = 0;
    double hx = 0, hz = 0;

    static SpinModel ising(double j, double hx, double hz);
    static SpinModel xxz(double jxy, double jz, double hx, double hz);
    SpinModel negated() const;
    std::string key() const;  // exact textual identity (cache key / echo)
};

struct TrotterGateSet {
    Eigen::Matrix2cd single_site_half;  // exp(-i dt H0 / 2) per site
    Eigen::Matrix4cd two_site;          // exp(-i dt V) per bond, basis (s tau) = 2s+tau
    double dt = 0;
    int order = 2;
};

/// Gates for the splitting U(dt) ~ e^{-i H0 dt/2} e^{-i V dt} e^{-i H0 dt/2}
/// (order 2; order 1 drops the symmetrization). The 4x4 exponential is exact
/// (eigendecomposition of the Hermitian generator).
TrotterGateSet build_gates(const SpinModel& model, double dt, int order = 2);

/// "down", "right", "up"; anything else is a configuration error.
ProductState named_initial_state(const std::string& name);

}  // namespace dqpt
