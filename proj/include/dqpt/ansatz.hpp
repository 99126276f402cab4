#pragma once

#include <array>
#include <utility>
#include <vector>

#include "dqpt/imps.hpp"

namespace dqpt {

/// Closed-form chi=2 ansatz for precession DQPTs: rotating frame with
/// respect to the single-spin terms, effective y-axis Hamiltonian with
/// integrated couplings a(t), b(t).
struct PrecessionAnsatz {
    double j, hx, hz, h;

    PrecessionAnsatz(double j_, double hx_, double hz_);

    // rotating-frame sigma^z coefficients (unit vector on the Bloch sphere)
    double sx(double t) const;
    double sy(double t) const;
    double sz(double t) const;

    // integrated effective couplings, a(0) = b(0) = 0
    double a(double t) const;
    double b(double t) const;

    double j_eff(double t) const;  // J sy^2
    double h_eff(double t) const;  // -2 J sy (sx^2 + sz^2)
};

/// (sqrt(lambda1), sqrt(lambda2)) = (|cos Ja|, |sin Ja|), re-sorted descending.
std::pair<double, double> precession_lambdas(const PrecessionAnsatz& an, double t);

/// Canonical Gamma spinors, indexed [2*i + j]; includes the sign matrix that
/// keeps the lambdas positive.
std::array<Eigen::Vector2cd, 4> precession_gamma(const PrecessionAnsatz& an, double t);

/// The chi=2 MPO of projectors applied to the down product state, then the
/// frame rotation. Raw (non-canonical) state; canonicalizing reproduces
/// precession_lambdas / precession_gamma.
IMpsState precession_mpo_state(const PrecessionAnsatz& an, double t);

/// chi=2 ansatz for entanglement DQPTs: second-order Trotter slice with the
/// interaction exponentiated exactly as a chi=2 MPO.
struct EntanglementAnsatz {
    double j, hx, hz, h;

    EntanglementAnsatz(double j_, double hx_, double hz_);

    double theta(double t) const;  // mixing angle, 2 cos^2(theta) = 1 + (1-cos ht) hx hz/h^2
    double f_ent(double t) const;
    cdouble c_up(double t) const;    // <up | right(t)>
    cdouble c_down(double t) const;  // <down | right(t)>
    Eigen::Vector2cd up_t(double t) const;
    Eigen::Vector2cd down_t(double t) const;
};

/// Raw (non-canonical) A(t) tensor wrapped as a chi=2 iMPS.
IMpsState entanglement_state(const EntanglementAnsatz& an, double t);

/// (lambda1, lambda2) = ([4 + sqrt(f+13)]/8, [4 - sqrt(f+13)]/8).
std::pair<double, double> entanglement_lambdas(const EntanglementAnsatz& an, double t);

/// Exactly solvable h_x = 0 line: transfer eigenvalues, canonical Gamma,
/// overlap matrix, and all DQPT times up to t_max.
struct ClassicalIsing {
    cdouble e1, e2;  // |e1| >= |e2|
    std::array<Eigen::Vector2cd, 4> gamma;
    CMatrix overlap;  // 2x2
    std::vector<double> dqpt_times;
};

ClassicalIsing classical_ising_exact(double j, double hz, double t);

/// Pauli expectation values of a normalized spinor.
Eigen::Vector3d bloch_vector(const Eigen::Vector2cd& spinor);

/// Helper: spinor-matrix entries [2*i+j] -> gamma[sigma](i, j).
std::array<CMatrix, 2> spinors_to_site_tensor(const std::array<Eigen::Vector2cd, 4>& m);

}  // namespace dqpt
