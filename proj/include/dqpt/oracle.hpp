#pragma once

#include <vector>

#include "dqpt/imps.hpp"
#include "dqpt/models.hpp"

namespace dqpt {

/// Exact-diagonalization reference on a periodic chain of L <= 12 sites.
/// The Hamiltonian eigendecomposition is computed once per (model, L) and
/// cached; cache reads are thread-safe.
struct EdSystem {
    int length = 0;
    SpinModel model;
    CVector psi0;  // initial state
    CVector psi;   // state at `time`
    double time = 0;
};

EdSystem ed_make(const SpinModel& model, int length, const ProductState& v0);

/// |psi(t)> = e^{-iHt} |psi0> via the cached eigendecomposition.
EdSystem ed_evolve(const EdSystem& sys, double t);

/// -(1/L) log |<psi0|e^{-iHt}|psi0>|^2 (finite-L rate function).
double ed_rate_function(const EdSystem& sys, double t);

double ed_local_expectation(const EdSystem& sys, Pauli p, int site);

/// Dense RDM of the listed sites from the current state vector.
CMatrix ed_reduced_density_matrix(const EdSystem& sys, const std::vector<int>& sites);

double ed_energy(const EdSystem& sys);

/// Dense Hamiltonian (tests / small L diagnostics).
CMatrix ed_hamiltonian(const SpinModel& model, int length);

void ed_clear_cache();

}  // namespace dqpt
