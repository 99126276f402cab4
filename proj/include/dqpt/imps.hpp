#pragma once

#include <array>
#include <vector>

#include "dqpt/numerics.hpp"

namespace dqpt {

enum class Bond { A, B };
enum class Sublattice { A, B };

/// Single-site spinor (amplitudes on up, down in the sigma^z basis).
struct ProductState {
    Eigen::Vector2cd v;

    /// Validates normalization to 1e-14.
    static ProductState make(cdouble up, cdouble down);
};

/// Two-site-unit-cell infinite MPS in Vidal canonical form,
///
///     ... L_B G_A L_A G_B L_B G_A L_A ...
///
/// gamma_a[s] maps bond B -> bond A, gamma_b[s] maps bond A -> bond B.
/// lambda_* hold the Schmidt singular values sqrt(lambda_i), descending,
/// with sum(lambda_i) = 1. States are immutable value snapshots; every
/// operation returns a new state.
struct IMpsState {
    std::array<CMatrix, 2> gamma_a;  // [sigma], chi_b x chi_a
    std::array<CMatrix, 2> gamma_b;  // [sigma], chi_a x chi_b
    RVector lambda_a;                // sqrt(lambda) on bond A
    RVector lambda_b;                // sqrt(lambda) on bond B
    double time_stamp = 0;
    double canonical_error_a = 0;
    double canonical_error_b = 0;
    double discarded_weight = 0;  // cumulative truncation weight
    bool chi2_noop_warning = false;

    Eigen::Index chi_a() const { return lambda_a.size(); }
    Eigen::Index chi_b() const { return lambda_b.size(); }
    const std::array<CMatrix, 2>& gamma(Sublattice s) const {
        return s == Sublattice::A ? gamma_a : gamma_b;
    }
    const RVector& lambda(Bond b) const { return b == Bond::A ? lambda_a : lambda_b; }
};

/// chi = 1 state from a product spinor; canonical_error = 0, time_stamp = 0.
IMpsState from_product(const ProductState& v);

/// Wraps a one-site-cell tensor m[sigma] (chi x chi) as an IMpsState with
/// uniform lambdas on both bonds. The result is generally NOT canonical;
/// it is a carrier for canonicalize().
IMpsState wrap_site_tensor_raw(const std::array<CMatrix, 2>& m);

/// Wraps already-canonical one-site data (lambda = sqrt-Schmidt values,
/// gamma) onto both sublattices.
IMpsState wrap_canonical_site(const RVector& lambda, const std::array<CMatrix, 2>& gamma);

struct CanonicalErrors {
    double bond_a = 0;  // max residual of the two conditions pairing L_A with its neighbours
    double bond_b = 0;
    double max() const { return bond_a > bond_b ? bond_a : bond_b; }
};

/// Residuals of the left/right canonical conditions on each bond.
CanonicalErrors measure_canonical_error(const IMpsState& s);

struct CanonicalizeOptions {
    double tol = 1e-13;        // power-iteration residual for the transfer fixed points
    int max_iter = 200000;
    double rank_cutoff = 1e-12;  // drop Schmidt values below this (absolute, normalized spectrum)
};

/// Gauge-fixes to Vidal canonical form via the transfer-matrix fixed points
/// (V_L = Y^dag Y, V_R = X X^dag, then SVD of the overlap of the two
/// factors). Dominant transfer eigenvalue is rescaled to 1. The chi^2-sized
/// transfer operator is only ever applied matrix-free.
IMpsState canonicalize(const IMpsState& s, const CanonicalizeOptions& opt = {});

/// Discards Schmidt values with sqrt(lambda) < sv_threshold and anything
/// beyond chi_max on both bonds; renormalizes and records the discarded weight.
IMpsState truncate(const IMpsState& s, Eigen::Index chi_max, double sv_threshold);

/// Keeps the two leading Schmidt values per bond (the hybrid-DQPT
/// diagnostic). chi = 1 input is a no-op with the warning flag set.
IMpsState truncate_to_chi2(const IMpsState& s);

/// Reduced density matrix of the given relative site indices (window span
/// <= 8); other sites inside the span are traced out. `origin` fixes the
/// sublattice of site 0. Hermitian, PSD, unit trace.
CMatrix reduced_density_matrix(const IMpsState& s, std::vector<int> sites,
                               Sublattice origin = Sublattice::A);

/// S = -sum lambda_i log lambda_i (natural log).
double entanglement_entropy(const IMpsState& s, Bond bond);

}  // namespace dqpt
