#pragma once

#include <vector>

#include "dqpt/imps.hpp"
#include "dqpt/models.hpp"

namespace dqpt {

/// <sigma^a> via the single-site reduced density matrix.
double local_expectation(const IMpsState& s, Pauli p, Sublattice sub = Sublattice::A);

/// C_ab(d) = <s^a_0 s^b_d> - <s^a_0><s^b_d>, distance <= 7.
cdouble connected_correlator(const IMpsState& s, Pauli a, Pauli b, int distance,
                             Sublattice origin = Sublattice::A);

/// von Neumann entropy of the region's reduced density matrix (natural log).
double region_entropy(const IMpsState& s, const std::vector<int>& region,
                      Sublattice origin = Sublattice::A);

/// I_{A;B} = S(A) + S(B) - S(A u B) on disjoint regions, combined span <= 8.
double mutual_information(const IMpsState& s, const std::vector<int>& region_a,
                          const std::vector<int>& region_b, Sublattice origin = Sublattice::A);

}  // namespace dqpt
