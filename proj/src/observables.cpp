#include "dqpt/observables.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dqpt {

namespace {

double entropy_of_rho(const CMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SolverError("region entropy: eig failed");
    double entropy = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        double p = std::max(es.eigenvalues()[i], 1e-15);
        double c = -p * std::log(p);
        if (c > 1e-14) entropy += c;
    }
    return entropy;
}

// partial trace over the sites NOT in keep (bit k of the basis index is
// site k of the ordered window, most significant first)
CMatrix partial_trace(const CMatrix& rho, int n_sites, const std::vector<int>& keep) {
    const int m = static_cast<int>(keep.size());
    const int dim = 1 << m;
    std::vector<int> drop;
    for (int k = 0; k < n_sites; ++k) {
        if (std::find(keep.begin(), keep.end(), k) == keep.end()) drop.push_back(k);
    }
    const int dim_drop = 1 << drop.size();

    CMatrix out = CMatrix::Zero(dim, dim);
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
            cdouble acc = 0;
            for (int e = 0; e < dim_drop; ++e) {
                int full_r = 0, full_c = 0;
                int kb = 0, eb = 0;
                for (int k = 0; k < n_sites; ++k) {
                    int br, bc;
                    if (kb < m && keep[kb] == k) {
                        br = (r >> (m - 1 - kb)) & 1;
                        bc = (c >> (m - 1 - kb)) & 1;
                        ++kb;
                    } else {
                        br = bc = (e >> eb) & 1;
                        ++eb;
                    }
                    full_r = full_r * 2 + br;
                    full_c = full_c * 2 + bc;
                }
                acc += rho(full_r, full_c);
            }
            out(r, c) = acc;
        }
    }
    return out;
}

Sublattice sub_of(int site, Sublattice origin) {
    bool even = ((site % 2) + 2) % 2 == 0;
    if (even) return origin;
    return origin == Sublattice::A ? Sublattice::B : Sublattice::A;
}

Eigen::Matrix4cd two_site_op(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Eigen::Matrix4cd k;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return k;
}

}  // namespace

double local_expectation(const IMpsState& s, Pauli p, Sublattice sub) {
    CMatrix rho = reduced_density_matrix(s, {0}, sub);
    cdouble val = (rho * pauli(p)).trace();
    if (std::abs(val.imag()) > 1e-10) {
        throw BreakdownError("local_expectation: non-real Pauli expectation " +
                             std::to_string(val.imag()));
    }
    return val.real();
}

cdouble connected_correlator(const IMpsState& s, Pauli a, Pauli b, int distance,
                             Sublattice origin) {
    if (distance < 1 || distance > 7) {
        throw CapacityError("connected_correlator: distance " + std::to_string(distance) +
                            " outside the 8-site window");
    }
    CMatrix rho = reduced_density_matrix(s, {0, distance}, origin);
    cdouble joint = (rho * two_site_op(pauli(a), pauli(b))).trace();
    double ea = local_expectation(s, a, origin);
    double eb = local_expectation(s, b, sub_of(distance, origin));
    return joint - ea * eb;
}

double region_entropy(const IMpsState& s, const std::vector<int>& region, Sublattice origin) {
    return entropy_of_rho(reduced_density_matrix(s, region, origin));
}

double mutual_information(const IMpsState& s, const std::vector<int>& region_a,
                          const std::vector<int>& region_b, Sublattice origin) {
    if (region_a.empty() || region_b.empty()) {
        throw ValidationError("mutual_information: empty region");
    }
    std::set<int> sa(region_a.begin(), region_a.end());
    for (int site : region_b) {
        if (sa.count(site) > 0) {
            throw ValidationError("mutual_information: regions overlap at site " +
                                  std::to_string(site));
        }
        sa.insert(site);
    }
    std::vector<int> all(sa.begin(), sa.end());
    int span = all.back() - all.front() + 1;
    if (span > 8) {
        throw CapacityError("mutual_information: combined span " + std::to_string(span) +
                            " above cap 8");
    }

    // one RDM over the union, subregions by partial trace
    CMatrix rho_ab = reduced_density_matrix(s, all, origin);
    const int n = static_cast<int>(all.size());
    std::vector<int> ia, ib;
    std::set<int> seta(region_a.begin(), region_a.end());
    for (int k = 0; k < n; ++k) {
        if (seta.count(all[k]) > 0) {
            ia.push_back(k);
        } else {
            ib.push_back(k);
        }
    }
    CMatrix rho_a = partial_trace(rho_ab, n, ia);
    CMatrix rho_b = partial_trace(rho_ab, n, ib);
    return entropy_of_rho(rho_a) + entropy_of_rho(rho_b) - entropy_of_rho(rho_ab);
}

}  // namespace dqpt
