#include "dqpt/oracle.hpp"

#include <cmath>
#include <deque>
#include <memory>
#include <mutex>
#include <string>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

namespace dqpt {

namespace {

constexpr int kMaxSites = 12;

struct EigData {
    RVector evals;
    CMatrix evecs;
};

std::mutex g_cache_mutex;
std::deque<std::pair<std::string, std::shared_ptr<const EigData>>> g_cache;

std::shared_ptr<const EigData> eig_for(const SpinModel& model, int length) {
    std::string key = model.key() + ";L=" + std::to_string(length);
    {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        for (const auto& [k, v] : g_cache) {
            if (k == key) return v;
        }
    }

    auto data = std::make_shared<EigData>();
    data->evecs = ed_hamiltonian(model, length);
    const lapack_int n = static_cast<lapack_int>(data->evecs.rows());
    data->evals = RVector(n);
    if (model.hx == 0 && model.jx == 0 && model.jy == 0) {
        // H is diagonal in the z basis
        data->evals = data->evecs.diagonal().real();
        data->evecs = CMatrix::Identity(n, n);
    } else {
        lapack_int info = LAPACKE_zheevd(
            LAPACK_COL_MAJOR, 'V', 'L', n,
            reinterpret_cast<lapack_complex_double*>(data->evecs.data()), n,
            data->evals.data());
        if (info != 0) {
            throw SolverError("ed: zheevd failed with info " + std::to_string(info));
        }
    }

    std::lock_guard<std::mutex> lock(g_cache_mutex);
    g_cache.emplace_back(key, data);
    while (g_cache.size() > 3) g_cache.pop_front();
    return data;
}

}  // namespace

CMatrix ed_hamiltonian(const SpinModel& model, int length) {
    if (length < 2 || length > kMaxSites) {
        throw CapacityError("ed: L = " + std::to_string(length) + " outside [2, 12]");
    }
    const Eigen::Index dim = Eigen::Index(1) << length;
    CMatrix h = CMatrix::Zero(dim, dim);
    auto zbit = [](Eigen::Index x, int site) { return ((x >> site) & 1) == 0 ? 1.0 : -1.0; };

    for (Eigen::Index x = 0; x < dim; ++x) {
        double diag = 0;
        for (int i = 0; i < length; ++i) {
            int ip = (i + 1) % length;
            diag += model.jz * zbit(x, i) * zbit(x, ip) + model.hz * zbit(x, i);
        }
        h(x, x) += diag;

        for (int i = 0; i < length; ++i) {
            // transverse field flips one bit
            if (model.hx != 0) {
                Eigen::Index y = x ^ (Eigen::Index(1) << i);
                h(y, x) += model.hx;
            }
            // xx + yy flips the bond pair
            int ip = (i + 1) % length;
            if (model.jx != 0 || model.jy != 0) {
                Eigen::Index y = x ^ (Eigen::Index(1) << i) ^ (Eigen::Index(1) << ip);
                bool equal_bits = ((x >> i) & 1) == ((x >> ip) & 1);
                double amp = equal_bits ? model.jx - model.jy : model.jx + model.jy;
                if (amp != 0) h(y, x) += amp;
            }
        }
    }
    return h;
}

EdSystem ed_make(const SpinModel& model, int length, const ProductState& v0) {
    if (length < 2 || length > kMaxSites) {
        throw CapacityError("ed: L = " + std::to_string(length) + " outside [2, 12]");
    }
    EdSystem sys;
    sys.length = length;
    sys.model = model;
    const Eigen::Index dim = Eigen::Index(1) << length;
    sys.psi0 = CVector(dim);
    for (Eigen::Index x = 0; x < dim; ++x) {
        cdouble amp = 1;
        for (int i = 0; i < length; ++i) amp *= v0.v[(x >> i) & 1];
        sys.psi0[x] = amp;
    }
    sys.psi = sys.psi0;
    return sys;
}

EdSystem ed_evolve(const EdSystem& sys, double t) {
    auto eig = eig_for(sys.model, sys.length);
    CVector c = eig->evecs.adjoint() * sys.psi0;
    for (Eigen::Index k = 0; k < c.size(); ++k) {
        c[k] *= std::exp(cdouble(0, -eig->evals[k] * t));
    }
    EdSystem out = sys;
    out.psi = eig->evecs * c;
    out.time = t;
    return out;
}

double ed_rate_function(const EdSystem& sys, double t) {
    if (t == 0) return 0.0;  // <psi0|psi0> = 1 by construction
    auto eig = eig_for(sys.model, sys.length);
    CVector c = eig->evecs.adjoint() * sys.psi0;
    cdouble overlap = 0;
    for (Eigen::Index k = 0; k < c.size(); ++k) {
        overlap += std::norm(c[k]) * std::exp(cdouble(0, -eig->evals[k] * t));
    }
    double p = std::norm(overlap);
    if (p < 1e-300) p = 1e-300;  // floored with the cap convention from the spec
    return -std::log(p) / sys.length;
}

double ed_local_expectation(const EdSystem& sys, Pauli p, int site) {
    if (site < 0 || site >= sys.length) throw ValidationError("ed: site out of range");
    const Eigen::Index dim = sys.psi.size();
    const Eigen::Index mask = Eigen::Index(1) << site;
    cdouble acc = 0;
    for (Eigen::Index x = 0; x < dim; ++x) {
        bool bit = (x & mask) != 0;  // 0 = up
        switch (p) {
            case Pauli::Z:
                acc += std::conj(sys.psi[x]) * sys.psi[x] * (bit ? -1.0 : 1.0);
                break;
            case Pauli::X:
                acc += std::conj(sys.psi[x ^ mask]) * sys.psi[x];
                break;
            case Pauli::Y:
                acc += std::conj(sys.psi[x ^ mask]) * sys.psi[x] *
                       (bit ? cdouble(0, -1) : cdouble(0, 1));
                break;
        }
    }
    return acc.real();
}

CMatrix ed_reduced_density_matrix(const EdSystem& sys, const std::vector<int>& sites) {
    const int m = static_cast<int>(sites.size());
    if (m == 0 || m > 8) throw CapacityError("ed rdm: 1..8 sites");
    for (int s : sites) {
        if (s < 0 || s >= sys.length) throw ValidationError("ed rdm: site out of range");
    }
    const Eigen::Index dim = sys.psi.size();
    const int rdim = 1 << m;
    CMatrix rho = CMatrix::Zero(rdim, rdim);
    for (Eigen::Index x = 0; x < dim; ++x) {
        int row = 0;
        for (int k = 0; k < m; ++k) row = row * 2 + static_cast<int>((x >> sites[k]) & 1);
        for (int col = 0; col < rdim; ++col) {
            Eigen::Index y = x;
            for (int k = 0; k < m; ++k) {
                Eigen::Index mask = Eigen::Index(1) << sites[k];
                bool bit = ((col >> (m - 1 - k)) & 1) != 0;
                y = bit ? (y | mask) : (y & ~mask);
            }
            rho(row, col) += sys.psi[x] * std::conj(sys.psi[y]);
        }
    }
    return (rho + rho.adjoint()) / 2.0;
}

double ed_energy(const EdSystem& sys) {
    auto eig = eig_for(sys.model, sys.length);
    CVector c = eig->evecs.adjoint() * sys.psi;
    double e = 0;
    for (Eigen::Index k = 0; k < c.size(); ++k) e += std::norm(c[k]) * eig->evals[k];
    return e;
}

void ed_clear_cache() {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    g_cache.clear();
}

}  // namespace dqpt
