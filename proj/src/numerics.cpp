#include "dqpt/numerics.hpp"

#include <algorithm>
#include <random>
#include <vector>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

namespace dqpt {

namespace {

void check_finite(const CMatrix& m, const char* who) {
    if (!m.allFinite()) {
        throw ValidationError(std::string(who) + ": non-finite entries");
    }
}

// Deterministic pseudo-random start vector; `salt` decouples restarts.
CVector seeded_vector(Eigen::Index dim, unsigned salt) {
    std::mt19937_64 rng(0x5eedULL + 0x9e3779b9ULL * salt + static_cast<unsigned long long>(dim));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CVector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = cdouble(u(rng), u(rng));
    return v / v.norm();
}

// Rotate the global phase so the first entry above threshold is real positive.
void fix_phase(CVector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double a = std::abs(v[i]);
        if (a > 1e-12) {
            v *= std::conj(v[i]) / a;
            return;
        }
    }
}

struct PowerResult {
    cdouble value = 0;
    CVector vector;
    bool converged = false;
};

PowerResult power_iterate(const LinearOp& apply, Eigen::Index dim, double tol,
                          int max_iter, const CVector& start) {
    PowerResult r;
    CVector v = start / start.norm();
    CVector w(dim);
    for (int it = 0; it < max_iter; ++it) {
        apply(v, w);
        cdouble e = v.dot(w);  // v is unit norm, Eigen's dot conjugates the lhs
        double resid = (w - e * v).norm();
        if (resid <= tol * std::max(std::abs(e), 1e-300)) {
            r.value = e;
            r.vector = v;
            fix_phase(r.vector);
            r.converged = true;
            return r;
        }
        double nw = w.norm();
        if (nw < 1e-300) {
            // landed in the kernel; restart direction comes from the caller
            break;
        }
        v = w / nw;
        fix_phase(v);
    }
    return r;
}

}  // namespace

SvdResult svd(const CMatrix& m) {
    check_finite(m, "svd");
    SvdResult r;
    // Jacobi keeps high relative accuracy on the graded matrices iTEBD
    // produces; BDC takes over where Jacobi gets slow.
    if (std::min(m.rows(), m.cols()) <= 128) {
        Eigen::JacobiSVD<CMatrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        r.u = solver.matrixU();
        r.s = solver.singularValues();
        r.vdag = solver.matrixV().adjoint();
    } else {
        Eigen::BDCSVD<CMatrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (solver.info() != Eigen::Success) {
            throw SolverError("svd: no convergence on " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()) + " matrix");
        }
        r.u = solver.matrixU();
        r.s = solver.singularValues();
        r.vdag = solver.matrixV().adjoint();
    }
    // phase gauge per column of u
    for (Eigen::Index k = 0; k < r.u.cols(); ++k) {
        Eigen::Index imax = 0;
        double amax = 0;
        for (Eigen::Index i = 0; i < r.u.rows(); ++i) {
            double a = std::abs(r.u(i, k));
            if (a > amax) {
                amax = a;
                imax = i;
            }
        }
        if (amax > 0) {
            cdouble ph = std::conj(r.u(imax, k)) / amax;
            r.u.col(k) *= ph;
            if (k < r.vdag.rows()) r.vdag.row(k) *= std::conj(ph);
        }
    }
    return r;
}

CVector eig_dense(const CMatrix& m) {
    if (m.rows() != m.cols()) throw ValidationError("eig_dense: matrix not square");
    if (m.rows() > 1024) {
        throw CapacityError("eig_dense: dimension " + std::to_string(m.rows()) + " above cap 1024");
    }
    check_finite(m, "eig_dense");
    CVector e;
    if (m.rows() > 64) {
        CMatrix work = m;
        e = CVector(m.rows());
        lapack_int info = LAPACKE_zgeev(
            LAPACK_COL_MAJOR, 'N', 'N', static_cast<lapack_int>(m.rows()),
            reinterpret_cast<lapack_complex_double*>(work.data()),
            static_cast<lapack_int>(m.rows()),
            reinterpret_cast<lapack_complex_double*>(e.data()), nullptr, 1, nullptr, 1);
        if (info != 0) {
            throw SolverError("eig_dense: zgeev failed on " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()) + " matrix (info " + std::to_string(info) +
                              ")");
        }
    } else {
        Eigen::ComplexEigenSolver<CMatrix> solver(m, /*computeEigenvectors=*/false);
        if (solver.info() != Eigen::Success) {
            throw SolverError("eig_dense: no convergence on " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()) + " matrix");
        }
        e = solver.eigenvalues();
    }
    std::vector<cdouble> v(e.data(), e.data() + e.size());
    std::sort(v.begin(), v.end(), [](cdouble a, cdouble b) {
        double ma = std::abs(a), mb = std::abs(b);
        if (ma != mb) return ma > mb;
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return Eigen::Map<CVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

DominantEig dominant_eigpair(const LinearOp& apply, Eigen::Index dim, double tol,
                             int max_iter, const CVector* guess) {
    if (dim <= 0) throw ValidationError("dominant_eigpair: empty operator");

    CVector start = guess != nullptr && guess->size() == dim ? *guess : seeded_vector(dim, 0);
    PowerResult a = power_iterate(apply, dim, tol, max_iter, start);
    if (!a.converged) {
        // one retry from a fresh direction before giving up
        a = power_iterate(apply, dim, tol, max_iter, seeded_vector(dim, 1));
        if (!a.converged) {
            throw ConvergenceError("dominant_eigpair: no convergence within " +
                                   std::to_string(max_iter) + " iterations (dim " +
                                   std::to_string(dim) + ")");
        }
    }

    // Restart from an independent direction: if the same modulus comes back
    // with a non-colinear eigenvector, the dominant eigenvalue is degenerate
    // and the MPS behind this operator is non-injective.
    PowerResult b = power_iterate(apply, dim, tol, max_iter, seeded_vector(dim, 2));
    if (b.converged) {
        double mod_gap = std::abs(std::abs(a.value) - std::abs(b.value));
        if (mod_gap < tol * std::max(std::abs(a.value), 1e-300)) {
            double colin = std::abs(a.vector.dot(b.vector));
            if (colin < 1.0 - 1e-8) {
                throw DegeneracyError("dominant_eigpair: modulus-degenerate dominant eigenvalue");
            }
        }
    }
    return DominantEig{a.value, a.vector};
}

CMatrix materialize(const LinearOp& apply, Eigen::Index dim) {
    CMatrix m(dim, dim);
    CVector e = CVector::Zero(dim), col(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        e[j] = 1;
        apply(e, col);
        m.col(j) = col;
        e[j] = 0;
    }
    return m;
}

}  // namespace dqpt
