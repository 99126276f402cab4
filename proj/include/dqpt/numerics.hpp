#pragma once

#include <complex>
#include <functional>

#include <Eigen/Dense>

#include "dqpt/errors.hpp"

namespace dqpt {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

struct SvdResult {
    CMatrix u;
    RVector s;  // descending, nonnegative
    CMatrix vdag;
};

/// Thin SVD with a fixed phase gauge: the largest-magnitude entry of each
/// column of u is rotated onto the positive real axis (the compensating
/// phase goes into the matching row of vdag).
SvdResult svd(const CMatrix& m);

/// Eigenvalues sorted by descending modulus, ties broken by descending real
/// part then descending imaginary part. Dimension capped at 1024.
CVector eig_dense(const CMatrix& m);

using LinearOp = std::function<void(const CVector& in, CVector& out)>;

struct DominantEig {
    cdouble value;
    CVector vector;  // unit 2-norm, first nonzero entry real positive
};

/// Matrix-free dominant eigenpair by power iteration. Converges when
/// ||apply(v) - e v|| <= tol * |e|. A second run from an independent start
/// detects modulus-degenerate dominant eigenvalues (DegeneracyError).
/// `guess` warm-starts the first run.
DominantEig dominant_eigpair(const LinearOp& apply, Eigen::Index dim, double tol,
                             int max_iter, const CVector* guess = nullptr);

/// Applies the operator to all basis vectors. Test/diagnostic helper; never
/// used on chi^2-sized transfer operators in production paths.
CMatrix materialize(const LinearOp& apply, Eigen::Index dim);

}  // namespace dqpt
