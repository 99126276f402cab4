#include "dqpt/imps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dqpt {

ProductState ProductState::make(cdouble up, cdouble down) {
    ProductState p;
    p.v << up, down;
    double n = std::norm(up) + std::norm(down);
    if (std::abs(n - 1.0) > 1e-14) {
        throw ValidationError("ProductState: spinor not normalized (|v|^2 = " +
                              std::to_string(n) + ")");
    }
    return p;
}

IMpsState from_product(const ProductState& v) {
    IMpsState s;
    for (int sig = 0; sig < 2; ++sig) {
        s.gamma_a[sig] = CMatrix::Constant(1, 1, v.v[sig]);
        s.gamma_b[sig] = CMatrix::Constant(1, 1, v.v[sig]);
    }
    s.lambda_a = RVector::Ones(1);
    s.lambda_b = RVector::Ones(1);
    return s;
}

IMpsState wrap_site_tensor_raw(const std::array<CMatrix, 2>& m) {
    const Eigen::Index chi = m[0].rows();
    if (m[0].cols() != chi || m[1].rows() != chi || m[1].cols() != chi) {
        throw ValidationError("wrap_site_tensor_raw: tensor slices must be square and equal-sized");
    }
    // uniform lambdas keep sum(lambda)=1; the scale moves into gamma so the
    // physical cell L G L G reproduces m * m
    const double s = 1.0 / std::sqrt(static_cast<double>(chi));
    IMpsState st;
    for (int sig = 0; sig < 2; ++sig) {
        st.gamma_a[sig] = m[sig] / s;
        st.gamma_b[sig] = m[sig] / s;
    }
    st.lambda_a = RVector::Constant(chi, s);
    st.lambda_b = RVector::Constant(chi, s);
    auto err = measure_canonical_error(st);
    st.canonical_error_a = err.bond_a;
    st.canonical_error_b = err.bond_b;
    return st;
}

IMpsState wrap_canonical_site(const RVector& lambda, const std::array<CMatrix, 2>& gamma) {
    IMpsState st;
    st.gamma_a = gamma;
    st.gamma_b = gamma;
    st.lambda_a = lambda;
    st.lambda_b = lambda;
    auto err = measure_canonical_error(st);
    st.canonical_error_a = err.bond_a;
    st.canonical_error_b = err.bond_b;
    return st;
}

// Residuals of the canonical conditions, measured in the Schmidt-weighted
// norm || W (M - 1) W ||_F with W the lambdas of the bond the free indices
// live on. The weighting is what keeps the conditions meaningful for a
// truncated MPS: after a threshold truncation the raw residual equals
// L^-1 (discarded projection) L^-1 exactly, which is unbounded for a
// quasi-continuous Schmidt spectrum, while the weighted residual bounds the
// gauge error any observable or fidelity contraction can pick up.
CanonicalErrors measure_canonical_error(const IMpsState& s) {
    auto left_residual = [](const RVector& lam, const std::array<CMatrix, 2>& g,
                            const RVector& w) {
        // sum_s (L g^s)^dag (L g^s) = 1, free indices on g's column bond
        const Eigen::Index n = g[0].cols();
        CMatrix acc = CMatrix::Zero(n, n);
        for (int sig = 0; sig < 2; ++sig) {
            CMatrix lg = lam.asDiagonal() * g[sig];
            acc += lg.adjoint() * lg;
        }
        acc -= CMatrix::Identity(n, n);
        return (w.asDiagonal() * acc * w.asDiagonal()).norm();
    };
    auto right_residual = [](const std::array<CMatrix, 2>& g, const RVector& lam,
                             const RVector& w) {
        // sum_s (g^s L)(g^s L)^dag = 1, free indices on g's row bond
        const Eigen::Index n = g[0].rows();
        CMatrix acc = CMatrix::Zero(n, n);
        for (int sig = 0; sig < 2; ++sig) {
            CMatrix gl = g[sig] * lam.asDiagonal();
            acc += gl * gl.adjoint();
        }
        acc -= CMatrix::Identity(n, n);
        return (w.asDiagonal() * acc * w.asDiagonal()).norm();
    };
    CanonicalErrors e;
    // bond A pairs L_A with gamma_B (left condition) and gamma_A (right
    // condition); both conditions leave their free indices on bond B, and
    // vice versa for bond B
    e.bond_a = std::max(left_residual(s.lambda_a, s.gamma_b, s.lambda_b),
                        right_residual(s.gamma_a, s.lambda_a, s.lambda_b));
    e.bond_b = std::max(left_residual(s.lambda_b, s.gamma_a, s.lambda_a),
                        right_residual(s.gamma_b, s.lambda_b, s.lambda_a));
    return e;
}

namespace {

// Cell tensor m[2*s+tau] = L_B G_A^s L_A G_B^tau (chi_b x chi_b).
std::array<CMatrix, 4> cell_tensor(const IMpsState& s) {
    std::array<CMatrix, 4> m;
    for (int sig = 0; sig < 2; ++sig) {
        CMatrix left = s.lambda_b.asDiagonal() * s.gamma_a[sig] * s.lambda_a.asDiagonal();
        for (int tau = 0; tau < 2; ++tau) m[2 * sig + tau] = left * s.gamma_b[tau];
    }
    return m;
}

// Hermitize a transfer fixed point and factor it as F = C^dag C (left) or
// F = C C^dag (right) keeping directions above cutoff. Breakdown if the
// Hermitized matrix has a significantly negative eigenvalue.
struct Factored {
    CMatrix factor;      // C
    CMatrix inv_factor;  // pseudo-inverse of C
};

Factored factor_fixed_point(CMatrix f, bool left, double rel_cutoff) {
    // global phase so the trace is real positive, then Hermitize
    cdouble tr = f.trace();
    if (std::abs(tr) > 0) f *= std::conj(tr) / std::abs(tr);
    f = (f + f.adjoint()) / 2.0;

    Eigen::SelfAdjointEigenSolver<CMatrix> es(f);
    if (es.info() != Eigen::Success) throw SolverError("canonicalize: fixed-point eig failed");
    RVector d = es.eigenvalues();
    double dmax = d.maxCoeff();
    if (dmax <= 0) throw BreakdownError("canonicalize: fixed point has no positive weight");
    if (d.minCoeff() < -1e-10 * dmax) {
        throw BreakdownError("canonicalize: fixed point not positive semidefinite");
    }

    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (d[i] > rel_cutoff * dmax) keep.push_back(i);
    }
    const Eigen::Index r = static_cast<Eigen::Index>(keep.size());
    const Eigen::Index n = f.rows();
    CMatrix w(n, r);
    RVector sq(r), isq(r);
    for (Eigen::Index k = 0; k < r; ++k) {
        w.col(k) = es.eigenvectors().col(keep[k]);
        sq[k] = std::sqrt(d[keep[k]]);
        isq[k] = 1.0 / sq[k];
    }
    Factored out;
    if (left) {
        out.factor = sq.asDiagonal() * w.adjoint();  // C: r x n, F = C^dag C
        out.inv_factor = w * isq.asDiagonal();       // n x r
    } else {
        out.factor = w * sq.asDiagonal();            // C: n x r, F = C C^dag
        out.inv_factor = isq.asDiagonal() * w.adjoint();
    }
    return out;
}

RVector clip_and_normalize(RVector lam) {
    double n2 = lam.squaredNorm();
    if (n2 <= 0) throw BreakdownError("empty Schmidt spectrum");
    return lam / std::sqrt(n2);
}

}  // namespace

IMpsState canonicalize(const IMpsState& s, const CanonicalizeOptions& opt) {
    const Eigen::Index chi = s.chi_b();
    std::array<CMatrix, 4> cell = cell_tensor(s);

    // dominant left/right fixed points of the cell transfer operator,
    // applied matrix-free on vectorized chi x chi matrices
    auto as_mat = [chi](const CVector& v) {
        return Eigen::Map<const CMatrix>(v.data(), chi, chi);
    };
    LinearOp apply_right = [&](const CVector& in, CVector& out) {
        CMatrix m = as_mat(in);
        CMatrix acc = CMatrix::Zero(chi, chi);
        for (const auto& a : cell) acc += a * m * a.adjoint();
        out = Eigen::Map<CVector>(acc.data(), chi * chi);
    };
    LinearOp apply_left = [&](const CVector& in, CVector& out) {
        CMatrix m = as_mat(in);
        CMatrix acc = CMatrix::Zero(chi, chi);
        for (const auto& a : cell) acc += a.adjoint() * m * a;
        out = Eigen::Map<CVector>(acc.data(), chi * chi);
    };

    // warm starts: identity (left) and diag(lambda_b^2) (right) are the
    // exact fixed points of an already canonical state
    CMatrix id = CMatrix::Identity(chi, chi);
    CMatrix lam2 = s.lambda_b.array().square().matrix().cast<cdouble>().asDiagonal();
    CVector guess_l = Eigen::Map<CVector>(id.data(), chi * chi);
    CVector guess_r = Eigen::Map<CVector>(lam2.data(), chi * chi);
    guess_l /= guess_l.norm();
    guess_r /= guess_r.norm();

    DominantEig right, left;
    try {
        right = dominant_eigpair(apply_right, chi * chi, opt.tol, opt.max_iter, &guess_r);
        left = dominant_eigpair(apply_left, chi * chi, opt.tol, opt.max_iter, &guess_l);
    } catch (const DegeneracyError&) {
        throw DegeneracyError("canonicalize: degenerate dominant transfer eigenvalue "
                              "(non-injective MPS)");
    }
    double eta = std::abs(right.value);
    if (eta < 1e-300) throw BreakdownError("canonicalize: vanishing transfer eigenvalue");

    // rescale so the dominant eigenvalue is exactly 1 (T is quadratic in A)
    const double scale = 1.0 / std::sqrt(eta);
    for (auto& a : cell) a *= scale;

    CMatrix vr = as_mat(right.vector);
    CMatrix vl = as_mat(left.vector);
    Factored L = factor_fixed_point(vl, /*left=*/true, 1e-28);
    Factored R = factor_fixed_point(vr, /*left=*/false, 1e-28);

    // new bond-B spectrum from the SVD of L R
    SvdResult lr = svd(L.factor * R.factor);
    double smax = lr.s.maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < lr.s.size(); ++i) {
        if (lr.s[i] > opt.rank_cutoff * smax && lr.s[i] > 0) keep.push_back(i);
    }
    const Eigen::Index chi_b = static_cast<Eigen::Index>(keep.size());
    CMatrix u(lr.u.rows(), chi_b), wdag(chi_b, lr.vdag.cols());
    RVector snew(chi_b);
    for (Eigen::Index k = 0; k < chi_b; ++k) {
        u.col(k) = lr.u.col(keep[k]);
        wdag.row(k) = lr.vdag.row(keep[k]);
        snew[k] = lr.s[keep[k]];
    }
    double snorm = snew.norm();
    RVector lambda_b = snew / snorm;

    // gamma_cell = W^dag R^-1 A L^-1 U, rescaled so L_B gamma_cell carries
    // the normalized spectrum
    std::array<CMatrix, 4> gcell;
    CMatrix pre = wdag * R.inv_factor;
    CMatrix post = L.inv_factor * u;
    for (int p = 0; p < 4; ++p) gcell[p] = snorm * (pre * cell[p] * post);

    // split the cell across bond A: theta = L_B gamma_cell L_B, grouped as
    // (sigma, i) x (tau, j)
    CMatrix theta(2 * chi_b, 2 * chi_b);
    for (int sig = 0; sig < 2; ++sig) {
        for (int tau = 0; tau < 2; ++tau) {
            theta.block(sig * chi_b, tau * chi_b, chi_b, chi_b) =
                lambda_b.asDiagonal() * gcell[2 * sig + tau] * lambda_b.asDiagonal();
        }
    }
    SvdResult th = svd(theta);
    double tmax = th.s.maxCoeff();
    Eigen::Index chi_a = 0;
    for (Eigen::Index i = 0; i < th.s.size(); ++i) {
        if (th.s[i] > opt.rank_cutoff * tmax && th.s[i] > 0) ++chi_a;
    }
    if (chi_a == 0) throw BreakdownError("canonicalize: empty bond-A spectrum");

    IMpsState out;
    out.time_stamp = s.time_stamp;
    out.discarded_weight = s.discarded_weight;
    out.lambda_b = lambda_b;
    out.lambda_a = clip_and_normalize(th.s.head(chi_a));
    RVector inv_lb = lambda_b.cwiseInverse();
    for (int sig = 0; sig < 2; ++sig) {
        out.gamma_a[sig] = inv_lb.asDiagonal() * th.u.block(sig * chi_b, 0, chi_b, chi_a);
        out.gamma_b[sig] = th.vdag.block(0, sig * chi_b, chi_a, chi_b) * inv_lb.asDiagonal();
    }
    auto err = measure_canonical_error(out);
    out.canonical_error_a = err.bond_a;
    out.canonical_error_b = err.bond_b;
    return out;
}

namespace {

struct BondTruncation {
    std::vector<Eigen::Index> keep;
    double discarded = 0;
};

BondTruncation plan_truncation(const RVector& lam, Eigen::Index chi_max, double sv_threshold) {
    BondTruncation t;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam[i] >= sv_threshold && static_cast<Eigen::Index>(t.keep.size()) < chi_max) {
            t.keep.push_back(i);
        } else {
            t.discarded += lam[i] * lam[i];
        }
    }
    return t;
}

}  // namespace

IMpsState truncate(const IMpsState& s, Eigen::Index chi_max, double sv_threshold) {
    if (chi_max < 1) throw ValidationError("truncate: chi_max must be >= 1");
    BondTruncation ta = plan_truncation(s.lambda_a, chi_max, sv_threshold);
    BondTruncation tb = plan_truncation(s.lambda_b, chi_max, sv_threshold);
    if (ta.keep.empty() || tb.keep.empty()) {
        throw BreakdownError("truncate: all Schmidt values below threshold");
    }

    IMpsState out;
    out.time_stamp = s.time_stamp;
    out.discarded_weight = s.discarded_weight + ta.discarded + tb.discarded;
    out.chi2_noop_warning = s.chi2_noop_warning;
    const Eigen::Index na = static_cast<Eigen::Index>(ta.keep.size());
    const Eigen::Index nb = static_cast<Eigen::Index>(tb.keep.size());
    RVector la(na), lb(nb);
    for (Eigen::Index i = 0; i < na; ++i) la[i] = s.lambda_a[ta.keep[i]];
    for (Eigen::Index i = 0; i < nb; ++i) lb[i] = s.lambda_b[tb.keep[i]];
    out.lambda_a = clip_and_normalize(la);
    out.lambda_b = clip_and_normalize(lb);
    for (int sig = 0; sig < 2; ++sig) {
        out.gamma_a[sig] = CMatrix(nb, na);
        out.gamma_b[sig] = CMatrix(na, nb);
        for (Eigen::Index i = 0; i < nb; ++i)
            for (Eigen::Index j = 0; j < na; ++j)
                out.gamma_a[sig](i, j) = s.gamma_a[sig](tb.keep[i], ta.keep[j]);
        for (Eigen::Index i = 0; i < na; ++i)
            for (Eigen::Index j = 0; j < nb; ++j)
                out.gamma_b[sig](i, j) = s.gamma_b[sig](ta.keep[i], tb.keep[j]);
    }
    auto err = measure_canonical_error(out);
    out.canonical_error_a = err.bond_a;
    out.canonical_error_b = err.bond_b;
    return out;
}

IMpsState truncate_to_chi2(const IMpsState& s) {
    if (s.chi_a() <= 1 && s.chi_b() <= 1) {
        IMpsState out = s;
        out.chi2_noop_warning = true;
        return out;
    }
    return truncate(s, 2, 0.0);
}

namespace {

const std::array<CMatrix, 2>& sub_gamma(const IMpsState& s, Sublattice sl) {
    return sl == Sublattice::A ? s.gamma_a : s.gamma_b;
}

const RVector& right_lambda(const IMpsState& s, Sublattice sl) {
    return sl == Sublattice::A ? s.lambda_a : s.lambda_b;
}

const RVector& left_lambda(const IMpsState& s, Sublattice sl) {
    return sl == Sublattice::A ? s.lambda_b : s.lambda_a;
}

Sublattice other(Sublattice sl) { return sl == Sublattice::A ? Sublattice::B : Sublattice::A; }

}  // namespace

CMatrix reduced_density_matrix(const IMpsState& s, std::vector<int> sites, Sublattice origin) {
    if (sites.empty()) throw ValidationError("reduced_density_matrix: empty site set");
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    const int lo = sites.front();
    const int span = sites.back() - lo + 1;
    if (span > 8) {
        throw CapacityError("reduced_density_matrix: window span " + std::to_string(span) +
                            " above cap 8");
    }

    Sublattice sl = (lo % 2 == 0) ? origin : other(origin);
    const RVector lam0_sq = left_lambda(s, sl).array().square();

    // window matrices M^{config} = prod_k Gamma^{sigma_k} Lambda_right, one
    // per physical configuration (first site = most significant bit)
    std::vector<CMatrix> m{CMatrix::Identity(lam0_sq.size(), lam0_sq.size())};
    {
        Sublattice cur = sl;
        for (int k = 0; k < span; ++k) {
            const auto& g = sub_gamma(s, cur);
            const RVector& lr = right_lambda(s, cur);
            std::array<CMatrix, 2> a;
            for (int sig = 0; sig < 2; ++sig) a[sig] = g[sig] * lr.asDiagonal();
            std::vector<CMatrix> grown;
            grown.reserve(m.size() * 2);
            for (const auto& prev : m) {
                grown.push_back(prev * a[0]);
                grown.push_back(prev * a[1]);
            }
            m = std::move(grown);
            cur = other(cur);
        }
    }

    // rho[(open),(open')] = sum over traced configs of
    //   tr[diag(lambda_left^2) M_ket M_bra^dag]
    const int n_open = static_cast<int>(sites.size());
    const int dim = 1 << n_open;
    std::vector<bool> is_open(span, false);
    for (int site : sites) is_open[site - lo] = true;
    int n_traced = span - n_open;

    auto full_config = [&](int open_bits, int traced_bits) {
        int cfg = 0, ob = n_open - 1, tb = n_traced - 1;
        for (int k = 0; k < span; ++k) {
            int bit;
            if (is_open[k]) {
                bit = (open_bits >> ob--) & 1;
            } else {
                bit = (traced_bits >> tb--) & 1;
            }
            cfg = cfg * 2 + bit;
        }
        return cfg;
    };

    CMatrix rho = CMatrix::Zero(dim, dim);
    for (int ket = 0; ket < dim; ++ket) {
        for (int bra = 0; bra < dim; ++bra) {
            cdouble acc = 0;
            for (int e = 0; e < (1 << n_traced); ++e) {
                const CMatrix& mk = m[full_config(ket, e)];
                const CMatrix& mb = m[full_config(bra, e)];
                acc += (lam0_sq.cast<cdouble>().asDiagonal() * mk)
                           .cwiseProduct(mb.conjugate())
                           .sum();
            }
            rho(ket, bra) = acc;
        }
    }
    rho = (rho + rho.adjoint()).eval() / 2.0;
    return rho;
}

double entanglement_entropy(const IMpsState& s, Bond bond) {
    const RVector& lam = s.lambda(bond);
    double entropy = 0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        double p = std::max(lam[i] * lam[i], 1e-15);
        double c = -p * std::log(p);
        if (c > 1e-14) entropy += c;
    }
    return entropy;
}

}  // namespace dqpt
