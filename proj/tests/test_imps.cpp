#include <doctest.h>

#include <random>

#include "dqpt/ansatz.hpp"
#include "dqpt/evolution.hpp"
#include "dqpt/imps.hpp"
#include "dqpt/models.hpp"
#include "dqpt/oracle.hpp"

using namespace dqpt;

namespace {

CMatrix random_complex(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cdouble(u(rng), u(rng));
    return m;
}

IMpsState random_canonical_state(Eigen::Index chi, unsigned seed) {
    std::array<CMatrix, 2> m = {random_complex(chi, chi, seed),
                                random_complex(chi, chi, seed + 1)};
    return canonicalize(wrap_site_tensor_raw(m));
}

}  // namespace

TEST_SUITE_BEGIN("imps");

TEST_CASE("from_product: down state") {
    IMpsState s = from_product(named_initial_state("down"));
    CHECK(s.chi_a() == 1);
    CHECK(std::abs(s.gamma_a[1](0, 0) - cdouble(1, 0)) < 1e-15);
    CHECK(std::abs(s.gamma_a[0](0, 0)) < 1e-15);
    CHECK(s.lambda_a[0] == 1.0);
    CHECK(s.canonical_error_a == 0.0);
    CHECK(s.time_stamp == 0.0);
}

TEST_CASE("from_product: right state") {
    IMpsState s = from_product(named_initial_state("right"));
    CHECK(std::abs(s.gamma_a[0](0, 0) - cdouble(1 / std::sqrt(2.0), 0)) < 1e-15);
    CHECK(std::abs(s.gamma_a[1](0, 0) - cdouble(1 / std::sqrt(2.0), 0)) < 1e-15);
}

TEST_CASE("from_product: generic spinor has zero entanglement") {
    IMpsState s = from_product(ProductState::make(cdouble(0.6, 0), cdouble(0, 0.8)));
    CHECK(entanglement_entropy(s, Bond::A) == 0.0);
    CHECK(entanglement_entropy(s, Bond::B) == 0.0);
}

TEST_CASE("canonical conditions hold for evolved states") {
    IMpsState s = from_product(named_initial_state("down"));
    EvolveOptions opt;
    opt.t_max = 0.3;
    auto res = evolve(s, SpinModel::ising(0.5, 1.0, 0.3), opt);
    auto err = measure_canonical_error(res.final_state);
    CHECK(err.bond_a < 1e-8);
    CHECK(err.bond_b < 1e-8);
}

TEST_CASE("canonicalize is idempotent on a canonical state") {
    IMpsState s = random_canonical_state(4, 21);
    IMpsState t = canonicalize(s);
    REQUIRE(t.chi_a() == s.chi_a());
    CHECK((t.lambda_a - s.lambda_a).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((t.lambda_b - s.lambda_b).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(measure_canonical_error(t).max() < 1e-11);
}

TEST_CASE("canonicalize recovers the spectrum after a random gauge transform") {
    // gauge-invariance oracle: lambda of G A G^-1 must match lambda of A
    std::array<CMatrix, 2> a = {random_complex(4, 4, 33), random_complex(4, 4, 34)};
    IMpsState ref = canonicalize(wrap_site_tensor_raw(a));
    RVector lam_ref = ref.lambda_b;

    CMatrix g = random_complex(4, 4, 77);
    g += 4.0 * CMatrix::Identity(4, 4);  // keep it comfortably invertible
    CMatrix ginv = g.inverse();
    std::array<CMatrix, 2> m = {g * a[0] * ginv, g * a[1] * ginv};
    IMpsState t = canonicalize(wrap_site_tensor_raw(m));
    REQUIRE(t.lambda_b.size() == lam_ref.size());
    CHECK((t.lambda_b - lam_ref).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(measure_canonical_error(t).max() < 1e-10);
}

TEST_CASE("canonicalize the eDQPT ansatz: classical-line Schmidt values") {
    // sqrt(lambda) = (|cos Jt|, |sin Jt|) on the h_x = 0 line
    double t = 0.5;
    EntanglementAnsatz an(1.0, 0.0, 0.15);
    IMpsState s = canonicalize(entanglement_state(an, t));
    REQUIRE(s.lambda_a.size() == 2);
    CHECK(s.lambda_a[0] == doctest::Approx(std::abs(std::cos(t))).epsilon(1e-10));
    CHECK(s.lambda_a[1] == doctest::Approx(std::abs(std::sin(t))).epsilon(1e-10));
}

TEST_CASE("canonicalize rejects a non-injective MPS") {
    // two decoupled blocks (GHZ-like): degenerate dominant transfer eigenvalue
    std::array<CMatrix, 2> m;
    m[0] = CMatrix::Zero(2, 2);
    m[1] = CMatrix::Zero(2, 2);
    m[0](0, 0) = 1.0;
    m[1](1, 1) = 1.0;
    CHECK_THROWS_AS(canonicalize(wrap_site_tensor_raw(m)), DegeneracyError);
}

TEST_CASE("truncate: chi=1 state unchanged") {
    IMpsState s = from_product(named_initial_state("down"));
    IMpsState t = truncate(s, 16, 1e-9);
    CHECK(t.chi_a() == 1);
    CHECK(t.discarded_weight == 0.0);
}

TEST_CASE("truncate drops a tail below threshold") {
    // entanglement ansatz at tiny time: lambda_2 is tiny but nonzero
    EntanglementAnsatz an(1.0, 0.0, 0.15);
    IMpsState s = canonicalize(entanglement_state(an, 1e-6));
    REQUIRE(s.chi_a() == 2);
    IMpsState t = truncate(s, 16, 1e-5);
    CHECK(t.chi_a() == 1);
    CHECK(t.chi_b() == 1);
    CHECK(std::abs(t.lambda_a.squaredNorm() - 1.0) < 1e-12);
}

TEST_CASE("truncate_to_chi2 semantics") {
    IMpsState p = from_product(named_initial_state("right"));
    IMpsState w = truncate_to_chi2(p);
    CHECK(w.chi2_noop_warning);

    EvolveOptions opt;
    opt.t_max = 0.5;
    auto res = evolve(p, SpinModel::ising(1.0, 0.1, 0.15), opt);
    REQUIRE(res.final_state.chi_a() >= 2);
    IMpsState t = truncate_to_chi2(res.final_state);
    CHECK(t.chi_a() == 2);
    CHECK(t.chi_b() == 2);
    CHECK_FALSE(t.chi2_noop_warning);
    CHECK(std::abs(t.lambda_a.squaredNorm() - 1.0) < 1e-12);

    // chi = 2 input is the identity
    IMpsState t2 = truncate_to_chi2(t);
    CHECK((t2.lambda_a - t.lambda_a).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rdm of a product state is the rank-1 projector") {
    ProductState v = ProductState::make(cdouble(0.6, 0), cdouble(0, 0.8));
    IMpsState s = from_product(v);
    CMatrix rho = reduced_density_matrix(s, {0});
    CMatrix proj = v.v * v.v.adjoint();
    CHECK((rho - proj).norm() < 1e-13);
}

TEST_CASE("rdm of one site: trace one, eigenvalues in [0,1]") {
    IMpsState s = from_product(named_initial_state("down"));
    EvolveOptions opt;
    opt.t_max = 0.6;
    auto res = evolve(s, SpinModel::ising(1.0, 1.0, 0.5), opt);
    CMatrix rho = reduced_density_matrix(res.final_state, {0});
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-9);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
    CHECK(es.eigenvalues().minCoeff() > -1e-9);
    CHECK(es.eigenvalues().maxCoeff() < 1 + 1e-9);
}

TEST_CASE("rdm factorizes for far-separated sites of a product state") {
    ProductState v = ProductState::make(cdouble(0.6, 0), cdouble(0, 0.8));
    IMpsState s = from_product(v);
    CMatrix rho = reduced_density_matrix(s, {0, 7});
    CMatrix single = v.v * v.v.adjoint();
    CMatrix kron(4, 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) kron.block<2, 2>(2 * i, 2 * j) = single(i, j) * single;
    CHECK((rho - kron).norm() < 1e-12);
}

TEST_CASE("rdm window cap") {
    IMpsState s = from_product(named_initial_state("down"));
    CHECK_THROWS_AS(reduced_density_matrix(s, {0, 8}), CapacityError);
}

TEST_CASE("rdm of two adjacent sites matches the ED oracle at short times") {
    // L = 12 ring, middle pair, Lieb-Robinson-limited finite-size error
    SpinModel model = SpinModel::ising(1.0, 0.1, 0.15);
    ProductState v0 = named_initial_state("right");
    double t = 1.0;

    EvolveOptions opt;
    opt.t_max = t;
    auto res = evolve(from_product(v0), model, opt);
    CMatrix rho_imps = reduced_density_matrix(res.final_state, {0, 1});

    EdSystem ed = ed_evolve(ed_make(model, 12, v0), t);
    CMatrix rho_ed = ed_reduced_density_matrix(ed, {5, 6});
    CHECK((rho_imps - rho_ed).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("entanglement entropy closed forms") {
    IMpsState p = from_product(named_initial_state("down"));
    CHECK(entanglement_entropy(p, Bond::A) == 0.0);

    // classical limit at Jt = pi/4: lambda = (1/2, 1/2), S = log 2
    EntanglementAnsatz an(1.0, 0.0, 0.15);
    IMpsState s = canonicalize(entanglement_state(an, M_PI / 4));
    CHECK(entanglement_entropy(s, Bond::A) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("lambda spectra on bonds A and B agree for a translation-invariant quench") {
    EvolveOptions opt;
    opt.t_max = 1.0;
    auto res = evolve(from_product(named_initial_state("down")),
                      SpinModel::ising(0.1, 1.0, 0.15), opt);
    const IMpsState& s = res.final_state;
    Eigen::Index n = std::min(s.chi_a(), s.chi_b());
    for (Eigen::Index i = 0; i < n; ++i) {
        CHECK(std::abs(s.lambda_a[i] * s.lambda_a[i] - s.lambda_b[i] * s.lambda_b[i]) < 5e-3);
    }
}

TEST_SUITE_END();
