#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "dqpt/ansatz.hpp"
#include "dqpt/dqpt.hpp"
#include "dqpt/evolution.hpp"
#include "dqpt/imps.hpp"

using namespace dqpt;

namespace {

// adaptive Simpson quadrature (test-side oracle, independent of the closed forms)
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fb,
               double fm, double eps, int depth) {
    double m = (a + b) / 2;
    double lm = (a + m) / 2, rm = (m + b) / 2;
    double flm = f(lm), frm = f(rm);
    double whole = (b - a) / 6 * (fa + 4 * fm + fb);
    double left = (m - a) / 6 * (fa + 4 * flm + fm);
    double right = (b - m) / 6 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15 * eps) {
        return left + right + (left + right - whole) / 15;
    }
    return simpson(f, a, m, fa, fm, flm, eps / 2, depth - 1) +
           simpson(f, m, b, fm, fb, frm, eps / 2, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double eps = 1e-13) {
    double m = (a + b) / 2;
    return simpson(f, a, b, f(a), f(b), f(m), eps, 40);
}

}  // namespace

TEST_SUITE_BEGIN("ansatz");

TEST_CASE("rotating-frame coefficients stay on the unit sphere") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.05, 2.5);
    for (int k = 0; k < 200; ++k) {
        PrecessionAnsatz an(0.1, u(rng), u(rng));
        double t = u(rng);
        double s2 = an.sx(t) * an.sx(t) + an.sy(t) * an.sy(t) + an.sz(t) * an.sz(t);
        CHECK(std::abs(s2 - 1.0) < 1e-12);
    }
}

TEST_CASE("a(t) and b(t) match adaptive quadrature of the effective couplings") {
    PrecessionAnsatz an(0.1, 1.0, 0.15);
    for (double t : {0.5, 1.0, 1.5}) {
        double a_quad = integrate([&](double u) { return an.j_eff(u) / an.j; }, 0, t);
        double b_quad = integrate([&](double u) { return an.h_eff(u) / an.j; }, 0, t);
        CHECK(std::abs(an.a(t) - a_quad) < 1e-10);
        CHECK(std::abs(an.b(t) - b_quad) < 1e-10);
    }
    CHECK(an.a(0) == 0.0);
    CHECK(an.b(0) == 0.0);
}

TEST_CASE("a and b closed forms track quadrature over the whole window") {
    PrecessionAnsatz an(0.1, 1.0, 0.15);
    for (double t = 0.25; t <= 3.0; t += 0.25) {
        CHECK(std::abs(an.a(t) - integrate([&](double u) { return an.j_eff(u) / an.j; }, 0, t)) <
              1e-10);
        CHECK(std::abs(an.b(t) - integrate([&](double u) { return an.h_eff(u) / an.j; }, 0, t)) <
              1e-10);
    }
}

TEST_CASE("precession lambdas: closed form and ordering") {
    PrecessionAnsatz an(0.1, 1.0, 0.15);
    auto [l1, l2] = precession_lambdas(an, 0.0);
    CHECK(l1 == 1.0);
    CHECK(l2 == 0.0);
    auto [m1, m2] = precession_lambdas(an, 1.5);
    CHECK(m1 >= m2);
    CHECK(m1 * m1 + m2 * m2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("precession gamma at t=0 and canonical conditions at t=1") {
    PrecessionAnsatz an(0.1, 1.0, 0.15);
    auto g0 = precession_gamma(an, 0.0);
    CHECK((g0[0] - Eigen::Vector2cd(0, 1)).norm() < 1e-14);          // |down>
    CHECK((g0[1] - Eigen::Vector2cd(1, 0)).norm() < 1e-14);          // |up>
    CHECK((g0[2] - Eigen::Vector2cd(cdouble(0, 1), 0)).norm() < 1e-14);
    CHECK((g0[3] - Eigen::Vector2cd(0, cdouble(0, -1))).norm() < 1e-14);

    double t = 1.0;
    auto [l1, l2] = precession_lambdas(an, t);
    RVector lam(2);
    lam << l1, l2;
    IMpsState s = wrap_canonical_site(lam, spinors_to_site_tensor(precession_gamma(an, t)));
    CHECK(measure_canonical_error(s).max() < 1e-10);
}

TEST_CASE("precession overlap |o11| dips near the fig 1(d) DQPT") {
    PrecessionAnsatz an(0.1, 1.0, 0.15);
    Eigen::Vector2cd down(0, 1);
    double min_val = 1e9, min_t = 0;
    for (double t = 0.0; t <= 2.0; t += 0.01) {
        double o11 = std::abs(down.adjoint().dot(precession_gamma(an, t)[0]));
        if (o11 < min_val) {
            min_val = o11;
            min_t = t;
        }
    }
    CHECK(min_t > 1.3);
    CHECK(min_t < 1.7);
}

TEST_CASE("mpo state at t=0 is the down product state") {
    PrecessionAnsatz an(0.1, 1.0, 0.15);
    IMpsState s = canonicalize(precession_mpo_state(an, 0.0));
    CHECK(s.chi_a() == 1);
    CHECK(entanglement_entropy(s, Bond::A) < 1e-12);
    FidelitySpectrum sp = fidelity_density(s, named_initial_state("down"));
    CHECK(std::abs(sp.f) < 1e-10);
}

TEST_CASE("mpo state reproduces the closed-form lambdas after canonicalization") {
    PrecessionAnsatz an(0.1, 1.0, 0.15);
    double t = 1.2;
    IMpsState s = canonicalize(precession_mpo_state(an, t));
    auto [l1, l2] = precession_lambdas(an, t);
    REQUIRE(s.lambda_b.size() == 2);
    CHECK(std::abs(s.lambda_b[0] - l1) < 1e-10);
    CHECK(std::abs(s.lambda_b[1] - l2) < 1e-10);
}

TEST_CASE("entanglement ansatz at t=0 is the right product state") {
    EntanglementAnsatz an(1.0, 0.1, 0.15);
    CHECK(an.theta(0) == doctest::Approx(M_PI / 4).epsilon(1e-12));
    CHECK(an.f_ent(0) == doctest::Approx(3.0).epsilon(1e-12));
    auto [l1, l2] = entanglement_lambdas(an, 0.0);
    CHECK(l1 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(l2) < 1e-14);

    IMpsState s = canonicalize(entanglement_state(an, 0.0));
    CHECK(s.chi_a() == 1);
    FidelitySpectrum sp = fidelity_density(s, named_initial_state("right"));
    CHECK(std::abs(sp.f) < 1e-10);
}

TEST_CASE("entanglement lambdas: h_x = 0 limit is cos^2, sin^2") {
    EntanglementAnsatz an(0.8, 0.0, 0.3);
    for (double t = 0.1; t < 3.0; t += 0.3) {
        auto [l1, l2] = entanglement_lambdas(an, t);
        double c = std::cos(0.8 * t), s = std::sin(0.8 * t);
        CHECK(l1 == doctest::Approx(std::max(c * c, s * s)).epsilon(1e-12));
        CHECK(l2 == doctest::Approx(std::min(c * c, s * s)).epsilon(1e-12));
        CHECK(l1 + l2 == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("entanglement lambdas match the canonicalization oracle at generic couplings") {
    EntanglementAnsatz an(1.0, 0.1, 0.15);
    double t = 0.8;
    IMpsState s = canonicalize(entanglement_state(an, t));
    auto [l1, l2] = entanglement_lambdas(an, t);
    REQUIRE(s.lambda_b.size() == 2);
    CHECK(std::abs(s.lambda_b[0] * s.lambda_b[0] - l1) < 1e-10);
    CHECK(std::abs(s.lambda_b[1] * s.lambda_b[1] - l2) < 1e-10);
}

TEST_CASE("lambda1 + lambda2 = 1 identically") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.05, 2.0);
    for (int k = 0; k < 50; ++k) {
        EntanglementAnsatz an(u(rng), u(rng), u(rng));
        auto [l1, l2] = entanglement_lambdas(an, u(rng));
        CHECK(std::abs(l1 + l2 - 1.0) < 1e-14);
    }
}

TEST_CASE("classical line: ansatz f matches the exact transfer eigenvalues") {
    EntanglementAnsatz an(1.0, 0.0, 0.15);
    ProductState v0 = named_initial_state("right");
    for (double t : {0.35, 0.6, 1.1}) {
        IMpsState s = canonicalize(entanglement_state(an, t));
        double f_state = fidelity_density(s, v0).f;
        ClassicalIsing cl = classical_ising_exact(1.0, 0.15, t);
        double f_exact = -2 * std::log(std::abs(cl.e1));
        CHECK(std::abs(f_state - f_exact) < 1e-12);
    }
}

TEST_CASE("classical_ising_exact basics") {
    ClassicalIsing c0 = classical_ising_exact(1.0, 0.1, 0.0);
    CHECK(std::abs(c0.e1 - cdouble(1, 0)) < 1e-14);
    CHECK(std::abs(c0.e2) < 1e-14);

    ClassicalIsing c = classical_ising_exact(1.0, 0.1, 3.0);
    REQUIRE(c.dqpt_times.size() == 2);
    CHECK(c.dqpt_times[0] == doctest::Approx(0.7853981633974483).epsilon(1e-12));
    CHECK(c.dqpt_times[1] == doctest::Approx(2.356194490192345).epsilon(1e-12));

    CHECK_THROWS_AS(classical_ising_exact(0.0, 0.0, 1.0), ValidationError);
}

TEST_CASE("classical_ising_exact matches the full simulator on the solvable line") {
    SpinModel model = SpinModel::ising(1.0, 0.0, 0.1);
    ProductState v0 = named_initial_state("right");
    EvolveOptions opt;
    opt.dt = 0.01;
    for (double t : {0.3, 0.7, 1.1}) {
        opt.t_max = t;
        IMpsState s = evolve(from_product(v0), model, opt).final_state;
        double f_sim = fidelity_density(s, v0).f;
        ClassicalIsing cl = classical_ising_exact(1.0, 0.1, t);
        CHECK(std::abs(f_sim - (-2 * std::log(std::abs(cl.e1)))) < 1e-8);
    }
}

TEST_CASE("ansatz trajectories locate the DQPT cusps of the full simulation") {
    // fig 1(d): precession MPO state; fig 1(e): entanglement ansatz.
    // Both chi=2 trajectories must place the first cusp within 0.05 of iTEBD.
    struct Case {
        SpinModel model;
        std::string init;
        bool precession;
    };
    for (const Case& cs : {Case{SpinModel::ising(0.1, 1.0, 0.15), "down", true},
                           Case{SpinModel::ising(1.0, 0.1, 0.15), "right", false}}) {
        ProductState v0 = named_initial_state(cs.init);
        EvolveOptions opt;
        opt.dt = 0.01;
        opt.t_max = 2.0;
        std::vector<FidelitySpectrum> exact;
        evolve(from_product(v0), cs.model, opt, [&](const IMpsState& s, const StepStats&) {
            const FidelitySpectrum* prev = exact.empty() ? nullptr : &exact.back();
            exact.push_back(fidelity_density(s, v0, prev));
        });
        auto exact_events = detect_dqpts(exact);
        REQUIRE(!exact_events.empty());

        std::vector<FidelitySpectrum> approx;
        for (int k = 0; k <= 200; ++k) {
            double t = 0.01 * k;
            IMpsState raw = cs.precession
                                ? precession_mpo_state(PrecessionAnsatz(0.1, 1.0, 0.15), t)
                                : entanglement_state(EntanglementAnsatz(1.0, 0.1, 0.15), t);
            IMpsState st = canonicalize(raw);
            st.time_stamp = t;
            const FidelitySpectrum* prev = approx.empty() ? nullptr : &approx.back();
            approx.push_back(fidelity_density(st, v0, prev));
        }
        auto approx_events = detect_dqpts(approx);
        REQUIRE(!approx_events.empty());
        CHECK(std::abs(approx_events.front().time - exact_events.front().time) < 0.05);
    }
}

TEST_CASE("bloch vectors") {
    CHECK((bloch_vector(Eigen::Vector2cd(0, 1)) - Eigen::Vector3d(0, 0, -1)).norm() < 1e-14);
    double r = 1 / std::sqrt(2.0);
    CHECK((bloch_vector(Eigen::Vector2cd(r, r)) - Eigen::Vector3d(1, 0, 0)).norm() < 1e-14);
    CHECK_THROWS_AS(bloch_vector(Eigen::Vector2cd(0, 0)), ValidationError);

    // near the fig 1(d) DQPT the dominant component has precessed to the
    // far hemisphere
    PrecessionAnsatz an(0.1, 1.0, 0.15);
    Eigen::Vector3d b = bloch_vector(precession_gamma(an, 1.5)[0]);
    CHECK(b[2] > 0);
    CHECK(std::abs(b.norm() - 1.0) < 1e-12);
}

TEST_SUITE_END();
