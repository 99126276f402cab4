#include <doctest.h>

#include <cmath>

#include "dqpt/dqpt.hpp"
#include "dqpt/evolution.hpp"
#include "dqpt/observables.hpp"

using namespace dqpt;

TEST_SUITE_BEGIN("evolution");

TEST_CASE("J=0: product state precesses exactly") {
    SpinModel model = SpinModel::ising(0.0, 0.9, 0.4);
    ProductState v0 = named_initial_state("down");
    EvolveOptions opt;
    opt.dt = 0.01;
    opt.t_max = 1.0;
    auto res = evolve(from_product(v0), model, opt);
    const IMpsState& s = res.final_state;
    CHECK(s.chi_a() == 1);

    // analytic single-spin precession
    double h = std::hypot(model.hx, model.hz);
    Eigen::Matrix2cd n =
        (model.hx * pauli(Pauli::X) + model.hz * pauli(Pauli::Z)) / h;
    Eigen::Matrix2cd u = std::cos(h * 1.0) * Eigen::Matrix2cd::Identity() -
                         cdouble(0, 1) * std::sin(h * 1.0) * n;
    Eigen::Vector2cd expect = u * v0.v;
    for (Pauli p : {Pauli::X, Pauli::Y, Pauli::Z}) {
        double exact = (expect.adjoint() * pauli(p) * expect)(0).real();
        CHECK(local_expectation(s, p) == doctest::Approx(exact).epsilon(1e-10));
    }
}

TEST_CASE("classical line: Schmidt values follow |cos Jt|, |sin Jt|") {
    SpinModel model = SpinModel::ising(1.0, 0.0, 0.1);
    EvolveOptions opt;
    opt.dt = 0.01;
    opt.t_max = 1.0;
    auto res = evolve(from_product(named_initial_state("right")), model, opt);
    const IMpsState& s = res.final_state;
    REQUIRE(s.chi_a() == 2);
    double hi = std::max(std::abs(std::cos(1.0)), std::abs(std::sin(1.0)));
    double lo = std::min(std::abs(std::cos(1.0)), std::abs(std::sin(1.0)));
    CHECK(std::abs(s.lambda_a[0] - hi) < 1e-6);
    CHECK(std::abs(s.lambda_a[1] - lo) < 1e-6);
}

TEST_CASE("fig 1(d) quench: chi stays at most 8 and canonical error small") {
    SpinModel model = SpinModel::ising(0.1, 1.0, 0.15);
    EvolveOptions opt;
    opt.dt = 0.01;
    opt.t_max = 2.0;
    opt.sv_threshold = 1e-9;
    Eigen::Index max_chi = 0;
    double max_err = 0;
    auto res = evolve(from_product(named_initial_state("down")), model, opt,
                      [&](const IMpsState&, const StepStats& st) {
                          max_chi = std::max({max_chi, st.chi_a, st.chi_b});
                          max_err = std::max(max_err, st.canonical_error);
                      });
    CHECK(max_chi <= 8);
    CHECK(max_err <= 1e-8);
}

TEST_CASE("norm preservation: transfer eigenvalue stays at 1") {
    SpinModel model = SpinModel::ising(1.0, 0.1, 0.15);
    EvolveOptions opt;
    opt.dt = 0.01;
    opt.t_max = 0.5;
    auto res = evolve(from_product(named_initial_state("right")), model, opt);
    const IMpsState& s = res.final_state;

    const Eigen::Index chi = s.chi_b();
    std::array<CMatrix, 4> cell;
    for (int sig = 0; sig < 2; ++sig) {
        CMatrix left = s.lambda_b.asDiagonal() * s.gamma_a[sig] * s.lambda_a.asDiagonal();
        for (int tau = 0; tau < 2; ++tau) cell[2 * sig + tau] = left * s.gamma_b[tau];
    }
    LinearOp op = [&](const CVector& in, CVector& out) {
        CMatrix m = Eigen::Map<const CMatrix>(in.data(), chi, chi);
        CMatrix acc = CMatrix::Zero(chi, chi);
        for (const auto& a : cell) acc += a * m * a.adjoint();
        out = Eigen::Map<CVector>(acc.data(), chi * chi);
    };
    auto dom = dominant_eigpair(op, chi * chi, 1e-12, 100000);
    CHECK(std::abs(std::abs(dom.value) - 1.0) < 1e-8);
}

TEST_CASE("second-order Trotter: per-step error slope is 3") {
    SpinModel model = SpinModel::ising(0.6, 1.0, 0.15);
    // entangle a base state first so commutator terms do not vanish
    EvolveOptions pre;
    pre.dt = 0.005;
    pre.t_max = 0.2;
    IMpsState base = evolve(from_product(named_initial_state("down")), model, pre).final_state;

    auto observable_after = [&](double dt, int halvings) {
        StepOptions sopt;
        sopt.sv_threshold = 1e-13;
        IMpsState s = base;
        int n = 1 << halvings;
        TrotterGateSet g = build_gates(model, dt / n, 2);
        for (int k = 0; k < n; ++k) s = step(s, g, sopt);
        return std::array<double, 3>{local_expectation(s, Pauli::X),
                                     local_expectation(s, Pauli::Z),
                                     entanglement_entropy(s, Bond::A)};
    };

    std::vector<double> dts = {0.04, 0.02, 0.01};
    std::vector<double> diffs;
    for (double dt : dts) {
        auto one = observable_after(dt, 0);
        auto two = observable_after(dt, 1);
        double d = std::abs(one[0] - two[0]) + std::abs(one[1] - two[1]) +
                   std::abs(one[2] - two[2]);
        diffs.push_back(d);
    }
    // log-log fit of the two decades
    double slope1 = std::log(diffs[0] / diffs[1]) / std::log(2.0);
    double slope2 = std::log(diffs[1] / diffs[2]) / std::log(2.0);
    double slope = (slope1 + slope2) / 2;
    CHECK(slope == doctest::Approx(3.0).epsilon(0.2 / 3.0));
}

TEST_CASE("Trotter convergence: halving dt moves f(1.5) by less than 1e-4") {
    SpinModel model = SpinModel::ising(0.1, 1.0, 0.15);
    ProductState v0 = named_initial_state("down");
    auto f_at = [&](double dt) {
        EvolveOptions opt;
        opt.dt = dt;
        opt.t_max = 1.5;
        IMpsState s = evolve(from_product(v0), model, opt).final_state;
        return fidelity_density(s, v0).f;
    };
    CHECK(std::abs(f_at(0.02) - f_at(0.01)) < 1e-4);
}

TEST_CASE("time reversal: negated couplings undo the quench") {
    SpinModel model = SpinModel::ising(1.0, 0.7, 0.3);
    ProductState v0 = named_initial_state("down");
    EvolveOptions fwd;
    fwd.dt = 0.01;
    fwd.t_max = 0.5;
    fwd.sv_threshold = 1e-12;
    IMpsState mid = evolve(from_product(v0), model, fwd).final_state;
    IMpsState back = evolve(mid, model.negated(), fwd).final_state;
    FidelitySpectrum sp = fidelity_density(back, v0);
    CHECK(std::abs(sp.f) < 1e-6);
}

TEST_CASE("evolve produces the right number of records") {
    SpinModel model = SpinModel::ising(1.0, 0.5, 0.0);
    EvolveOptions opt;
    opt.dt = 0.01;

    opt.t_max = 0.0;
    auto res0 = evolve(from_product(named_initial_state("down")), model, opt);
    CHECK(res0.steps.size() == 1);  // the t = 0 row only

    opt.t_max = 3.0;
    auto res3 = evolve(from_product(named_initial_state("down")), model, opt);
    CHECK(res3.steps.size() == 301);
    CHECK(res3.final_state.time_stamp == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("sum of lambda squared stays normalized along a quench") {
    SpinModel model = SpinModel::ising(1.0, 0.1, 0.15);
    EvolveOptions opt;
    opt.dt = 0.01;
    opt.t_max = 1.0;
    double worst = 0;
    evolve(from_product(named_initial_state("right")), model, opt,
           [&](const IMpsState& s, const StepStats&) {
               worst = std::max(worst, std::abs(s.lambda_a.squaredNorm() - 1.0));
               worst = std::max(worst, std::abs(s.lambda_b.squaredNorm() - 1.0));
           });
    CHECK(worst < 1e-10);
}

TEST_SUITE_END();
