#include <doctest.h>

#include <cmath>

#include "dqpt/ansatz.hpp"
#include "dqpt/oracle.hpp"

using namespace dqpt;

TEST_SUITE_BEGIN("oracle");

TEST_CASE("H = 0 leaves the state untouched") {
    EdSystem sys = ed_make(SpinModel::ising(0, 0, 0), 6, named_initial_state("right"));
    EdSystem at = ed_evolve(sys, 2.7);
    CHECK((at.psi - sys.psi0).norm() < 1e-12);
}

TEST_CASE("J = 0: ED magnetization matches single-spin precession") {
    SpinModel model = SpinModel::ising(0, 0.8, 0.3);
    ProductState v0 = named_initial_state("down");
    EdSystem sys = ed_make(model, 8, v0);
    double t = 1.3;
    EdSystem at = ed_evolve(sys, t);

    double h = std::hypot(model.hx, model.hz);
    Eigen::Matrix2cd n = (model.hx * pauli(Pauli::X) + model.hz * pauli(Pauli::Z)) / h;
    Eigen::Matrix2cd u = std::cos(h * t) * Eigen::Matrix2cd::Identity() -
                         cdouble(0, 1) * std::sin(h * t) * n;
    Eigen::Vector2cd spin = u * v0.v;
    double exact = (spin.adjoint() * pauli(Pauli::X) * spin)(0).real();
    CHECK(ed_local_expectation(at, Pauli::X, 3) == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("energy is conserved along the evolution") {
    SpinModel model = SpinModel::ising(1.0, 0.4, 0.2);
    EdSystem sys = ed_make(model, 8, named_initial_state("down"));
    double e0 = ed_energy(sys);
    for (double t : {0.5, 1.5, 3.0}) {
        EdSystem at = ed_evolve(sys, t);
        CHECK(std::abs(ed_energy(at) - e0) < 1e-10);
        CHECK(std::abs(at.psi.norm() - 1.0) < 1e-10);
    }
}

TEST_CASE("rate function vanishes at t = 0") {
    EdSystem sys = ed_make(SpinModel::ising(1.0, 0.3, 0.1), 8, named_initial_state("down"));
    CHECK(ed_rate_function(sys, 0.0) == 0.0);
}

TEST_CASE("finite-size peak approaches the thermodynamic DQPT time") {
    // classical Ising: exact cusp at pi/4; the L-site peak sharpens toward it
    SpinModel model = SpinModel::ising(1.0, 0.0, 0.1);
    ProductState v0 = named_initial_state("right");
    double target = M_PI / 4;
    double prev_dist = 1e9;
    for (int L : {8, 10, 12}) {
        EdSystem sys = ed_make(model, L, v0);
        double best_t = 0, best_f = -1;
        for (double t = 0.5; t <= 1.1; t += 0.005) {
            double f = ed_rate_function(sys, t);
            if (f > best_f) {
                best_f = f;
                best_t = t;
            }
        }
        double dist = std::abs(best_t - target);
        CHECK(dist <= prev_dist + 1e-9);
        prev_dist = dist;
    }
    CHECK(prev_dist < 0.05);
}

TEST_CASE("ed rdm of a product state is a projector") {
    ProductState v0 = ProductState::make(cdouble(0.6, 0), cdouble(0, 0.8));
    EdSystem sys = ed_make(SpinModel::ising(1, 0.5, 0.2), 6, v0);
    CMatrix rho = ed_reduced_density_matrix(sys, {2});
    CMatrix proj = v0.v * v0.v.adjoint();
    CHECK((rho - proj).norm() < 1e-13);
}

TEST_CASE("capacity limits") {
    CHECK_THROWS_AS(ed_make(SpinModel::ising(1, 1, 1), 13, named_initial_state("down")),
                    CapacityError);
    CHECK_THROWS_AS(ed_hamiltonian(SpinModel::ising(1, 1, 1), 13), CapacityError);
}

TEST_SUITE_END();
