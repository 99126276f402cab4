#include "dqpt/models.hpp"

#include <cmath>
#include <sstream>

namespace dqpt {

const Eigen::Matrix2cd& pauli(Pauli a) {
    static const Eigen::Matrix2cd sx = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
    static const Eigen::Matrix2cd sy =
        (Eigen::Matrix2cd() << 0, cdouble(0, -1), cdouble(0, 1), 0).finished();
    static const Eigen::Matrix2cd sz = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
    switch (a) {
        case Pauli::X: return sx;
        case Pauli::Y: return sy;
        default: return sz;
    }
}

SpinModel SpinModel::ising(double j, double hx, double hz) {
    SpinModel m;
    m.family = Family::Ising;
    m.jz = j;
    m.hx = hx;
    m.hz = hz;
    if (!std::isfinite(j) || !std::isfinite(hx) || !std::isfinite(hz)) {
        throw ValidationError("SpinModel: non-finite coupling");
    }
    return m;
}

SpinModel SpinModel::xxz(double jxy, double jz, double hx, double hz) {
    SpinModel m;
    m.family = Family::XXZ;
    m.jx = jxy;
    m.jy = jxy;
    m.jz = jz;
    m.hx = hx;
    m.hz = hz;
    if (!std::isfinite(jxy) || !std::isfinite(jz) || !std::isfinite(hx) || !std::isfinite(hz)) {
        throw ValidationError("SpinModel: non-finite coupling");
    }
    return m;
}

SpinModel SpinModel::negated() const {
    SpinModel m = *this;
    m.jx = -jx;
    m.jy = -jy;
    m.jz = -jz;
    m.hx = -hx;
    m.hz = -hz;
    return m;
}

std::string SpinModel::key() const {
    std::ostringstream os;
    os.precision(17);
    os << (family == Family::Ising ? "ising" : "xxz") << ";" << jx << ";" << jy << ";" << jz
       << ";" << hx << ";" << hz;
    return os.str();
}

namespace {

// exp(-i theta n.sigma), exact.
Eigen::Matrix2cd rot2(double theta_x, double theta_z) {
    double th = std::hypot(theta_x, theta_z);
    if (th == 0) return Eigen::Matrix2cd::Identity();
    Eigen::Matrix2cd n = (theta_x * pauli(Pauli::X) + theta_z * pauli(Pauli::Z)) / th;
    return std::cos(th) * Eigen::Matrix2cd::Identity() - cdouble(0, 1) * std::sin(th) * n;
}

}  // namespace

TrotterGateSet build_gates(const SpinModel& model, double dt, int order) {
    if (!(dt > 0)) throw ValidationError("build_gates: dt must be positive");
    if (order != 1 && order != 2) throw ValidationError("build_gates: order must be 1 or 2");

    TrotterGateSet g;
    g.dt = dt;
    g.order = order;
    g.single_site_half = rot2(model.hx * dt / 2, model.hz * dt / 2);

    Eigen::Matrix4cd v = Eigen::Matrix4cd::Zero();
    auto kron = [](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
        Eigen::Matrix4cd k;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
        return k;
    };
    if (model.jx != 0) v += model.jx * kron(pauli(Pauli::X), pauli(Pauli::X));
    if (model.jy != 0) v += model.jy * kron(pauli(Pauli::Y), pauli(Pauli::Y));
    if (model.jz != 0) v += model.jz * kron(pauli(Pauli::Z), pauli(Pauli::Z));

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(v);
    Eigen::Vector4cd phases;
    for (int k = 0; k < 4; ++k) phases[k] = std::exp(cdouble(0, -dt * es.eigenvalues()[k]));
    g.two_site = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return g;
}

ProductState named_initial_state(const std::string& name) {
    const double r = 1.0 / std::sqrt(2.0);
    if (name == "down") return ProductState::make(0, 1);
    if (name == "up") return ProductState::make(1, 0);
    if (name == "right") return ProductState::make(r, r);
    throw ConfigError("unknown initial state '" + name + "' (expected down|right|up)");
}

}  // namespace dqpt
