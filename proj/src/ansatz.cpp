#include "dqpt/ansatz.hpp"

#include <algorithm>
#include <cmath>

#include "dqpt/models.hpp"

namespace dqpt {

namespace {

const cdouble kI{0, 1};

Eigen::Matrix2cd xz_rotation(double hx, double hz, double t) {
    double h = std::hypot(hx, hz);
    if (h == 0 || t == 0) return Eigen::Matrix2cd::Identity();
    Eigen::Matrix2cd n = (hx * pauli(Pauli::X) + hz * pauli(Pauli::Z)) / h;
    return std::cos(h * t) * Eigen::Matrix2cd::Identity() - kI * std::sin(h * t) * n;
}

double sign_or_one(double x) { return x < 0 ? -1.0 : 1.0; }

}  // namespace

std::array<CMatrix, 2> spinors_to_site_tensor(const std::array<Eigen::Vector2cd, 4>& m) {
    std::array<CMatrix, 2> g;
    for (int sig = 0; sig < 2; ++sig) {
        g[sig] = CMatrix(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) g[sig](i, j) = m[2 * i + j][sig];
    }
    return g;
}

PrecessionAnsatz::PrecessionAnsatz(double j_, double hx_, double hz_)
    : j(j_), hx(hx_), hz(hz_), h(std::hypot(hx_, hz_)) {
    if (h == 0) throw ValidationError("PrecessionAnsatz: needs a nonzero field");
}

double PrecessionAnsatz::sx(double t) const {
    double s = std::sin(h * t);
    return 2 * hx * hz * s * s / (h * h);
}

double PrecessionAnsatz::sy(double t) const { return hx * std::sin(2 * h * t) / h; }

double PrecessionAnsatz::sz(double t) const {
    return (hx * hx * std::cos(2 * h * t) + hz * hz) / (h * h);
}

double PrecessionAnsatz::a(double t) const {
    return hx * hx * (4 * h * t - std::sin(4 * h * t)) / (8 * h * h * h);
}

double PrecessionAnsatz::b(double t) const {
    double h2 = h * h;
    return hx *
           (hx * hx * std::cos(6 * h * t) + 3 * (h2 + 3 * hz * hz) * std::cos(2 * h * t) -
            4 * (h2 + 2 * hz * hz)) /
           (12 * h2 * h2);
}

double PrecessionAnsatz::j_eff(double t) const {
    double s = sy(t);
    return j * s * s;
}

double PrecessionAnsatz::h_eff(double t) const {
    double x = sx(t), y = sy(t), z = sz(t);
    return -2 * j * y * (x * x + z * z);
}

std::pair<double, double> precession_lambdas(const PrecessionAnsatz& an, double t) {
    double ja = an.j * an.a(t);
    double l1 = std::abs(std::cos(ja));
    double l2 = std::abs(std::sin(ja));
    if (l2 > l1) std::swap(l1, l2);
    return {l1, l2};
}

std::array<Eigen::Vector2cd, 4> precession_gamma(const PrecessionAnsatz& an, double t) {
    double ja = an.j * an.a(t);
    double jb = an.j * an.b(t);

    Eigen::Vector2cd up(1, 0), down(0, 1);
    std::array<Eigen::Vector2cd, 4> base = {down, up, kI * up, -kI * down};

    // e^{-i J b sigma^y} then the frame rotation
    Eigen::Matrix2cd ry =
        std::cos(jb) * Eigen::Matrix2cd::Identity() - kI * std::sin(jb) * pauli(Pauli::Y);
    Eigen::Matrix2cd rot = xz_rotation(an.hx, an.hz, t) * ry;

    double s1 = sign_or_one(std::cos(ja));
    double s2 = sign_or_one(std::sin(ja));
    std::array<Eigen::Vector2cd, 4> out;
    out[0] = s1 * (rot * base[0]);  // column 1
    out[2] = s1 * (rot * base[2]);
    out[1] = s2 * (rot * base[1]);  // column 2
    out[3] = s2 * (rot * base[3]);
    return out;
}

IMpsState precession_mpo_state(const PrecessionAnsatz& an, double t) {
    double ja = an.j * an.a(t);
    double jb = an.j * an.b(t);

    const double r = 1.0 / std::sqrt(2.0);
    Eigen::Vector2cd yp(r, kI * r), ym(r, -kI * r);  // sigma^y eigenstates
    Eigen::Vector2cd down(0, 1);

    // projector entries applied to the local |down> ket
    Eigen::Vector2cd py_d = yp * (yp.dot(down));   // P^{+y} |down>
    Eigen::Vector2cd pm_d = ym * (ym.dot(down));   // P^{-y} |down>

    Eigen::Matrix2cd frame = xz_rotation(an.hx, an.hz, t);
    std::array<Eigen::Vector2cd, 4> m;
    m[0] = std::exp(-kI * (ja + jb)) * (frame * py_d);  // (1,1)
    m[1] = std::exp(kI * (ja - jb)) * (frame * py_d);   // (1,2)
    m[2] = std::exp(kI * (ja + jb)) * (frame * pm_d);   // (2,1)
    m[3] = std::exp(-kI * (ja - jb)) * (frame * pm_d);  // (2,2)

    IMpsState s = wrap_site_tensor_raw(spinors_to_site_tensor(m));
    s.time_stamp = t;
    return s;
}

EntanglementAnsatz::EntanglementAnsatz(double j_, double hx_, double hz_)
    : j(j_), hx(hx_), hz(hz_), h(std::hypot(hx_, hz_)) {}

double EntanglementAnsatz::theta(double t) const {
    double corr = h > 0 ? (1 - std::cos(h * t)) * hx * hz / (h * h) : 0.0;
    double cos2 = std::clamp((1 + corr) / 2, 0.0, 1.0);
    return std::acos(std::sqrt(cos2));
}

double EntanglementAnsatz::f_ent(double t) const {
    double th = theta(t);
    double s2 = std::sin(2 * th);
    return 4 * std::cos(4 * th) - std::cos(8 * th) + 8 * s2 * s2 * s2 * s2 * std::cos(4 * j * t);
}

Eigen::Vector2cd EntanglementAnsatz::up_t(double t) const {
    return xz_rotation(hx, hz, t / 2) * Eigen::Vector2cd(1, 0);
}

Eigen::Vector2cd EntanglementAnsatz::down_t(double t) const {
    return xz_rotation(hx, hz, t / 2) * Eigen::Vector2cd(0, 1);
}

cdouble EntanglementAnsatz::c_up(double t) const {
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::Vector2cd right_t = xz_rotation(hx, hz, t / 2) * Eigen::Vector2cd(r, r);
    return right_t[0];  // <up | right(t)>
}

cdouble EntanglementAnsatz::c_down(double t) const {
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::Vector2cd right_t = xz_rotation(hx, hz, t / 2) * Eigen::Vector2cd(r, r);
    return right_t[1];
}

IMpsState entanglement_state(const EntanglementAnsatz& an, double t) {
    cdouble pj = std::exp(-kI * (an.j * t));
    cdouble mj = std::exp(kI * (an.j * t));
    cdouble cu = an.c_up(t), cd = an.c_down(t);
    Eigen::Vector2cd ut = an.up_t(t), dt = an.down_t(t);

    std::array<Eigen::Vector2cd, 4> m;
    m[0] = pj * cu * ut;  // (1,1)
    m[1] = mj * cu * ut;  // (1,2)
    m[2] = mj * cd * dt;  // (2,1)
    m[3] = pj * cd * dt;  // (2,2)

    IMpsState s = wrap_site_tensor_raw(spinors_to_site_tensor(m));
    s.time_stamp = t;
    return s;
}

std::pair<double, double> entanglement_lambdas(const EntanglementAnsatz& an, double t) {
    double f = an.f_ent(t);
    if (f + 13 < -1e-12) {
        throw BreakdownError("entanglement_lambdas: f(t) + 13 negative, formula inconsistent");
    }
    double root = std::sqrt(std::max(f + 13, 0.0));
    return {(4 + root) / 8, (4 - root) / 8};
}

ClassicalIsing classical_ising_exact(double j, double hz, double t) {
    if (j == 0 && hz == 0) {
        throw ValidationError("classical_ising_exact: J and h_z both zero (f is identically 0)");
    }
    ClassicalIsing out;

    cdouble phase = std::exp(-kI * (j * t));
    cdouble root = std::sqrt(std::exp(4.0 * kI * (j * t)) + std::cos(2 * hz * t) / 2.0 - 0.5);
    out.e1 = phase / 2.0 * (std::cos(hz * t) + root);
    out.e2 = phase / 2.0 * (std::cos(hz * t) - root);
    if (std::abs(out.e2) > std::abs(out.e1)) std::swap(out.e1, out.e2);

    const double r = 1.0 / std::sqrt(2.0);
    Eigen::Vector2cd right(r, r), left(r, -r);
    Eigen::Matrix2cd rot = xz_rotation(0, hz, t);
    out.gamma = {rot * right, kI * (rot * left), -(rot * left), -kI * (rot * right)};

    out.overlap = CMatrix(2, 2);
    out.overlap << std::cos(hz * t), std::sin(hz * t), kI * std::sin(hz * t),
        -kI * std::cos(hz * t);

    if (j != 0) {
        double period = M_PI / (2 * std::abs(j));
        for (int n = 0;; ++n) {
            double te = (n + 0.5) * period;
            if (te > t) break;
            out.dqpt_times.push_back(te);
        }
    }
    if (hz != 0) {
        double period = M_PI / std::abs(hz);
        for (int n = 0;; ++n) {
            double te = (n + 0.5) * period;
            if (te > t) break;
            out.dqpt_times.push_back(te);
        }
    }
    std::sort(out.dqpt_times.begin(), out.dqpt_times.end());
    return out;
}

Eigen::Vector3d bloch_vector(const Eigen::Vector2cd& spinor) {
    double n = spinor.norm();
    if (n < 1e-14) throw ValidationError("bloch_vector: zero spinor");
    Eigen::Vector2cd v = spinor / n;
    Eigen::Vector3d r;
    r[0] = (v.adjoint() * pauli(Pauli::X) * v)(0).real();
    r[1] = (v.adjoint() * pauli(Pauli::Y) * v)(0).real();
    r[2] = (v.adjoint() * pauli(Pauli::Z) * v)(0).real();
    return r;
}

}  // namespace dqpt
