#include "dqpt/evolution.hpp"

#include <cmath>

namespace dqpt {

namespace {

void apply_single_site(IMpsState& s, const Eigen::Matrix2cd& g) {
    auto rotate = [&g](std::array<CMatrix, 2>& gam) {
        CMatrix g0 = g(0, 0) * gam[0] + g(0, 1) * gam[1];
        CMatrix g1 = g(1, 0) * gam[0] + g(1, 1) * gam[1];
        gam[0] = std::move(g0);
        gam[1] = std::move(g1);
    };
    rotate(s.gamma_a);
    rotate(s.gamma_b);
}

struct BondUpdateStats {
    double discarded = 0;
    bool overflow = false;
};

// Two-site gate across one bond of the cell. For bond A the pair is
// (gamma_a, gamma_b) flanked by lambda_b; for bond B the roles swap.
BondUpdateStats update_bond(std::array<CMatrix, 2>& g_left, RVector& lam_mid,
                            std::array<CMatrix, 2>& g_right, const RVector& lam_out,
                            const Eigen::Matrix4cd& gate, const StepOptions& opt) {
    const Eigen::Index chi_l = lam_out.size();

    std::array<CMatrix, 4> th;
    for (int sig = 0; sig < 2; ++sig) {
        CMatrix left = lam_out.asDiagonal() * g_left[sig] * lam_mid.asDiagonal();
        for (int tau = 0; tau < 2; ++tau) {
            th[2 * sig + tau] = left * (g_right[tau] * lam_out.asDiagonal());
        }
    }
    CMatrix theta(2 * chi_l, 2 * chi_l);
    for (int p = 0; p < 4; ++p) {
        int sig = p / 2, tau = p % 2;
        CMatrix acc = CMatrix::Zero(chi_l, chi_l);
        for (int q = 0; q < 4; ++q) {
            if (gate(p, q) != 0.0) acc += gate(p, q) * th[q];
        }
        theta.block(sig * chi_l, tau * chi_l, chi_l, chi_l) = acc;
    }

    SvdResult dec = svd(theta);
    double norm_full = dec.s.norm();
    BondUpdateStats stats;
    Eigen::Index keep = 0;
    for (Eigen::Index i = 0; i < dec.s.size(); ++i) {
        if (dec.s[i] / norm_full >= opt.sv_threshold && keep < opt.chi_max) {
            ++keep;
        } else {
            double w = dec.s[i] / norm_full;
            stats.discarded += w * w;
            if (keep == opt.chi_max && dec.s[i] / norm_full >= opt.sv_threshold) {
                stats.overflow = true;
            }
        }
    }
    if (keep == 0) throw EvolutionError("bond update: all singular values below threshold");

    RVector s_kept = dec.s.head(keep);
    lam_mid = s_kept / s_kept.norm();
    RVector inv_out = lam_out.cwiseInverse();
    for (int sig = 0; sig < 2; ++sig) {
        g_left[sig] = inv_out.asDiagonal() * dec.u.block(sig * chi_l, 0, chi_l, keep);
        g_right[sig] = dec.vdag.block(0, sig * chi_l, keep, chi_l) * inv_out.asDiagonal();
    }
    return stats;
}

}  // namespace

IMpsState step(const IMpsState& s, const TrotterGateSet& g, const StepOptions& opt,
               StepStats* stats) {
    IMpsState out = s;
    out.chi2_noop_warning = false;

    if (g.order == 2) {
        apply_single_site(out, g.single_site_half);
    } else {
        Eigen::Matrix2cd full = g.single_site_half * g.single_site_half;
        apply_single_site(out, full);
    }

    BondUpdateStats a =
        update_bond(out.gamma_a, out.lambda_a, out.gamma_b, out.lambda_b, g.two_site, opt);
    BondUpdateStats b =
        update_bond(out.gamma_b, out.lambda_b, out.gamma_a, out.lambda_a, g.two_site, opt);

    if (g.order == 2) apply_single_site(out, g.single_site_half);

    out.time_stamp = s.time_stamp + g.dt;
    out.discarded_weight = s.discarded_weight + a.discarded + b.discarded;

    auto err = measure_canonical_error(out);
    bool regauged = false;
    if (err.max() > opt.regauge_tol) {
        try {
            IMpsState fixed = canonicalize(out);
            fixed.time_stamp = out.time_stamp;
            fixed.discarded_weight = out.discarded_weight;
            out = std::move(fixed);
            regauged = true;
            err = measure_canonical_error(out);
        } catch (const Error& e) {
            throw EvolutionError("step at t=" + std::to_string(out.time_stamp) +
                                 ": re-gauge failed: " + e.what());
        }
        if (err.max() > opt.fail_tol) {
            throw EvolutionError("step at t=" + std::to_string(out.time_stamp) +
                                 ": canonical error " + std::to_string(err.max()) +
                                 " above failure tolerance after re-gauge");
        }
    }
    out.canonical_error_a = err.bond_a;
    out.canonical_error_b = err.bond_b;

    if (stats != nullptr) {
        stats->time = out.time_stamp;
        stats->chi_a = out.chi_a();
        stats->chi_b = out.chi_b();
        stats->discarded = a.discarded + b.discarded;
        stats->canonical_error = err.max();
        stats->overflow_warning = a.overflow || b.overflow;
        stats->regauged = regauged;
    }
    return out;
}

EvolveResult evolve(const IMpsState& initial, const SpinModel& model, const EvolveOptions& opt,
                    const StepObserver& observer) {
    if (!(opt.dt > 0)) throw ValidationError("evolve: dt must be positive");
    if (opt.t_max < 0) throw ValidationError("evolve: t_max must be >= 0");

    TrotterGateSet gates = build_gates(model, opt.dt, opt.trotter_order);
    StepOptions sopt;
    sopt.chi_max = opt.chi_max;
    sopt.sv_threshold = opt.sv_threshold;

    EvolveResult result;
    const int n_steps = static_cast<int>(std::ceil(opt.t_max / opt.dt - 1e-12));

    IMpsState state = initial;
    StepStats initial_stats;
    initial_stats.time = state.time_stamp;
    initial_stats.chi_a = state.chi_a();
    initial_stats.chi_b = state.chi_b();
    initial_stats.canonical_error = measure_canonical_error(state).max();
    result.steps.push_back(initial_stats);
    if (observer) observer(state, initial_stats);

    for (int k = 0; k < n_steps; ++k) {
        StepStats st;
        try {
            state = step(state, gates, sopt, &st);
        } catch (const Error& e) {
            throw EvolutionError("evolve: step " + std::to_string(k + 1) + " (t=" +
                                 std::to_string((k + 1) * opt.dt) + ") failed: " + e.what());
        }
        result.steps.push_back(st);
        if (observer) observer(state, st);
    }
    result.final_state = std::move(state);
    return result;
}

}  // namespace dqpt
