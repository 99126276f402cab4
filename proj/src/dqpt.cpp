#include "dqpt/dqpt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dqpt {

namespace {

constexpr double kFidelityCap = 2.0 * 690.77552789821368;  // 2 log(1e300)

CMatrix overlap_of(const std::array<CMatrix, 2>& gamma, const ProductState& v0) {
    return std::conj(v0.v[0]) * gamma[0] + std::conj(v0.v[1]) * gamma[1];
}

}  // namespace

CMatrix fidelity_transfer_matrix(const IMpsState& s, const ProductState& v0) {
    CMatrix oa = overlap_of(s.gamma_a, v0);
    CMatrix ob = overlap_of(s.gamma_b, v0);
    return (s.lambda_b.asDiagonal() * oa) * (s.lambda_a.asDiagonal() * ob);
}

FidelitySpectrum fidelity_density(const IMpsState& s, const ProductState& v0,
                                  const FidelitySpectrum* prev) {
    return match_spectrum(s.time_stamp, eig_dense(fidelity_transfer_matrix(s, v0)), prev);
}

FidelitySpectrum match_spectrum(double time, const CVector& eigenvalues_desc,
                                const FidelitySpectrum* prev) {
    FidelitySpectrum out;
    out.time = time;
    out.eigenvalues = eigenvalues_desc;

    double emax = out.eigenvalues.size() > 0 ? std::abs(out.eigenvalues[0]) : 0.0;
    if (emax < 1e-300) {
        out.underflow = true;
        out.f = kFidelityCap;
    } else {
        out.f = -std::log(emax);  // -(2 / n_cell) log max|e| with n_cell = 2
    }

    const Eigen::Index n = out.eigenvalues.size();
    out.branch_ids.assign(static_cast<std::size_t>(n), -1);
    if (prev == nullptr || prev->eigenvalues.size() == 0) {
        for (Eigen::Index i = 0; i < n; ++i) out.branch_ids[i] = static_cast<int>(i);
        out.next_branch_id = static_cast<int>(n);
        return out;
    }

    // greedy nearest-neighbour matching in the complex plane, processing the
    // new eigenvalues in descending-modulus order
    const Eigen::Index np = prev->eigenvalues.size();
    std::vector<bool> claimed(static_cast<std::size_t>(np), false);
    out.next_branch_id = prev->next_branch_id;
    for (Eigen::Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        double second = best;
        Eigen::Index pick = -1;
        for (Eigen::Index j = 0; j < np; ++j) {
            if (claimed[j]) continue;
            double d = std::abs(out.eigenvalues[i] - prev->eigenvalues[j]);
            if (d < best) {
                second = best;
                best = d;
                pick = j;
            } else if (d < second) {
                second = d;
            }
        }
        if (pick < 0) {
            out.branch_ids[i] = out.next_branch_id++;
            continue;
        }
        if (second - best < 1e-12) out.ambiguous_match = true;
        claimed[pick] = true;
        out.branch_ids[i] = prev->branch_ids[pick];
    }
    return out;
}

OverlapMatrix overlap_decomposition(const IMpsState& s, const ProductState& v0) {
    OverlapMatrix m;
    m.time = s.time_stamp;
    m.o = overlap_of(s.gamma_a, v0);
    m.o11_abs = std::abs(m.o(0, 0));
    m.ood_abs = (m.o.rows() > 1 && m.o.cols() > 1) ? std::abs(m.o(0, 1)) : 0.0;
    return m;
}

namespace {

// |e| of the given branch at one timestep, or -1 when the branch is absent
double branch_modulus(const FidelitySpectrum& sp, int branch) {
    for (std::size_t i = 0; i < sp.branch_ids.size(); ++i) {
        if (sp.branch_ids[i] == branch) return std::abs(sp.eigenvalues[static_cast<Eigen::Index>(i)]);
    }
    return -1.0;
}

}  // namespace

std::vector<DqptEvent> detect_dqpts(const std::vector<FidelitySpectrum>& spectra) {
    if (spectra.size() < 3) {
        throw ValidationError("detect_dqpts: need at least 3 timesteps");
    }
    std::vector<DqptEvent> events;
    for (std::size_t k = 0; k + 1 < spectra.size(); ++k) {
        const auto& a = spectra[k];
        const auto& b = spectra[k + 1];
        if (a.branch_ids.empty() || b.branch_ids.empty()) continue;
        int top_a = a.branch_ids[0];
        int top_b = b.branch_ids[0];
        if (top_a == top_b) continue;

        // delta = |e_old| - |e_new| changes sign across the interval
        double d0 = std::abs(a.eigenvalues[0]) - std::max(branch_modulus(a, top_b), 0.0);
        double mod_old_at_b = branch_modulus(b, top_a);
        DqptEvent ev;
        ev.branch_rising = top_b;
        ev.branch_falling = top_a;
        ev.step_index = k;
        ev.ambiguous = a.ambiguous_match || b.ambiguous_match;
        if (mod_old_at_b < 0 || branch_modulus(a, top_b) < 0) {
            // the winning branch was just born (or the old one died);
            // no interpolation possible
            ev.time = b.time;
            ev.gap_slope = 0;
            ev.ambiguous = true;
        } else {
            double d1 = mod_old_at_b - std::abs(b.eigenvalues[0]);
            double dt = b.time - a.time;
            double denom = d0 - d1;
            double frac = std::abs(denom) > 0 ? d0 / denom : 0.5;
            frac = std::clamp(frac, 0.0, 1.0);
            ev.time = a.time + frac * dt;
            ev.gap_slope = dt > 0 ? (d1 - d0) / dt : 0.0;
        }
        events.push_back(ev);
    }
    return events;
}

const char* to_string(DqptType t) {
    switch (t) {
        case DqptType::Precession: return "pDQPT";
        case DqptType::Entanglement: return "eDQPT";
        default: return "hybrid";
    }
}

namespace {

template <typename Series, typename Getter>
std::pair<std::size_t, std::size_t> window_range(const Series& s, Getter t_of, double t_lo,
                                                 double t_hi) {
    std::size_t lo = 0, hi = s.size();
    while (lo < s.size() && t_of(s[lo]) < t_lo - 1e-12) ++lo;
    while (hi > 0 && t_of(s[hi - 1]) > t_hi + 1e-12) --hi;
    return {lo, hi};
}

// interior local minimum over [lo, hi); returns index or npos
std::size_t local_minimum(const std::vector<double>& y, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo + 1; i + 1 < hi; ++i) {
        bool down = y[i] < y[i - 1] || (y[i] == y[i - 1] && y[i] < y[i + 1]);
        bool up = y[i] < y[i + 1] || (y[i] == y[i + 1] && y[i] < y[i - 1]);
        if (down && up) return i;
    }
    return static_cast<std::size_t>(-1);
}

}  // namespace

DqptClassification classify_dqpt(const DqptEvent& event, const std::vector<LambdaSample>& lambdas,
                                 const std::vector<OverlapSample>& overlaps,
                                 const ClassifyThresholds& th) {
    if (lambdas.empty() || overlaps.empty()) {
        throw ValidationError("classify_dqpt: empty history");
    }
    const double t_lo = event.time - th.window;
    const double t_hi = event.time + th.window;
    if (lambdas.front().time > t_lo + 1e-9 || lambdas.back().time < t_hi - 1e-9 ||
        overlaps.front().time > t_lo + 1e-9 || overlaps.back().time < t_hi - 1e-9) {
        throw ValidationError("classify_dqpt: window [" + std::to_string(t_lo) + ", " +
                              std::to_string(t_hi) + "] extends beyond available history");
    }

    DqptClassification c;
    c.window_used = th.window;

    auto [llo, lhi] = window_range(lambdas, [](const LambdaSample& s) { return s.time; }, t_lo, t_hi);
    std::vector<double> ratio, gap;
    ratio.reserve(lhi - llo);
    for (std::size_t i = llo; i < lhi; ++i) {
        double l1 = std::max(lambdas[i].lambda1, 1e-300);
        ratio.push_back(lambdas[i].lambda2 / l1);
        gap.push_back(lambdas[i].lambda1 - lambdas[i].lambda2);
    }
    c.ratio_min = *std::min_element(ratio.begin(), ratio.end());
    c.gap_min = *std::min_element(gap.begin(), gap.end());

    // interpolated ratio at the event time (the classifier's p-score)
    {
        std::size_t j = llo;
        while (j + 1 < lambdas.size() && lambdas[j + 1].time <= event.time) ++j;
        double r0 = lambdas[j].lambda2 / std::max(lambdas[j].lambda1, 1e-300);
        if (j + 1 < lambdas.size() && lambdas[j + 1].time > lambdas[j].time) {
            double r1 = lambdas[j + 1].lambda2 / std::max(lambdas[j + 1].lambda1, 1e-300);
            double w = (event.time - lambdas[j].time) / (lambdas[j + 1].time - lambdas[j].time);
            w = std::clamp(w, 0.0, 1.0);
            c.ratio_at_event = (1 - w) * r0 + w * r1;
        } else {
            c.ratio_at_event = r0;
        }
    }

    std::size_t gap_min_idx = local_minimum(gap, 0, gap.size());
    c.gap_local_min_below =
        gap_min_idx != static_cast<std::size_t>(-1) && gap[gap_min_idx] < th.g_e;

    auto [olo, ohi] =
        window_range(overlaps, [](const OverlapSample& s) { return s.time; }, t_lo, t_hi);
    std::vector<double> o11;
    o11.reserve(ohi - olo);
    for (std::size_t i = olo; i < ohi; ++i) o11.push_back(overlaps[i].o11_abs);
    std::size_t o11_idx = local_minimum(o11, 0, o11.size());
    c.o11_has_local_min = o11_idx != static_cast<std::size_t>(-1);
    if (c.o11_has_local_min) {
        c.o11_min = o11[o11_idx];
        c.o11_min_time = overlaps[olo + o11_idx].time;
    } else {
        auto it = std::min_element(o11.begin(), o11.end());
        c.o11_min = o11.empty() ? 0.0 : *it;
        c.o11_min_time = o11.empty() ? event.time
                                     : overlaps[olo + static_cast<std::size_t>(
                                                          it - o11.begin())].time;
    }

    bool p_fires = c.ratio_min < th.r_p && c.o11_has_local_min;
    bool e_fires = c.gap_local_min_below;
    if (p_fires && !e_fires) {
        c.type = DqptType::Precession;
    } else if (e_fires && !p_fires) {
        c.type = DqptType::Entanglement;
    } else {
        c.type = DqptType::Hybrid;
    }
    return c;
}

}  // namespace dqpt
