#pragma once

#include <vector>

#include "dqpt/imps.hpp"

namespace dqpt {

/// Spectrum of the fidelity transfer matrix at one instant, with branch
/// labels giving eigenvalue continuity in time.
struct FidelitySpectrum {
    double time = 0;
    CVector eigenvalues;         // descending modulus
    std::vector<int> branch_ids;
    double f = 0;                // fidelity density per site
    bool underflow = false;      // spectrum collapsed below 1e-300, f capped
    bool ambiguous_match = false;
    int next_branch_id = 0;      // bookkeeping for branch continuation
};

/// Contraction of the time-evolved cell with the conjugate initial product
/// state: (L_B o_A)(L_A o_B) with o_ij = sum_s conj(v^s) Gamma^s_ij.
CMatrix fidelity_transfer_matrix(const IMpsState& s, const ProductState& v0);

/// Full spectrum by dense eigendecomposition; f = -(2/n_cell) log max|e|
/// with n_cell = 2. Branch ids are matched greedily (descending modulus) to
/// the nearest previous-step eigenvalue in the complex plane.
FidelitySpectrum fidelity_density(const IMpsState& s, const ProductState& v0,
                                  const FidelitySpectrum* prev = nullptr);

/// Branch-matches an already-sorted spectrum against the previous step and
/// fills in f. Used directly when rebuilding continuity from recorded
/// eigenvalue columns.
FidelitySpectrum match_spectrum(double time, const CVector& eigenvalues_desc,
                                const FidelitySpectrum* prev);

struct OverlapMatrix {
    CMatrix o;  // sublattice-A tensor contracted with the initial spinor
    double o11_abs = 0;
    double ood_abs = 0;
    double time = 0;
};

OverlapMatrix overlap_decomposition(const IMpsState& s, const ProductState& v0);

struct DqptEvent {
    double time = 0;          // linear interpolation of the modulus crossing
    int branch_rising = 0;    // branch that takes over
    int branch_falling = 0;   // branch that loses dominance
    double gap_slope = 0;     // d(|e_fall| - |e_rise|)/dt at the crossing
    bool ambiguous = false;   // branch matching had near-tied candidates
    std::size_t step_index = 0;  // index of the timestep left of the crossing
};

/// Events where the identity of the dominant branch changes sign of
/// delta = |e_old| - |e_new| between adjacent timesteps.
std::vector<DqptEvent> detect_dqpts(const std::vector<FidelitySpectrum>& spectra);

enum class DqptType { Precession, Entanglement, Hybrid };

const char* to_string(DqptType t);

struct ClassifyThresholds {
    double r_p = 0.02;   // entanglement-gap ratio bound for pDQPT
    double g_e = 0.2;    // avoided-crossing gap bound for eDQPT
    double window = 0.5; // half-width of the history window around the event
};

struct LambdaSample {
    double time = 0;
    double lambda1 = 0, lambda2 = 0;  // squared Schmidt values, descending
};

struct OverlapSample {
    double time = 0;
    double o11_abs = 0;
};

struct DqptClassification {
    DqptType type = DqptType::Hybrid;
    double window_used = 0;
    double ratio_min = 0;       // min lambda2/lambda1 in the window
    double ratio_at_event = 0;  // interpolated lambda2/lambda1 at the event (p-score)
    double gap_min = 0;         // min lambda1-lambda2 in the window
    bool gap_local_min_below = false;
    bool o11_has_local_min = false;
    double o11_min = 0;
    double o11_min_time = 0;
};

/// pDQPT if the spectrum is strongly gapped somewhere in the window AND
/// |o11| dips through a local minimum; eDQPT if lambda1-lambda2 has a local
/// minimum below g_e (an avoided crossing); hybrid when both or neither fire.
DqptClassification classify_dqpt(const DqptEvent& event,
                                 const std::vector<LambdaSample>& lambdas,
                                 const std::vector<OverlapSample>& overlaps,
                                 const ClassifyThresholds& th);

}  // namespace dqpt
