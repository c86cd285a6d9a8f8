#pragma once

#include <deque>
#include <vector>

#include "emtts/circuit.hpp"
#include "emtts/emt.hpp"
#include "emtts/partition.hpp"
#include "emtts/schwarz.hpp"
#include "emtts/ts.hpp"

namespace emtts {

/// Configuration of the mixed-representation coupling: one subdomain stepped
/// as phasors at dT, the other as full waveforms at dt = dT / m.
struct HeteroConfig {
    double dt = 2e-4;
    double dT = 2e-2;
    HarmonicSet harmonics;
    int ts_subdomain = 2;                       // 1 or 2
    SchwarzMode mode = SchwarzMode::Additive;
    int aitken_after = 9;                       // Schwarz iterates before numeric P
    int window_samples = 0;                     // 0: one fundamental period

    void validate() const;
    int substeps() const;                       // m = dT / dt
    int window() const;                         // samples in the phasor-extraction window
};

/// Per-macro-step convergence record. Errors are 2-norms of consecutive
/// transmitted-trace differences, one entry per Schwarz iteration.
struct HeteroDiagnostics {
    double t_start = 0.0, t_end = 0.0;
    std::vector<double> err_ts, err_emt, err_joint;
    int iterations = 0;
    int aitken_rank = 0;
    bool accelerated = false;
    bool decoupled = false;
    double post_residual = 0.0;  // relative interface residual after acceleration
};

/// Samples of phasor-reconstructed values on selected variables:
/// out[j][v] = Re(sum_k p_k[vars[v]] e^{i k w0 times[j]}).
std::vector<Vector> ts_to_emt(const PhasorState& p, const std::vector<double>& times,
                              const IndexSet& vars);

/// Harmonic coefficients of one period of per-variable interface history.
/// history[j] holds the sampled values of `vars` at times[j]; the window must
/// cover one fundamental period.
std::vector<ComplexVector> emt_to_ts(const std::vector<Vector>& history,
                                     const std::vector<double>& times,
                                     const HarmonicSet& hs);

class HeteroCoupler {
public:
    HeteroCoupler(const DaeSystem& dae, const IndexSet& w1_base, HeteroConfig cfg);

    /// Macro-step state: waveform subdomain values plus phasor subdomain
    /// envelopes, with the committed interface data both sides agreed on.
    struct State {
        double time = 0.0;
        Vector w_emt;                       // EMT subdomain values at `time`
        std::vector<Vector> z_re, z_im;     // TS phasors on the TS set, per harmonic
        std::vector<Vector> a_re, a_im;     // phasors of EMT-side interface vars at `time`
        Vector xe;                          // TS-side interface values at `time`
        std::deque<Vector> history;         // trailing EMT interface samples (window - m)
    };

    struct StepResult {
        State next;
        HeteroDiagnostics diag;
        std::vector<Vector> substates;      // m rows, full variable order
    };

    /// Builds the initial coupled state from a monodomain trajectory whose
    /// tail covers at least one phasor-extraction window.
    State warm_start(const Trajectory& mono) const;

    /// Advances one macro step [state.time, state.time + dT] with the coupled
    /// Schwarz iteration and Aitken acceleration on the joint interface trace.
    StepResult macro_step(const State& state, const AmplitudeFn* amp = nullptr) const;

    const IndexSet& emt_set() const { return w_emt_; }
    const IndexSet& ts_set() const { return w_ts_; }
    const IndexSet& emt_externals() const { return ext_emt_; }
    const IndexSet& ts_externals() const { return ext_ts_; }
    const HeteroConfig& config() const { return cfg_; }

    /// The gathered block system for all m substeps: forward substitution of
    /// H_emt w^{j} = Theta w^{j-1} + coupling + forcing against the supplied
    /// interface samples xe[j] (j = 0 is the state at t_start).
    std::vector<Vector> solve_gathered(const Vector& w_start, const std::vector<Vector>& xe,
                                       double t_start, const AmplitudeFn* amp = nullptr) const;

private:
    struct TsBlock {
        int k;
        LuSolver lu;
        DenseMatrix coupling;  // block columns of the external phasors
    };

    DaeSystem dae_;
    HeteroConfig cfg_;
    IndexSet w_emt_, w_ts_, ext_emt_, ext_ts_;
    std::vector<std::size_t> pos_ext_emt_in_ts_;  // ext_emt positions within w_ts
    std::vector<std::size_t> pos_ext_ts_in_emt_;
    LuSolver a_emt_;
    DenseMatrix h_emt_ext_, m_emt_, m_emt_ext_;
    std::vector<TsBlock> ts_blocks_;
    DenseMatrix m_ts_, m_ts_ext_;

    friend struct HeteroStepImpl;
};

struct HeteroRunResult {
    Trajectory trajectory;  // small-step mixed output, warm-up included
    std::vector<HeteroDiagnostics> diagnostics;
    double warmup_end = 0.0;
};

/// Warm-up by monodomain integration over the first extraction window, then
/// coupled macro stepping until t1.
HeteroRunResult run_hetero(const DaeSystem& dae, const IndexSet& w1_base,
                           const HeteroConfig& cfg, double t0, double t1,
                           const AmplitudeFn* amp = nullptr);

}  // namespace emtts
