#pragma once

#include <string>
#include <vector>

#include "emtts/circuit.hpp"
#include "emtts/emt.hpp"
#include "emtts/linalg.hpp"

namespace emtts {

/// Non-negative harmonic indices over base frequency omega0.
struct HarmonicSet {
    std::vector<int> harmonics{0, 1};
    double omega0 = 0.0;

    void validate() const;
    int max_harmonic() const;
};

/// Complex envelope coefficients per harmonic; each vector spans the full
/// variable ordering. The k = 0 imaginary part is identically zero.
struct PhasorState {
    std::vector<int> harmonics;
    double omega0 = 0.0;
    std::vector<Vector> re, im;

    static PhasorState zero(const HarmonicSet& hs, std::size_t dim);
    std::size_t dim() const { return re.empty() ? 0 : re.front().size(); }
};

/// Dynamic-phasor stepping system. Per harmonic k the real block is
///   [[H_dT, -k w0 S], [k w0 S, H_dT]]   with  S = dT * M,
/// and the k = 0 block degenerates to H_dT alone. Blocks are mutually
/// uncoupled for a linear circuit.
struct TsSystem {
    DaeSystem dae;
    HarmonicSet hs;
    double dT = 0.0;
    DenseMatrix S;                   // dT * M
    std::vector<DenseMatrix> blocks; // per harmonic, same order as hs.harmonics
    std::vector<LuSolver> lu;

    /// Phasor forcing of harmonic k at time t (complex pair as re/im vectors).
    /// The sinusoidal source lands on the real part of the harmonic matching
    /// its frequency.
    void forcing(int k, double t, const AmplitudeFn* amp, Vector& fre, Vector& fim) const;
};

/// Full per-harmonic block matrix of the dynamic-phasor system (k = 0: n x n,
/// else 2n x 2n).
DenseMatrix ts_harmonic_block(const DaeSystem& dae, double dT, int k, double omega0);

TsSystem build_ts(const DaeSystem& dae, const HarmonicSet& hs, double dT);

/// One backward-Euler step of every harmonic block.
PhasorState ts_step(const TsSystem& sys, const PhasorState& prev, double t_next,
                    const AmplitudeFn* amp = nullptr);

/// Re(sum_k (re_k + i im_k) e^{i k w0 t}) per variable.
Vector reconstruct(const PhasorState& p, double t);

struct PhasorTrajectory {
    std::vector<double> times;
    std::vector<PhasorState> states;
    std::vector<std::string> names;
};

PhasorTrajectory integrate_ts(const TsSystem& sys, double t0, double t1,
                              const PhasorState& p0, const AmplitudeFn* amp = nullptr);

/// Columns: per variable and harmonic, re (and im for k > 0).
void write_phasor_csv(const PhasorTrajectory& traj, const std::string& path);

}  // namespace emtts
