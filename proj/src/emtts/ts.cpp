#include "emtts/ts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace emtts {

void HarmonicSet::validate() const {
    if (harmonics.empty()) throw Error("harmonic set must be non-empty");
    if (!(omega0 > 0.0)) throw Error("harmonic base frequency must be positive");
    for (std::size_t i = 0; i < harmonics.size(); ++i) {
        if (harmonics[i] < 0) throw Error("harmonics must be non-negative");
        if (i > 0 && harmonics[i] <= harmonics[i - 1])
            throw Error("harmonics must be strictly increasing");
    }
}

int HarmonicSet::max_harmonic() const {
    return harmonics.empty() ? 0 : harmonics.back();
}

PhasorState PhasorState::zero(const HarmonicSet& hs, std::size_t dim) {
    PhasorState p;
    p.harmonics = hs.harmonics;
    p.omega0 = hs.omega0;
    p.re.assign(hs.harmonics.size(), Vector(dim, 0.0));
    p.im.assign(hs.harmonics.size(), Vector(dim, 0.0));
    return p;
}

DenseMatrix ts_harmonic_block(const DaeSystem& dae, double dT, int k, double omega0) {
    const std::size_t n = dae.size();
    DenseMatrix h = dae.mass + scaled(dae.stiffness, dT);
    if (k == 0) return h;
    DenseMatrix block(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            block(i, j) = h(i, j);
            block(n + i, n + j) = h(i, j);
        }
    // S = dT * M couples the real/imaginary halves with factor +-k*w0
    const double kw0dT = k * omega0 * dT;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double s = kw0dT * dae.mass(i, j);
            if (s == 0.0) continue;
            block(i, n + j) -= s;
            block(n + i, j) += s;
        }
    return block;
}

TsSystem build_ts(const DaeSystem& dae, const HarmonicSet& hs, double dT) {
    hs.validate();
    if (!(dT > 0.0)) throw Error("build_ts: dT must be positive");
    TsSystem sys;
    sys.dae = dae;
    sys.hs = hs;
    sys.dT = dT;
    sys.S = scaled(dae.mass, dT);
    for (int k : hs.harmonics) {
        DenseMatrix block = ts_harmonic_block(dae, dT, k, hs.omega0);
        sys.lu.emplace_back(block);  // SingularMatrix propagates
        sys.blocks.push_back(std::move(block));
    }
    return sys;
}

void TsSystem::forcing(int k, double t, const AmplitudeFn* amp, Vector& fre, Vector& fim) const {
    const std::size_t n = dae.size();
    fre.assign(n, 0.0);
    fim.assign(n, 0.0);
    for (const auto& s : dae.sources) {
        const double e = amp && *amp ? (*amp)(t) : s.amplitude;
        const double ratio = s.omega / hs.omega0;
        const int km = static_cast<int>(std::lround(ratio));
        if (std::abs(ratio - km) > 1e-9)
            throw Error("source frequency is not a harmonic of the phasor base");
        // E cos(km w0 t) = Re(E e^{i km w0 t}): amplitude lands on the real
        // part of harmonic km
        if (km == k) fre[s.row] += e;
    }
}

PhasorState ts_step(const TsSystem& sys, const PhasorState& prev, double t_next,
                    const AmplitudeFn* amp) {
    const std::size_t n = sys.dae.size();
    PhasorState next = PhasorState::zero(sys.hs, n);
    Vector fre, fim;
    for (std::size_t hi = 0; hi < sys.hs.harmonics.size(); ++hi) {
        const int k = sys.hs.harmonics[hi];
        sys.forcing(k, t_next, amp, fre, fim);
        const Vector mre = sys.dae.mass.apply(prev.re[hi]);
        if (k == 0) {
            Vector rhs(n);
            for (std::size_t i = 0; i < n; ++i) rhs[i] = mre[i] + sys.dT * fre[i];
            sys.lu[hi].solve_in_place(rhs);
            next.re[hi] = std::move(rhs);  // imaginary half stays zero
        } else {
            const Vector mim = sys.dae.mass.apply(prev.im[hi]);
            Vector rhs(2 * n);
            for (std::size_t i = 0; i < n; ++i) {
                rhs[i] = mre[i] + sys.dT * fre[i];
                rhs[n + i] = mim[i] + sys.dT * fim[i];
            }
            sys.lu[hi].solve_in_place(rhs);
            for (std::size_t i = 0; i < n; ++i) {
                next.re[hi][i] = rhs[i];
                next.im[hi][i] = rhs[n + i];
            }
        }
    }
    return next;
}

Vector reconstruct(const PhasorState& p, double t) {
    Vector out(p.dim(), 0.0);
    for (std::size_t hi = 0; hi < p.harmonics.size(); ++hi) {
        const double phase = p.harmonics[hi] * p.omega0 * t;
        const double c = std::cos(phase), s = std::sin(phase);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += p.re[hi][i] * c - p.im[hi][i] * s;
    }
    return out;
}

PhasorTrajectory integrate_ts(const TsSystem& sys, double t0, double t1,
                              const PhasorState& p0, const AmplitudeFn* amp) {
    if (!(t1 > t0)) throw Error("integrate_ts: t1 must exceed t0");
    const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / sys.dT - 1e-9));
    PhasorTrajectory traj;
    traj.names = sys.dae.names;
    traj.times.push_back(t0);
    traj.states.push_back(p0);
    PhasorState p = p0;
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t = t0 + static_cast<double>(k) * sys.dT;
        p = ts_step(sys, p, t, amp);
        traj.times.push_back(t);
        traj.states.push_back(p);
    }
    return traj;
}

void write_phasor_csv(const PhasorTrajectory& traj, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot open " + path);
    std::fprintf(f, "time");
    if (!traj.states.empty()) {
        const auto& p0 = traj.states.front();
        for (const auto& n : traj.names)
            for (std::size_t hi = 0; hi < p0.harmonics.size(); ++hi) {
                std::fprintf(f, ",%s_k%d_re", n.c_str(), p0.harmonics[hi]);
                if (p0.harmonics[hi] != 0) std::fprintf(f, ",%s_k%d_im", n.c_str(), p0.harmonics[hi]);
            }
    }
    std::fprintf(f, "\n");
    for (std::size_t r = 0; r < traj.times.size(); ++r) {
        std::fprintf(f, "%.17g", traj.times[r]);
        const auto& p = traj.states[r];
        for (std::size_t i = 0; i < traj.names.size(); ++i)
            for (std::size_t hi = 0; hi < p.harmonics.size(); ++hi) {
                std::fprintf(f, ",%.17g", p.re[hi][i]);
                if (p.harmonics[hi] != 0) std::fprintf(f, ",%.17g", p.im[hi][i]);
            }
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

}  // namespace emtts
