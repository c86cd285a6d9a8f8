#include "emtts/hetero.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace emtts {

namespace {

DenseMatrix submatrix(const DenseMatrix& H, const IndexSet& rows, const IndexSet& cols) {
    DenseMatrix s(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) s(i, j) = H(rows[i], cols[j]);
    return s;
}

IndexSet pattern_externals(const DenseMatrix& mass, const DenseMatrix& stiff,
                           const IndexSet& w) {
    std::set<std::size_t> inside(w.begin(), w.end());
    std::set<std::size_t> ext;
    for (std::size_t k : w)
        for (std::size_t j = 0; j < mass.cols(); ++j)
            if ((mass(k, j) != 0.0 || stiff(k, j) != 0.0) && !inside.count(j)) ext.insert(j);
    return IndexSet(ext.begin(), ext.end());
}

}  // namespace

void HeteroConfig::validate() const {
    if (!(dt > 0.0) || !(dT > 0.0)) throw Error("hetero: steps must be positive");
    const double ratio = dT / dt;
    if (std::abs(ratio - std::lround(ratio)) > 1e-9)
        throw Error("hetero: dT must be an integer multiple of dt");
    harmonics.validate();
    if (ts_subdomain != 1 && ts_subdomain != 2)
        throw Error("hetero: ts_subdomain must be 1 or 2");
    if (aitken_after < 3) throw Error("hetero: need at least three iterates for Aitken");
    const double period = 2.0 * std::numbers::pi / harmonics.omega0;
    const int w = window();
    if (std::abs(w * dt - period) > 1e-9 * period)
        throw Error("hetero: extraction window must cover one fundamental period");
}

int HeteroConfig::substeps() const { return static_cast<int>(std::lround(dT / dt)); }

int HeteroConfig::window() const {
    if (window_samples > 0) return window_samples;
    const double period = 2.0 * std::numbers::pi / harmonics.omega0;
    return static_cast<int>(std::lround(period / dt));
}

std::vector<Vector> ts_to_emt(const PhasorState& p, const std::vector<double>& times,
                              const IndexSet& vars) {
    std::vector<Vector> out(times.size(), Vector(vars.size(), 0.0));
    for (std::size_t j = 0; j < times.size(); ++j)
        for (std::size_t hi = 0; hi < p.harmonics.size(); ++hi) {
            const double phase = p.harmonics[hi] * p.omega0 * times[j];
            const double c = std::cos(phase), s = std::sin(phase);
            for (std::size_t v = 0; v < vars.size(); ++v)
                out[j][v] += p.re[hi][vars[v]] * c - p.im[hi][vars[v]] * s;
        }
    return out;
}

std::vector<ComplexVector> emt_to_ts(const std::vector<Vector>& history,
                                     const std::vector<double>& times,
                                     const HarmonicSet& hs) {
    if (history.size() != times.size() || history.empty())
        throw InsufficientSamples("history and time grid must align");
    const std::size_t nv = history.front().size();
    const double dt = times.size() > 1 ? times[1] - times[0] : 0.0;
    std::vector<ComplexVector> out(nv);
    Vector samples(history.size());
    for (std::size_t v = 0; v < nv; ++v) {
        for (std::size_t j = 0; j < history.size(); ++j) samples[j] = history[j][v];
        out[v] = dft_harmonics(samples, hs.harmonics, hs.omega0, times.front(), dt);
    }
    return out;
}

HeteroCoupler::HeteroCoupler(const DaeSystem& dae, const IndexSet& w1_base, HeteroConfig cfg)
    : dae_(dae),
      cfg_(std::move(cfg)),
      a_emt_(DenseMatrix::identity(1)) {  // replaced below
    cfg_.validate();
    IndexSet w1 = w1_base;
    std::sort(w1.begin(), w1.end());
    IndexSet w2;
    for (std::size_t i = 0; i < dae_.size(); ++i)
        if (!std::binary_search(w1.begin(), w1.end(), i)) w2.push_back(i);
    if (w1.empty() || w2.empty()) throw Error("hetero: split must be a proper subset");

    w_ts_ = cfg_.ts_subdomain == 1 ? w1 : w2;
    w_emt_ = cfg_.ts_subdomain == 1 ? w2 : w1;
    ext_emt_ = pattern_externals(dae_.mass, dae_.stiffness, w_emt_);
    ext_ts_ = pattern_externals(dae_.mass, dae_.stiffness, w_ts_);

    for (std::size_t i : ext_emt_) {
        auto it = std::lower_bound(w_ts_.begin(), w_ts_.end(), i);
        pos_ext_emt_in_ts_.push_back(static_cast<std::size_t>(it - w_ts_.begin()));
    }
    for (std::size_t i : ext_ts_) {
        auto it = std::lower_bound(w_emt_.begin(), w_emt_.end(), i);
        pos_ext_ts_in_emt_.push_back(static_cast<std::size_t>(it - w_emt_.begin()));
    }

    const DenseMatrix h_dt = dae_.mass + scaled(dae_.stiffness, cfg_.dt);
    a_emt_ = LuSolver(submatrix(h_dt, w_emt_, w_emt_));
    h_emt_ext_ = submatrix(h_dt, w_emt_, ext_emt_);
    m_emt_ = submatrix(dae_.mass, w_emt_, w_emt_);
    m_emt_ext_ = submatrix(dae_.mass, w_emt_, ext_emt_);

    m_ts_ = submatrix(dae_.mass, w_ts_, w_ts_);
    m_ts_ext_ = submatrix(dae_.mass, w_ts_, ext_ts_);
    const DenseMatrix h_dT = dae_.mass + scaled(dae_.stiffness, cfg_.dT);
    const DenseMatrix a_t = submatrix(h_dT, w_ts_, w_ts_);
    const DenseMatrix e_t = submatrix(h_dT, w_ts_, ext_ts_);
    const std::size_t nt = w_ts_.size(), ne = ext_ts_.size();
    for (int k : cfg_.harmonics.harmonics) {
        if (k == 0) {
            ts_blocks_.push_back({0, LuSolver(a_t), e_t});
            continue;
        }
        const double kw0dT = k * cfg_.harmonics.omega0 * cfg_.dT;
        DenseMatrix block(2 * nt, 2 * nt);
        for (std::size_t i = 0; i < nt; ++i)
            for (std::size_t j = 0; j < nt; ++j) {
                block(i, j) = a_t(i, j);
                block(nt + i, nt + j) = a_t(i, j);
                const double s = kw0dT * m_ts_(i, j);
                if (s != 0.0) {
                    block(i, nt + j) -= s;
                    block(nt + i, j) += s;
                }
            }
        DenseMatrix coupling(2 * nt, 2 * ne);
        for (std::size_t i = 0; i < nt; ++i)
            for (std::size_t j = 0; j < ne; ++j) {
                coupling(i, j) = e_t(i, j);
                coupling(nt + i, ne + j) = e_t(i, j);
                const double s = kw0dT * m_ts_ext_(i, j);
                if (s != 0.0) {
                    coupling(i, ne + j) -= s;
                    coupling(nt + i, j) += s;
                }
            }
        ts_blocks_.push_back({k, LuSolver(std::move(block)), std::move(coupling)});
    }
}

// Internal helpers operating on the coupler's restricted data.
struct HeteroStepImpl {
    const HeteroCoupler& c;
    const AmplitudeFn* amp;
    double t_start;
    std::vector<double> tsmall;

    // fixed previous-step data
    const HeteroCoupler::State& prev;

    std::size_t nk() const { return c.cfg_.harmonics.harmonics.size(); }
    std::size_t nts() const { return c.w_ts_.size(); }
    std::size_t nee() const { return c.ext_emt_.size(); }
    std::size_t net() const { return c.ext_ts_.size(); }

    // phasors z (per harmonic, on the TS set) -> interface samples at time t
    Vector recon_ext_emt(const std::vector<Vector>& z_re, const std::vector<Vector>& z_im,
                         double t) const {
        Vector x(nee(), 0.0);
        for (std::size_t hi = 0; hi < nk(); ++hi) {
            const double phase = c.cfg_.harmonics.harmonics[hi] * c.cfg_.harmonics.omega0 * t;
            const double cs = std::cos(phase), sn = std::sin(phase);
            for (std::size_t v = 0; v < nee(); ++v) {
                const std::size_t p = c.pos_ext_emt_in_ts_[v];
                x[v] += z_re[hi][p] * cs - z_im[hi][p] * sn;
            }
        }
        return x;
    }

    // gathered EMT solve against reconstructed interface samples
    std::vector<Vector> emt_sweep(const std::vector<Vector>& z_re,
                                  const std::vector<Vector>& z_im) const {
        std::vector<Vector> xe(tsmall.size() + 1);
        xe[0] = prev.xe;
        for (std::size_t j = 0; j < tsmall.size(); ++j)
            xe[j + 1] = recon_ext_emt(z_re, z_im, tsmall[j]);
        return c.solve_gathered(prev.w_emt, xe, t_start, amp);
    }

    // harmonic extraction of the EMT interface history over the trailing window
    void extract(const std::vector<Vector>& emt_states, std::vector<Vector>& a_re,
                 std::vector<Vector>& a_im) const {
        const int w = c.cfg_.window();
        const int m = static_cast<int>(tsmall.size());
        std::vector<Vector> hist;
        std::vector<double> times;
        const int tail = w - m;
        for (int j = 0; j < tail; ++j) {
            const std::size_t hn = prev.history.size();
            hist.push_back(prev.history[hn - tail + j]);
            times.push_back(t_start - (tail - j) * c.cfg_.dt);
        }
        Vector row(net());
        for (int j = std::max(0, m - w); j < m; ++j) {
            for (std::size_t v = 0; v < net(); ++v)
                row[v] = emt_states[j][c.pos_ext_ts_in_emt_[v]];
            hist.push_back(row);
            times.push_back(tsmall[j]);
        }
        const auto coeffs = emt_to_ts(hist, times, c.cfg_.harmonics);
        a_re.assign(nk(), Vector(net(), 0.0));
        a_im.assign(nk(), Vector(net(), 0.0));
        for (std::size_t v = 0; v < net(); ++v)
            for (std::size_t hi = 0; hi < nk(); ++hi) {
                a_re[hi][v] = coeffs[v][hi].real();
                a_im[hi][v] = c.cfg_.harmonics.harmonics[hi] == 0 ? 0.0 : coeffs[v][hi].imag();
            }
    }

    // phasor forcing on TS rows for harmonic k at the macro endpoint
    Vector ts_forcing(int k) const {
        Vector f(nts(), 0.0);
        const double t_end = t_start + c.cfg_.dT;
        for (const auto& s : c.dae_.sources) {
            const double ratio = s.omega / c.cfg_.harmonics.omega0;
            const int km = static_cast<int>(std::lround(ratio));
            if (std::abs(ratio - km) > 1e-9)
                throw Error("source frequency is not a harmonic of the phasor base");
            if (km != k) continue;
            auto it = std::lower_bound(c.w_ts_.begin(), c.w_ts_.end(), s.row);
            if (it == c.w_ts_.end() || *it != s.row) continue;
            const double e = amp && *amp ? (*amp)(t_end) : s.amplitude;
            f[static_cast<std::size_t>(it - c.w_ts_.begin())] += e;
        }
        return f;
    }

    // TS subdomain solve consuming interface phasors a at the macro endpoint
    void ts_solve(const std::vector<Vector>& a_re, const std::vector<Vector>& a_im,
                  std::vector<Vector>& z_re, std::vector<Vector>& z_im) const {
        z_re.assign(nk(), Vector(nts(), 0.0));
        z_im.assign(nk(), Vector(nts(), 0.0));
        for (std::size_t hi = 0; hi < nk(); ++hi) {
            const int k = c.cfg_.harmonics.harmonics[hi];
            const Vector f = ts_forcing(k);
            const Vector mre = c.m_ts_.apply(prev.z_re[hi]);
            const Vector mre_ext = c.m_ts_ext_.apply(prev.a_re[hi]);
            if (k == 0) {
                Vector rhs(nts());
                const Vector exa = c.ts_blocks_[hi].coupling.apply(a_re[hi]);
                for (std::size_t i = 0; i < nts(); ++i)
                    rhs[i] = mre[i] + mre_ext[i] - exa[i] + c.cfg_.dT * f[i];
                c.ts_blocks_[hi].lu.solve_in_place(rhs);
                z_re[hi] = std::move(rhs);
            } else {
                const Vector mim = c.m_ts_.apply(prev.z_im[hi]);
                const Vector mim_ext = c.m_ts_ext_.apply(prev.a_im[hi]);
                Vector a_pack(2 * net());
                for (std::size_t v = 0; v < net(); ++v) {
                    a_pack[v] = a_re[hi][v];
                    a_pack[net() + v] = a_im[hi][v];
                }
                const Vector exa = c.ts_blocks_[hi].coupling.apply(a_pack);
                Vector rhs(2 * nts());
                for (std::size_t i = 0; i < nts(); ++i) {
                    rhs[i] = mre[i] + mre_ext[i] - exa[i] + c.cfg_.dT * f[i];
                    rhs[nts() + i] = mim[i] + mim_ext[i] - exa[nts() + i];
                }
                c.ts_blocks_[hi].lu.solve_in_place(rhs);
                for (std::size_t i = 0; i < nts(); ++i) {
                    z_re[hi][i] = rhs[i];
                    z_im[hi][i] = rhs[nts() + i];
                }
            }
        }
    }

    Vector pack_trace(const std::vector<Vector>& a_re, const std::vector<Vector>& a_im,
                      const std::vector<Vector>& z_re, const std::vector<Vector>& z_im) const {
        Vector t;
        for (std::size_t hi = 0; hi < nk(); ++hi) {
            for (std::size_t v = 0; v < net(); ++v) t.push_back(a_re[hi][v]);
            if (c.cfg_.harmonics.harmonics[hi] != 0)
                for (std::size_t v = 0; v < net(); ++v) t.push_back(a_im[hi][v]);
        }
        for (std::size_t hi = 0; hi < nk(); ++hi) {
            for (std::size_t v = 0; v < nee(); ++v) t.push_back(z_re[hi][c.pos_ext_emt_in_ts_[v]]);
            if (c.cfg_.harmonics.harmonics[hi] != 0)
                for (std::size_t v = 0; v < nee(); ++v)
                    t.push_back(z_im[hi][c.pos_ext_emt_in_ts_[v]]);
        }
        return t;
    }

    // splits an accelerated joint trace back into interface phasors
    void unpack_trace(const Vector& t, std::vector<Vector>& a_re,
                      std::vector<Vector>& a_im) const {
        a_re.assign(nk(), Vector(net(), 0.0));
        a_im.assign(nk(), Vector(net(), 0.0));
        std::size_t off = 0;
        for (std::size_t hi = 0; hi < nk(); ++hi) {
            for (std::size_t v = 0; v < net(); ++v) a_re[hi][v] = t[off + v];
            off += net();
            if (c.cfg_.harmonics.harmonics[hi] != 0) {
                for (std::size_t v = 0; v < net(); ++v) a_im[hi][v] = t[off + v];
                off += net();
            }
        }
    }
};

std::vector<Vector> HeteroCoupler::solve_gathered(const Vector& w_start,
                                                  const std::vector<Vector>& xe,
                                                  double t_start,
                                                  const AmplitudeFn* amp) const {
    if (xe.size() < 2) throw Error("gathered solve needs interface samples for each level");
    const std::size_t steps = xe.size() - 1;
    std::vector<Vector> out;
    out.reserve(steps);
    Vector w = w_start;
    for (std::size_t j = 1; j <= steps; ++j) {
        const double t = t_start + static_cast<double>(j) * cfg_.dt;
        Vector rhs = m_emt_.apply(w);
        const Vector mem = m_emt_ext_.apply(xe[j - 1]);
        const Vector cpl = h_emt_ext_.apply(xe[j]);
        const Vector f = amp && *amp ? dae_.forcing(t, (*amp)(t)) : dae_.forcing(t);
        for (std::size_t i = 0; i < w_emt_.size(); ++i)
            rhs[i] += mem[i] - cpl[i] + cfg_.dt * f[w_emt_[i]];
        a_emt_.solve_in_place(rhs);
        w = rhs;
        out.push_back(w);
    }
    return out;
}

HeteroCoupler::State HeteroCoupler::warm_start(const Trajectory& mono) const {
    const int w = cfg_.window();
    if (mono.states.size() < static_cast<std::size_t>(w))
        throw InsufficientSamples("monodomain warm-up shorter than the extraction window");
    const std::size_t n0 = mono.states.size() - static_cast<std::size_t>(w);

    State st;
    st.time = mono.times.back();
    const Vector& last = mono.states.back();
    st.w_emt.resize(w_emt_.size());
    for (std::size_t i = 0; i < w_emt_.size(); ++i) st.w_emt[i] = last[w_emt_[i]];
    st.xe.resize(ext_emt_.size());
    for (std::size_t i = 0; i < ext_emt_.size(); ++i) st.xe[i] = last[ext_emt_[i]];

    // phasors of the TS subdomain and of the EMT-side interface over the tail
    std::vector<double> times(mono.times.end() - w, mono.times.end());
    const double dt = cfg_.dt;
    auto window_dft = [&](const IndexSet& vars, std::vector<Vector>& re,
                          std::vector<Vector>& im) {
        re.assign(cfg_.harmonics.harmonics.size(), Vector(vars.size(), 0.0));
        im.assign(cfg_.harmonics.harmonics.size(), Vector(vars.size(), 0.0));
        Vector samples(static_cast<std::size_t>(w));
        for (std::size_t v = 0; v < vars.size(); ++v) {
            for (int j = 0; j < w; ++j) samples[j] = mono.states[n0 + j][vars[v]];
            const auto c =
                dft_harmonics(samples, cfg_.harmonics.harmonics, cfg_.harmonics.omega0,
                              times.front(), dt);
            for (std::size_t hi = 0; hi < c.size(); ++hi) {
                re[hi][v] = c[hi].real();
                im[hi][v] = cfg_.harmonics.harmonics[hi] == 0 ? 0.0 : c[hi].imag();
            }
        }
    };
    window_dft(w_ts_, st.z_re, st.z_im);
    window_dft(ext_ts_, st.a_re, st.a_im);

    const int m = cfg_.substeps();
    const int tail = std::max(0, w - m);
    for (std::size_t j = mono.states.size() - tail; j < mono.states.size(); ++j) {
        Vector row(ext_ts_.size());
        for (std::size_t v = 0; v < ext_ts_.size(); ++v) row[v] = mono.states[j][ext_ts_[v]];
        st.history.push_back(std::move(row));
    }
    return st;
}

HeteroCoupler::StepResult HeteroCoupler::macro_step(const State& state,
                                                    const AmplitudeFn* amp) const {
    const int m = cfg_.substeps();
    HeteroStepImpl impl{*this, amp, state.time, {}, state};
    for (int j = 1; j <= m; ++j)
        impl.tsmall.push_back(state.time + static_cast<double>(j) * cfg_.dt);

    HeteroDiagnostics diag;
    diag.t_start = state.time;
    diag.t_end = state.time + cfg_.dT;

    const std::size_t nk = cfg_.harmonics.harmonics.size();
    std::vector<Vector> z_re(nk, Vector(w_ts_.size(), 0.0));
    std::vector<Vector> z_im(nk, Vector(w_ts_.size(), 0.0));
    std::vector<Vector> a_re, a_im;
    std::vector<Vector> emt = impl.emt_sweep(z_re, z_im);
    impl.extract(emt, a_re, a_im);

    std::vector<Vector> z_fin_re, z_fin_im;
    std::vector<Vector> emt_fin;

    if (ext_emt_.empty() && ext_ts_.empty()) {
        diag.decoupled = true;
        diag.iterations = 1;
        impl.ts_solve(a_re, a_im, z_fin_re, z_fin_im);
        emt_fin = std::move(emt);
    } else {
        std::vector<Vector> traces{impl.pack_trace(a_re, a_im, z_re, z_im)};
        for (int p = 0; p < cfg_.aitken_after; ++p) {
            std::vector<Vector> zn_re, zn_im;
            impl.ts_solve(a_re, a_im, zn_re, zn_im);
            std::vector<Vector> emt_next =
                cfg_.mode == SchwarzMode::Multiplicative ? impl.emt_sweep(zn_re, zn_im)
                                                         : impl.emt_sweep(z_re, z_im);
            std::vector<Vector> an_re, an_im;
            impl.extract(emt_next, an_re, an_im);

            double e_ts = 0.0, e_emt = 0.0;
            for (std::size_t hi = 0; hi < nk; ++hi) {
                for (std::size_t v = 0; v < ext_emt_.size(); ++v) {
                    const std::size_t pp = pos_ext_emt_in_ts_[v];
                    const double dr = zn_re[hi][pp] - z_re[hi][pp];
                    const double di = zn_im[hi][pp] - z_im[hi][pp];
                    e_ts += dr * dr + di * di;
                }
                for (std::size_t v = 0; v < ext_ts_.size(); ++v) {
                    const double dr = an_re[hi][v] - a_re[hi][v];
                    const double di = an_im[hi][v] - a_im[hi][v];
                    e_emt += dr * dr + di * di;
                }
            }
            diag.err_ts.push_back(std::sqrt(e_ts));
            diag.err_emt.push_back(std::sqrt(e_emt));
            diag.err_joint.push_back(std::sqrt(e_ts + e_emt));

            z_re = std::move(zn_re);
            z_im = std::move(zn_im);
            a_re = std::move(an_re);
            a_im = std::move(an_im);
            traces.push_back(impl.pack_trace(a_re, a_im, z_re, z_im));
        }
        diag.iterations = cfg_.aitken_after;

        try {
            const ErrorOperator op = numeric_error_operator(traces);
            const Vector x_inf = aitken_accelerate(op, traces[traces.size() - 2], traces.back());
            std::vector<Vector> acc_re, acc_im;
            impl.unpack_trace(x_inf, acc_re, acc_im);
            impl.ts_solve(acc_re, acc_im, z_fin_re, z_fin_im);
            emt_fin = impl.emt_sweep(z_fin_re, z_fin_im);
            diag.accelerated = true;
            diag.aitken_rank = op.rank;
        } catch (const RankDeficientTrace&) {
            // iteration already converged to machine level
            z_fin_re = z_re;
            z_fin_im = z_im;
            emt_fin = impl.emt_sweep(z_fin_re, z_fin_im);
        }
    }

    // interface residual: one more full sweep must reproduce the final trace
    std::vector<Vector> af_re, af_im;
    impl.extract(emt_fin, af_re, af_im);
    {
        std::vector<Vector> zc_re, zc_im;
        impl.ts_solve(af_re, af_im, zc_re, zc_im);
        const std::vector<Vector> emt_chk = impl.emt_sweep(zc_re, zc_im);
        std::vector<Vector> ac_re, ac_im;
        impl.extract(emt_chk, ac_re, ac_im);
        const Vector fin = impl.pack_trace(af_re, af_im, z_fin_re, z_fin_im);
        const Vector chk = impl.pack_trace(ac_re, ac_im, zc_re, zc_im);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < fin.size(); ++i) {
            num = std::max(num, std::abs(chk[i] - fin[i]));
            den = std::max(den, std::abs(fin[i]));
        }
        diag.post_residual = num / (1.0 + den);
    }

    StepResult res;
    res.diag = std::move(diag);

    // mixed small-step output: waveform side sampled, phasor side reconstructed
    PhasorState zfull = PhasorState::zero(cfg_.harmonics, dae_.size());
    for (std::size_t hi = 0; hi < nk; ++hi)
        for (std::size_t i = 0; i < w_ts_.size(); ++i) {
            zfull.re[hi][w_ts_[i]] = z_fin_re[hi][i];
            zfull.im[hi][w_ts_[i]] = z_fin_im[hi][i];
        }
    res.substates.reserve(m);
    for (int j = 0; j < m; ++j) {
        Vector full = reconstruct(zfull, impl.tsmall[j]);
        for (std::size_t i = 0; i < w_emt_.size(); ++i) full[w_emt_[i]] = emt_fin[j][i];
        res.substates.push_back(std::move(full));
    }

    State next;
    next.time = state.time + cfg_.dT;
    next.w_emt = emt_fin.back();
    next.z_re = std::move(z_fin_re);
    next.z_im = std::move(z_fin_im);
    next.a_re = std::move(af_re);
    next.a_im = std::move(af_im);
    next.xe.assign(ext_emt_.size(), 0.0);
    for (std::size_t hi = 0; hi < nk; ++hi) {
        const double phase = cfg_.harmonics.harmonics[hi] * cfg_.harmonics.omega0 * next.time;
        const double cs = std::cos(phase), sn = std::sin(phase);
        for (std::size_t v = 0; v < ext_emt_.size(); ++v)
            next.xe[v] += next.z_re[hi][pos_ext_emt_in_ts_[v]] * cs -
                          next.z_im[hi][pos_ext_emt_in_ts_[v]] * sn;
    }
    const int tail = std::max(0, cfg_.window() - m);
    next.history = state.history;
    for (int j = 0; j < m; ++j) {
        Vector row(ext_ts_.size());
        for (std::size_t v = 0; v < ext_ts_.size(); ++v)
            row[v] = emt_fin[j][pos_ext_ts_in_emt_[v]];
        next.history.push_back(std::move(row));
    }
    while (next.history.size() > static_cast<std::size_t>(tail)) next.history.pop_front();

    res.next = std::move(next);
    return res;
}

HeteroRunResult run_hetero(const DaeSystem& dae, const IndexSet& w1_base,
                           const HeteroConfig& cfg, double t0, double t1,
                           const AmplitudeFn* amp) {
    cfg.validate();
    HeteroCoupler coupler(dae, w1_base, cfg);

    const int w = cfg.window();
    const int warm_macros =
        static_cast<int>(std::ceil(w * cfg.dt / cfg.dT - 1e-9));
    const double warm_end = t0 + warm_macros * cfg.dT;
    if (warm_end >= t1) throw Error("hetero: span shorter than the warm-up window");

    const SteppedSystem mono = build_stepped(dae, cfg.dt);
    Trajectory warm = integrate(mono, t0, warm_end, dae.initial_state, amp);

    HeteroRunResult result;
    result.warmup_end = warm_end;
    result.trajectory.names = dae.names;
    result.trajectory.times = warm.times;
    result.trajectory.states = warm.states;

    HeteroCoupler::State st = coupler.warm_start(warm);
    const auto macros = static_cast<std::size_t>(std::floor((t1 - warm_end) / cfg.dT + 1e-9));
    for (std::size_t k = 0; k < macros; ++k) {
        auto step = coupler.macro_step(st, amp);
        for (int j = 0; j < cfg.substeps(); ++j) {
            result.trajectory.times.push_back(st.time + (j + 1) * cfg.dt);
            result.trajectory.states.push_back(std::move(step.substates[j]));
        }
        result.diagnostics.push_back(std::move(step.diag));
        st = std::move(step.next);
    }
    return result;
}

}  // namespace emtts
