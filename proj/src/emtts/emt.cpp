#include "emtts/emt.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace emtts {

Vector SteppedSystem::forcing(double t, const AmplitudeFn* amp) const {
    Vector f = amp && *amp ? dae.forcing(t, (*amp)(t)) : dae.forcing(t);
    for (double& v : f) v *= dt;
    return f;
}

SteppedSystem build_stepped(const DaeSystem& dae, double dt) {
    if (!(dt > 0.0)) throw Error("build_stepped: dt must be positive");
    DenseMatrix h = dae.mass + scaled(dae.stiffness, dt);
    LuSolver lu(h);  // SingularMatrix propagates: bad dt or degenerate circuit
    return SteppedSystem{dae, dt, std::move(h), std::move(lu)};
}

Vector step(const SteppedSystem& sys, const Vector& w_prev, double t_next,
            const AmplitudeFn* amp) {
    if (w_prev.size() != sys.dae.size()) throw Error("step: state dimension mismatch");
    Vector rhs = sys.theta().apply(w_prev);
    const Vector f = sys.forcing(t_next, amp);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += f[i];
    sys.lu.solve_in_place(rhs);
    return rhs;
}

Trajectory integrate(const SteppedSystem& sys, double t0, double t1, const Vector& w0,
                     const AmplitudeFn* amp) {
    if (!(t1 > t0)) throw Error("integrate: t1 must exceed t0");
    const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / sys.dt - 1e-9));
    Trajectory traj;
    traj.names = sys.dae.names;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.times.push_back(t0);
    traj.states.push_back(w0);
    Vector w = w0;
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t = t0 + static_cast<double>(k) * sys.dt;
        w = step(sys, w, t, amp);
        traj.times.push_back(t);
        traj.states.push_back(w);
    }
    return traj;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot open " + path);
    std::fprintf(f, "time");
    for (const auto& n : traj.names) std::fprintf(f, ",%s", n.c_str());
    std::fprintf(f, "\n");
    for (std::size_t r = 0; r < traj.times.size(); ++r) {
        std::fprintf(f, "%.17g", traj.times[r]);
        for (double v : traj.states[r]) std::fprintf(f, ",%.17g", v);
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

}  // namespace emtts
