#pragma once

#include <functional>
#include <optional>
#include <string>

#include "emtts/circuit.hpp"
#include "emtts/linalg.hpp"

namespace emtts {

/// Source amplitude as a function of time; overrides the netlist amplitude
/// when supplied (amplitude-jump events).
using AmplitudeFn = std::function<double(double)>;

/// One backward-Euler step of the tableau DAE is the linear system
///   H w^{n+1} = Theta w^n + forcing(t^{n+1}),
/// with H = M + dt*K, Theta = M and forcing(t) = dt * f(t).
struct SteppedSystem {
    DaeSystem dae;
    double dt = 0.0;
    DenseMatrix H;
    LuSolver lu;

    const DenseMatrix& theta() const { return dae.mass; }
    Vector forcing(double t, const AmplitudeFn* amp = nullptr) const;
};

/// Builds H = M + dt*K and factorizes it. Raises SingularMatrix when H fails LU.
SteppedSystem build_stepped(const DaeSystem& dae, double dt);

/// Solves H w_next = Theta w_prev + forcing(t_next).
Vector step(const SteppedSystem& sys, const Vector& w_prev, double t_next,
            const AmplitudeFn* amp = nullptr);

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;  // one row per time, full variable order
    std::vector<std::string> names;
};

/// Backward-Euler integration over [t0, t1] with ceil((t1-t0)/dt) steps.
Trajectory integrate(const SteppedSystem& sys, double t0, double t1, const Vector& w0,
                     const AmplitudeFn* amp = nullptr);

/// Header = time + variable names; values at full round-trip precision.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace emtts
