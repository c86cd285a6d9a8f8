#pragma once

#include <functional>
#include <string>
#include <vector>

#include "emtts/linalg.hpp"

namespace emtts {

enum class ComponentKind { Resistor, Inductor, Capacitor, SinusoidalSource };

/// One circuit branch. Nodes are 1-based ids. For a source, `value` is unused;
/// amplitude/omega/series_z describe E*cos(omega*t) behind the series impedance Zs.
struct Component {
    ComponentKind kind;
    int node_from = 0;
    int node_to = 0;
    double value = 0.0;      // ohm / henry / farad
    double amplitude = 0.0;  // V, source only
    double omega = 0.0;      // rad/s, source only
    double series_z = 0.0;   // ohm, source only
};

struct Netlist {
    int node_count = 0;
    int ground = 1;
    std::vector<Component> components;

    /// Throws UnsupportedComponent / DisconnectedCircuit on invalid input.
    void validate() const;
};

/// The Fig.-style built-in RLC loop: 7 nodes, source+Zs, L1, R1, C1, R2, L2, C2.
Netlist reference_netlist();

enum class VarKind { Voltage, Current };

struct VarInfo {
    VarKind kind;
    std::string name;
    int node = 0;              // voltage: its node
    int node_from = 0;         // current: branch endpoints
    int node_to = 0;
    int component = -1;        // current: index into netlist components
    bool differential = false; // derivative appears in some equation
};

/// The assembled linear DAE in tableau form:  M * dw/dt + K * w = f(t).
/// Row r is the equation assigned to variable slot r by the row matching;
/// each netlist equation (ground row, branch rows, node KCL rows) maps to
/// exactly one row. Differential variables come first in the ordering.
struct DaeSystem {
    std::vector<VarInfo> vars;
    std::vector<std::string> names;      // names[i] == vars[i].name
    std::size_t n_diff = 0;              // differential variables lead the ordering
    DenseMatrix mass;                    // M
    DenseMatrix stiffness;               // K
    std::vector<std::string> row_equation;  // label of the equation at each row
    Vector initial_state;                // zero cold start

    struct SourceTerm {
        std::size_t row;     // row carrying E*cos(omega t)
        double amplitude;
        double omega;
    };
    std::vector<SourceTerm> sources;

    // node adjacency of the underlying circuit graph, for overlap growth
    std::vector<std::vector<int>> node_neighbors;  // index by 1-based node id

    std::size_t size() const { return names.size(); }

    /// f(t) with an optional amplitude override applied to every source.
    Vector forcing(double t) const;
    Vector forcing(double t, double amplitude_override) const;

    /// M*wdot + K*w - f(t); zero on exact solutions of the printed equations.
    Vector residual(const Vector& w, const Vector& wdot, double t) const;

    /// Index of a named variable; throws Error on unknown names.
    std::size_t index_of(const std::string& name) const;
};

/// Assembles the tableau DAE via augmented nodal analysis: one ground row,
/// one row per branch relation, one KCL row per non-ground node.
DaeSystem assemble_dae(const Netlist& net);

}  // namespace emtts
