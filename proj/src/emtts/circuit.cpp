#include "emtts/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>

namespace emtts {

namespace {

std::string current_name(int from, int to) {
    if (from < 10 && to < 10) return "i" + std::to_string(from) + std::to_string(to);
    return "i" + std::to_string(from) + "_" + std::to_string(to);
}

}  // namespace

void Netlist::validate() const {
    if (node_count < 2) throw UnsupportedComponent("netlist needs at least two nodes");
    if (ground < 1 || ground > node_count) throw UnsupportedComponent("ground node out of range");
    int sources = 0;
    for (const auto& c : components) {
        if (c.node_from < 1 || c.node_from > node_count || c.node_to < 1 || c.node_to > node_count)
            throw UnsupportedComponent("component node out of range");
        if (c.node_from == c.node_to) throw UnsupportedComponent("component endpoints must differ");
        switch (c.kind) {
            case ComponentKind::Resistor:
            case ComponentKind::Inductor:
            case ComponentKind::Capacitor:
                if (!(c.value > 0.0)) throw UnsupportedComponent("component value must be positive");
                break;
            case ComponentKind::SinusoidalSource:
                if (!(c.series_z > 0.0)) throw UnsupportedComponent("source series impedance must be positive");
                ++sources;
                break;
        }
    }
    if (sources > 1) throw UnsupportedComponent("at most one source supported");

    // connectivity
    std::vector<std::vector<int>> adj(node_count + 1);
    for (const auto& c : components) {
        adj[c.node_from].push_back(c.node_to);
        adj[c.node_to].push_back(c.node_from);
    }
    std::vector<bool> seen(node_count + 1, false);
    std::deque<int> queue{ground};
    seen[ground] = true;
    while (!queue.empty()) {
        int n = queue.front();
        queue.pop_front();
        for (int m : adj[n])
            if (!seen[m]) { seen[m] = true; queue.push_back(m); }
    }
    for (int n = 1; n <= node_count; ++n)
        if (!seen[n]) throw DisconnectedCircuit("node " + std::to_string(n) + " unreachable from ground");
}

Netlist reference_netlist() {
    constexpr double L = 0.7, C = 1e-6, R = 77.0, Zs = 1e-6, E = 100.0;
    const double omega0 = 2.0 * std::numbers::pi * 50.0;
    Netlist net;
    net.node_count = 7;
    net.ground = 1;
    net.components = {
        {ComponentKind::SinusoidalSource, 1, 2, 0.0, E, omega0, Zs},
        {ComponentKind::Inductor, 2, 3, L},
        {ComponentKind::Resistor, 3, 4, R},
        {ComponentKind::Capacitor, 4, 5, C},
        {ComponentKind::Resistor, 5, 6, R},
        {ComponentKind::Inductor, 6, 7, L},
        {ComponentKind::Capacitor, 7, 1, C},
    };
    return net;
}

namespace {

struct Equation {
    std::string label;
    std::map<std::string, double> k;  // stiffness entries by variable name
    std::map<std::string, double> m;  // mass entries
    double src_amplitude = 0.0;       // E for the source row
    double src_omega = 0.0;
    std::vector<std::string> preferred_slots;  // matching preference order
};

std::vector<int> bfs_distance(const Netlist& net) {
    std::vector<std::vector<int>> adj(net.node_count + 1);
    for (const auto& c : net.components) {
        adj[c.node_from].push_back(c.node_to);
        adj[c.node_to].push_back(c.node_from);
    }
    std::vector<int> dist(net.node_count + 1, -1);
    std::deque<int> queue{net.ground};
    dist[net.ground] = 0;
    while (!queue.empty()) {
        int n = queue.front();
        queue.pop_front();
        for (int m : adj[n])
            if (dist[m] < 0) { dist[m] = dist[n] + 1; queue.push_back(m); }
    }
    return dist;
}

// Deterministic perfect matching: equations processed in fixed order, each tried
// against its preference list, displacing earlier choices when necessary.
bool assign_slots(std::size_t e, const std::vector<Equation>& eqs,
                  std::map<std::string, std::size_t>& slot_of,
                  std::vector<bool>& visited) {
    for (const auto& slot : eqs[e].preferred_slots) {
        auto it = slot_of.find(slot);
        if (it == slot_of.end()) {
            slot_of[slot] = e;
            return true;
        }
    }
    for (const auto& slot : eqs[e].preferred_slots) {
        const std::size_t holder = slot_of[slot];
        if (visited[holder]) continue;
        visited[holder] = true;
        if (assign_slots(holder, eqs, slot_of, visited)) {
            slot_of[slot] = e;
            return true;
        }
    }
    return false;
}

}  // namespace

Vector DaeSystem::forcing(double t) const {
    Vector f(size(), 0.0);
    for (const auto& s : sources) f[s.row] = s.amplitude * std::cos(s.omega * t);
    return f;
}

Vector DaeSystem::forcing(double t, double amplitude_override) const {
    Vector f(size(), 0.0);
    for (const auto& s : sources) f[s.row] = amplitude_override * std::cos(s.omega * t);
    return f;
}

Vector DaeSystem::residual(const Vector& w, const Vector& wdot, double t) const {
    Vector r = mass.apply(wdot);
    const Vector kw = stiffness.apply(w);
    const Vector f = forcing(t);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += kw[i] - f[i];
    return r;
}

std::size_t DaeSystem::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    throw Error("unknown variable: " + name);
}

DaeSystem assemble_dae(const Netlist& net) {
    net.validate();
    const std::vector<int> dist = bfs_distance(net);

    // --- variables ---
    std::vector<VarInfo> vars;
    for (int n = 1; n <= net.node_count; ++n) {
        VarInfo v;
        v.kind = VarKind::Voltage;
        v.name = "v" + std::to_string(n);
        v.node = n;
        vars.push_back(v);
    }
    for (std::size_t ci = 0; ci < net.components.size(); ++ci) {
        const auto& c = net.components[ci];
        VarInfo v;
        v.kind = VarKind::Current;
        v.name = current_name(c.node_from, c.node_to);
        v.node_from = c.node_from;
        v.node_to = c.node_to;
        v.component = static_cast<int>(ci);
        vars.push_back(v);
    }

    // differential classification: inductor currents, capacitor endpoint voltages
    for (auto& v : vars) {
        if (v.kind == VarKind::Current)
            v.differential = net.components[v.component].kind == ComponentKind::Inductor;
    }
    for (const auto& c : net.components) {
        if (c.kind != ComponentKind::Capacitor) continue;
        for (auto& v : vars)
            if (v.kind == VarKind::Voltage && (v.node == c.node_from || v.node == c.node_to))
                v.differential = true;
    }

    // ordering: differential first, each group sorted by loop position
    // (voltage: its node; current: its from node; voltage wins ties)
    auto position = [](const VarInfo& v) {
        return v.kind == VarKind::Voltage ? v.node : v.node_from;
    };
    std::stable_sort(vars.begin(), vars.end(), [&](const VarInfo& a, const VarInfo& b) {
        if (a.differential != b.differential) return a.differential;
        if (position(a) != position(b)) return position(a) < position(b);
        if (a.kind != b.kind) return a.kind == VarKind::Voltage;
        return a.node_to < b.node_to;
    });

    // --- equations ---
    std::vector<Equation> eqs;
    {
        Equation g;
        g.label = "ground";
        g.k["v" + std::to_string(net.ground)] = 1.0;
        g.preferred_slots = {"v" + std::to_string(net.ground)};
        eqs.push_back(std::move(g));
    }
    for (std::size_t ci = 0; ci < net.components.size(); ++ci) {
        const auto& c = net.components[ci];
        const std::string vu = "v" + std::to_string(c.node_from);
        const std::string vw = "v" + std::to_string(c.node_to);
        const std::string ib = current_name(c.node_from, c.node_to);
        Equation e;
        switch (c.kind) {
            case ComponentKind::Resistor:
                e.label = "R " + ib;
                e.k[vw] += 1.0;
                e.k[vu] -= 1.0;
                e.k[ib] -= c.value;
                break;
            case ComponentKind::Inductor:
                e.label = "L " + ib;
                e.k[vw] += 1.0;
                e.k[vu] -= 1.0;
                e.m[ib] -= c.value;
                break;
            case ComponentKind::Capacitor:
                e.label = "C " + ib;
                e.m[vw] += c.value;
                e.m[vu] -= c.value;
                e.k[ib] -= 1.0;
                break;
            case ComponentKind::SinusoidalSource:
                e.label = "src " + ib;
                e.k[vw] += 1.0;
                e.k[vu] -= 1.0;
                e.k[ib] -= c.series_z;
                e.src_amplitude = c.amplitude;
                e.src_omega = c.omega;
                break;
        }
        // slot preference: far endpoint voltage, then own current, then near voltage
        const int du = dist[c.node_from], dw = dist[c.node_to];
        if (du > dw)
            e.preferred_slots = {vu, ib, vw};
        else if (dw > du)
            e.preferred_slots = {vw, ib, vu};
        else
            e.preferred_slots = {ib, vu, vw};
        eqs.push_back(std::move(e));
    }
    for (int n = 1; n <= net.node_count; ++n) {
        if (n == net.ground) continue;
        Equation e;
        e.label = "kcl " + std::to_string(n);
        struct Incident { int other_dist; std::size_t comp; std::string name; };
        std::vector<Incident> inc;
        for (std::size_t ci = 0; ci < net.components.size(); ++ci) {
            const auto& c = net.components[ci];
            if (c.node_to == n) {
                e.k[current_name(c.node_from, c.node_to)] += 1.0;
                inc.push_back({dist[c.node_from], ci, current_name(c.node_from, c.node_to)});
            } else if (c.node_from == n) {
                e.k[current_name(c.node_from, c.node_to)] -= 1.0;
                inc.push_back({dist[c.node_to], ci, current_name(c.node_from, c.node_to)});
            }
        }
        std::sort(inc.begin(), inc.end(), [](const Incident& a, const Incident& b) {
            if (a.other_dist != b.other_dist) return a.other_dist < b.other_dist;
            return a.comp < b.comp;
        });
        for (const auto& i : inc) e.preferred_slots.push_back(i.name);
        eqs.push_back(std::move(e));
    }

    if (eqs.size() != vars.size())
        throw UnsupportedComponent("equation/unknown count mismatch (unsupported topology)");

    // --- row matching ---
    std::map<std::string, std::size_t> slot_of;  // slot name -> equation index
    for (std::size_t e = 0; e < eqs.size(); ++e) {
        std::vector<bool> visited(eqs.size(), false);
        visited[e] = true;
        if (!assign_slots(e, eqs, slot_of, visited))
            throw UnsupportedComponent("no consistent row assignment for " + eqs[e].label);
    }

    // --- assemble ---
    DaeSystem dae;
    dae.vars = vars;
    const std::size_t n = vars.size();
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) {
        dae.names.push_back(vars[i].name);
        index[vars[i].name] = i;
        if (vars[i].differential) dae.n_diff = i + 1;
    }
    dae.mass = DenseMatrix(n, n);
    dae.stiffness = DenseMatrix(n, n);
    dae.row_equation.assign(n, "");
    for (const auto& [slot, e] : slot_of) {
        const std::size_t r = index.at(slot);
        dae.row_equation[r] = eqs[e].label;
        for (const auto& [name, val] : eqs[e].k) dae.stiffness(r, index.at(name)) += val;
        for (const auto& [name, val] : eqs[e].m) dae.mass(r, index.at(name)) += val;
        if (eqs[e].src_amplitude != 0.0)
            dae.sources.push_back({r, eqs[e].src_amplitude, eqs[e].src_omega});
    }
    dae.initial_state.assign(n, 0.0);

    dae.node_neighbors.assign(net.node_count + 1, {});
    for (const auto& c : net.components) {
        dae.node_neighbors[c.node_from].push_back(c.node_to);
        dae.node_neighbors[c.node_to].push_back(c.node_from);
    }
    return dae;
}

}  // namespace emtts
