#pragma once

#include <vector>

#include "emtts/linalg.hpp"
#include "emtts/partition.hpp"

namespace emtts {

enum class SchwarzMode { Additive, Multiplicative };

struct SchwarzConfig {
    SchwarzMode mode = SchwarzMode::Additive;
    int max_iterations = 20;
    double stagnation_tol = 1e-13;  // relative, on interface differences
    bool record_full = false;
};

/// Interface values per iterate: the stacked (x at ext1, x at ext2) vector.
struct SchwarzTrace {
    std::vector<Vector> interface_values;
    std::vector<Vector> full_iterates;  // populated when record_full
};

struct ErrorOperator {
    enum class Space { Full, Trace };
    DenseMatrix P;
    Space space = Space::Full;
    int rank = -1;              // trace space: retained rank of the difference matrix
    bool rank_deficient = false;
};

/// One Schwarz sweep for H x = b from iterate x. Additive: both subdomains
/// consume iterate data; multiplicative: subdomain 2 consumes subdomain 1's
/// fresh values.
Vector schwarz_sweep(const Partition& part, const Vector& b, const Vector& x,
                     SchwarzMode mode);

/// Runs sweeps until max iterations or interface stagnation. Returns the
/// iterates (w_start first) and the recorded interface trace.
std::pair<std::vector<Vector>, SchwarzTrace> ras_iterate(const Partition& part,
                                                         const Vector& b,
                                                         const Vector& w_start,
                                                         const SchwarzConfig& cfg);

/// Full-space error operator: one sweep maps error e to P e. Additive form is
/// P = -[R~1^T A1^{-1} E1 R1e + R~2^T A2^{-1} E2 R2e]; the multiplicative form
/// is composed operationally.
ErrorOperator exact_error_operator(const Partition& part,
                                   SchwarzMode mode = SchwarzMode::Additive);

/// Trace-space operator from iterated transmission conditions: least-squares
/// solution of P [d^0 ... d^{q-1}] = [d^1 ... d^q] on the subspace actually
/// spanned by the differences (identity on the complement). Raises
/// RankDeficientTrace when fewer than three iterates or fully stagnant.
ErrorOperator numeric_error_operator(const SchwarzTrace& trace);
ErrorOperator numeric_error_operator(const std::vector<Vector>& iterates);

/// x_inf = (I - P)^{-1} (x1 - P x0). Raises UnitEigenvalue when I - P is singular.
Vector aitken_accelerate(const ErrorOperator& op, const Vector& x0, const Vector& x1);

struct SpectrumReport {
    std::vector<Complex> eigenvalues;  // descending modulus
    bool divergent = false;            // max modulus > 1
};

SpectrumReport spectrum_report(const ErrorOperator& op);

}  // namespace emtts
