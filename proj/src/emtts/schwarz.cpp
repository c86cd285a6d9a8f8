#include "emtts/schwarz.hpp"

#include <algorithm>
#include <cmath>

namespace emtts {

namespace {

Vector gather(const Vector& x, const IndexSet& idx) {
    Vector g(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) g[i] = x[idx[i]];
    return g;
}

Vector interface_of(const Partition& part, const Vector& x) {
    Vector v;
    v.reserve(part.ext1.size() + part.ext2.size());
    for (std::size_t i : part.ext1) v.push_back(x[i]);
    for (std::size_t i : part.ext2) v.push_back(x[i]);
    return v;
}

Vector subdomain_solve(const LuSolver& a, const DenseMatrix& e, const Vector& b,
                       const IndexSet& w, const IndexSet& ext, const Vector& x) {
    Vector rhs = gather(b, w);
    if (!ext.empty()) {
        const Vector xe = gather(x, ext);
        const Vector exe = e.apply(xe);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= exe[i];
    }
    a.solve_in_place(rhs);
    return rhs;
}

}  // namespace

Vector schwarz_sweep(const Partition& part, const Vector& b, const Vector& x,
                     SchwarzMode mode) {
    Vector out = x;
    const Vector x1 = subdomain_solve(part.a1, part.e1, b, part.w1, part.ext1, x);
    if (mode == SchwarzMode::Additive) {
        const Vector x2 = subdomain_solve(part.a2, part.e2, b, part.w2, part.ext2, x);
        for (std::size_t l = 0; l < part.w1.size(); ++l)
            if (part.owned1[part.w1[l]]) out[part.w1[l]] = x1[l];
        for (std::size_t l = 0; l < part.w2.size(); ++l)
            if (!part.owned1[part.w2[l]]) out[part.w2[l]] = x2[l];
    } else {
        Vector work = x;
        for (std::size_t l = 0; l < part.w1.size(); ++l)
            if (part.owned1[part.w1[l]]) work[part.w1[l]] = x1[l];
        const Vector x2 = subdomain_solve(part.a2, part.e2, b, part.w2, part.ext2, work);
        out = work;
        for (std::size_t l = 0; l < part.w2.size(); ++l)
            if (!part.owned1[part.w2[l]]) out[part.w2[l]] = x2[l];
    }
    return out;
}

std::pair<std::vector<Vector>, SchwarzTrace> ras_iterate(const Partition& part,
                                                         const Vector& b,
                                                         const Vector& w_start,
                                                         const SchwarzConfig& cfg) {
    if (cfg.max_iterations < 2) throw Error("schwarz: max iterations must be >= 2");
    std::vector<Vector> iterates{w_start};
    SchwarzTrace trace;
    trace.interface_values.push_back(interface_of(part, w_start));
    if (cfg.record_full) trace.full_iterates.push_back(w_start);

    Vector x = w_start;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        Vector x_new = schwarz_sweep(part, b, x, cfg.mode);
        iterates.push_back(x_new);
        Vector iface = interface_of(part, x_new);
        const Vector& prev = trace.interface_values.back();
        double diff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < iface.size(); ++i) {
            diff = std::max(diff, std::abs(iface[i] - prev[i]));
            scale = std::max(scale, std::abs(iface[i]));
        }
        trace.interface_values.push_back(std::move(iface));
        if (cfg.record_full) trace.full_iterates.push_back(x_new);
        x = std::move(x_new);
        if (diff <= cfg.stagnation_tol * (1.0 + scale)) break;
        if (part.decoupled) break;  // exact after one sweep
    }
    return {std::move(iterates), std::move(trace)};
}

ErrorOperator exact_error_operator(const Partition& part, SchwarzMode mode) {
    const std::size_t n = part.size();
    ErrorOperator op;
    op.space = ErrorOperator::Space::Full;
    op.P = DenseMatrix(n, n);
    if (mode == SchwarzMode::Additive) {
        // P = -[R~1^T A1^{-1} E1 R1e + R~2^T A2^{-1} E2 R2e]
        const DenseMatrix x1 = part.a1.solve(part.e1);
        const DenseMatrix x2 = part.a2.solve(part.e2);
        for (std::size_t l = 0; l < part.w1.size(); ++l)
            if (part.owned1[part.w1[l]])
                for (std::size_t j = 0; j < part.ext1.size(); ++j)
                    op.P(part.w1[l], part.ext1[j]) -= x1(l, j);
        for (std::size_t l = 0; l < part.w2.size(); ++l)
            if (!part.owned1[part.w2[l]])
                for (std::size_t j = 0; j < part.ext2.size(); ++j)
                    op.P(part.w2[l], part.ext2[j]) -= x2(l, j);
    } else {
        // column-probe one multiplicative sweep of the homogeneous system
        const Vector zero(n, 0.0);
        Vector e(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            e[j] = 1.0;
            const Vector col = schwarz_sweep(part, zero, e, SchwarzMode::Multiplicative);
            for (std::size_t i = 0; i < n; ++i) op.P(i, j) = col[i];
            e[j] = 0.0;
        }
    }
    return op;
}

namespace {

// One-sided Jacobi SVD: returns left singular vectors and singular values of
// a (columns rotated until mutually orthogonal).
void jacobi_svd(DenseMatrix a, DenseMatrix& u, Vector& sigma) {
    const std::size_t m = a.rows(), k = a.cols();
    const double eps = 1e-15;
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < k; ++p)
            for (std::size_t q = p + 1; q < k; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += a(i, p) * a(i, p);
                    beta += a(i, q) * a(i, q);
                    gamma += a(i, p) * a(i, q);
                }
                if (std::abs(gamma) <= eps * std::sqrt(alpha * beta) || gamma == 0.0) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t), s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double ap = a(i, p), aq = a(i, q);
                    a(i, p) = c * ap - s * aq;
                    a(i, q) = s * ap + c * aq;
                }
            }
        if (!rotated) break;
    }
    struct Col { double norm; std::size_t idx; };
    std::vector<Col> cols(k);
    for (std::size_t j = 0; j < k; ++j) {
        double nrm = 0.0;
        for (std::size_t i = 0; i < m; ++i) nrm += a(i, j) * a(i, j);
        cols[j] = {std::sqrt(nrm), j};
    }
    std::sort(cols.begin(), cols.end(), [](const Col& x, const Col& y) { return x.norm > y.norm; });
    u = DenseMatrix(m, k);
    sigma.assign(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        sigma[j] = cols[j].norm;
        if (sigma[j] > 0.0)
            for (std::size_t i = 0; i < m; ++i) u(i, j) = a(i, cols[j].idx) / sigma[j];
    }
}

}  // namespace

ErrorOperator numeric_error_operator(const std::vector<Vector>& iterates) {
    if (iterates.size() < 3)
        throw RankDeficientTrace("need at least three iterates to form two differences");
    const std::size_t q = iterates.front().size();
    const std::size_t nd = iterates.size() - 1;

    DenseMatrix diffs(q, nd);
    double iterate_scale = 0.0, diff_scale = 0.0;
    for (std::size_t j = 0; j < nd; ++j)
        for (std::size_t i = 0; i < q; ++i) {
            diffs(i, j) = iterates[j + 1][i] - iterates[j][i];
            diff_scale = std::max(diff_scale, std::abs(diffs(i, j)));
            iterate_scale = std::max(iterate_scale, std::abs(iterates[j][i]));
        }
    if (diff_scale <= 1e-15 * (1.0 + iterate_scale))
        throw RankDeficientTrace("trace stagnated; differences are at machine level");

    // basis of the subspace spanned by d^0 .. d^{nd-2}
    DenseMatrix d0(q, nd - 1), d1(q, nd - 1);
    for (std::size_t j = 0; j + 1 < nd; ++j)
        for (std::size_t i = 0; i < q; ++i) {
            d0(i, j) = diffs(i, j);
            d1(i, j) = diffs(i, j + 1);
        }
    DenseMatrix u;
    Vector sigma;
    jacobi_svd(d0, u, sigma);
    std::size_t rank = 0;
    for (std::size_t j = 0; j < sigma.size(); ++j)
        if (sigma[j] > sigma[0] * 1e-12) ++rank;
    if (rank == 0) throw RankDeficientTrace("difference matrix has no numeric rank");

    DenseMatrix ur(q, rank);
    for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = 0; j < rank; ++j) ur(i, j) = u(i, j);

    // least squares P_r (U^T d0) = (U^T d1) via normal equations; U^T d0 has
    // full row rank by construction of the basis
    const DenseMatrix urt = ur.transpose();
    const DenseMatrix a = urt * d0;
    const DenseMatrix b = urt * d1;
    const DenseMatrix at = a.transpose();
    const DenseMatrix aat = a * at;
    LuSolver gram(aat);
    const DenseMatrix pr_t = gram.solve((b * at).transpose());  // solves (A A^T) X^T = (B A^T)^T
    const DenseMatrix pr = pr_t.transpose();

    ErrorOperator op;
    op.space = ErrorOperator::Space::Trace;
    op.rank = static_cast<int>(rank);
    op.rank_deficient = rank < q;
    op.P = ur * (pr * urt);
    return op;
}

ErrorOperator numeric_error_operator(const SchwarzTrace& trace) {
    return numeric_error_operator(trace.interface_values);
}

Vector aitken_accelerate(const ErrorOperator& op, const Vector& x0, const Vector& x1) {
    const std::size_t n = op.P.rows();
    DenseMatrix imp = DenseMatrix::identity(n) - op.P;
    Vector rhs = op.P.apply(x0);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = x1[i] - rhs[i];
    try {
        return LuSolver(std::move(imp)).solve(rhs);
    } catch (const SingularMatrix&) {
        throw UnitEigenvalue("I - P is singular; Aitken's formula not applicable");
    }
}

SpectrumReport spectrum_report(const ErrorOperator& op) {
    SpectrumReport rep;
    rep.eigenvalues = eigenvalues(op.P);
    rep.divergent = !rep.eigenvalues.empty() && std::abs(rep.eigenvalues.front()) > 1.0;
    return rep;
}

}  // namespace emtts
