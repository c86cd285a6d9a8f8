#include "emtts/partition.hpp"

#include <algorithm>
#include <set>

namespace emtts {

namespace {

DenseMatrix submatrix(const DenseMatrix& H, const IndexSet& rows, const IndexSet& cols) {
    DenseMatrix s(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) s(i, j) = H(rows[i], cols[j]);
    return s;
}

IndexSet external_set(const DenseMatrix& H, const IndexSet& w) {
    std::set<std::size_t> inside(w.begin(), w.end());
    std::set<std::size_t> ext;
    for (std::size_t k : w)
        for (std::size_t j = 0; j < H.cols(); ++j)
            if (H(k, j) != 0.0 && !inside.count(j)) ext.insert(j);
    return IndexSet(ext.begin(), ext.end());
}

LuSolver factor_subdomain(const DenseMatrix& H, const IndexSet& w, const char* which) {
    try {
        return LuSolver(submatrix(H, w, w));
    } catch (const SingularMatrix& e) {
        throw SingularSubdomain(std::string("subdomain ") + which + ": " + e.what());
    }
}

}  // namespace

Partition make_partition(const DenseMatrix& H, IndexSet w1, IndexSet w2,
                         std::vector<bool> owned1, int overlap_tag) {
    std::sort(w1.begin(), w1.end());
    std::sort(w2.begin(), w2.end());
    if (w1.empty() || w2.empty()) throw Error("partition: both subdomains must be non-empty");

    const std::size_t n = H.rows();
    if (owned1.size() != n) throw Error("partition: owner mask dimension mismatch");
    std::set<std::size_t> s1(w1.begin(), w1.end()), s2(w2.begin(), w2.end());
    for (std::size_t i = 0; i < n; ++i) {
        if (!s1.count(i) && !s2.count(i))
            throw Error("partition: index " + std::to_string(i) + " uncovered");
        if ((owned1[i] && !s1.count(i)) || (!owned1[i] && !s2.count(i)))
            throw Error("partition: writer outside its subdomain");
    }

    IndexSet ext1 = external_set(H, w1);
    IndexSet ext2 = external_set(H, w2);
    LuSolver a1 = factor_subdomain(H, w1, "1");
    LuSolver a2 = factor_subdomain(H, w2, "2");
    DenseMatrix e1 = submatrix(H, w1, ext1);
    DenseMatrix e2 = submatrix(H, w2, ext2);
    const bool decoupled = ext1.empty() && ext2.empty();

    return Partition{std::move(w1),  std::move(w2),  std::move(ext1), std::move(ext2),
                     std::move(owned1), overlap_tag,  decoupled,
                     std::move(a1),  std::move(a2),  std::move(e1),   std::move(e2)};
}

std::pair<IndexSet, IndexSet> grown_sets(const IndexSet& w1_base, int overlap,
                                         const DaeSystem& dae) {
    const std::size_t n = dae.size();
    std::set<std::size_t> s1(w1_base.begin(), w1_base.end());
    std::set<std::size_t> s2;
    for (std::size_t i = 0; i < n; ++i)
        if (!s1.count(i)) s2.insert(i);

    auto grow = [&](std::set<std::size_t>& s) {
        for (int layer = 0; layer < overlap; ++layer) {
            std::set<int> nodes;
            for (std::size_t i : s)
                if (dae.vars[i].kind == VarKind::Voltage) nodes.insert(dae.vars[i].node);
            std::set<int> fresh;
            for (int nd : nodes)
                for (int nb : dae.node_neighbors[nd])
                    if (!nodes.count(nb)) fresh.insert(nb);
            for (std::size_t i = 0; i < n; ++i)
                if (dae.vars[i].kind == VarKind::Voltage && fresh.count(dae.vars[i].node))
                    s.insert(i);
        }
    };
    grow(s1);
    grow(s2);
    return {IndexSet(s1.begin(), s1.end()), IndexSet(s2.begin(), s2.end())};
}

Partition partition_by_sets(const DenseMatrix& H, const IndexSet& w1_base, int overlap,
                            const DaeSystem& dae) {
    if (w1_base.empty()) throw Error("partition: W1 must be non-empty");
    if (w1_base.size() >= dae.size()) throw Error("partition: W1 must be a proper subset");
    auto grown = grown_sets(w1_base, overlap, dae);
    std::vector<bool> owned1(dae.size(), false);
    for (std::size_t i : w1_base) owned1[i] = true;
    return make_partition(H, std::move(grown.first), std::move(grown.second),
                          std::move(owned1), overlap);
}

IndexSet default_circuit_split(const DaeSystem& dae) {
    IndexSet w1;
    for (const char* name : {"v1", "v2", "v3", "v4", "i12", "i23", "i45"})
        w1.push_back(dae.index_of(name));
    std::sort(w1.begin(), w1.end());
    return w1;
}

Partition replicate_partition(const DenseMatrix& block, const IndexSet& w1_base,
                              const std::pair<IndexSet, IndexSet>& grown, std::size_t n,
                              std::size_t copies, int overlap_tag) {
    IndexSet w1, w2;
    std::vector<bool> owned1(n * copies, false);
    for (std::size_t c = 0; c < copies; ++c) {
        for (std::size_t i : grown.first) w1.push_back(i + c * n);
        for (std::size_t i : grown.second) w2.push_back(i + c * n);
        for (std::size_t i : w1_base) owned1[i + c * n] = true;
    }
    return make_partition(block, std::move(w1), std::move(w2), std::move(owned1), overlap_tag);
}

}  // namespace emtts
