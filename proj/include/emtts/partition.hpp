#pragma once

#include <optional>
#include <vector>

#include "emtts/circuit.hpp"
#include "emtts/linalg.hpp"

namespace emtts {

using IndexSet = std::vector<std::size_t>;

/// Two-subdomain splitting of a square system with all restriction machinery
/// materialized. w1/w2 may overlap; every index is written by exactly one
/// subdomain (its pre-overlap owner), so the partition-of-unity identity
/// R~1^T R1 + R~2^T R2 = I holds by construction.
struct Partition {
    IndexSet w1, w2;           // sorted, including overlap
    IndexSet ext1, ext2;       // external dependencies (columns coupling in)
    std::vector<bool> owned1;  // owned1[i]: global index i written by subdomain 1
    int overlap = 0;
    bool decoupled = false;    // both external sets empty

    LuSolver a1, a2;           // factorized R_i H R_i^T
    DenseMatrix e1, e2;        // H[w_i, ext_i]

    std::size_t size() const { return owned1.size(); }
};

/// Core constructor from explicit (possibly overlapping) index sets; owners
/// must cover every index exactly once and satisfy owner set subset of w_i.
Partition make_partition(const DenseMatrix& H, IndexSet w1, IndexSet w2,
                         std::vector<bool> owned1, int overlap_tag = 0);

/// Builds the partition from a base (disjoint-complement) W1 and an overlap
/// depth. Overlap layers grow along circuit connectivity: each layer adds the
/// node voltages adjacent, via a branch, to the subdomain's node set. Writers
/// stay with the base split.
Partition partition_by_sets(const DenseMatrix& H, const IndexSet& w1_base, int overlap,
                            const DaeSystem& dae);

/// The grown (w1, w2) index sets that partition_by_sets uses.
std::pair<IndexSet, IndexSet> grown_sets(const IndexSet& w1_base, int overlap,
                                         const DaeSystem& dae);

/// The built-in split of the reference circuit: the source-side subdomain
/// {v1, v2, v3, v4, i12, i23, i45}.
IndexSet default_circuit_split(const DaeSystem& dae);

/// Replicates a partitioning of an n-dim system across the `copies` stacked
/// copies of a block system (for per-harmonic phasor blocks), keeping the
/// same per-copy membership, and builds the partition of `block`.
Partition replicate_partition(const DenseMatrix& block, const IndexSet& w1_base,
                              const std::pair<IndexSet, IndexSet>& grown, std::size_t n,
                              std::size_t copies, int overlap_tag = 0);

}  // namespace emtts
