#pragma once

#include "shortform/regress.hpp"

#include <cstdint>
#include <vector>

namespace shortform {

struct SearchBudget {
    // Largest predictor pool accepted at all; beyond this the search refuses
    // rather than silently degrading.
    int exact_limit = 77;
    // Cap on branch-and-bound nodes, split evenly across subtree tasks.
    // 0 means unlimited.
    std::uint64_t node_limit = 0;
    // Worker threads; results are identical for any value.
    int parallel_chunks = 1;
};

struct SubsetResult {
    int size = 0;
    std::vector<int> items;  // pool column indices, ascending
    double rss = 0.0;
    FitResult fit;
};

struct BestSubsetsResult {
    std::vector<SubsetResult> by_size;  // entry k-1 holds the size-k optimum
    std::uint64_t nodes = 0;
    bool bound_exceeded = false;
};

struct ExhaustiveResult {
    SubsetResult best;
    std::uint64_t candidates = 0;
};

// For every size 1..k_max, the subset of pool columns minimizing the OLS
// residual sum of squares, found by branch and bound with the monotone bound
// RSS(superset) <= RSS(subset). Exact ties go to the lexicographically
// smallest index sequence. When the node budget runs out the result is
// flagged bound_exceeded and must not be read as proven-optimal.
BestSubsetsResult best_subsets(const DesignMatrix& pool, int k_max,
                               const SearchBudget& budget = {});

// Literal enumeration of every size-k subset, used as the reference oracle.
// Refuses when C(p, size) exceeds candidate_cap.
ExhaustiveResult enumerate_exhaustive(const DesignMatrix& pool, int size,
                                      std::uint64_t candidate_cap = 2000000);

}  // namespace shortform
