#pragma once

#include <cstdint>
#include <vector>

#include "vmp/errors.hpp"

namespace vmp {

/// Disjoint grouping of observation indices 0..n-1.
struct PartitionPlan {
    std::vector<std::vector<int>> groups;
    int n = 0;

    [[nodiscard]] int group_count() const { return static_cast<int>(groups.size()); }
};

/// Random partition of n observations into m groups of near-equal size.
/// Indices are shuffled with a seeded engine; the n mod m leftover indices are
/// spread one per group over the first groups. Requires 1 <= m <= n/2.
[[nodiscard]] PartitionPlan make_partition(int n, int m, std::uint64_t seed);

}  // namespace vmp
