#include "vmp/partition.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "vmp/rng.hpp"

namespace vmp {

PartitionPlan make_partition(int n, int m, std::uint64_t seed) {
    if (n < 2) throw EmptyInput("make_partition: need at least 2 observations");
    if (m < 1 || m > n / 2)
        throw InvalidGroupCount("make_partition: group count " + std::to_string(m) +
                                " outside [1, " + std::to_string(n / 2) + "]");
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    auto eng = make_engine(seed);
    std::shuffle(idx.begin(), idx.end(), eng);

    PartitionPlan plan;
    plan.n = n;
    plan.groups.resize(m);
    const int base = n / m;
    const int leftover = n % m;
    int pos = 0;
    for (int g = 0; g < m; ++g) {
        const int size = base + (g < leftover ? 1 : 0);
        plan.groups[g].assign(idx.begin() + pos, idx.begin() + pos + size);
        pos += size;
    }
    return plan;
}

}  // namespace vmp
