#include "fedmesh/rng.hpp"

#include "fedmesh/errors.hpp"

#include <cmath>

namespace fedmesh::sim {

double RngStream::uniform(double lo, double hi) {
    if (!(lo <= hi)) throw InvalidArgument("uniform: lo > hi");
    if (lo == hi) return lo;
    const double x = lo + (hi - lo) * next_unit();
    return x < hi ? x : std::nextafter(hi, lo);
}

std::uint64_t RngStream::below(std::uint64_t n) {
    if (n == 0) throw InvalidArgument("below: n must be positive");
    // Rejection sampling on the top of the range keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = gen_();
    } while (x >= limit);
    return x % n;
}

}  // namespace fedmesh::sim
