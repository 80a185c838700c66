#pragma once

#include <cstdint>
#include <string_view>

namespace veason {

// splitmix64 generator with named sub-streams. Every consumer derives its own
// stream from (seed, name, index), so results never depend on the order in
// which independent pieces of work are executed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static Rng stream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

    std::uint64_t next_u64();

    // uniform in [0, 1)
    double next_double();

    // uniform in [lo, hi)
    double next_range(double lo, double hi);

    // uniform in [0, bound); bound must be > 0
    std::uint64_t next_below(std::uint64_t bound);

    // standard normal via Box-Muller
    double next_normal();

private:
    std::uint64_t state_;
};

}  // namespace veason
