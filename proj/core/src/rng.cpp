#include "veason/rng.hpp"

#include <cmath>
#include <numbers>

#include "veason/errors.hpp"

namespace veason {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

Rng Rng::stream(std::uint64_t seed, std::string_view name, std::uint64_t index) {
    std::uint64_t s = seed;
    s = splitmix64(s) ^ fnv1a(name);
    s = splitmix64(s) ^ index;
    splitmix64(s);
    return Rng(s);
}

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_range(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

std::uint64_t Rng::next_below(std::uint64_t bound) {
    if (bound == 0) throw ValidationError("Rng::next_below: bound must be > 0");
    using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((u128(next_u64()) * u128(bound)) >> 64);
}

double Rng::next_normal() {
    double u1 = 1.0 - next_double();  // (0, 1]
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace veason
