#pragma once

#include <cstdint>
#include <random>

namespace spcvm {

// splitmix64 finalizer; the basis of all seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic combination of a seed with a stream index. Chained calls
// give the per-(phi, delta, replicate, field) streams and the per-(distance,
// r, s) MVN seeds; results do not depend on evaluation order.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ (0x9e3779b97f4a7c15ULL + index * 0xc2b2ae3d27d4eb4fULL));
}

// Standard-normal stream on top of mt19937_64 (whose output sequence is
// fixed by the standard) with inverse-CDF sampling, so draws are identical
// across platforms.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    // uniform in the open interval (0, 1)
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal();

private:
    std::mt19937_64 engine_;
};

} // namespace spcvm
