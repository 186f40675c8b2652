#pragma once

#include <cstdint>
#include <random>

namespace bidask {

// Derives a stream-specific seed from a master seed so that independent
// shock processes (price noise, the two spread components, Monte Carlo
// shards, ...) never share a generator state. splitmix64 is the usual
// finalizer for this: a single pass decorrelates adjacent stream ids.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Standard-normal stream: mt19937_64 behind std::normal_distribution.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double operator()() { return normal_(engine_); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// The three independent shocks (dz, du, dv) used by one stochastic
// trajectory, each on its own derived stream.
struct ShockStreams {
    NormalStream z;
    NormalStream u;
    NormalStream v;

    explicit ShockStreams(std::uint64_t master)
        : z(derive_seed(master, 0)),
          u(derive_seed(master, 1)),
          v(derive_seed(master, 2)) {}
};

} // namespace bidask
