#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sqp {

/// splitmix64 mixing step; used to derive independent seed streams.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for stream `stream` of a user-facing seed. Streams keep draws,
/// random pools etc. decorrelated while staying reproducible.
std::uint64_t seed_for(std::uint64_t seed, std::uint64_t stream);

/// mt19937_64 with rejection-sampled bounded draws, so sequences do not
/// depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n); unbiased via rejection.
    std::uint64_t bounded(std::uint64_t n);

    /// Uniform double in (0, 1).
    double uniform();

    /// Standard normal via Box-Muller on our own uniforms.
    double normal();

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[bounded(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sqp
