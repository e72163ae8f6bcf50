#pragma once

// Deterministic random streams. std::mt19937_64 is fully specified by the
// standard; the distribution helpers here are hand-rolled because the
// std::*_distribution classes are implementation-defined and would break
// byte-identical reruns across toolchains.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace lpi {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Derives a stream seed from a base seed and a tag path, e.g.
// derive_seed(seed, {sweep_idx, seed_idx, iter, purpose}).
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = splitmix64(base);
    for (auto t : tags) s = splitmix64(s ^ splitmix64(t + 0x632be59bd9b4e019ull));
    return s;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    // uniform in [0, 1) with 53 random bits
    double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // index in [0, k) from an unnormalized nonnegative weight vector
    int categorical(const double* w, int k) {
        double total = 0.0;
        for (int i = 0; i < k; ++i) total += w[i];
        if (!(total > 0.0)) throw std::runtime_error("categorical: nonpositive total weight");
        double u = uniform() * total;
        double acc = 0.0;
        for (int i = 0; i < k; ++i) {
            acc += w[i];
            if (u < acc) return i;
        }
        return k - 1;  // guard against rounding at the top end
    }

    int categorical(const std::vector<double>& w) {
        return categorical(w.data(), int(w.size()));
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace lpi
