#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace riskmmd {

// splitmix64 finalizer, used to derive independent RNG substreams from a
// master seed plus a tuple of stream ids. Substream assignment is by logical
// index (candidate, rollout, step, ...), never by thread, so results do not
// depend on the parallel schedule.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> ids) {
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t id : ids) {
        h = splitmix64(h ^ (id + 0x9e3779b97f4a7c15ULL));
    }
    return h;
}

// Thin wrapper over mt19937_64 with the draw helpers used across the
// project. One instance per substream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double normal() { return normal_(eng_); }
    double uniform() { return uniform_(eng_); }  // [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double gamma(double shape) {
        std::gamma_distribution<double> g(shape, 1.0);
        return g(eng_);
    }

    // Beta(a, b) via two gamma draws.
    double beta(double a, double b) {
        double x = gamma(a);
        double y = gamma(b);
        double s = x + y;
        return s > 0.0 ? x / s : 0.5;
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace riskmmd
