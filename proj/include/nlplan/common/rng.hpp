#ifndef NLPLAN_COMMON_RNG_HPP
#define NLPLAN_COMMON_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "nlplan/common/error.hpp"

namespace nlplan {

/// Deterministic RNG. std::mt19937_64 has a fully specified bit stream; the
/// distributions below are hand-rolled because the standard library ones are
/// implementation-defined and would break byte-identical reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [lo, hi], inclusive.
    int uniform_int(int lo, int hi) {
        if (hi < lo) throw InternalError("Rng::uniform_int: empty range");
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next() % span);
    }

    /// Uniform real in [0, 1).
    double uniform() {
        return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
    }

    /// Normal via Box-Muller.
    double gauss(double mean, double sd) {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 5e-324;
        return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    bool chance(double p) { return uniform() < p; }

    template <typename T>
    const T& pick(const std::vector<T>& items) {
        if (items.empty()) throw InternalError("Rng::pick: empty vector");
        return items[static_cast<std::size_t>(uniform_int(0, static_cast<int>(items.size()) - 1))];
    }

    /// Weighted index draw; weights need not be normalized.
    std::size_t pick_weighted(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (total <= 0.0) throw InternalError("Rng::pick_weighted: nonpositive total weight");
        double r = uniform() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            r -= weights[i];
            if (r < 0.0) return i;
        }
        return weights.size() - 1;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace nlplan

#endif
