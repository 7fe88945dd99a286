#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fermicrit {

// Deterministic normal/uniform generator. Box-Muller on top of mt19937_64 so
// the stream does not depend on the standard library's distribution
// implementation; runs with the same seed are bitwise reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {
        // 53-bit mantissa uniform in [0,1)
        return (eng_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace fermicrit
