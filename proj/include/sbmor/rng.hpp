#pragma once

#include <cmath>
#include <cstdint>

namespace sbmor {

/// Counter-based random stream: every draw is a pure function of
/// (seed, path, step, slot), so results do not depend on evaluation
/// order or thread count.
///
/// The mixer is three chained rounds of the splitmix64 finalizer with
/// distinct odd multipliers per coordinate.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t word(std::uint64_t path, std::uint64_t step,
                       std::uint64_t slot) const {
        std::uint64_t h = mix(seed_ ^ 0x8e9fbc119d7c3d4bULL);
        h = mix(h ^ ((path + 1) * 0x9e3779b97f4a7c15ULL));
        h = mix(h ^ ((step + 1) * 0xbf58476d1ce4e5b9ULL));
        h = mix(h ^ ((slot + 1) * 0x94d049bb133111ebULL));
        return h;
    }

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    double uniform(std::uint64_t path, std::uint64_t step,
                   std::uint64_t slot) const {
        return (static_cast<double>(word(path, step, slot) >> 11) + 0.5) *
               0x1.0p-53;
    }

    /// Standard normal via Box-Muller; consumes slots (2k, 2k+1) for the
    /// k-th normal of a (path, step) cell.
    double normal(std::uint64_t path, std::uint64_t step,
                  std::uint64_t pair_index) const {
        const double u1 = uniform(path, step, 2 * pair_index);
        const double u2 = uniform(path, step, 2 * pair_index + 1);
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

  private:
    std::uint64_t seed_;
};

} // namespace sbmor
