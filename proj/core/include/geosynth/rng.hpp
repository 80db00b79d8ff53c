#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace geosynth {

/// Seedable, splittable random stream.
///
/// The engine is `std::mt19937_64`, whose output sequence is fixed by the
/// C++ standard. Child streams are derived with the SplitMix64 finalizer
/// applied to (seed, stream id). All sampling helpers are implemented here
/// instead of using `<random>` distributions, whose outputs differ between
/// standard library vendors.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Seed of the child stream `stream` of `seed`.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);
    static std::uint64_t derive(std::uint64_t seed, std::string_view stream);

    /// Independent stream derived from this stream's seed (not its state).
    Rng split(std::uint64_t stream) const { return Rng(derive(seed_, stream)); }
    Rng split(std::string_view stream) const { return Rng(derive(seed_, stream)); }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n);

    /// Index drawn with probability proportional to `weights[i]`.
    /// Requires at least one strictly positive weight.
    std::size_t weighted(std::span<const double> weights);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace geosynth
