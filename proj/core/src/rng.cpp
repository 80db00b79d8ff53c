#include "geosynth/rng.hpp"

#include <stdexcept>

namespace geosynth {

namespace {

    std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

} // namespace

Rng::Rng(std::uint64_t seed)
    : seed_(seed)
    , engine_(splitmix64(seed))
{
}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream)
{
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

std::uint64_t Rng::derive(std::uint64_t seed, std::string_view stream)
{
    // FNV-1a folds the tag into a stream id.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : stream) {
        h = (h ^ c) * 0x100000001b3ULL;
    }
    return derive(seed, h);
}

double Rng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n)
{
    if (n == 0) {
        throw std::invalid_argument("Rng::below: empty range");
    }
    // Rejection sampling on the top of the range keeps the result unbiased.
    const std::uint64_t limit = ~std::uint64_t { 0 } - (~std::uint64_t { 0 } % n);
    std::uint64_t x = engine_();
    while (x >= limit) {
        x = engine_();
    }
    return x % n;
}

std::size_t Rng::weighted(std::span<const double> weights)
{
    double total = 0.0;
    for (double w : weights) {
        if (w > 0.0) {
            total += w;
        }
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("Rng::weighted: no positive weight");
    }
    const double target = uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) {
            acc += weights[i];
            last_positive = i;
            if (target < acc) {
                return i;
            }
        }
    }
    return last_positive;
}

} // namespace geosynth
