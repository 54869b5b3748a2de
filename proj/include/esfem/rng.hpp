#pragma once

#include <cstdint>

namespace esfem {

///
/// Counter-based generator: draw k of stream s is splitmix64(seed, s, k), so results do not
/// depend on how many other draws happened elsewhere.
///
class CounterRng
{
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : m_seed(seed)
        , m_stream(stream)
    {}

    std::uint64_t next_u64() { return at(m_counter++); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (uses two draws).
    double normal();

    std::uint64_t at(std::uint64_t counter) const;

private:
    std::uint64_t m_seed;
    std::uint64_t m_stream;
    std::uint64_t m_counter = 0;
};

} // namespace esfem
