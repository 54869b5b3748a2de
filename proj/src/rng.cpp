#include <esfem/rng.hpp>

#include <cmath>
#include <numbers>

namespace esfem {

namespace {

std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t CounterRng::at(std::uint64_t counter) const
{
    return splitmix64(splitmix64(splitmix64(m_seed) ^ m_stream) ^ counter);
}

double CounterRng::normal()
{
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace esfem
