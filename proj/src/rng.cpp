#include "fermicond/rng.hpp"

#include <cmath>
#include <numbers>

namespace fermicond {

Rng::Rng(std::uint64_t seed, std::initializer_list<std::int64_t> stream)
{
    init(seed, std::vector<std::int64_t>(stream));
}

Rng::Rng(std::uint64_t seed, const std::vector<std::int64_t>& stream) { init(seed, stream); }

void Rng::init(std::uint64_t seed, const std::vector<std::int64_t>& stream)
{
    std::vector<std::uint32_t> words;
    words.push_back(static_cast<std::uint32_t>(seed));
    words.push_back(static_cast<std::uint32_t>(seed >> 32));
    words.push_back(static_cast<std::uint32_t>(stream.size()));
    for (auto s : stream) {
        auto u = static_cast<std::uint64_t>(s);
        words.push_back(static_cast<std::uint32_t>(u));
        words.push_back(static_cast<std::uint32_t>(u >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    eng_.seed(seq);
}

double Rng::uniform()
{
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = 1.0 - uniform(); // (0,1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

double Rng::exponential(double rate)
{
    return -std::log(1.0 - uniform()) / rate;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    Rng r(master, {stream_tag::sample, static_cast<std::int64_t>(index)});
    return r.bits();
}

} // namespace fermicond
