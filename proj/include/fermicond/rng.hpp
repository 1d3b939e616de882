#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace fermicond {

// mt19937_64 seeded through std::seed_seq from (master seed, stream words).
// Both engine and seed_seq are fully specified by the standard, and the
// conversions below avoid the implementation-defined std distributions,
// so draws are identical across platforms.
//
// Stream rule: every consumer passes a tag word plus its own index words
// (site coordinates, bond coordinates, sample index, path index, ...).
class Rng {
public:
    Rng(std::uint64_t seed, std::initializer_list<std::int64_t> stream);
    Rng(std::uint64_t seed, const std::vector<std::int64_t>& stream);

    std::uint64_t bits() { return eng_(); }
    double uniform(); // [0,1)
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    double normal();
    double exponential(double rate);

private:
    void init(std::uint64_t seed, const std::vector<std::int64_t>& stream);
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// seed for the i-th child of a master seed (disorder samples, paths, ...)
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

namespace stream_tag {
constexpr std::int64_t site_potential = 1;
constexpr std::int64_t bond_hopping = 2;
constexpr std::int64_t sample = 3;
constexpr std::int64_t brownian = 4;
constexpr std::int64_t big_jumps = 5;
constexpr std::int64_t small_jumps = 6;
constexpr std::int64_t test_data = 7;
constexpr std::int64_t battery = 8; // random observables and pulses of the check battery
}

} // namespace fermicond
