#include "causalseg/rng.hpp"

#include <cmath>

#include "causalseg/errors.hpp"

namespace causalseg {

uint64_t splitmix64(uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

uint64_t fnv1a64(std::string_view text) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

uint64_t derive_seed(uint64_t root, std::string_view purpose, uint64_t index) {
    uint64_t state = root ^ fnv1a64(purpose);
    state += index * 0x9E3779B97F4A7C15ULL;
    splitmix64(state);
    return splitmix64(state);
}

Rng::Rng(uint64_t seed) {
    uint64_t state = seed;
    gen_.seed(splitmix64(state));
}

double Rng::uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
    return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal(double mean, double sd) {
    if (has_spare_) {
        has_spare_ = false;
        return mean + sd * spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mean + sd * r * std::cos(theta);
}

uint64_t Rng::below(uint64_t n) {
    if (n == 0) throw ValidationError("Rng::below requires n > 0");
    const uint64_t limit = n * (UINT64_MAX / n);
    uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return x % n;
}

}  // namespace causalseg
