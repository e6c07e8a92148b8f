#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace causalseg {

// All randomness in the project flows from one root seed through named
// substreams. A substream is identified by (root, purpose, index):
//
//   state = root ^ fnv1a64(purpose); state += index * 0x9E3779B97F4A7C15
//   seed  = splitmix64(splitmix64(state))   -> seeds a std::mt19937_64
//
// Adding a new consumer (a new purpose tag) never perturbs existing streams.
// Distribution transforms are hand-rolled on top of the raw 64-bit output so
// sequences do not depend on the standard library's unspecified algorithms.

uint64_t splitmix64(uint64_t& state);
uint64_t fnv1a64(std::string_view text);
uint64_t derive_seed(uint64_t root, std::string_view purpose, uint64_t index = 0);

class Rng {
public:
    explicit Rng(uint64_t seed);

    static Rng substream(uint64_t root, std::string_view purpose, uint64_t index = 0) {
        return Rng(derive_seed(root, purpose, index));
    }

    uint64_t next_u64() { return gen_(); }

    // Uniform on [0,1), 53-bit resolution.
    double uniform();
    // Uniform on (0,1]; never zero, safe under log().
    double uniform_open();
    double uniform(double lo, double hi);

    // Box-Muller with a cached spare draw.
    double normal(double mean = 0.0, double sd = 1.0);

    bool bernoulli(double p) { return uniform() < p; }

    // Unbiased integer in [0, n) by rejection.
    uint64_t below(uint64_t n);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (size_t i = v.size() - 1; i > 0; --i) {
            const size_t j = static_cast<size_t>(below(i + 1));
            std::swap(v[i], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace causalseg
