#pragma once

#include <cstdint>
#include <cmath>
#include <array>
#include <string>
#include <sstream>
#include <stdexcept>

namespace tamp {

// Deterministic PRNG used everywhere randomness is needed (init, noise, pairing,
// mask strokes). xoshiro256** seeded through splitmix64; the state serializes to
// a plain string so checkpoints can snapshot it. Standard-library distributions
// are avoided on purpose: their output is implementation-defined and would break
// byte-for-byte reproducibility of artifacts.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& s : state_) {
            // splitmix64
            x += 0x9E3779B97F4A7C15ULL;
            uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            s = z ^ (z >> 31);
        }
    }

    uint64_t next_u64() {
        auto rotl = [](uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    float uniformf(float lo, float hi) {
        return lo + static_cast<float>(uniform()) * (hi - lo);
    }

    // uniform integer in [0, n)
    int uniform_int(int n) {
        if (n <= 0) throw std::invalid_argument("Rng::uniform_int: n must be positive");
        return static_cast<int>(uniform() * static_cast<double>(n));
    }

    // standard normal via Box-Muller (no cached spare, keeps state minimal)
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    float normalf() { return static_cast<float>(normal()); }

    // Derive an independent stream, e.g. one per sample or per branch.
    Rng fork(uint64_t stream_id) {
        Rng child(next_u64() ^ (stream_id * 0x9E3779B97F4A7C15ULL));
        return child;
    }

    std::string state_string() const {
        std::ostringstream os;
        os << state_[0] << ' ' << state_[1] << ' ' << state_[2] << ' ' << state_[3];
        return os.str();
    }

    void set_state(const std::string& s) {
        std::istringstream is(s);
        for (auto& v : state_) {
            if (!(is >> v)) throw std::invalid_argument("Rng::set_state: malformed state string");
        }
    }

private:
    std::array<uint64_t, 4> state_{};
};

}  // namespace tamp
