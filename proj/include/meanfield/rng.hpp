#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

namespace meanfield {

// Counter-based pseudorandom generator: Philox4x32-10.
// Every stream is a pure function of (seed, counter), so chains can be
// replayed bit-exactly and sub-streams derived by hashing never overlap
// with the main draw sequence.
inline constexpr const char* kRngAlgorithm = "philox4x32-10/box-muller";

inline std::array<std::uint32_t, 4> philox4x32_block(std::uint64_t key64,
                                                     std::uint64_t ctr_hi,
                                                     std::uint64_t ctr_lo) {
    auto mulhilo = [](std::uint32_t a, std::uint32_t b, std::uint32_t& hi) {
        std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        hi = static_cast<std::uint32_t>(p >> 32);
        return static_cast<std::uint32_t>(p);
    };
    std::uint32_t c0 = static_cast<std::uint32_t>(ctr_lo);
    std::uint32_t c1 = static_cast<std::uint32_t>(ctr_lo >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(ctr_hi);
    std::uint32_t c3 = static_cast<std::uint32_t>(ctr_hi >> 32);
    std::uint32_t k0 = static_cast<std::uint32_t>(key64);
    std::uint32_t k1 = static_cast<std::uint32_t>(key64 >> 32);
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, hi1;
        std::uint32_t lo0 = mulhilo(0xD2511F53u, c0, hi0);
        std::uint32_t lo1 = mulhilo(0xCD9E8D57u, c2, hi1);
        std::uint32_t n0 = hi1 ^ c1 ^ k0;
        std::uint32_t n1 = lo1;
        std::uint32_t n2 = hi0 ^ c3 ^ k1;
        std::uint32_t n3 = lo0;
        c0 = n0; c1 = n1; c2 = n2; c3 = n3;
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
    }
    return {c0, c1, c2, c3};
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : key_(seed) {}

    std::uint32_t next_u32() {
        if (pos_ == 4) {
            block_ = philox4x32_block(key_, 0, ctr_++);
            pos_ = 0;
        }
        return block_[pos_++];
    }

    std::uint64_t next_u64() {
        std::uint64_t lo = next_u32();
        std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform on (0, 1]: never returns 0, so log(u) is always finite.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the spare value is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    std::uint64_t seed() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Sub-seed for chain `index`: one Philox block keyed by the master seed in a
// dedicated counter plane, so derived seeds cannot collide with the draws of
// any Rng stream (those all use ctr_hi = 0).
inline std::uint64_t derive_subseed(std::uint64_t master_seed, std::uint64_t index) {
    auto b = philox4x32_block(master_seed, /*ctr_hi=*/0x5345454453554253ull, index);
    return (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
}

}  // namespace meanfield
