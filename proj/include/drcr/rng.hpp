#pragma once

// Counter-based random numbers (Philox-4x32-10). A stream is identified by a
// 64-bit key plus a 64-bit stream id; draw i of a stream is a pure function
// of (key, stream, i), so replications can run in any order or in parallel
// and still see the same numbers.

#include <array>
#include <cstdint>
#include <string_view>

namespace drcr::rng {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// splitmix64 finalizer; used to derive stream ids from structured keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// FNV-1a, for turning purpose tags ("covariates", "noise", ...) into ids.
constexpr std::uint64_t tag_hash(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t stream_id) noexcept : seed_(seed), stream_(stream_id) {}

    /// Stream keyed by (seed, a, b, purpose).
    static Stream derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::string_view purpose) noexcept {
        return Stream(seed, mix64(mix64(mix64(a) ^ b) ^ tag_hash(purpose)));
    }

    std::uint64_t next_u64() noexcept;
    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() noexcept;
    /// Standard normal by inverse CDF (one uniform per draw).
    double normal() noexcept;
    /// Student-t with `dof` degrees of freedom: Z / sqrt(chi2_dof / dof).
    double student_t(int dof) noexcept;
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) noexcept;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
};

/// Inverse of the standard normal CDF (Wichura AS241, ~1e-16 relative).
double normal_quantile(double p) noexcept;

}  // namespace drcr::rng
