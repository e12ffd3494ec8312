#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mlpde {

/// Philox4x32-10 block cipher used as a counter-based generator.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// A node of the index tree Theta = union of Z^n, together with the global run seed.
/// Every key names one independent random stream.
class RandomKey {
public:
    RandomKey() = default;
    explicit RandomKey(std::uint64_t seed, std::vector<std::int64_t> path = {})
        : seed_(seed), path_(std::move(path)) {}

    std::uint64_t seed() const { return seed_; }
    const std::vector<std::int64_t>& path() const { return path_; }

    RandomKey child(std::int64_t i) const;
    RandomKey child(std::int64_t a, std::int64_t b) const;

    /// 128-bit digest of (seed, path); distinct keys give distinct digests
    /// up to hash collisions.
    std::array<std::uint64_t, 2> digest() const;

    std::string to_string() const;

    friend bool operator==(const RandomKey&, const RandomKey&) = default;

private:
    std::uint64_t seed_ = 0;
    std::vector<std::int64_t> path_;
};

/// Random stream derived from a RandomKey. The output sequence is a pure
/// function of the key, so streams can be derived anywhere without
/// coordination.
///
/// Uniforms take 53 bits of one 64-bit word. Normals come from Box-Muller on
/// consecutive uniform pairs; the second normal of a pair is kept for the next
/// call.
class RandomStream {
public:
    explicit RandomStream(const RandomKey& key);

    std::uint64_t next_u64();
    /// Uniform on the open interval (0,1).
    double uniform();
    double normal();

    /// Scalar draws handed out so far (uniform() and normal() calls).
    std::uint64_t uniforms_drawn() const { return uniforms_; }
    std::uint64_t normals_drawn() const { return normals_; }

private:
    double raw_uniform();

    std::array<std::uint32_t, 2> key_{};
    std::uint64_t stream_id_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffer_pos_ = 2;
    double spare_ = 0.0;
    bool has_spare_ = false;
    std::uint64_t uniforms_ = 0;
    std::uint64_t normals_ = 0;
};

inline RandomStream derive_stream(const RandomKey& key) { return RandomStream(key); }

/// Fills out with i.i.d. N(0, dt) draws in stream order. Callers that lay out
/// Brownian increments use time-major, coordinate-minor order.
void gaussian_increments(RandomStream& stream, double dt, std::span<double> out);
std::vector<double> gaussian_increments(RandomStream& stream, std::size_t count, double dt);

inline constexpr double kArcsineClamp = 1e-12;

/// sin^2(pi u / 2) clamped into [kArcsineClamp, 1 - kArcsineClamp].
double arcsine_from_uniform(double u);

/// Draws from the arcsine law, CDF (2/pi) asin(sqrt b).
double sample_arcsine(RandomStream& stream);

/// Arcsine density on (t,T): 1 / (pi sqrt((T-s)(s-t))). Requires t < s < T.
double rho(double t, double s, double T);

/// s = t + (T-t) r with r arcsine distributed; always strictly inside (t,T).
/// Throws std::domain_error when no double lies strictly between t and T.
double sample_proxy_time(RandomStream& stream, double t, double T);

}  // namespace mlpde
