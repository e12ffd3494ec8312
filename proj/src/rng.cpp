#include "mlpde/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mlpde {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

// murmur3 finalizer
inline std::uint64_t fmix64(std::uint64_t k) {
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    k *= 0xc4ceb9fe1a85ec53ULL;
    k ^= k >> 33;
    return k;
}

std::uint64_t hash_lane(std::uint64_t seed, const std::vector<std::int64_t>& path,
                        std::uint64_t salt) {
    std::uint64_t h = fmix64(seed ^ salt);
    for (std::int64_t e : path) {
        h = fmix64(h + 0x9e3779b97f4a7c15ULL + fmix64(static_cast<std::uint64_t>(e) ^ salt));
    }
    return fmix64(h ^ (static_cast<std::uint64_t>(path.size()) * 0x94d049bb133111ebULL));
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
    std::uint32_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c0;
        const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c2;
        const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
        const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
        c1 = static_cast<std::uint32_t>(p1);
        c3 = static_cast<std::uint32_t>(p0);
        c0 = n0;
        c2 = n2;
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return {c0, c1, c2, c3};
}

RandomKey RandomKey::child(std::int64_t i) const {
    RandomKey k = *this;
    k.path_.push_back(i);
    return k;
}

RandomKey RandomKey::child(std::int64_t a, std::int64_t b) const {
    RandomKey k = *this;
    k.path_.push_back(a);
    k.path_.push_back(b);
    return k;
}

std::array<std::uint64_t, 2> RandomKey::digest() const {
    return {hash_lane(seed_, path_, 0x243f6a8885a308d3ULL),
            hash_lane(seed_, path_, 0x13198a2e03707344ULL)};
}

std::string RandomKey::to_string() const {
    std::ostringstream os;
    os << "seed=" << seed_ << " path=[";
    for (std::size_t i = 0; i < path_.size(); ++i) os << (i ? "," : "") << path_[i];
    os << "]";
    return os.str();
}

RandomStream::RandomStream(const RandomKey& key) {
    const auto h = key.digest();
    key_ = {static_cast<std::uint32_t>(h[0]), static_cast<std::uint32_t>(h[0] >> 32)};
    stream_id_ = h[1];
}

std::uint64_t RandomStream::next_u64() {
    if (buffer_pos_ == 2) {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
            static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
        const auto out = philox4x32(ctr, key_);
        buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        buffer_pos_ = 0;
        ++block_;
    }
    return buffer_[buffer_pos_++];
}

double RandomStream::raw_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::uniform() {
    ++uniforms_;
    return raw_uniform();
}

double RandomStream::normal() {
    ++normals_;
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(raw_uniform()));
    const double angle = 2.0 * std::numbers::pi * raw_uniform();
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
}

void gaussian_increments(RandomStream& stream, double dt, std::span<double> out) {
    if (!(dt > 0.0)) throw std::domain_error("gaussian_increments: dt must be > 0");
    const double scale = std::sqrt(dt);
    for (double& v : out) v = scale * stream.normal();
}

std::vector<double> gaussian_increments(RandomStream& stream, std::size_t count, double dt) {
    std::vector<double> out(count);
    gaussian_increments(stream, dt, out);
    return out;
}

double arcsine_from_uniform(double u) {
    const double s = std::sin(0.5 * std::numbers::pi * u);
    const double r = s * s;
    return std::min(std::max(r, kArcsineClamp), 1.0 - kArcsineClamp);
}

double sample_arcsine(RandomStream& stream) { return arcsine_from_uniform(stream.uniform()); }

double rho(double t, double s, double T) {
    if (!(t < s && s < T)) throw std::domain_error("rho: requires t < s < T");
    return 1.0 / (std::numbers::pi * std::sqrt((T - s) * (s - t)));
}

double sample_proxy_time(RandomStream& stream, double t, double T) {
    if (!(std::nextafter(t, T) < T))
        throw std::domain_error("sample_proxy_time: no double strictly inside (t,T)");
    double s = t + (T - t) * sample_arcsine(stream);
    // The clamp on r does not survive rounding when T - t is tiny.
    if (s <= t) s = std::nextafter(t, T);
    if (s >= T) s = std::nextafter(T, t);
    return s;
}

}  // namespace mlpde
