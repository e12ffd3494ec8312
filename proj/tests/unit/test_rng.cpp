#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include <doctest.h>

#include "mlpde/rng.hpp"

using namespace mlpde;

TEST_CASE("philox4x32-10 known-answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    using A2 = std::array<std::uint32_t, 2>;
    CHECK(philox4x32(A4{0, 0, 0, 0}, A2{0, 0}) ==
          A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32(A4{~0u, ~0u, ~0u, ~0u}, A2{~0u, ~0u}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                     A2{0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are pure functions of the key") {
    const RandomKey k = RandomKey(7).child(3, -2);
    RandomStream a(k), b(RandomKey(7, {3, -2}));
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RandomStream c(RandomKey(7).child(3, 2));
    RandomStream d(k);
    int equal = 0;
    for (int i = 0; i < 100; ++i) equal += c.next_u64() == d.next_u64();
    CHECK(equal == 0);
}

TEST_CASE("sibling and path-shape keys do not collide") {
    std::set<std::array<std::uint64_t, 2>> digests;
    const RandomKey root(42);
    for (std::int64_t i = -50000; i < 50000; ++i) digests.insert(root.child(i).digest());
    CHECK(digests.size() == 100000);
    // Keys are identified by their flattened path.
    CHECK(root.child(1).child(2).digest() == root.child(1, 2).digest());
    CHECK(root.child(1, 2).digest() != root.child(2, 1).digest());
    CHECK(root.child(0).digest() != root.digest());
    CHECK(RandomKey(1).digest() != RandomKey(2).digest());
}

TEST_CASE("uniforms lie strictly inside (0,1) and normals have unit variance") {
    RandomStream s(RandomKey(1));
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        const double z = s.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 5.0 / std::sqrt(n));
    CHECK(std::abs(sq / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(s.uniforms_drawn() == static_cast<std::uint64_t>(n));
    CHECK(s.normals_drawn() == static_cast<std::uint64_t>(n));
}

TEST_CASE("gaussian_increments scale by sqrt(dt)") {
    RandomStream a(RandomKey(9)), b(RandomKey(9));
    const auto v = gaussian_increments(a, 5, 0.25);
    for (double x : v) CHECK(x == doctest::Approx(0.5 * b.normal()).epsilon(1e-15));
    CHECK_THROWS_AS(gaussian_increments(a, 1, 0.0), std::domain_error);
}

TEST_CASE("arcsine sampler matches (2/pi) asin(sqrt b) under a KS test") {
    RandomStream s(RandomKey(2024));
    const int n = 100000;
    std::vector<double> b(n);
    for (double& v : b) v = sample_arcsine(s);
    std::sort(b.begin(), b.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double F = 2.0 / std::numbers::pi * std::asin(std::sqrt(b[i]));
        ks = std::max({ks, std::abs(F - static_cast<double>(i) / n),
                       std::abs(F - static_cast<double>(i + 1) / n)});
    }
    CHECK(ks < 1.94947 / std::sqrt(n));
}

TEST_CASE("arcsine clamp and proxy times stay strictly inside") {
    CHECK(arcsine_from_uniform(0.0) == kArcsineClamp);
    CHECK(arcsine_from_uniform(1.0) == 1.0 - kArcsineClamp);
    RandomStream s(RandomKey(5));
    for (int i = 0; i < 1000; ++i) {
        const double p = sample_proxy_time(s, 0.0, 1.0);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
        const double tight = 1.0 - 4 * std::numeric_limits<double>::epsilon();
        const double q = sample_proxy_time(s, tight, 1.0);
        CHECK(q > tight);
        CHECK(q < 1.0);
    }
    CHECK_THROWS_AS(sample_proxy_time(s, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(sample_proxy_time(s, std::nextafter(1.0, 0.0), 1.0), std::domain_error);
}

TEST_CASE("rho integrates to one") {
    RandomStream s(RandomKey(11));
    for (int trial = 0; trial < 20; ++trial) {
        const double t = s.uniform() * 2.0;
        const double T = t + 0.01 + 3.0 * s.uniform();
        // s = t + (T-t)(1 - cos phi)/2 removes both endpoint singularities.
        const int N = 2000;
        double total = 0.0;
        for (int j = 0; j < N; ++j) {
            const double phi = std::numbers::pi * (j + 0.5) / N;
            const double r = t + (T - t) * 0.5 * (1.0 - std::cos(phi));
            total += rho(t, r, T) * 0.5 * (T - t) * std::sin(phi) * (std::numbers::pi / N);
        }
        CHECK(std::abs(total - 1.0) < 1e-10);
    }
    CHECK_THROWS_AS(rho(0.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(rho(0.0, 1.0, 1.0), std::domain_error);
}
