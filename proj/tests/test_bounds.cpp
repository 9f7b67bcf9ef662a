// Copyright 2026 The vsx Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "vsx/bounds.hpp"
#include "vsx/signature.hpp"

namespace vsx {
namespace {

// Independent W: bisection on w e^w - x, which is increasing for w >= 0.
double bisect_w(double x) {
    double lo = 0, hi = std::max(1.0, std::log1p(x));
    while (hi * std::exp(hi) < x) hi *= 2;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mid * std::exp(mid) < x ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

TEST_CASE("lambert_w0 fixed points") {
    CHECK(lambert_w0(0) == 0);
    CHECK(lambert_w0(std::numbers::e) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lambert_w0(500) == doctest::Approx(bisect_w(500)).epsilon(1e-12));
    CHECK(lambert_w0(500) == doctest::Approx(4.67283).epsilon(1e-5));
    CHECK_THROWS_AS((void)lambert_w0(-1e-9), std::domain_error);
    CHECK_THROWS_AS((void)lambert_w0(std::nan("")), std::domain_error);
}

TEST_CASE("lambert_w0 residual and bisection agreement on a log grid") {
    std::vector<double> grid{0.0};
    for (double e = -12; e <= 9.0001; e += 0.05) grid.push_back(std::pow(10.0, e));
    for (double x : grid) {
        const double w = lambert_w0(x);
        CAPTURE(x);
        CHECK(std::abs(w * std::exp(w) - x) <= 1e-10 * std::max(1.0, x));
        CHECK(std::abs(w - bisect_w(x)) <= 1e-12 * std::max(1.0, w));
    }
}

TEST_CASE("balls-and-bins shard bits") {
    // ln 2^h <= W(n eps^2 / 2): for n = 1e9, eps = 0.001 the argument is 500.
    CHECK(max_shard_bits_balls_bins({1'000'000'000, 0.001, 1.0}) ==
          static_cast<unsigned>(std::floor(bisect_w(500) / std::numbers::ln2)));
    CHECK(max_shard_bits_balls_bins({1'000'000'000, 0.001, 1.0}) == 6);
    // Below W^-1(ln 2) = 2 ln 2 not even two shards fit.
    CHECK(max_shard_bits_balls_bins({1000, 0.001, 1.0}) == 0);
    const double boundary = 2 * std::numbers::ln2;  // W(2 ln 2) = ln 2
    const auto n_at = [](double arg, double eps) { return static_cast<std::uint64_t>(arg * 2 / (eps * eps)); };
    CHECK(max_shard_bits_balls_bins({n_at(boundary * 0.999, 0.01), 0.01, 1.0}) == 0);
    CHECK(max_shard_bits_balls_bins({n_at(boundary * 1.001, 0.01), 0.01, 1.0}) == 1);
    // Larger alpha never allows more shards.
    for (std::uint64_t n : {1'000'000ULL, 1'000'000'000ULL, 1'000'000'000'000ULL})
        CHECK(max_shard_bits_balls_bins({n, 0.001, 2.0}) <= max_shard_bits_balls_bins({n, 0.001, 1.0}));
}

TEST_CASE("expected_max_load") {
    CHECK(expected_max_load(1000, 1) == doctest::Approx(1000));
    const double mean = 1e6 / 64;
    CHECK(expected_max_load(1'000'000, 64) == doctest::Approx(mean + std::sqrt(2 * mean * std::log(64.0))));
    CHECK(expected_max_load(1'000'000, 64, 2.0) == doctest::Approx(mean + 2 * std::sqrt(2 * mean * std::log(64.0))));
}

TEST_CASE("max/mean load stays within 1 + eps at the balls-and-bins shard count") {
    const std::uint64_t n = 1'000'000;
    const double eps = 0.05;
    const unsigned h = max_shard_bits_balls_bins({n, eps, 1.0});
    REQUIRE(h > 0);
    const std::uint64_t s = std::uint64_t{1} << h;
    std::mt19937_64 rng(31);
    std::vector<std::uint64_t> load(s);
    int ok = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::fill(load.begin(), load.end(), 0);
        for (std::uint64_t i = 0; i < n; ++i) ++load[rng() >> (64 - h)];
        const double max = static_cast<double>(*std::max_element(load.begin(), load.end()));
        if (max <= (1 + eps) * static_cast<double>(n) / static_cast<double>(s)) ++ok;
    }
    CHECK(ok >= 95);
}

TEST_CASE("birthday_no_dup_prob") {
    CHECK(birthday_no_dup_prob(0, 10) == 1);
    CHECK(birthday_no_dup_prob(1, 10) == 1);
    CHECK(birthday_no_dup_prob(2, 2) == doctest::Approx(std::exp(-0.5)));
    const auto exact = [](int t, double n) {
        double p = 1;
        for (int i = 1; i < t; ++i) p *= 1 - i / n;
        return p;
    };
    CHECK(std::abs(birthday_no_dup_prob(1000, 1e9) - exact(1000, 1e9)) <= 1e-3);
    for (double n : {2.0, 10.0, 365.0, 1e4, 1e6})
        for (int t = 0; t <= std::min(2000.0, n); t += 7) {
            CAPTURE(n);
            CAPTURE(t);
            CHECK(birthday_no_dup_prob(t, n) >= exact(t, n) - 1e-15);
        }
}

TEST_CASE("mwhc duplicate-edge shard bound") {
    CHECK(max_shards_mwhc_dup({1'000'000'000'000ULL, 1.23, 1e-3}) == 8192);
    const auto oracle = [](double n, double c, double eta) {
        const double bound = std::sqrt(-2 * n * std::pow(c / 3, 3) * std::log(1 - eta));
        std::uint64_t s = 1;
        while (static_cast<double>(2 * s) <= bound) s *= 2;
        return s;
    };
    for (double n : {1e3, 1e6, 1e9, 1e12, 1e15})
        for (double eta : {1e-6, 1e-3, 0.1, 0.5}) CHECK(max_shards_mwhc_dup({std::uint64_t(n), 1.23, eta}) == oracle(n, 1.23, eta));
    CHECK(max_shards_mwhc_dup({1'000'000'000'000ULL, 1.23, 1e-300}) == 1);
}

TEST_CASE("fuse segment-size estimates") {
    const double n = 1e7;
    CHECK(fuse_segment_bits(n) == doctest::Approx(0.41 * std::log(n) * std::log(std::log(n)) - 3));
    CHECK(fuse_segment_bits(n) == doctest::Approx(15.37).epsilon(1e-3));
    CHECK(fuse_segment_bits_log(n) == doctest::Approx(std::log(n) / std::log(3.33) + 2.25));
    CHECK(fuse_segment_bits(n, 0.5, -2) == doctest::Approx(0.5 * std::log(n) * std::log(std::log(n)) - 2));
    CHECK_THROWS_AS((void)fuse_segment_bits(2.9), std::domain_error);
    for (double e = 10; e <= 15; e += 0.1) CHECK(fuse_segment_bits(std::pow(10, e)) >= fuse_segment_bits_log(std::pow(10, e)));
    double prev = fuse_segment_bits(16);
    for (double e = 1.21; e <= 15; e += 0.01) {
        const double cur = fuse_segment_bits(std::pow(10, e));
        CHECK(cur > prev);
        prev = cur;
    }
}

// Per-shard duplicate condition before the Lambert step:
// alpha ln(m) ln ln(m) + beta >= lg(-n / (2 c ln(1 - eta))) / 2 with m = n / S.
bool fuse_dup_condition(double n, double s, double c, double eta) {
    const double m = n / s;
    if (m <= std::numbers::e) return false;
    return 0.41 * std::log(m) * std::log(std::log(m)) - 3 >= 0.5 * std::log2(-n / (2 * c * std::log1p(-eta)));
}

TEST_CASE("fuse duplicate-edge shard bound is the largest power of two meeting the condition") {
    for (double n : {1e7, 1e8, 1e9, 1e10, 1e11, 1e12, 1e13, 1e14})
        for (double eta : {1e-6, 1e-3, 1e-1}) {
            CAPTURE(n);
            CAPTURE(eta);
            const auto s = max_shards_fuse_dup({std::uint64_t(n), 1.105, eta});
            std::uint64_t expect = 1;
            for (std::uint64_t t = 2; t < (std::uint64_t{1} << 62); t *= 2)
                if (fuse_dup_condition(n, double(t), 1.105, eta)) expect = t;
            CHECK(s == expect);
            if (s > 1) CHECK(fuse_dup_condition(n, double(s), 1.105, eta));
            CHECK_FALSE(fuse_dup_condition(n, double(2 * s), 1.105, eta));
        }
    CHECK(max_shards_fuse_dup({1'000'000'000'000ULL, 1.105, 1e-3}) == 256);
    CHECK(max_shards_fuse_dup({1'000'000'000'000ULL, 1.105, 1e-300}) == 1);
}

TEST_CASE("resolve_shard_bits") {
    SUBCASE("small fuse sets are not sharded") {
        const auto r = resolve_shard_bits({1'000'000, 0.001, 1.0, Construction::fuse, 1.105, 1e-3});
        CHECK(r.h == 0);
        CHECK(resolve_shard_bits({1000, 0.001, 1.0, Construction::mwhc, 1.23, 1e-3}).h == 0);
        CHECK(resolve_shard_bits({0, 0.001, 1.0, Construction::fuse, 1.105, 1e-3}).h == 0);
    }
    SUBCASE("mwhc at 1e12 keys is limited by duplicates") {
        ShardingParams p{1'000'000'000'000ULL, 0.01, 1.0, Construction::mwhc, 1.23, 1e-3};
        p.max_shards = std::uint64_t{1} << 40;
        const auto r = resolve_shard_bits(p);
        CHECK(r.duplicates == 13);
        CHECK(r.h == std::min(r.balls_bins, 13u));
        CHECK(r.binding == "duplicates");
        p.max_shards = 4096;
        CHECK(resolve_shard_bits(p).h == 12);
        CHECK(resolve_shard_bits(p).binding == "shard-cap");
    }
    SUBCASE("monotone in n, expected shard size at least 2/eps^2") {
        for (auto cons : {Construction::mwhc, Construction::fuse}) {
            const double eps = cons == Construction::fuse ? 0.001 : 0.01;
            unsigned prev = 0;
            for (double e = 2; e <= 15; e += 0.05) {
                const auto n = static_cast<std::uint64_t>(std::pow(10, e));
                const auto r = resolve_shard_bits({n, eps, 1.0, cons, cons == Construction::fuse ? 1.105 : 1.23, 1e-3});
                CAPTURE(n);
                CHECK(r.h >= prev);
                if (r.h > 0) CHECK(static_cast<double>(n) / std::ldexp(1.0, int(r.h)) >= 2 / (eps * eps));
                if (cons == Construction::fuse && r.h > 0) CHECK(static_cast<double>(n) / std::ldexp(1.0, int(r.h)) >= 1e7);
                prev = r.h;
            }
        }
    }
}

}  // namespace
}  // namespace vsx
