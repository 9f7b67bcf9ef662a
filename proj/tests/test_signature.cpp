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
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "vsx/signature.hpp"

namespace vsx {
namespace {

TEST_CASE("sign is deterministic in key and seed") {
    CHECK(sign("hello", 7) == sign("hello", 7));
    CHECK(sign_u64(42, 7) == sign_u64(42, 7));
    CHECK(sign("hello", 7) != sign("hello", 8));
    CHECK(sign("hello", 7) != sign("hellp", 7));
}

TEST_CASE("u64 keys hash as their little-endian bytes") {
    const std::uint64_t key = 0x0123456789abcdefULL;
    std::array<std::byte, 8> bytes{};
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<std::byte>(key >> (8 * i));
    CHECK(sign_u64(key, 99) == sign(bytes, 99));
    CHECK(sign_u64(key, 99, SigWidth::bits64) == sign(bytes, 99, SigWidth::bits64));
}

TEST_CASE("64-bit signatures leave the low word zero") {
    for (std::uint64_t k = 0; k < 100; ++k) CHECK(sign_u64(k, 3, SigWidth::bits64).lo == 0);
}

TEST_CASE("a million random keys give distinct signatures") {
    auto keys = testing::random_keys(1'000'000, 1);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    std::vector<Signature> sigs;
    sigs.reserve(keys.size());
    for (auto k : keys) sigs.push_back(sign_u64(k, 0x5eed));
    std::sort(sigs.begin(), sigs.end());
    CHECK(std::adjacent_find(sigs.begin(), sigs.end()) == sigs.end());
}

TEST_CASE("changing the seed flips about half of the signature bits") {
    const int n = 200'000;
    double total = 0;
    for (int k = 0; k < n; ++k) {
        const Signature a = sign_u64(static_cast<std::uint64_t>(k), 1);
        const Signature b = sign_u64(static_cast<std::uint64_t>(k), 2);
        total += std::popcount(a.hi ^ b.hi) + std::popcount(a.lo ^ b.lo);
    }
    CHECK(std::abs(total / n - 64.0) <= 2.0);
}

TEST_CASE("flipping one key bit flips about half of the signature bits") {
    std::mt19937_64 rng(5);
    double total = 0;
    const int n = 64 * 2000;
    for (int i = 0; i < n; ++i) {
        const std::uint64_t k = rng();
        const Signature a = sign_u64(k, 11);
        const Signature b = sign_u64(k ^ (std::uint64_t{1} << (i % 64)), 11);
        total += std::popcount(a.hi ^ b.hi) + std::popcount(a.lo ^ b.lo);
    }
    CHECK(std::abs(total / n - 64.0) <= 2.0);
}

TEST_CASE("assign_shard") {
    const Signature s{0xfedcba9876543210ULL, 0x0f1e2d3c4b5a6978ULL};
    SUBCASE("no sharding") {
        const auto a = assign_shard(s, 0);
        CHECK(a.shard == 0);
        CHECK(a.local == s.hi);
    }
    SUBCASE("top bits select the shard") {
        CHECK(assign_shard({~std::uint64_t{0}, 0}, 4).shard == 15);
        const auto a = assign_shard(s, 8);
        CHECK(a.shard == 0xfe);
        CHECK(a.local == 0xdcba98765432100fULL);
    }
    SUBCASE("the local signature skips the sharding bits") {
        // Signatures that differ only in sharding bits share their local part.
        const Signature t{s.hi ^ (std::uint64_t{0xf} << 60), s.lo};
        CHECK(assign_shard(s, 4).local == assign_shard(t, 4).local);
        CHECK(assign_shard(s, 4).shard != assign_shard(t, 4).shard);
    }
    SUBCASE("all 64 bits") {
        const auto a = assign_shard(s, 64);
        CHECK(a.shard == s.hi);
        CHECK(a.local == s.lo);
    }
    CHECK_THROWS_AS((void)assign_shard(s, 65), std::invalid_argument);
}

// P[Binomial(n, p) > x], summed in log space.
double binomial_upper_tail(std::uint64_t n, double p, double x) {
    double tail = 0;
    const auto k0 = static_cast<std::uint64_t>(std::floor(x)) + 1;
    for (std::uint64_t k = k0; k <= n; ++k) {
        const double lp = std::lgamma(double(n) + 1) - std::lgamma(double(k) + 1) - std::lgamma(double(n - k) + 1) +
                          double(k) * std::log(p) + double(n - k) * std::log1p(-p);
        const double term = std::exp(lp);
        tail += term;
        if (term < 1e-18 * tail) break;
    }
    return tail;
}

TEST_CASE("shard loads against the max-load envelope") {
    // 2^8 shards of a million signatures; the envelope is the mean plus
    // sqrt(2 mean ln S). With alpha = 1 the envelope is the typical maximum
    // rather than a high-probability bound: the chance that all shards stay
    // below it is about (1 - P[bin > envelope])^S, roughly 0.88 here, so the
    // count of trials inside it is checked against that oracle.
    const unsigned h = 8;
    const std::uint64_t n = 1'000'000, shards = 1u << h;
    const double mean = static_cast<double>(n) / shards;
    const double envelope = mean + std::sqrt(2 * mean * std::log(static_cast<double>(shards)));
    const double q = std::pow(1 - binomial_upper_tail(n, 1.0 / shards, envelope), double(shards));
    const int trials = 100;
    int inside = 0;
    std::vector<std::uint64_t> load(shards);
    for (int trial = 0; trial < trials; ++trial) {
        std::fill(load.begin(), load.end(), 0);
        for (std::uint64_t k = 0; k < n; ++k) ++load[assign_shard(sign_u64(k, 1000 + trial), h).shard];
        if (static_cast<double>(*std::max_element(load.begin(), load.end())) <= envelope) ++inside;
    }
    CAPTURE(q);
    CHECK(q > 0.8);
    CHECK(q < 0.95);
    CHECK(std::abs(inside - trials * q) <= 3 * std::sqrt(trials * q * (1 - q)) + 1);

    // The same loads stay within 1 + eps of the mean at the shard count the
    // balls-and-bins bound allows for eps = 0.05 (2^7 shards here).
    const unsigned h2 = 7;
    std::vector<std::uint64_t> load2(1u << h2);
    int within = 0;
    for (int trial = 0; trial < trials; ++trial) {
        std::fill(load2.begin(), load2.end(), 0);
        for (std::uint64_t k = 0; k < n; ++k) ++load2[assign_shard(sign_u64(k, 5000 + trial), h2).shard];
        within += double(*std::max_element(load2.begin(), load2.end())) <= 1.05 * double(n) / double(load2.size());
    }
    CHECK(within >= 95);
}

TEST_CASE("fixed_point_map") {
    CHECK(fixed_point_map(0, 1000) == 0);
    CHECK(fixed_point_map(~std::uint64_t{0}, 1000) == 999);
    CHECK(fixed_point_map(~std::uint64_t{0}, 1) == 0);
    CHECK(fixed_point_map(std::uint64_t{1} << 63, 10) == 5);

    SUBCASE("monotone") {
        std::mt19937_64 rng(17);
        for (std::uint64_t m : {1ULL, 2ULL, 3ULL, 1000ULL}) {
            bool ok = true;
            for (int i = 0; i < 100'000; ++i) {
                std::uint64_t x = rng(), y = rng();
                if (x > y) std::swap(x, y);
                const auto fx = fixed_point_map(x, m), fy = fixed_point_map(y, m);
                ok = ok && fx <= fy && fy < m;
            }
            CHECK(ok);
        }
    }
    SUBCASE("uniform buckets") {
        std::mt19937_64 rng(23);
        std::vector<std::uint64_t> counts(1000);
        const int n = 1'000'000;
        for (int i = 0; i < n; ++i) ++counts[fixed_point_map(rng(), 1000)];
        CHECK(testing::chi_square(counts, n / 1000.0) < testing::chi_square_critical_01(999));
    }
}

TEST_CASE("filter_hash uses only the requested bits") {
    for (std::uint64_t x = 0; x < 1000; ++x) {
        CHECK(filter_hash(x, 1) <= 1);
        CHECK(filter_hash(x, 8) < 256);
        CHECK(filter_hash(x, 8) == (filter_hash(x, 64) & 0xff));
    }
    CHECK(low_mask(0) == 0);
    CHECK(low_mask(64) == ~std::uint64_t{0});
}

}  // namespace
}  // namespace vsx
