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

#include "vsx/signature.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

namespace vsx {

namespace {

inline std::uint64_t load_le64(const std::byte* p) noexcept {
    std::uint64_t v;
    std::memcpy(&v, p, sizeof v);
    if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
    return v;
}

constexpr std::uint64_t kC1 = 0x87c37b91114253d5ULL;
constexpr std::uint64_t kC2 = 0x4cf5ad432745937fULL;

}  // namespace

Signature sign(std::span<const std::byte> key, std::uint64_t seed, SigWidth width) noexcept {
    const std::byte* data = key.data();
    const std::size_t len = key.size();
    const std::size_t nblocks = len / 16;

    std::uint64_t h1 = seed;
    std::uint64_t h2 = seed ^ 0x6a09e667f3bcc909ULL;

    for (std::size_t i = 0; i < nblocks; ++i) {
        std::uint64_t k1 = load_le64(data + i * 16);
        std::uint64_t k2 = load_le64(data + i * 16 + 8);

        k1 *= kC1;
        k1 = std::rotl(k1, 31);
        k1 *= kC2;
        h1 ^= k1;
        h1 = std::rotl(h1, 27);
        h1 += h2;
        h1 = h1 * 5 + 0x52dce729;

        k2 *= kC2;
        k2 = std::rotl(k2, 33);
        k2 *= kC1;
        h2 ^= k2;
        h2 = std::rotl(h2, 31);
        h2 += h1;
        h2 = h2 * 5 + 0x38495ab5;
    }

    const std::byte* tail = data + nblocks * 16;
    std::uint64_t k1 = 0;
    std::uint64_t k2 = 0;
    const std::size_t rest = len & 15;
    for (std::size_t i = rest; i > 8; --i) k2 |= std::to_integer<std::uint64_t>(tail[i - 1]) << (8 * (i - 9));
    for (std::size_t i = rest < 8 ? rest : 8; i > 0; --i) k1 |= std::to_integer<std::uint64_t>(tail[i - 1]) << (8 * (i - 1));
    if (rest > 8) {
        k2 *= kC2;
        k2 = std::rotl(k2, 33);
        k2 *= kC1;
        h2 ^= k2;
    }
    if (rest > 0) {
        k1 *= kC1;
        k1 = std::rotl(k1, 31);
        k1 *= kC2;
        h1 ^= k1;
    }

    h1 ^= len;
    h2 ^= len;
    h1 += h2;
    h2 += h1;
    h1 = fmix64(h1);
    h2 = fmix64(h2);
    h1 += h2;
    h2 += h1;

    if (width == SigWidth::bits64) return {h1, 0};
    return {h1, h2};
}

Signature sign_u64(std::uint64_t key, std::uint64_t seed, SigWidth width) noexcept {
    std::byte buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<std::byte>(key >> (8 * i));
    return sign(std::span<const std::byte>(buf, 8), seed, width);
}

ShardAssignment assign_shard(const Signature& sig, unsigned shard_bits) {
    if (shard_bits > 64) throw std::invalid_argument("assign_shard: more than 64 sharding bits");
    if (shard_bits == 0) return {0, sig.hi};
    if (shard_bits == 64) return {sig.hi, sig.lo};
    return {sig.hi >> (64 - shard_bits), (sig.hi << shard_bits) | (sig.lo >> (64 - shard_bits))};
}

}  // namespace vsx
