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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace vsx {

//! 128-bit fingerprint of a key. Shards are selected by the high bits of
//! `hi`; everything else below them is available to the shard.
struct Signature {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    friend constexpr bool operator==(const Signature&, const Signature&) = default;
    friend constexpr auto operator<=>(const Signature&, const Signature&) = default;
};

//! A signature together with its value (unused, zero, for filters).
struct SigVal {
    Signature sig;
    std::uint64_t value = 0;

    friend constexpr bool operator==(const SigVal&, const SigVal&) = default;
};

//! Shard index plus the 64 signature bits right below the sharding bits.
struct ShardAssignment {
    std::uint64_t shard = 0;
    std::uint64_t local = 0;
};

//! Width of the signatures produced by `sign`. With 64-bit signatures `lo`
//! is always zero.
enum class SigWidth : std::uint8_t { bits64 = 64, bits128 = 128 };

//! Seeded 128-bit hash of a byte string (MurmurHash3 x64/128 with a 64-bit
//! seed).
[[nodiscard]] Signature sign(std::span<const std::byte> key, std::uint64_t seed,
                             SigWidth width = SigWidth::bits128) noexcept;

[[nodiscard]] inline Signature sign(std::string_view key, std::uint64_t seed,
                                    SigWidth width = SigWidth::bits128) noexcept {
    return sign(std::as_bytes(std::span(key.data(), key.size())), seed, width);
}

//! Integer keys are hashed through their 8-byte little-endian form, so
//! `sign_u64(k, s) == sign(le_bytes(k), s)`.
[[nodiscard]] Signature sign_u64(std::uint64_t key, std::uint64_t seed,
                                 SigWidth width = SigWidth::bits128) noexcept;

//! Splits a signature into shard index (top `shard_bits` bits of `hi`) and
//! local signature. Throws std::invalid_argument if shard_bits > 64.
[[nodiscard]] ShardAssignment assign_shard(const Signature& sig, unsigned shard_bits);

//! floor(x * m / 2^64): monotone map of a 64-bit word onto [0, m).
[[nodiscard]] constexpr std::uint64_t fixed_point_map(std::uint64_t x, std::uint64_t m) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) * m) >> 64);
}

//! MurmurHash3 64-bit finalizer. Bijective, maps 0 to 0.
[[nodiscard]] constexpr std::uint64_t fmix64(std::uint64_t z) noexcept {
    z ^= z >> 33;
    z *= 0xff51afd7ed558ccdULL;
    z ^= z >> 33;
    z *= 0xc4ceb9fe1a85ec53ULL;
    z ^= z >> 33;
    return z;
}

//! Stafford's 13th variant of the same finalizer. Used where we need a mix
//! unrelated to fmix64.
[[nodiscard]] constexpr std::uint64_t remix13(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

//! Mask with the lowest `bits` bits set (bits in [0, 64]).
[[nodiscard]] constexpr std::uint64_t low_mask(unsigned bits) noexcept {
    return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

//! The b-bit fingerprint a filter stores for a key, derived from its local
//! signature only.
[[nodiscard]] constexpr std::uint64_t filter_hash(std::uint64_t local, unsigned bits) noexcept {
    return remix13(local + 0x9e3779b97f4a7c15ULL) & low_mask(bits);
}

}  // namespace vsx
