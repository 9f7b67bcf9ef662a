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

/// \file
/// Static functions and static filters.
///
/// Keys are signed with one global seed and split into 2^h shards by the top
/// h signature bits. Every shard gets the same number of vertices, sized for
/// the largest shard, so the slab region of shard s starts at
/// s * shard_vertices and a query needs no offset table: sign, select the
/// shard, build the edge from the local signature, XOR three slab values.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vsx/bitslab.hpp"
#include "vsx/bounds.hpp"
#include "vsx/hypergraph.hpp"
#include "vsx/key_stream.hpp"
#include "vsx/signature.hpp"

namespace vsx {

enum class Kind : std::uint8_t { function = 0, filter = 1 };

[[nodiscard]] constexpr const char* to_string(Kind k) noexcept {
    return k == Kind::function ? "function" : "filter";
}

//! Global seed of attempt `attempt` of a build started with `seed`.
[[nodiscard]] constexpr std::uint64_t retry_seed(std::uint64_t seed, unsigned attempt) noexcept {
    return seed + attempt * 0x9e3779b97f4a7c15ULL;
}

struct BuildConfig {
    Construction construction = Construction::fuse;
    unsigned bits = 8;                    //!< b, 1 to 64
    std::optional<double> epsilon;        //!< default 0.001 (fuse), 0.01 (mwhc)
    double eta = 1e-3;
    double alpha = 1.0;
    std::optional<double> c;              //!< overrides the per-regime default
    SigWidth sig_bits = SigWidth::bits128;
    std::uint64_t small_threshold = 800'000;
    std::uint64_t seed = 0;
    unsigned max_global_retries = 16;
    unsigned workers = 1;
    std::optional<std::filesystem::path> offline_dir;
    std::optional<unsigned> shard_bits;   //!< forces h
    std::optional<unsigned> log2_segment; //!< forces the fuse segment size
    std::optional<PeelStrategy> strategy; //!< overrides the selection policy
    std::uint64_t max_shards = 4096;
    std::uint64_t min_fuse_shard_keys = 10'000'000;
    std::size_t spill_buffer_bytes = std::size_t{64} << 20;

    [[nodiscard]] double effective_epsilon() const noexcept {
        return epsilon.value_or(construction == Construction::fuse ? 0.001 : 0.01);
    }
    //! Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

//! Everything needed to rebuild or query a structure.
struct ShardPlan {
    Construction construction = Construction::fuse;
    unsigned h = 0;
    std::uint64_t n = 0;               //!< distinct signatures the plan was sized for
    std::uint64_t seed = 0;
    std::uint64_t shard_vertices = 0;  //!< identical for all shards
    std::uint64_t segment_size = 0;    //!< fuse segment or mwhc part size
    std::uint64_t segments = 0;        //!< fuse segment choices (l); 0 for mwhc
    // Build-time only (not serialized):
    double c = 0;
    bool lazy = false;                 //!< small shards: core solved by lazy Gaussian elimination
    std::uint64_t shard_budget = 0;    //!< keys per shard the vertices were sized for
    ShardBits bounds;

    [[nodiscard]] std::uint64_t num_shards() const noexcept { return std::uint64_t{1} << h; }
    [[nodiscard]] EdgeGenerator generator() const;
};

//! Resolves h, the vertex budget and the graph shape for `n` distinct keys.
[[nodiscard]] ShardPlan plan_shards(std::uint64_t n, const BuildConfig& cfg, std::uint64_t seed);

//! Strategy used when the configuration does not force one.
[[nodiscard]] PeelStrategy select_strategy(const BuildConfig& cfg, const ShardPlan& plan, bool offline);

//! Per-shard construction counters.
struct ShardStats {
    std::uint64_t keys = 0;
    std::uint64_t peeled = 0;
    std::uint64_t core = 0;    //!< edges left after peeling
    std::uint64_t active = 0;  //!< lazy elimination: variables made active
};

struct BuildReport {
    std::uint64_t input_keys = 0;
    std::uint64_t exact_duplicates = 0;
    std::uint64_t local_duplicates = 0;
    unsigned bits = 0;
    unsigned attempts = 0;               //!< seeds tried, including the successful one
    std::uint64_t seed = 0;              //!< global seed of the successful attempt
    ShardPlan plan;
    PeelStrategy strategy;
    std::uint64_t max_shard_keys = 0;
    std::uint64_t max_core_edges = 0;
    std::uint64_t lazy_active = 0;       //!< variables made active, summed over shards
    std::uint64_t total_bits = 0;        //!< header plus slab
    std::uint64_t max_shard_working_bytes = 0;
    std::uint64_t spill_buffer_bytes = 0;
    double seconds = 0;
    std::vector<ShardStats> shards;      //!< successful attempt only

    //! total_bits / (n b) - 1.
    [[nodiscard]] double overhead() const noexcept;
};

enum class LoadMode : std::uint8_t { copy, mmap };

inline constexpr std::size_t kHeaderBytes = 64;
inline constexpr std::uint16_t kFormatVersion = 1;

//! An immutable static function or filter.
class VStruct {
  public:
    VStruct() = default;
    VStruct(Kind kind, ShardPlan plan, unsigned bits, SigWidth sig_bits, BitSlab slab);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] const ShardPlan& plan() const noexcept { return plan_; }
    [[nodiscard]] unsigned bits() const noexcept { return bits_; }
    [[nodiscard]] SigWidth sig_bits() const noexcept { return sig_bits_; }
    [[nodiscard]] const BitSlab& slab() const noexcept { return slab_; }
    [[nodiscard]] std::uint64_t size() const noexcept { return plan_.n; }

    [[nodiscard]] Signature signature(std::uint64_t key) const { return sign_u64(key, plan_.seed, sig_bits_); }
    [[nodiscard]] Signature signature(std::string_view key) const { return sign(key, plan_.seed, sig_bits_); }

    //! XOR of the three slab values of the signature's edge.
    [[nodiscard]] std::uint64_t lookup(const Signature& sig) const noexcept {
        const auto [shard, local] = assign_shard_unchecked(sig);
        const Edge e = gen_.make_edge(local);
        const std::uint64_t base = shard * plan_.shard_vertices;
        return slab_.get(base + e[0]) ^ slab_.get(base + e[1]) ^ slab_.get(base + e[2]);
    }

    //! Function value (arbitrary for keys outside the set).
    [[nodiscard]] std::uint64_t evaluate(const Signature& sig) const noexcept { return lookup(sig); }

    //! Filter membership. For functions, whether lookup equals the filter hash.
    [[nodiscard]] bool contains(const Signature& sig) const noexcept {
        return lookup(sig) == filter_hash(assign_shard_unchecked(sig).local, bits_);
    }

    template <class Key>
    [[nodiscard]] std::uint64_t operator()(const Key& key) const {
        return evaluate(signature(key));
    }

    //! Header plus slab, in bits.
    [[nodiscard]] std::uint64_t size_bits() const noexcept {
        return kHeaderBytes * 8 + slab_.words().size() * 64;
    }

    void serialize(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;

    //! Throws FormatError on malformed input, std::system_error on I/O errors.
    static VStruct deserialize(std::istream& in);
    static VStruct load(const std::filesystem::path& path, LoadMode mode = LoadMode::copy);

  private:
    [[nodiscard]] ShardAssignment assign_shard_unchecked(const Signature& sig) const noexcept {
        const unsigned h = plan_.h;
        if (h == 0) return {0, sig.hi};
        return {sig.hi >> (64 - h), (sig.hi << h) | (sig.lo >> (64 - h))};
    }

    Kind kind_ = Kind::function;
    ShardPlan plan_;
    unsigned bits_ = 1;
    SigWidth sig_bits_ = SigWidth::bits128;
    EdgeGenerator gen_;
    BitSlab slab_;
};

//! Fixed 64-byte header of the serialized form.
struct Header {
    Kind kind = Kind::function;
    Construction construction = Construction::fuse;
    unsigned bits = 1;
    unsigned h = 0;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    std::uint64_t shard_vertices = 0;
    std::uint64_t segment_size = 0;
    std::uint64_t segments = 0;
    SigWidth sig_bits = SigWidth::bits128;

    [[nodiscard]] std::array<std::byte, kHeaderBytes> encode() const;
    //! Throws FormatError.
    static Header decode(std::span<const std::byte> bytes);
    [[nodiscard]] std::uint64_t slab_words() const;
};

//! Maps every key to its value; values must be below 2^bits. Throws
//! RetriesExhausted, or the last DuplicateSignatureConflict /
//! DuplicateLocalSignature when every seed hit one.
[[nodiscard]] VStruct build_function(const KeyStream& keys, const BuildConfig& cfg, BuildReport* report = nullptr);

//! Filter with false-positive rate 2^-bits. Values of the stream are ignored.
[[nodiscard]] VStruct build_filter(const KeyStream& keys, const BuildConfig& cfg, BuildReport* report = nullptr);

//! Spills signatures to cfg.offline_dir and builds one shard at a time,
//! streaming the slab into `output`. The file is written under a temporary
//! name and renamed when complete; it is byte-identical to serializing the
//! in-memory build with the same keys and configuration.
BuildReport build_offline(const KeyStream& keys, Kind kind, const BuildConfig& cfg,
                          const std::filesystem::path& output);

//! Checks a sample of the inserted keys against the structure: values for
//! functions, membership for filters. Returns the number of mismatches.
[[nodiscard]] std::uint64_t count_mismatches(const VStruct& vs, const KeyStream& keys, std::uint64_t max_keys);

}  // namespace vsx
