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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vsx/signature.hpp"

namespace vsx {

//! Parameters recorded in a spill directory's manifest.json.
struct SpillManifest {
    std::uint64_t n = 0;          //!< records written
    unsigned bucket_bits = 0;     //!< buckets are selected by the top bucket_bits of the signature
    std::uint64_t seed = 0;       //!< global seed the signatures were computed with
    unsigned value_bits = 0;      //!< b
    bool with_values = true;      //!< function records carry a value word
    unsigned record_bytes = 24;   //!< 16 (filter) or 24 (function)
};

//! Name of bucket `i` inside a spill directory: shard-{i:05}.bin.
[[nodiscard]] std::filesystem::path spill_bucket_path(const std::filesystem::path& dir, std::uint64_t i);

//! A finished spill: 2^bucket_bits bucket files plus manifest.json.
class SpillSet {
  public:
    SpillSet(std::filesystem::path dir, SpillManifest manifest);

    //! Reopens an existing spill directory from its manifest.
    static SpillSet open(const std::filesystem::path& dir);

    [[nodiscard]] const SpillManifest& manifest() const noexcept { return manifest_; }
    [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }
    [[nodiscard]] std::uint64_t num_buckets() const noexcept { return std::uint64_t{1} << manifest_.bucket_bits; }
    [[nodiscard]] std::uint64_t bucket_size(std::uint64_t i) const;

    //! Appends the records of bucket `i` to `out`.
    void read_bucket(std::uint64_t i, std::vector<SigVal>& out) const;

    //! Replaces the content of bucket `i`.
    void rewrite_bucket(std::uint64_t i, std::span<const SigVal> records) const;

    //! Removes bucket files and manifest.
    void remove() const;

  private:
    std::filesystem::path dir_;
    SpillManifest manifest_;
};

//! Appends signature/value records to per-bucket files, buffering in memory.
//! Each bucket buffer holds about buffer_bytes / 2^bucket_bits bytes; a full
//! buffer is appended to its file. I/O failures throw std::system_error.
class SpillWriter {
  public:
    SpillWriter(std::filesystem::path dir, unsigned bucket_bits, std::uint64_t seed, unsigned value_bits,
                bool with_values, std::size_t buffer_bytes = std::size_t{64} << 20);
    SpillWriter(const SpillWriter&) = delete;
    SpillWriter& operator=(const SpillWriter&) = delete;

    void append(std::span<const SigVal> records);
    void append(const SigVal& record);

    //! Flushes every buffer and writes manifest.json.
    SpillSet finish();

    [[nodiscard]] std::size_t buffer_bytes() const noexcept { return per_bucket_ * buffers_.size(); }

  private:
    void flush(std::uint64_t bucket);

    std::filesystem::path dir_;
    SpillManifest manifest_;
    std::size_t per_bucket_;
    std::vector<std::vector<std::byte>> buffers_;
};

//! Groups records by the top bucket_bits of the signature and writes them to
//! `dir`. Equivalent to SpillWriter + finish.
SpillSet spill_to_disk(std::span<const SigVal> records, unsigned bucket_bits, std::uint64_t seed,
                       unsigned value_bits, bool with_values, const std::filesystem::path& dir);

}  // namespace vsx
