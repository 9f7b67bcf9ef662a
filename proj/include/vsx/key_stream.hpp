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

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vsx/signature.hpp"

namespace vsx {

using SignatureSink = std::function<void(std::span<const SigVal>)>;

//! A re-readable sequence of keys (and optionally values). Builders may
//! traverse it several times, once per global seed.
class KeyStream {
  public:
    virtual ~KeyStream() = default;

    [[nodiscard]] virtual std::uint64_t size() const = 0;

    //! Signs every key with `seed` and hands the results to `sink` in chunks.
    //! Values are zero when the stream has none.
    virtual void sign_all(std::uint64_t seed, SigWidth width, const SignatureSink& sink) const = 0;

  protected:
    static constexpr std::size_t kChunk = 1 << 16;
};

//! 64-bit integer keys, signed through their little-endian bytes. The spans
//! must outlive the stream.
class U64KeyStream final : public KeyStream {
  public:
    explicit U64KeyStream(std::span<const std::uint64_t> keys, std::span<const std::uint64_t> values = {})
        : keys_(keys), values_(values) {
        if (!values.empty() && values.size() != keys.size())
            throw std::invalid_argument("U64KeyStream: keys and values differ in length");
    }

    [[nodiscard]] std::uint64_t size() const override { return keys_.size(); }

    void sign_all(std::uint64_t seed, SigWidth width, const SignatureSink& sink) const override {
        std::vector<SigVal> buf;
        buf.reserve(std::min(kChunk, keys_.size()));
        for (std::size_t i = 0; i < keys_.size(); ++i) {
            buf.push_back({sign_u64(keys_[i], seed, width), values_.empty() ? 0 : values_[i]});
            if (buf.size() == kChunk) {
                sink(buf);
                buf.clear();
            }
        }
        if (!buf.empty()) sink(buf);
    }

  private:
    std::span<const std::uint64_t> keys_;
    std::span<const std::uint64_t> values_;
};

//! Byte-string keys. The spans must outlive the stream.
class StringKeyStream final : public KeyStream {
  public:
    explicit StringKeyStream(std::span<const std::string> keys, std::span<const std::uint64_t> values = {})
        : keys_(keys), values_(values) {
        if (!values.empty() && values.size() != keys.size())
            throw std::invalid_argument("StringKeyStream: keys and values differ in length");
    }

    [[nodiscard]] std::uint64_t size() const override { return keys_.size(); }

    void sign_all(std::uint64_t seed, SigWidth width, const SignatureSink& sink) const override {
        std::vector<SigVal> buf;
        buf.reserve(std::min(kChunk, keys_.size()));
        for (std::size_t i = 0; i < keys_.size(); ++i) {
            buf.push_back({sign(keys_[i], seed, width), values_.empty() ? 0 : values_[i]});
            if (buf.size() == kChunk) {
                sink(buf);
                buf.clear();
            }
        }
        if (!buf.empty()) sink(buf);
    }

  private:
    std::span<const std::string> keys_;
    std::span<const std::uint64_t> values_;
};

//! Pseudo-random distinct 64-bit keys, generated on the fly: key i is
//! splitmix64(key_seed + i * golden gamma), a bijection of i. With
//! `value_bits` > 0 key i maps to i mod 2^value_bits.
class SyntheticKeyStream final : public KeyStream {
  public:
    SyntheticKeyStream(std::uint64_t n, std::uint64_t key_seed, unsigned value_bits = 0)
        : n_(n), key_seed_(key_seed), value_bits_(value_bits) {}

    [[nodiscard]] static constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
        x += 0x9e3779b97f4a7c15ULL;
        return fmix_splitmix(x);
    }

    [[nodiscard]] std::uint64_t key(std::uint64_t i) const noexcept {
        return splitmix64(key_seed_ + i * 0x9e3779b97f4a7c15ULL);
    }
    [[nodiscard]] std::uint64_t value(std::uint64_t i) const noexcept {
        return value_bits_ ? i & low_mask(value_bits_) : 0;
    }

    [[nodiscard]] std::uint64_t size() const override { return n_; }

    void sign_all(std::uint64_t seed, SigWidth width, const SignatureSink& sink) const override {
        std::vector<SigVal> buf;
        buf.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, n_)));
        for (std::uint64_t i = 0; i < n_; ++i) {
            buf.push_back({sign_u64(key(i), seed, width), value(i)});
            if (buf.size() == kChunk) {
                sink(buf);
                buf.clear();
            }
        }
        if (!buf.empty()) sink(buf);
    }

  private:
    static constexpr std::uint64_t fmix_splitmix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t n_;
    std::uint64_t key_seed_;
    unsigned value_bits_;
};

}  // namespace vsx
