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
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "vsx/signature.hpp"

namespace vsx {

//! Packed array of fixed-width values (1 to 64 bits each) stored in 64-bit
//! words, value i occupying bits [i*width, (i+1)*width). A read touches at
//! most two words.
//!
//! The words are either owned (mutable) or borrowed from an owner kept alive
//! by a shared pointer (read-only, e.g. a memory mapping).
class BitSlab {
  public:
    BitSlab() = default;

    BitSlab(unsigned width, std::uint64_t size) : width_(width), size_(size) {
        check_width(width);
        storage_.assign(words_for(width, size), 0);
    }

    static BitSlab borrow(unsigned width, std::uint64_t size, const std::uint64_t* words,
                          std::shared_ptr<const void> owner) {
        check_width(width);
        BitSlab s;
        s.width_ = width;
        s.size_ = size;
        s.borrowed_ = words;
        s.owner_ = std::move(owner);
        return s;
    }

    [[nodiscard]] static constexpr std::uint64_t words_for(unsigned width, std::uint64_t size) noexcept {
        return (static_cast<unsigned __int128>(size) * width + 63) / 64;
    }

    [[nodiscard]] unsigned width() const noexcept { return width_; }
    [[nodiscard]] std::uint64_t size() const noexcept { return size_; }
    [[nodiscard]] bool is_borrowed() const noexcept { return owner_ != nullptr; }

    [[nodiscard]] std::uint64_t get(std::uint64_t i) const noexcept {
        const std::uint64_t* w = data();
        const std::uint64_t pos = i * width_;
        const std::uint64_t word = pos >> 6;
        const unsigned shift = pos & 63;
        std::uint64_t v = w[word] >> shift;
        if (shift + width_ > 64) v |= w[word + 1] << (64 - shift);
        return v & low_mask(width_);
    }

    //! Stores the low `width` bits of value. Owned slabs only.
    void set(std::uint64_t i, std::uint64_t value) noexcept {
        std::uint64_t* w = storage_.data();
        const std::uint64_t mask = low_mask(width_);
        value &= mask;
        const std::uint64_t pos = i * width_;
        const std::uint64_t word = pos >> 6;
        const unsigned shift = pos & 63;
        w[word] = (w[word] & ~(mask << shift)) | (value << shift);
        if (shift + width_ > 64) {
            const unsigned spill = 64 - shift;
            w[word + 1] = (w[word + 1] & ~(mask >> spill)) | (value >> spill);
        }
    }

    [[nodiscard]] std::span<const std::uint64_t> words() const noexcept {
        return {data(), static_cast<std::size_t>(words_for(width_, size_))};
    }

    [[nodiscard]] std::span<std::uint64_t> mutable_words() {
        if (is_borrowed()) throw std::logic_error("BitSlab: borrowed slabs are read-only");
        return storage_;
    }

  private:
    static void check_width(unsigned width) {
        if (width == 0 || width > 64) throw std::invalid_argument("BitSlab: width must be in [1, 64]");
    }

    [[nodiscard]] const std::uint64_t* data() const noexcept { return owner_ ? borrowed_ : storage_.data(); }

    unsigned width_ = 1;
    std::uint64_t size_ = 0;
    std::vector<std::uint64_t> storage_;
    const std::uint64_t* borrowed_ = nullptr;
    std::shared_ptr<const void> owner_;
};

}  // namespace vsx
