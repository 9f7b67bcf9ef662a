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

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>

#include "vsx/signature.hpp"

namespace vsx {

//! Random 3-partite hypergraphs (mwhc) or fuse graphs with 3 consecutive
//! segments per edge (fuse).
enum class Construction : std::uint8_t { mwhc = 0, fuse = 1 };

[[nodiscard]] constexpr const char* to_string(Construction c) noexcept {
    return c == Construction::mwhc ? "mwhc" : "fuse";
}

struct Edge {
    std::array<std::uint64_t, 3> v{};

    [[nodiscard]] constexpr std::uint64_t operator[](std::size_t i) const noexcept { return v[i]; }
    friend constexpr bool operator==(const Edge&, const Edge&) = default;
};

//! Maps a local signature to an edge of a 3-hypergraph.
//!
//! mwhc: the vertices are split in three parts of `segment_size` vertices and
//! the edge takes one vertex per part. fuse: (segments + 2) segments of
//! 2^log2_segment_size vertices; an edge picks a segment s in [0, segments)
//! and one vertex in each of s, s + 1, s + 2.
//!
//! In both cases the first vertex is fixed_point_map(local, ...), so it is
//! monotone in the local signature: sorted signatures give edges sorted by
//! first vertex. The other offsets come from fmix64(local).
class EdgeGenerator {
  public:
    EdgeGenerator() = default;

    static EdgeGenerator mwhc(std::uint64_t part_size) {
        if (part_size == 0) throw std::invalid_argument("EdgeGenerator: empty part");
        EdgeGenerator g;
        g.kind_ = Construction::mwhc;
        g.segment_size_ = part_size;
        g.segments_ = 0;
        g.num_vertices_ = 3 * part_size;
        return g;
    }

    static EdgeGenerator fuse(unsigned log2_segment_size, std::uint64_t segments) {
        if (log2_segment_size > 32) throw std::invalid_argument("EdgeGenerator: segments larger than 2^32");
        if (segments == 0) throw std::invalid_argument("EdgeGenerator: need at least one segment");
        EdgeGenerator g;
        g.kind_ = Construction::fuse;
        g.log2_segment_size_ = log2_segment_size;
        g.segment_size_ = std::uint64_t{1} << log2_segment_size;
        g.segments_ = segments;
        g.num_vertices_ = (segments + 2) * g.segment_size_;
        return g;
    }

    [[nodiscard]] Construction kind() const noexcept { return kind_; }
    [[nodiscard]] std::uint64_t num_vertices() const noexcept { return num_vertices_; }
    //! Vertices per segment (fuse) or per part (mwhc).
    [[nodiscard]] std::uint64_t segment_size() const noexcept { return segment_size_; }
    //! Number of segment choices (fuse); 0 for mwhc.
    [[nodiscard]] std::uint64_t segments() const noexcept { return segments_; }
    [[nodiscard]] unsigned log2_segment_size() const noexcept { return log2_segment_size_; }

    [[nodiscard]] Edge make_edge(std::uint64_t local) const noexcept {
        const std::uint64_t r = fmix64(local);
        if (kind_ == Construction::fuse) {
            const std::uint64_t mask = segment_size_ - 1;
            const std::uint64_t v0 = fixed_point_map(local, segments_ << log2_segment_size_);
            const std::uint64_t base = (v0 & ~mask) + segment_size_;
            return {{v0, base | (r & mask), (base + segment_size_) | ((r >> 32) & mask)}};
        }
        const std::uint64_t p = segment_size_;
        return {{fixed_point_map(local, p), p + fixed_point_map(r, p), 2 * p + fixed_point_map(std::rotl(r, 32), p)}};
    }

    //! Segment (fuse) or part (mwhc, always 0) of the edge's first vertex.
    [[nodiscard]] std::uint64_t first_segment(std::uint64_t local) const noexcept {
        return kind_ == Construction::fuse ? fixed_point_map(local, segments_) : 0;
    }

    friend bool operator==(const EdgeGenerator&, const EdgeGenerator&) = default;

  private:
    Construction kind_ = Construction::fuse;
    unsigned log2_segment_size_ = 0;
    std::uint64_t segment_size_ = 1;
    std::uint64_t segments_ = 1;
    std::uint64_t num_vertices_ = 3;
};

}  // namespace vsx
