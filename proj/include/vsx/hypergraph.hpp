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
/// Peeling of 3-hypergraphs generated from local signatures.
///
/// Incidence lists are compressed to a single XOR per vertex (the XOR of the
/// representations of the incident edges) plus a byte holding the degree in
/// its upper six bits and the XOR of the sides in the lower two. When the
/// degree is one, the XOR slot is the only incident edge and the side bits
/// say which position of that edge the vertex occupies.
///
/// Edges are represented either by their index in the shard (peel by index,
/// needed to solve an unpeeled core afterwards) or by their local signature
/// and target (peel by signature, no indirection during the visit). The
/// visit keeps either a stack of peeled edges (high memory) or, in a single
/// array of one index per vertex, the visit stack growing upwards and the
/// stack of peeled vertices growing downwards (low memory); in the latter
/// case the peeled edge is left in the XOR slot of its vertex.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "vsx/bitslab.hpp"
#include "vsx/gf2.hpp"
#include "vsx/hypergraph_types.hpp"

namespace vsx {

enum class PeelBy : std::uint8_t { index, signature };
enum class VisitMemory : std::uint8_t { high, low };

struct PeelStrategy {
    PeelBy by = PeelBy::signature;
    VisitMemory memory = VisitMemory::high;

    friend bool operator==(const PeelStrategy&, const PeelStrategy&) = default;
};

//! Edge payload for peel by signature.
struct SigPayload {
    std::uint64_t local = 0;
    std::uint64_t target = 0;

    SigPayload& operator^=(const SigPayload& o) noexcept {
        local ^= o.local;
        target ^= o.target;
        return *this;
    }
};

template <class Rep>
struct Incidence {
    static_assert(std::is_same_v<Rep, std::uint32_t> || std::is_same_v<Rep, SigPayload>);

    std::vector<std::uint8_t> deg_side;
    std::vector<Rep> xors;
    bool overflow = false;  //!< some vertex exceeded degree 63

    [[nodiscard]] unsigned degree(std::uint64_t v) const noexcept { return deg_side[v] >> 2; }
    [[nodiscard]] unsigned side(std::uint64_t v) const noexcept { return deg_side[v] & 3; }
    [[nodiscard]] std::size_t num_vertices() const noexcept { return deg_side.size(); }
};

using IndexIncidence = Incidence<std::uint32_t>;
using SignatureIncidence = Incidence<SigPayload>;

template <class Rep>
struct PeeledEdge {
    Rep rep{};
    std::uint8_t side = 0;
};

template <class Rep>
struct PeelResult {
    VisitMemory memory = VisitMemory::high;
    std::vector<PeeledEdge<Rep>> edge_stack;    //!< high memory: peeled edges, in peel order
    std::vector<std::uint32_t> vertex_stack;    //!< low memory: shared visit/peeled array
    std::size_t peeled_top = 0;                 //!< low memory: peeled vertices live in [peeled_top, size)
    std::size_t num_peeled = 0;
    std::vector<std::uint32_t> core;            //!< indices of unpeeled edges
    bool overflow = false;

    [[nodiscard]] bool success() const noexcept { return core.empty() && !overflow; }
};

namespace detail {

inline void check_shard_size(std::size_t edges, std::uint64_t vertices) {
    if (edges > 0xffffffffULL || vertices > 0xffffffffULL)
        throw std::length_error("hypergraph: shards are limited to 2^32 edges and vertices");
}

template <class Rep>
void add_edge(Incidence<Rep>& inc, const Edge& e, const Rep& rep) noexcept {
    for (unsigned j = 0; j < 3; ++j) {
        const auto v = e[j];
        if (inc.deg_side[v] >= 0xfc) {
            inc.overflow = true;
            continue;
        }
        inc.deg_side[v] = static_cast<std::uint8_t>((inc.deg_side[v] + 4) ^ j);
        inc.xors[v] ^= rep;
    }
}

}  // namespace detail

//! Incidence for peel by index: XOR of edge indices.
[[nodiscard]] inline IndexIncidence build_incidence(const EdgeGenerator& gen, std::span<const std::uint64_t> locals) {
    detail::check_shard_size(locals.size(), gen.num_vertices());
    IndexIncidence inc;
    inc.deg_side.assign(gen.num_vertices(), 0);
    inc.xors.assign(gen.num_vertices(), 0);
    for (std::size_t i = 0; i < locals.size(); ++i)
        detail::add_edge(inc, gen.make_edge(locals[i]), static_cast<std::uint32_t>(i));
    return inc;
}

//! Incidence for peel by signature: XOR of (local signature, target).
[[nodiscard]] inline SignatureIncidence build_incidence(const EdgeGenerator& gen, std::span<const std::uint64_t> locals,
                                                        std::span<const std::uint64_t> targets) {
    detail::check_shard_size(locals.size(), gen.num_vertices());
    SignatureIncidence inc;
    inc.deg_side.assign(gen.num_vertices(), 0);
    inc.xors.assign(gen.num_vertices(), SigPayload{});
    for (std::size_t i = 0; i < locals.size(); ++i)
        detail::add_edge(inc, gen.make_edge(locals[i]), SigPayload{locals[i], targets[i]});
    return inc;
}

//! Recovers edges and targets from representations.
struct EdgeResolver {
    const EdgeGenerator& gen;
    std::span<const std::uint64_t> locals;
    std::span<const std::uint64_t> targets;

    [[nodiscard]] Edge edge(std::uint32_t i) const noexcept { return gen.make_edge(locals[i]); }
    [[nodiscard]] Edge edge(const SigPayload& p) const noexcept { return gen.make_edge(p.local); }
    [[nodiscard]] std::uint64_t target(std::uint32_t i) const noexcept { return targets[i]; }
    [[nodiscard]] std::uint64_t target(const SigPayload& p) const noexcept { return p.target; }
};

//! Indices of the edges that survive a peel: those whose three vertices
//! still have positive degree (a peeled edge leaves its peeled vertex at
//! degree zero).
template <class Rep>
[[nodiscard]] std::vector<std::uint32_t> unpeeled_edges(const Incidence<Rep>& inc, const EdgeGenerator& gen,
                                                       std::span<const std::uint64_t> locals) {
    std::vector<std::uint32_t> core;
    for (std::size_t i = 0; i < locals.size(); ++i) {
        const Edge e = gen.make_edge(locals[i]);
        if (inc.degree(e[0]) && inc.degree(e[1]) && inc.degree(e[2])) core.push_back(static_cast<std::uint32_t>(i));
    }
    return core;
}

//! Stack-based peeling visit. All initial degree-1 vertices are pushed first;
//! each vertex enters the visit stack at most once. `locals` (all edges of
//! the shard) is only read to list the core when peeling fails.
template <class Rep>
[[nodiscard]] PeelResult<Rep> peel(Incidence<Rep>& inc, const EdgeGenerator& gen, std::span<const std::uint64_t> locals,
                                   VisitMemory memory) {
    PeelResult<Rep> res;
    res.memory = memory;
    const std::size_t nv = inc.num_vertices();
    const std::size_t m = locals.size();
    if (inc.overflow) {
        res.overflow = true;
        res.core.resize(m);
        for (std::size_t i = 0; i < m; ++i) res.core[i] = static_cast<std::uint32_t>(i);
        return res;
    }
    const EdgeResolver resolve{gen, locals, {}};

    std::vector<std::uint32_t> high_stack;
    std::vector<std::uint32_t>& buf = memory == VisitMemory::low ? res.vertex_stack : high_stack;
    std::size_t top = 0;            // visit stack: buf[0, top)
    std::size_t peeled_top = nv;    // low memory: peeled vertices in buf[peeled_top, nv)
    if (memory == VisitMemory::low) {
        buf.assign(nv, 0);
    } else {
        buf.reserve(64);
        res.edge_stack.reserve(m);
    }
    auto push = [&](std::uint32_t v) {
        if (memory == VisitMemory::low) {
            buf[top++] = v;
        } else {
            buf.push_back(v);
        }
    };

    for (std::size_t v = 0; v < nv; ++v)
        if (inc.degree(v) == 1) push(static_cast<std::uint32_t>(v));

    while (memory == VisitMemory::low ? top > 0 : !buf.empty()) {
        std::uint32_t v;
        if (memory == VisitMemory::low) {
            v = buf[--top];
        } else {
            v = buf.back();
            buf.pop_back();
        }
        if (inc.degree(v) == 0) continue;

        const unsigned side = inc.side(v);
        const Rep rep = inc.xors[v];
        const Edge e = resolve.edge(rep);
        if (memory == VisitMemory::low) {
            buf[--peeled_top] = v;
            inc.deg_side[v] &= 3;  // degree zero, side kept for assignment
        } else {
            res.edge_stack.push_back({rep, static_cast<std::uint8_t>(side)});
            inc.deg_side[v] = 0;
        }
        ++res.num_peeled;

        for (unsigned j = 0; j < 3; ++j) {
            if (j == side) continue;
            const auto u = e[j];
            inc.xors[u] ^= rep;
            inc.deg_side[u] = static_cast<std::uint8_t>((inc.deg_side[u] - 4) ^ j);
            if (inc.degree(u) == 1) push(static_cast<std::uint32_t>(u));
        }
    }
    res.peeled_top = peeled_top;
    if (res.num_peeled < m) res.core = unpeeled_edges(inc, gen, locals);
    return res;
}

//! Calls f(rep, side) for each peeled edge, in peel order.
template <class Rep, class F>
void for_each_peeled(const PeelResult<Rep>& res, const Incidence<Rep>& inc, F&& f) {
    if (res.memory == VisitMemory::high) {
        for (const auto& pe : res.edge_stack) f(pe.rep, static_cast<unsigned>(pe.side));
    } else {
        for (std::size_t k = res.vertex_stack.size(); k-- > res.peeled_top;) {
            const auto v = res.vertex_stack[k];
            f(inc.xors[v], inc.side(v));
        }
    }
}

//! Sets, in reverse peel order, the peeled vertex of each edge to the edge
//! target XOR the other two vertices. Values of core vertices must already
//! be in the slab. `base` is the slab index of vertex 0.
template <class Rep>
void assign(const PeelResult<Rep>& res, const Incidence<Rep>& inc, const EdgeResolver& resolve, BitSlab& slab,
            std::uint64_t base = 0) {
    auto one = [&](const Rep& rep, unsigned side) {
        const Edge e = resolve.edge(rep);
        const unsigned a = side == 0 ? 1 : 0;
        const unsigned b = side == 2 ? 1 : 2;
        slab.set(base + e[side], resolve.target(rep) ^ slab.get(base + e[a]) ^ slab.get(base + e[b]));
    };
    if (res.memory == VisitMemory::high) {
        for (auto it = res.edge_stack.rbegin(); it != res.edge_stack.rend(); ++it) one(it->rep, it->side);
    } else {
        for (std::size_t k = res.peeled_top; k < res.vertex_stack.size(); ++k) {
            const auto v = res.vertex_stack[k];
            one(inc.xors[v], inc.side(v));
        }
    }
}

//! A GF(2) system over the vertices touched by a set of edges.
struct CoreSystem {
    SparseSystem system;
    std::vector<std::uint64_t> vertex_of;  //!< variable -> vertex
};

//! One equation per core edge, variables renumbered densely.
[[nodiscard]] CoreSystem core_to_system(std::span<const std::uint32_t> core, const EdgeResolver& resolve);

//! Writes a solved core into the slab.
void store_core_solution(const CoreSystem& cs, const Solution& sol, BitSlab& slab, std::uint64_t base = 0);

//! Peels and assigns with the given strategy; if the peel leaves a core and
//! `solve_core` is set, the core is solved by lazy Gaussian elimination
//! first (requires PeelBy::index). Returns false when no solution was found.
struct SolveStats {
    std::size_t edges = 0;
    std::size_t peeled = 0;
    std::size_t core = 0;
    std::size_t active = 0;
};

[[nodiscard]] bool solve_shard(const EdgeGenerator& gen, std::span<const std::uint64_t> locals,
                               std::span<const std::uint64_t> targets, PeelStrategy strategy, bool solve_core,
                               BitSlab& slab, SolveStats* stats = nullptr);

//! Peel by index, low-memory visit, lazy Gaussian elimination on the core.
[[nodiscard]] inline bool solve_small_shard(const EdgeGenerator& gen, std::span<const std::uint64_t> locals,
                                            std::span<const std::uint64_t> targets, BitSlab& slab,
                                            SolveStats* stats = nullptr) {
    return solve_shard(gen, locals, targets, {PeelBy::index, VisitMemory::low}, true, slab, stats);
}

}  // namespace vsx
