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

#include "vsx/hypergraph.hpp"

#include <algorithm>
#include <array>

namespace vsx {

CoreSystem core_to_system(std::span<const std::uint32_t> core, const EdgeResolver& resolve) {
    CoreSystem cs;
    cs.vertex_of.reserve(core.size() * 3);
    for (auto i : core) {
        const Edge e = resolve.edge(i);
        cs.vertex_of.insert(cs.vertex_of.end(), e.v.begin(), e.v.end());
    }
    std::sort(cs.vertex_of.begin(), cs.vertex_of.end());
    cs.vertex_of.erase(std::unique(cs.vertex_of.begin(), cs.vertex_of.end()), cs.vertex_of.end());

    cs.system = SparseSystem(cs.vertex_of.size());
    std::array<std::uint32_t, 3> vars{};
    for (auto i : core) {
        const Edge e = resolve.edge(i);
        for (unsigned j = 0; j < 3; ++j)
            vars[j] = static_cast<std::uint32_t>(
                std::lower_bound(cs.vertex_of.begin(), cs.vertex_of.end(), e[j]) - cs.vertex_of.begin());
        cs.system.add_equation(vars, resolve.target(i));
    }
    return cs;
}

void store_core_solution(const CoreSystem& cs, const Solution& sol, BitSlab& slab, std::uint64_t base) {
    for (std::size_t k = 0; k < cs.vertex_of.size(); ++k) slab.set(base + cs.vertex_of[k], sol.assignment[k]);
}

namespace {

template <class Rep>
bool run(Incidence<Rep> inc, const EdgeGenerator& gen, std::span<const std::uint64_t> locals,
         std::span<const std::uint64_t> targets, VisitMemory memory, bool solve_core, BitSlab& slab,
         SolveStats* stats) {
    const EdgeResolver resolve{gen, locals, targets};
    auto res = peel(inc, gen, locals, memory);
    if (stats) {
        stats->edges = locals.size();
        stats->peeled = res.num_peeled;
        stats->core = res.core.size();
    }
    if (res.overflow) return false;
    if (!res.core.empty()) {
        if (!solve_core) return false;
        const auto cs = core_to_system(res.core, resolve);
        LazyStats ls;
        const auto sol = lazy_gaussian_solve(cs.system, &ls);
        if (stats) stats->active = ls.active;
        if (!sol.solvable) return false;
        store_core_solution(cs, sol, slab);
    }
    assign(res, inc, resolve, slab);
    return true;
}

}  // namespace

bool solve_shard(const EdgeGenerator& gen, std::span<const std::uint64_t> locals,
                 std::span<const std::uint64_t> targets, PeelStrategy strategy, bool solve_core, BitSlab& slab,
                 SolveStats* stats) {
    if (slab.size() < gen.num_vertices()) throw std::invalid_argument("solve_shard: slab smaller than the graph");
    if (targets.size() != locals.size()) throw std::invalid_argument("solve_shard: one target per edge required");
    if (strategy.by == PeelBy::index)
        return run(build_incidence(gen, locals), gen, locals, targets, strategy.memory, solve_core, slab, stats);
    return run(build_incidence(gen, locals, targets), gen, locals, targets, strategy.memory, solve_core, slab, stats);
}

}  // namespace vsx
