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

#include "vsx/gf2.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>

namespace vsx {

void SparseSystem::add_equation(std::span<const std::uint32_t> vars, std::uint64_t target) {
    std::vector<std::uint32_t> v(vars.begin(), vars.end());
    for (auto x : v)
        if (x >= num_vars_) throw std::out_of_range("SparseSystem: variable index out of range");
    std::sort(v.begin(), v.end());
    // Drop pairs of equal variables.
    std::size_t out = 0;
    for (std::size_t i = 0; i < v.size();) {
        std::size_t j = i;
        while (j < v.size() && v[j] == v[i]) ++j;
        if ((j - i) % 2 == 1) v[out++] = v[i];
        i = j;
    }
    v.resize(out);
    vars_.insert(vars_.end(), v.begin(), v.end());
    offsets_.push_back(vars_.size());
    targets_.push_back(target);
}

bool verify(const SparseSystem& sys, const Solution& s) {
    if (!s.solvable || s.assignment.size() != sys.num_vars()) return false;
    for (std::size_t e = 0; e < sys.size(); ++e) {
        std::uint64_t x = 0;
        for (auto v : sys.equation(e)) x ^= s.assignment[v];
        if (x != sys.target(e)) return false;
    }
    return true;
}

namespace {

// Elimination on `num_rows` rows of `cols` bits stored contiguously; writes
// one value per column (free columns are zero). Returns false if the rows
// are inconsistent.
bool solve_dense(std::vector<std::uint64_t>& matrix, std::vector<std::uint64_t>& rhs, std::size_t num_rows,
                 std::size_t cols, std::vector<std::uint64_t>& values) {
    const std::size_t words = (cols + 63) / 64;
    auto row = [&](std::size_t r) { return matrix.data() + r * words; };
    std::vector<std::size_t> pivot_col;
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < num_rows; ++c) {
        const std::size_t w = c / 64;
        const std::uint64_t bit = std::uint64_t{1} << (c % 64);
        std::size_t p = rank;
        while (p < num_rows && !(row(p)[w] & bit)) ++p;
        if (p == num_rows) continue;
        if (p != rank) {
            std::swap_ranges(row(p) + w, row(p) + words, row(rank) + w);
            std::swap(rhs[p], rhs[rank]);
        }
        const std::uint64_t* pr = row(rank);
        for (std::size_t r = rank + 1; r < num_rows; ++r) {
            std::uint64_t* rr = row(r);
            if (!(rr[w] & bit)) continue;
            for (std::size_t k = w; k < words; ++k) rr[k] ^= pr[k];
            rhs[r] ^= rhs[rank];
        }
        pivot_col.push_back(c);
        ++rank;
    }
    for (std::size_t r = rank; r < num_rows; ++r)
        if (rhs[r] != 0) return false;
    values.assign(cols, 0);
    for (std::size_t r = rank; r-- > 0;) {
        const std::uint64_t* rr = row(r);
        std::uint64_t x = rhs[r];
        for (std::size_t w = pivot_col[r] / 64; w < words; ++w) {
            std::uint64_t bits = rr[w];
            if (w == pivot_col[r] / 64) bits &= ~((std::uint64_t{2} << (pivot_col[r] % 64)) - 1);
            while (bits) {
                x ^= values[w * 64 + static_cast<std::size_t>(std::countr_zero(bits))];
                bits &= bits - 1;
            }
        }
        values[pivot_col[r]] = x;
    }
    return true;
}

}  // namespace

Solution lazy_gaussian_solve(const SparseSystem& sys, LazyStats* stats) {
    const std::size_t neq = sys.size();
    const std::size_t nvars = sys.num_vars();
    Solution sol;
    LazyStats local_stats;
    LazyStats& st = stats ? *stats : local_stats;
    st = {};

    std::vector<std::uint32_t> idle_count(neq);
    std::vector<std::size_t> occ_begin(nvars + 1, 0);
    for (std::size_t e = 0; e < neq; ++e) {
        auto eq = sys.equation(e);
        idle_count[e] = static_cast<std::uint32_t>(eq.size());
        for (auto v : eq) ++occ_begin[v + 1];
    }
    std::partial_sum(occ_begin.begin(), occ_begin.end(), occ_begin.begin());
    std::vector<std::uint32_t> occ(occ_begin.back());
    {
        std::vector<std::size_t> fill(occ_begin.begin(), occ_begin.end() - 1);
        for (std::size_t e = 0; e < neq; ++e)
            for (auto v : sys.equation(e)) occ[fill[v]++] = static_cast<std::uint32_t>(e);
    }

    // Eliminating a variable only ever adds active variables to the other
    // equations, so the number of idle variables of an equation can be
    // tracked on the original rows. The first pass therefore decides which
    // variables become active and which equation solves each remaining
    // variable without touching any row.
    //
    // Occurrence counts never change while a variable is idle, so the
    // activation order can be fixed up front.
    std::vector<std::uint32_t> by_weight(nvars);
    std::iota(by_weight.begin(), by_weight.end(), 0u);
    std::stable_sort(by_weight.begin(), by_weight.end(), [&](std::uint32_t a, std::uint32_t b) {
        return occ_begin[a + 1] - occ_begin[a] > occ_begin[b + 1] - occ_begin[b];
    });

    enum : std::uint8_t { kIdle, kActive, kSolved };
    std::vector<std::uint8_t> state(nvars, kIdle);
    std::vector<std::uint8_t> processed(neq, 0);
    std::size_t processed_count = 0;
    std::vector<std::uint32_t> work;
    for (std::size_t e = 0; e < neq; ++e)
        if (idle_count[e] <= 1) work.push_back(static_cast<std::uint32_t>(e));

    // Elimination events in order: the equation, and the variable it solves
    // or kNone for an equation left with active variables only.
    constexpr std::uint32_t kNone = ~std::uint32_t{0};
    std::vector<std::pair<std::uint32_t, std::uint32_t>> events;
    std::size_t next_candidate = 0;

    while (processed_count < neq) {
        while (!work.empty()) {
            const std::uint32_t e = work.back();
            work.pop_back();
            if (processed[e]) continue;
            processed[e] = 1;
            ++processed_count;
            if (idle_count[e] == 0) {
                events.emplace_back(e, kNone);
                continue;
            }
            std::uint32_t v = 0;
            for (auto x : sys.equation(e))
                if (state[x] == kIdle) {
                    v = x;
                    break;
                }
            state[v] = kSolved;
            events.emplace_back(e, v);
            for (std::size_t k = occ_begin[v]; k < occ_begin[v + 1]; ++k) {
                const std::uint32_t e2 = occ[k];
                if (!processed[e2] && --idle_count[e2] <= 1) work.push_back(e2);
            }
        }
        if (processed_count == neq) break;

        while (next_candidate < nvars && state[by_weight[next_candidate]] != kIdle) ++next_candidate;
        if (next_candidate == nvars) break;  // unreachable: stalled equations are queued
        const std::uint32_t u = by_weight[next_candidate++];
        state[u] = kActive;
        for (std::size_t k = occ_begin[u]; k < occ_begin[u + 1]; ++k) {
            const std::uint32_t e = occ[k];
            if (!processed[e] && --idle_count[e] <= 1) work.push_back(e);
        }
    }

    std::vector<std::uint32_t> column(nvars, kNone);
    std::vector<std::uint32_t> active;
    for (std::uint32_t v = 0; v < nvars; ++v)
        if (state[v] == kActive) {
            column[v] = static_cast<std::uint32_t>(active.size());
            active.push_back(v);
        }
    st.active = active.size();

    // Second pass: express every solved variable as an affine function of the
    // active ones, replaying the events. A solved variable only appears in
    // equations processed after it, so its expression is dropped once the
    // last of them has been replayed.
    const std::size_t words = (active.size() + 63) / 64;
    std::vector<std::uint32_t> uses(nvars, 0);
    for (const auto& [e, v] : events)
        for (auto x : sys.equation(e))
            if (x != v && state[x] == kSolved) ++uses[x];

    std::vector<std::uint32_t> slot(nvars, kNone);
    std::vector<std::uint64_t> pool;       // expressions, `words` bits each
    std::vector<std::uint64_t> constants;  // per slot
    std::vector<std::uint32_t> free_slots;
    std::vector<std::uint64_t> row(words);

    std::vector<std::uint64_t> matrix;  // dense equations, `words` each
    std::vector<std::uint64_t> rhs;
    std::size_t dense_rows = 0;

    for (const auto& [e, v] : events) {
        std::fill(row.begin(), row.end(), 0);
        std::uint64_t constant = sys.target(e);
        for (auto x : sys.equation(e)) {
            if (x == v) continue;
            if (state[x] == kActive) {
                row[column[x] / 64] ^= std::uint64_t{1} << (column[x] % 64);
                continue;
            }
            const std::uint32_t s = slot[x];
            const std::uint64_t* src = pool.data() + std::size_t{s} * words;
            for (std::size_t k = 0; k < words; ++k) row[k] ^= src[k];
            constant ^= constants[s];
            if (--uses[x] == 0) {
                free_slots.push_back(s);
                slot[x] = kNone;
            }
        }
        if (v == kNone) {
            matrix.insert(matrix.end(), row.begin(), row.end());
            rhs.push_back(constant);
            ++dense_rows;
            continue;
        }
        if (uses[v] == 0) continue;
        std::uint32_t s;
        if (!free_slots.empty()) {
            s = free_slots.back();
            free_slots.pop_back();
        } else {
            s = static_cast<std::uint32_t>(constants.size());
            constants.push_back(0);
            pool.resize(pool.size() + words);
        }
        std::copy(row.begin(), row.end(), pool.begin() + static_cast<std::ptrdiff_t>(std::size_t{s} * words));
        constants[s] = constant;
        slot[v] = s;
    }
    pool = {};
    constants = {};

    std::vector<std::uint64_t> active_values;
    if (!solve_dense(matrix, rhs, dense_rows, active.size(), active_values)) return sol;

    // Back substitution in event order: every other variable of a solving
    // equation is active or was solved earlier.
    sol.assignment.assign(nvars, 0);
    for (std::size_t i = 0; i < active.size(); ++i) sol.assignment[active[i]] = active_values[i];
    std::size_t solved = 0;
    for (const auto& [e, v] : events) {
        if (v == kNone) continue;
        std::uint64_t x = sys.target(e);
        for (auto a : sys.equation(e))
            if (a != v) x ^= sol.assignment[a];
        sol.assignment[v] = x;
        ++solved;
    }
    sol.solvable = true;
    st.solved = solved;
    st.dense_equations = dense_rows;
    return sol;
}

Solution dense_solve_oracle(const SparseSystem& sys) {
    const std::size_t n = sys.num_vars();
    if (n > kDenseOracleMaxVars) throw std::length_error("dense_solve_oracle: too many variables");
    const std::size_t m = sys.size();
    const std::size_t words = (n + 63) / 64;

    std::vector<std::uint64_t> a(m * words, 0);
    std::vector<std::uint64_t> b(m);
    auto row = [&](std::size_t r) { return a.data() + r * words; };
    for (std::size_t r = 0; r < m; ++r) {
        for (auto v : sys.equation(r)) row(r)[v / 64] ^= std::uint64_t{1} << (v % 64);
        b[r] = sys.target(r);
    }

    // Forward elimination to row echelon form.
    std::vector<std::size_t> pivots;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < n && rank < m; ++col) {
        const auto bit = std::uint64_t{1} << (col % 64);
        std::size_t sel = m;
        for (std::size_t r = rank; r < m; ++r)
            if (row(r)[col / 64] & bit) {
                sel = r;
                break;
            }
        if (sel == m) continue;
        if (sel != rank) {
            std::swap_ranges(row(sel), row(sel) + words, row(rank));
            std::swap(b[sel], b[rank]);
        }
        for (std::size_t r = rank + 1; r < m; ++r)
            if (row(r)[col / 64] & bit) {
                for (std::size_t k = 0; k < words; ++k) row(r)[k] ^= row(rank)[k];
                b[r] ^= b[rank];
            }
        pivots.push_back(col);
        ++rank;
    }

    Solution sol;
    for (std::size_t r = rank; r < m; ++r)
        if (b[r] != 0) return sol;

    // Back substitution, free variables zero.
    sol.assignment.assign(n, 0);
    for (std::size_t r = rank; r-- > 0;) {
        std::uint64_t x = b[r];
        for (std::size_t col = pivots[r] + 1; col < n; ++col)
            if (row(r)[col / 64] & (std::uint64_t{1} << (col % 64))) x ^= sol.assignment[col];
        sol.assignment[pivots[r]] = x;
    }
    sol.solvable = true;
    return sol;
}

}  // namespace vsx
