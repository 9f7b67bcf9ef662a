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

#include "vsx/sigsort.hpp"

#include <algorithm>
#include <array>

#include <fmt/format.h>

#include "vsx/error.hpp"

namespace vsx {

void sort_signatures(std::vector<SigVal>& pairs) {
    const std::size_t n = pairs.size();
    if (n < 2) return;
    if (n < 256) {
        std::sort(pairs.begin(), pairs.end(), [](const SigVal& a, const SigVal& b) {
            return a.sig < b.sig || (a.sig == b.sig && a.value < b.value);
        });
        return;
    }

    std::array<std::array<std::size_t, 256>, 8> counts{};
    for (const auto& p : pairs)
        for (int d = 0; d < 8; ++d) ++counts[d][(p.sig.hi >> (8 * d)) & 0xff];

    std::vector<SigVal> scratch(n);
    std::vector<SigVal>* src = &pairs;
    std::vector<SigVal>* dst = &scratch;
    for (int d = 0; d < 8; ++d) {
        auto& c = counts[d];
        if (std::any_of(c.begin(), c.end(), [n](std::size_t x) { return x == n; })) continue;
        std::array<std::size_t, 256> pos;
        std::size_t sum = 0;
        for (int i = 0; i < 256; ++i) {
            pos[i] = sum;
            sum += c[i];
        }
        const int shift = 8 * d;
        for (const auto& p : *src) (*dst)[pos[(p.sig.hi >> shift) & 0xff]++] = p;
        std::swap(src, dst);
    }
    if (src != &pairs) pairs.swap(scratch);

    // Runs of equal `hi` are essentially always singletons.
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && pairs[j].sig.hi == pairs[i].sig.hi) ++j;
        if (j - i > 1)
            std::sort(pairs.begin() + static_cast<std::ptrdiff_t>(i), pairs.begin() + static_cast<std::ptrdiff_t>(j),
                      [](const SigVal& a, const SigVal& b) {
                          return a.sig.lo < b.sig.lo || (a.sig.lo == b.sig.lo && a.value < b.value);
                      });
        i = j;
    }
}

DedupReport dedup_sorted(std::vector<SigVal>& pairs, DedupMode mode, std::optional<unsigned> shard_bits) {
    DedupReport report;
    if (pairs.empty()) return report;

    std::size_t out = 1;
    for (std::size_t i = 1; i < pairs.size(); ++i) {
        const SigVal& prev = pairs[out - 1];
        const SigVal& cur = pairs[i];
        if (cur.sig == prev.sig) {
            if (mode == DedupMode::function && cur.value != prev.value)
                throw DuplicateSignatureConflict(
                    fmt::format("signature {:016x}{:016x} maps to values {} and {}", cur.sig.hi, cur.sig.lo,
                                prev.value, cur.value));
            ++report.exact_duplicates;
            continue;
        }
        if (shard_bits) {
            const auto a = assign_shard(prev.sig, *shard_bits);
            const auto b = assign_shard(cur.sig, *shard_bits);
            if (a.shard == b.shard && a.local == b.local) {
                if (mode == DedupMode::function && cur.value != prev.value)
                    throw DuplicateLocalSignature(
                        fmt::format("shard {} has two signatures with local signature {:016x}", a.shard, a.local));
                ++report.local_duplicates;
                continue;
            }
        }
        pairs[out++] = cur;
    }
    pairs.resize(out);
    return report;
}

DedupReport sort_dedup(std::vector<SigVal>& pairs, DedupMode mode, std::optional<unsigned> shard_bits) {
    sort_signatures(pairs);
    return dedup_sorted(pairs, mode, shard_bits);
}

}  // namespace vsx
