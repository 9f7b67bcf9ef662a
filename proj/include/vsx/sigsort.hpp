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
#include <optional>
#include <vector>

#include "vsx/signature.hpp"

namespace vsx {

enum class DedupMode : std::uint8_t { filter, function };

struct DedupReport {
    std::size_t exact_duplicates = 0;  //!< identical signatures collapsed
    std::size_t local_duplicates = 0;  //!< same shard and local signature, equal targets, collapsed
};

//! Sorts by signature, i.e. by (shard, local signature). Since the fuse
//! segment and first vertex are monotone in the local signature, this is
//! also the order in which edges are laid out in memory. LSD byte radix sort
//! on `hi` (constant digits are skipped), then equal-`hi` runs by `lo`.
void sort_signatures(std::vector<SigVal>& pairs);

//! Removes duplicates from a sorted sequence, in place.
//!
//! Exact signature duplicates are dropped in filter mode and, when values
//! agree, in function mode; differing values throw DuplicateSignatureConflict.
//! If `shard_bits` is given, distinct signatures sharing shard and local
//! signature are also examined: they map to the same edge, so one is kept
//! when the targets agree (always, for filters) and DuplicateLocalSignature
//! is thrown otherwise.
DedupReport dedup_sorted(std::vector<SigVal>& pairs, DedupMode mode,
                         std::optional<unsigned> shard_bits = std::nullopt);

//! sort_signatures followed by dedup_sorted.
DedupReport sort_dedup(std::vector<SigVal>& pairs, DedupMode mode,
                       std::optional<unsigned> shard_bits = std::nullopt);

}  // namespace vsx
