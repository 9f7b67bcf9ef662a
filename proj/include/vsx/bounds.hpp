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
/// Closed-form shard-count mathematics.
///
/// Sharding n keys into S = 2^h equal-budget shards wastes space only through
/// the largest shard. Treating shard assignment as balls into bins, the
/// maximum load stays within (1 + epsilon) of the mean as long as
///
///     ln S <= W(n epsilon^2 / (2 alpha^2)),
///
/// W being the principal branch of Lambert's function. All shards share one
/// seed, so S is further limited by the probability that some shard contains
/// a duplicate edge, which depends on the hypergraph construction.

#include <cstdint>
#include <string>

#include "vsx/hypergraph_types.hpp"

namespace vsx {

//! Principal branch of Lambert's W (w e^w = x) for x >= 0, computed by
//! Halley iteration. Throws std::domain_error for negative or NaN x.
[[nodiscard]] double lambert_w0(double x);

struct EpsilonCostParams {
    std::uint64_t n = 1;
    double epsilon = 0.001;
    double alpha = 1.0;
};

//! Largest h such that ln(2^h) <= W(n epsilon^2 / (2 alpha^2)).
[[nodiscard]] unsigned max_shard_bits_balls_bins(const EpsilonCostParams& p);

//! Raab-Steger estimate of the largest of `shards` bins when throwing `n`
//! balls: n/s + alpha sqrt(2 (n/s) ln s).
[[nodiscard]] double expected_max_load(std::uint64_t n, std::uint64_t shards, double alpha = 1.0);

//! exp(-t (t - 1) / 2n): upper bound (and good approximation for t << n) of
//! the probability that t uniform draws out of n contain no repetition.
[[nodiscard]] double birthday_no_dup_prob(double t, double n);

struct DupBoundParams {
    std::uint64_t n = 1;
    double c = 1.23;
    double eta = 1e-3;        //!< total failure budget across all shards
    double seg_alpha = 0.41;  //!< lg(segment size) = seg_alpha ln m ln ln m + seg_beta
    double seg_beta = -3.0;
};

//! Largest power of two S <= sqrt(-2 n (c/3)^3 ln(1 - eta)) (at least 1):
//! shard count keeping the chance of a duplicate 3-partite edge in any shard
//! below eta.
[[nodiscard]] std::uint64_t max_shards_mwhc_dup(const DupBoundParams& p);

//! lg of the fuse segment size for a shard of n keys when sharding:
//! 0.41 ln n ln ln n - 3. Throws std::domain_error for n < 3.
[[nodiscard]] double fuse_segment_bits(double n);

//! The O(log n) alternative log_3.33(n) + 2.25 used for unsharded fuse
//! graphs. Throws std::domain_error for n < 1.
[[nodiscard]] double fuse_segment_bits_log(double n);

//! Segment-size estimate with custom constants (seg_alpha ln n ln ln n +
//! seg_beta).
[[nodiscard]] double fuse_segment_bits(double n, double seg_alpha, double seg_beta);

//! Largest power of two S such that segments of 2^fuse_segment_bits(n/S)
//! vertices keep the duplicate-edge probability over all shards below eta,
//! solved in closed form with W:
//!
//!     A = (lg(-n / (2 c ln(1 - eta))) - 2 beta) / (2 alpha)
//!     S <= n exp(-A / W(A)).
[[nodiscard]] std::uint64_t max_shards_fuse_dup(const DupBoundParams& p);

struct ShardingParams {
    std::uint64_t n = 0;
    double epsilon = 0.001;
    double alpha = 1.0;
    Construction construction = Construction::fuse;
    double c = 1.105;
    double eta = 1e-3;
    std::uint64_t max_shards = 4096;
    std::uint64_t min_fuse_shard_keys = 10'000'000;
};

//! Every constraint on the number of sharding bits, and their minimum.
struct ShardBits {
    unsigned h = 0;
    unsigned balls_bins = 0;   //!< (1 + epsilon) max/mean load
    unsigned duplicates = 0;   //!< duplicate-edge budget eta
    unsigned min_size = 64;    //!< fuse shards never below min_fuse_shard_keys (64 = no constraint)
    unsigned rough_size = 0;   //!< expected shard size >= 2 / epsilon^2
    unsigned cap = 0;          //!< global shard cap
    std::string binding;       //!< name of the tightest constraint
};

[[nodiscard]] ShardBits resolve_shard_bits(const ShardingParams& p);

}  // namespace vsx
