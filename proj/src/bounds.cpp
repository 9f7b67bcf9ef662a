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

#include "vsx/bounds.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vsx {

namespace {

// Largest h with 2^h <= x (x >= 1), clamped to 63.
unsigned floor_log2(double x) {
    if (!(x >= 2)) return 0;
    unsigned h = static_cast<unsigned>(std::min(63.0, std::floor(std::log2(x))));
    while (h > 0 && std::ldexp(1.0, static_cast<int>(h)) > x) --h;
    while (h < 63 && std::ldexp(1.0, static_cast<int>(h + 1)) <= x) ++h;
    return h;
}

}  // namespace

double lambert_w0(double x) {
    if (!(x >= 0)) throw std::domain_error("lambert_w0: argument must be non-negative");
    if (x == 0) return 0;
    if (std::isinf(x)) return x;

    double w;
    if (x < 1) {
        w = x / (1 + x);
    } else {
        const double l1 = std::log(x);
        const double l2 = std::log(l1 > 1 ? l1 : 1 + x);
        w = x < 3 ? std::log1p(x) * 0.75 : l1 - l2 + l2 / l1;
    }
    for (int i = 0; i < 64; ++i) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double wp1 = w + 1;
        const double step = f / (ew * wp1 - (w + 2) * f / (2 * wp1));
        w -= step;
        if (std::abs(step) <= 1e-16 * (1 + std::abs(w))) break;
    }
    return w;
}

unsigned max_shard_bits_balls_bins(const EpsilonCostParams& p) {
    const double arg = static_cast<double>(p.n) * p.epsilon * p.epsilon / (2 * p.alpha * p.alpha);
    const double bound = lambert_w0(arg);
    unsigned h = 0;
    while (h < 63 && (h + 1) * std::numbers::ln2 <= bound) ++h;
    return h;
}

double expected_max_load(std::uint64_t n, std::uint64_t shards, double alpha) {
    const double mean = static_cast<double>(n) / static_cast<double>(shards);
    if (shards <= 1) return mean;
    return mean + alpha * std::sqrt(2 * mean * std::log(static_cast<double>(shards)));
}

double birthday_no_dup_prob(double t, double n) {
    if (t <= 1) return 1;
    return std::exp(-t * (t - 1) / (2 * n));
}

std::uint64_t max_shards_mwhc_dup(const DupBoundParams& p) {
    const double r = p.c / 3;
    const double bound = std::sqrt(-2 * static_cast<double>(p.n) * r * r * r * std::log1p(-p.eta));
    return std::uint64_t{1} << floor_log2(bound);
}

double fuse_segment_bits(double n, double seg_alpha, double seg_beta) {
    if (!(n >= 3)) throw std::domain_error("fuse_segment_bits: need at least 3 keys");
    const double ln = std::log(n);
    return seg_alpha * ln * std::log(ln) + seg_beta;
}

double fuse_segment_bits(double n) { return fuse_segment_bits(n, 0.41, -3.0); }

double fuse_segment_bits_log(double n) {
    if (!(n >= 1)) throw std::domain_error("fuse_segment_bits_log: need at least one key");
    return std::log(n) / std::log(3.33) + 2.25;
}

std::uint64_t max_shards_fuse_dup(const DupBoundParams& p) {
    const double n = static_cast<double>(p.n);
    const double a = (std::log2(-n / (2 * p.c * std::log1p(-p.eta))) - 2 * p.seg_beta) / (2 * p.seg_alpha);
    // With a <= 0 any shard with ln ln(n/S) >= 0 qualifies.
    const double lg_s = a <= 0 ? std::log2(n / std::numbers::e)
                               : std::log2(n) - a / (std::numbers::ln2 * lambert_w0(a));
    if (!(lg_s >= 1)) return 1;
    return std::uint64_t{1} << std::min<unsigned>(63, static_cast<unsigned>(std::floor(lg_s)));
}

ShardBits resolve_shard_bits(const ShardingParams& p) {
    ShardBits r;
    if (p.n == 0) {
        r.binding = "empty";
        return r;
    }
    r.balls_bins = max_shard_bits_balls_bins({p.n, p.epsilon, p.alpha});

    const DupBoundParams dup{p.n, p.c, p.eta};
    const std::uint64_t s_dup =
        p.construction == Construction::mwhc ? max_shards_mwhc_dup(dup) : max_shards_fuse_dup(dup);
    r.duplicates = static_cast<unsigned>(std::countr_zero(s_dup));

    if (p.construction == Construction::fuse)
        r.min_size = floor_log2(static_cast<double>(p.n) / static_cast<double>(std::max<std::uint64_t>(1, p.min_fuse_shard_keys)));
    if (p.construction == Construction::fuse && p.n < p.min_fuse_shard_keys) r.min_size = 0;

    r.rough_size = floor_log2(static_cast<double>(p.n) * p.epsilon * p.epsilon / 2);
    r.cap = floor_log2(static_cast<double>(std::max<std::uint64_t>(1, p.max_shards)));

    r.h = r.balls_bins;
    r.binding = "balls-bins";
    auto tighten = [&](unsigned v, const char* name) {
        if (v < r.h) {
            r.h = v;
            r.binding = name;
        }
    };
    tighten(r.duplicates, "duplicates");
    tighten(r.min_size, "min-shard-size");
    tighten(r.rough_size, "rough-size");
    tighten(r.cap, "shard-cap");
    return r;
}

}  // namespace vsx
