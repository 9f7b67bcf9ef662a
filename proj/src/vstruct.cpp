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

#include "vsx/vstruct.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <system_error>
#include <thread>

#include <fmt/format.h>

#include "vsx/error.hpp"
#include "vsx/sigsort.hpp"
#include "vsx/spill.hpp"

namespace vsx {

static_assert(std::endian::native == std::endian::little, "the serialized slab is the in-memory word array");

namespace {

constexpr char kMagic[4] = {'V', 'S', 'X', 'F'};
constexpr unsigned kMaxShardBits = 32;
constexpr unsigned kSpillBucketBits = 8;

using Clock = std::chrono::steady_clock;

std::uint64_t ceil_u64(double x) { return static_cast<std::uint64_t>(std::ceil(x)); }

std::uint64_t round_up(std::uint64_t x, std::uint64_t m) { return (x + m - 1) / m * m; }

constexpr double kLazyDupBudget = 0.01;

// Segment count for a shard whose core is solved by elimination. Besides the
// overall ratio c, the interior must keep about 1.1 vertices per key or the
// middle of the chain becomes overdetermined.
std::uint64_t lazy_segments(std::uint64_t m, double c, unsigned seg_bits) {
    const double per_seg = static_cast<double>(m) / std::ldexp(1.0, static_cast<int>(seg_bits));
    const auto total = static_cast<std::int64_t>(std::ceil(c * per_seg)) - 2;
    const auto interior = static_cast<std::int64_t>(std::ceil(1.10 * per_seg)) - 1;
    return static_cast<std::uint64_t>(std::max<std::int64_t>({1, total, interior}));
}

// Segment count for V target vertices: l + 2 segments cover the target.
std::uint64_t fuse_segments_for(std::uint64_t target_vertices, std::uint64_t seg) {
    const std::uint64_t total = (target_vertices + seg - 1) / seg;
    return total > 3 ? total - 2 : 1;
}

std::uint64_t target_of(Kind kind, const SigVal& r, std::uint64_t local, unsigned bits) noexcept {
    return kind == Kind::filter ? filter_hash(local, bits) : r.value;
}

void check_values(Kind kind, std::span<const SigVal> chunk, unsigned bits) {
    if (kind != Kind::function || bits == 64) return;
    for (const auto& r : chunk)
        if (r.value >> bits)
            throw std::invalid_argument(fmt::format("value {} does not fit in {} bits", r.value, bits));
}

std::uint64_t working_bytes(std::uint64_t keys, std::uint64_t vertices, unsigned bits, PeelStrategy st) {
    const std::uint64_t rep = st.by == PeelBy::index ? sizeof(std::uint32_t) : sizeof(SigPayload);
    const std::uint64_t stack = st.memory == VisitMemory::low
                                    ? vertices * sizeof(std::uint32_t)
                                    : keys * (st.by == PeelBy::index ? sizeof(PeeledEdge<std::uint32_t>)
                                                                     : sizeof(PeeledEdge<SigPayload>));
    return keys * 2 * sizeof(std::uint64_t) + vertices * (1 + rep) + stack + BitSlab::words_for(bits, vertices) * 8;
}

struct ShardTally {
    std::mutex mu;
    std::uint64_t max_keys = 0;
    std::uint64_t max_core = 0;
    std::uint64_t active = 0;
    std::uint64_t max_working = 0;
    std::vector<ShardStats> shards;

    explicit ShardTally(std::uint64_t num_shards) : shards(num_shards) {}

    void add(std::uint64_t shard, std::uint64_t keys, const SolveStats& st, std::uint64_t working) {
        std::lock_guard lock(mu);
        shards[shard] = {keys, st.peeled, st.core, st.active};
        max_keys = std::max(max_keys, keys);
        max_core = std::max<std::uint64_t>(max_core, st.core);
        active += st.active;
        max_working = std::max(max_working, working);
    }
};

enum class Failure { none, shard, dup_signature, dup_local };

// Solves every shard of sorted, deduplicated pairs. Returns an empty optional
// when some shard has no solution.
std::optional<BitSlab> solve_all(std::span<const SigVal> pairs, Kind kind, unsigned bits, const ShardPlan& plan,
                                 PeelStrategy strategy, unsigned workers, ShardTally& tally) {
    const std::uint64_t shards = plan.num_shards();
    const std::uint64_t sv = plan.shard_vertices;
    std::vector<std::size_t> start(shards + 1, pairs.size());
    {
        std::size_t i = 0;
        for (std::uint64_t s = 0; s < shards; ++s) {
            start[s] = i;
            while (i < pairs.size() && (plan.h == 0 || (pairs[i].sig.hi >> (64 - plan.h)) == s)) ++i;
        }
        start[shards] = i;
    }
    const EdgeGenerator gen = plan.generator();
    BitSlab slab(bits, shards * sv);
    const std::size_t shard_words = plan.h == 0 ? 0 : sv * bits / 64;

    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mu;

    auto work = [&] {
        std::vector<std::uint64_t> locals, targets;
        for (;;) {
            const std::uint64_t s = next.fetch_add(1);
            if (s >= shards || failed.load()) return;
            try {
                const std::size_t lo = start[s], hi = start[s + 1];
                locals.resize(hi - lo);
                targets.resize(hi - lo);
                for (std::size_t i = lo; i < hi; ++i) {
                    const auto a = assign_shard(pairs[i].sig, plan.h);
                    locals[i - lo] = a.local;
                    targets[i - lo] = target_of(kind, pairs[i], a.local, bits);
                }
                SolveStats st;
                if (plan.h == 0) {
                    if (!solve_shard(gen, locals, targets, strategy, plan.lazy, slab, &st)) failed = true;
                } else {
                    BitSlab part(bits, sv);
                    if (!solve_shard(gen, locals, targets, strategy, plan.lazy, part, &st)) {
                        failed = true;
                    } else {
                        const auto w = part.words();
                        std::copy(w.begin(), w.end(), slab.mutable_words().begin() + s * shard_words);
                    }
                }
                tally.add(s, hi - lo, st, working_bytes(hi - lo, sv, bits, strategy));
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
                failed = true;
                return;
            }
        }
    };

    const unsigned n_threads =
        static_cast<unsigned>(std::clamp<std::uint64_t>(workers, 1, std::max<std::uint64_t>(1, shards)));
    if (n_threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);
    if (failed) return std::nullopt;
    return slab;
}

void fill_report(BuildReport* report, unsigned bits, const ShardPlan& plan, PeelStrategy strategy, const ShardTally& tally,
                 unsigned attempts, Clock::time_point t0) {
    if (!report) return;
    report->attempts = attempts;
    report->bits = bits;
    report->seed = plan.seed;
    report->plan = plan;
    report->strategy = strategy;
    report->max_shard_keys = tally.max_keys;
    report->max_core_edges = tally.max_core;
    report->lazy_active = tally.active;
    report->max_shard_working_bytes = tally.max_working;
    report->shards = tally.shards;
    report->seconds = std::chrono::duration<double>(Clock::now() - t0).count();
}

[[noreturn]] void give_up(Failure last, std::exception_ptr last_error, unsigned attempts) {
    if ((last == Failure::dup_signature || last == Failure::dup_local) && last_error)
        std::rethrow_exception(last_error);
    throw RetriesExhausted(fmt::format("no global seed out of {} produced a solvable structure", attempts));
}

VStruct build_in_memory(const KeyStream& keys, Kind kind, const BuildConfig& cfg, BuildReport* report) {
    cfg.validate();
    const auto t0 = Clock::now();
    const DedupMode mode = kind == Kind::function ? DedupMode::function : DedupMode::filter;
    Failure last = Failure::none;
    std::exception_ptr last_error;

    for (unsigned attempt = 0; attempt < cfg.max_global_retries; ++attempt) {
        const std::uint64_t seed = retry_seed(cfg.seed, attempt);
        try {
            std::vector<SigVal> pairs;
            pairs.reserve(keys.size());
            keys.sign_all(seed, cfg.sig_bits, [&](std::span<const SigVal> chunk) {
                check_values(kind, chunk, cfg.bits);
                pairs.insert(pairs.end(), chunk.begin(), chunk.end());
            });
            sort_signatures(pairs);
            const auto exact = dedup_sorted(pairs, mode);
            const ShardPlan plan = plan_shards(pairs.size(), cfg, seed);
            const auto local = dedup_sorted(pairs, mode, plan.h);
            const PeelStrategy strategy = select_strategy(cfg, plan, false);

            ShardTally tally(plan.num_shards());
            auto slab = solve_all(pairs, kind, cfg.bits, plan, strategy, cfg.workers, tally);
            if (!slab) {
                last = Failure::shard;
                continue;
            }
            VStruct vs(kind, plan, cfg.bits, cfg.sig_bits, std::move(*slab));
            if (report) {
                *report = {};
                report->input_keys = keys.size();
                report->exact_duplicates = exact.exact_duplicates;
                report->local_duplicates = local.local_duplicates;
                report->total_bits = vs.size_bits();
                fill_report(report, cfg.bits, plan, strategy, tally, attempt + 1, t0);
            }
            return vs;
        } catch (const DuplicateSignatureConflict&) {
            last = Failure::dup_signature;
            last_error = std::current_exception();
        } catch (const DuplicateLocalSignature&) {
            last = Failure::dup_local;
            last_error = std::current_exception();
        }
    }
    give_up(last, last_error, cfg.max_global_retries);
}

void write_bytes(std::ostream& out, const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

// Removes a path on scope exit unless released.
class PathGuard {
  public:
    explicit PathGuard(std::filesystem::path p) : path_(std::move(p)) {}
    PathGuard(const PathGuard&) = delete;
    PathGuard& operator=(const PathGuard&) = delete;
    ~PathGuard() {
        if (!path_.empty()) {
            std::error_code ec;
            std::filesystem::remove_all(path_, ec);
        }
    }
    void release() noexcept { path_.clear(); }

  private:
    std::filesystem::path path_;
};

// Read-only private mapping of a whole file.
class Mapping {
  public:
    explicit Mapping(const std::filesystem::path& p) {
        const int fd = ::open(p.c_str(), O_RDONLY | O_CLOEXEC);
        if (fd < 0) throw std::system_error(errno, std::generic_category(), p.string());
        struct stat st {};
        if (::fstat(fd, &st) != 0) {
            const int e = errno;
            ::close(fd);
            throw std::system_error(e, std::generic_category(), p.string());
        }
        size_ = static_cast<std::size_t>(st.st_size);
        if (size_ > 0) {
            void* m = ::mmap(nullptr, size_, PROT_READ, MAP_PRIVATE, fd, 0);
            if (m == MAP_FAILED) {
                const int e = errno;
                ::close(fd);
                throw std::system_error(e, std::generic_category(), "mmap " + p.string());
            }
            data_ = static_cast<const std::byte*>(m);
        }
        ::close(fd);
    }
    Mapping(const Mapping&) = delete;
    Mapping& operator=(const Mapping&) = delete;
    ~Mapping() {
        if (data_) ::munmap(const_cast<std::byte*>(data_), size_);
    }

    [[nodiscard]] const std::byte* data() const noexcept { return data_; }
    [[nodiscard]] std::size_t size() const noexcept { return size_; }

  private:
    const std::byte* data_ = nullptr;
    std::size_t size_ = 0;
};

template <class T>
void put_le(std::byte* out, T v) noexcept {
    for (std::size_t i = 0; i < sizeof(T); ++i) out[i] = static_cast<std::byte>(static_cast<std::uint64_t>(v) >> (8 * i));
}

template <class T>
T get_le(const std::byte* in) noexcept {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::to_integer<std::uint64_t>(in[i]) << (8 * i);
    return static_cast<T>(v);
}

}  // namespace

void BuildConfig::validate() const {
    if (bits < 1 || bits > 64) throw std::invalid_argument("bits must be in [1, 64]");
    const double eps = effective_epsilon();
    if (!(eps > 0 && eps < 1)) throw std::invalid_argument("epsilon must be in (0, 1)");
    if (!(eta > 0 && eta < 1)) throw std::invalid_argument("eta must be in (0, 1)");
    if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
    if (c && !(*c > 1 && *c < 16)) throw std::invalid_argument("c must be in (1, 16)");
    if (max_global_retries == 0) throw std::invalid_argument("max_global_retries must be positive");
    if (workers == 0) throw std::invalid_argument("workers must be positive");
    if (shard_bits && *shard_bits > kMaxShardBits) throw std::invalid_argument("shard_bits must be at most 32");
    if (log2_segment && *log2_segment > 32) throw std::invalid_argument("log2_segment must be at most 32");
    if (sig_bits != SigWidth::bits64 && sig_bits != SigWidth::bits128)
        throw std::invalid_argument("sig_bits must be 64 or 128");
}

EdgeGenerator ShardPlan::generator() const {
    if (construction == Construction::mwhc) return EdgeGenerator::mwhc(segment_size);
    return EdgeGenerator::fuse(static_cast<unsigned>(std::countr_zero(segment_size)), segments);
}

ShardPlan plan_shards(std::uint64_t n, const BuildConfig& cfg, std::uint64_t seed) {
    const bool fuse = cfg.construction == Construction::fuse;
    const double eps = cfg.effective_epsilon();
    const double c_large = cfg.c.value_or(fuse ? 1.105 : 1.23);

    ShardPlan plan;
    plan.construction = cfg.construction;
    plan.n = n;
    plan.seed = seed;
    plan.bounds = resolve_shard_bits(
        {n, eps, cfg.alpha, cfg.construction, c_large, cfg.eta, cfg.max_shards, cfg.min_fuse_shard_keys});
    plan.h = cfg.shard_bits.value_or(plan.bounds.h);

    const std::uint64_t shards = plan.num_shards();
    const double mean = static_cast<double>(n) / static_cast<double>(shards);
    plan.shard_budget = plan.h == 0 ? n
                                    : std::max(ceil_u64((1 + eps) * mean),
                                               ceil_u64(expected_max_load(n, shards, cfg.alpha)));
    const std::uint64_t m = plan.shard_budget;
    plan.lazy = m < cfg.small_threshold;

    if (!fuse) {
        plan.c = c_large;
        std::uint64_t part = std::max<std::uint64_t>(1, ceil_u64(plan.c * static_cast<double>(m) / 3));
        if (plan.h > 0) part = round_up(part, 64);  // word-aligned shard regions
        plan.segment_size = part;
        plan.segments = 0;
        plan.shard_vertices = 3 * part;
        return plan;
    }

    const double dm = static_cast<double>(m);
    const auto vertices = [&](unsigned bits) { return (lazy_segments(m, plan.c, bits) + 2) << bits; };
    unsigned seg_bits;
    if (plan.lazy) {
        plan.c = cfg.c.value_or(1.12);
        // Smallest graph whose expected number of duplicate edges stays
        // below kLazyDupBudget; ties go to the larger segment.
        seg_bits = 18;
        for (unsigned bits = 18; bits-- > (plan.h > 0 ? 6u : 0u);) {
            const double seg = std::ldexp(1.0, static_cast<int>(bits));
            if (dm / (2 * plan.c * seg * seg) > kLazyDupBudget) break;
            if (vertices(bits) < vertices(seg_bits)) seg_bits = bits;
        }
    } else if (plan.h > 0) {
        plan.c = c_large;
        seg_bits = static_cast<unsigned>(std::max(0.0, std::floor(fuse_segment_bits(dm))));
    } else {
        const double dn = static_cast<double>(n);
        plan.c = cfg.c.value_or(std::max(1.125, 0.875 + 0.25 * std::log(1e6) / std::log(dn)));
        seg_bits = std::min(18u, static_cast<unsigned>(std::floor(fuse_segment_bits_log(dn))));
        // One size down when it wastes fewer vertices to rounding.
        const auto peel_vertices = [&](unsigned bits) {
            return (fuse_segments_for(ceil_u64(plan.c * dm), std::uint64_t{1} << bits) + 2) << bits;
        };
        if (seg_bits > 0 && peel_vertices(seg_bits - 1) < peel_vertices(seg_bits)) --seg_bits;
    }
    if (cfg.log2_segment) seg_bits = *cfg.log2_segment;
    if (plan.h > 0) seg_bits = std::max(seg_bits, 6u);  // word-aligned shard regions
    seg_bits = std::min(seg_bits, 32u);

    const std::uint64_t seg = std::uint64_t{1} << seg_bits;
    plan.segment_size = seg;
    plan.segments = plan.lazy ? lazy_segments(m, plan.c, seg_bits)
                              : fuse_segments_for(ceil_u64(plan.c * dm), seg);
    plan.shard_vertices = (plan.segments + 2) * seg;
    return plan;
}

PeelStrategy select_strategy(const BuildConfig& cfg, const ShardPlan& plan, bool offline) {
    if (cfg.strategy) return *cfg.strategy;
    if (plan.lazy || offline || cfg.workers > 1) return {PeelBy::index, VisitMemory::low};
    return {PeelBy::signature, VisitMemory::high};
}

double BuildReport::overhead() const noexcept {
    const double ideal = static_cast<double>(plan.n) * bits;
    return ideal == 0 ? 0 : static_cast<double>(total_bits) / ideal - 1;
}

VStruct::VStruct(Kind kind, ShardPlan plan, unsigned bits, SigWidth sig_bits, BitSlab slab)
    : kind_(kind), plan_(std::move(plan)), bits_(bits), sig_bits_(sig_bits), gen_(plan_.generator()),
      slab_(std::move(slab)) {
    if (slab_.width() != bits_) throw std::invalid_argument("VStruct: slab width differs from bits");
    if (slab_.size() != plan_.num_shards() * plan_.shard_vertices)
        throw std::invalid_argument("VStruct: slab size differs from the plan");
    if (gen_.num_vertices() != plan_.shard_vertices)
        throw std::invalid_argument("VStruct: graph shape differs from shard_vertices");
}

std::array<std::byte, kHeaderBytes> Header::encode() const {
    std::array<std::byte, kHeaderBytes> b{};
    std::memcpy(b.data(), kMagic, 4);
    put_le<std::uint16_t>(b.data() + 4, kFormatVersion);
    b[6] = static_cast<std::byte>(kind);
    b[7] = static_cast<std::byte>(construction);
    b[8] = static_cast<std::byte>(bits);
    b[9] = static_cast<std::byte>(h);
    put_le(b.data() + 10, n);
    put_le(b.data() + 18, seed);
    put_le(b.data() + 26, shard_vertices);
    put_le(b.data() + 34, segment_size);
    put_le(b.data() + 42, segments);
    b[50] = static_cast<std::byte>(static_cast<std::uint8_t>(sig_bits));
    return b;
}

Header Header::decode(std::span<const std::byte> b) {
    if (b.size() < kHeaderBytes) throw FormatError("truncated header");
    if (std::memcmp(b.data(), kMagic, 4) != 0) throw FormatError("bad magic");
    if (const auto v = get_le<std::uint16_t>(b.data() + 4); v != kFormatVersion)
        throw FormatError(fmt::format("unsupported format version {}", v));
    Header hd;
    const auto kind = std::to_integer<unsigned>(b[6]);
    const auto cons = std::to_integer<unsigned>(b[7]);
    if (kind > 1) throw FormatError("bad structure kind");
    if (cons > 1) throw FormatError("bad construction");
    hd.kind = static_cast<Kind>(kind);
    hd.construction = static_cast<Construction>(cons);
    hd.bits = std::to_integer<unsigned>(b[8]);
    hd.h = std::to_integer<unsigned>(b[9]);
    if (hd.bits < 1 || hd.bits > 64) throw FormatError("bad value width");
    if (hd.h > kMaxShardBits) throw FormatError("bad shard bits");
    hd.n = get_le<std::uint64_t>(b.data() + 10);
    hd.seed = get_le<std::uint64_t>(b.data() + 18);
    hd.shard_vertices = get_le<std::uint64_t>(b.data() + 26);
    hd.segment_size = get_le<std::uint64_t>(b.data() + 34);
    hd.segments = get_le<std::uint64_t>(b.data() + 42);
    const auto sb = std::to_integer<unsigned>(b[50]);
    if (sb != 64 && sb != 128) throw FormatError("bad signature width");
    hd.sig_bits = static_cast<SigWidth>(sb);
    for (std::size_t i = 51; i < kHeaderBytes; ++i)
        if (b[i] != std::byte{0}) throw FormatError("nonzero reserved header bytes");

    using u128 = unsigned __int128;
    if (hd.construction == Construction::fuse) {
        if (!std::has_single_bit(hd.segment_size) || hd.segment_size > (std::uint64_t{1} << 32) || hd.segments == 0)
            throw FormatError("bad fuse segment layout");
        if ((u128{hd.segments} + 2) * hd.segment_size != hd.shard_vertices)
            throw FormatError("shard_vertices inconsistent with segments");
    } else {
        if (hd.segment_size == 0 || hd.segments != 0) throw FormatError("bad mwhc part layout");
        if (u128{hd.segment_size} * 3 != hd.shard_vertices) throw FormatError("shard_vertices inconsistent with parts");
    }
    if ((u128{hd.shard_vertices} << hd.h) * hd.bits >= (u128{1} << 70)) throw FormatError("slab too large");
    return hd;
}

std::uint64_t Header::slab_words() const {
    return BitSlab::words_for(bits, shard_vertices << h);
}

namespace {

Header header_of(const VStruct& vs) {
    const auto& p = vs.plan();
    return {vs.kind(), p.construction, vs.bits(), p.h, p.n, p.seed, p.shard_vertices, p.segment_size, p.segments,
            vs.sig_bits()};
}

ShardPlan plan_of(const Header& hd) {
    ShardPlan p;
    p.construction = hd.construction;
    p.h = hd.h;
    p.n = hd.n;
    p.seed = hd.seed;
    p.shard_vertices = hd.shard_vertices;
    p.segment_size = hd.segment_size;
    p.segments = hd.segments;
    return p;
}

}  // namespace

void VStruct::serialize(std::ostream& out) const {
    const auto hd = header_of(*this).encode();
    write_bytes(out, hd.data(), hd.size());
    const auto w = slab_.words();
    write_bytes(out, w.data(), w.size_bytes());
    if (!out) throw std::system_error(EIO, std::generic_category(), "serialize");
}

void VStruct::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::system_error(errno, std::generic_category(), path.string());
    serialize(out);
    out.close();
    if (!out) throw std::system_error(EIO, std::generic_category(), path.string());
}

VStruct VStruct::deserialize(std::istream& in) {
    std::array<std::byte, kHeaderBytes> raw{};
    in.read(reinterpret_cast<char*>(raw.data()), raw.size());
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw FormatError("truncated header");
    const Header hd = Header::decode(raw);
    BitSlab slab(hd.bits, hd.shard_vertices << hd.h);
    auto w = slab.mutable_words();
    in.read(reinterpret_cast<char*>(w.data()), static_cast<std::streamsize>(w.size_bytes()));
    if (in.gcount() != static_cast<std::streamsize>(w.size_bytes())) throw FormatError("truncated slab");
    return VStruct(hd.kind, plan_of(hd), hd.bits, hd.sig_bits, std::move(slab));
}

VStruct VStruct::load(const std::filesystem::path& path, LoadMode mode) {
    if (mode == LoadMode::copy) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::system_error(errno, std::generic_category(), path.string());
        VStruct vs = deserialize(in);
        in.peek();
        if (!in.eof()) throw FormatError("trailing bytes after slab");
        return vs;
    }
    auto map = std::make_shared<Mapping>(path);
    const Header hd = Header::decode({map->data(), std::min(map->size(), kHeaderBytes)});
    if (map->size() != kHeaderBytes + hd.slab_words() * 8) throw FormatError("file size differs from header");
    const auto* words = reinterpret_cast<const std::uint64_t*>(map->data() + kHeaderBytes);
    BitSlab slab = BitSlab::borrow(hd.bits, hd.shard_vertices << hd.h, words, map);
    return VStruct(hd.kind, plan_of(hd), hd.bits, hd.sig_bits, std::move(slab));
}

VStruct build_function(const KeyStream& keys, const BuildConfig& cfg, BuildReport* report) {
    return build_in_memory(keys, Kind::function, cfg, report);
}

VStruct build_filter(const KeyStream& keys, const BuildConfig& cfg, BuildReport* report) {
    return build_in_memory(keys, Kind::filter, cfg, report);
}

BuildReport build_offline(const KeyStream& keys, Kind kind, const BuildConfig& cfg,
                          const std::filesystem::path& output) {
    cfg.validate();
    if (!cfg.offline_dir) throw std::invalid_argument("build_offline: offline_dir not set");
    const auto t0 = Clock::now();
    const DedupMode mode = kind == Kind::function ? DedupMode::function : DedupMode::filter;
    const unsigned bits = cfg.bits;
    std::filesystem::create_directories(*cfg.offline_dir);
    Failure last = Failure::none;
    std::exception_ptr last_error;

    for (unsigned attempt = 0; attempt < cfg.max_global_retries; ++attempt) {
        const std::uint64_t seed = retry_seed(cfg.seed, attempt);
        const auto spill_dir = *cfg.offline_dir / fmt::format("vsx-spill-{}-{:016x}", ::getpid(), seed);
        PathGuard spill_guard(spill_dir);
        const auto tmp = std::filesystem::path(output.string() + ".tmp");
        PathGuard tmp_guard(tmp);
        try {
            // Buckets are sub-shards: the number of sharding bits can only
            // shrink once duplicates are gone.
            const unsigned h_raw = plan_shards(keys.size(), cfg, seed).h;
            const unsigned bucket_bits = std::max(h_raw, kSpillBucketBits);
            std::optional<SpillSet> spill;
            {
                SpillWriter writer(spill_dir, bucket_bits, seed, bits, kind == Kind::function,
                                   cfg.spill_buffer_bytes);
                keys.sign_all(seed, cfg.sig_bits, [&](std::span<const SigVal> chunk) {
                    check_values(kind, chunk, bits);
                    writer.append(chunk);
                });
                spill.emplace(writer.finish());
            }

            BuildReport rep;
            rep.input_keys = keys.size();
            rep.spill_buffer_bytes = cfg.spill_buffer_bytes;
            std::uint64_t n = 0;
            {
                std::vector<SigVal> buf;
                for (std::uint64_t b = 0; b < spill->num_buckets(); ++b) {
                    buf.clear();
                    spill->read_bucket(b, buf);
                    sort_signatures(buf);
                    rep.exact_duplicates += dedup_sorted(buf, mode).exact_duplicates;
                    spill->rewrite_bucket(b, buf);
                    n += buf.size();
                }
            }

            const ShardPlan plan = plan_shards(n, cfg, seed);
            if (plan.h > bucket_bits) throw std::logic_error("build_offline: shard bits exceed spill bucket bits");
            const PeelStrategy strategy = select_strategy(cfg, plan, true);
            const EdgeGenerator gen = plan.generator();
            const std::uint64_t per_shard = std::uint64_t{1} << (bucket_bits - plan.h);

            Header hd{kind, plan.construction, bits, plan.h, plan.n, plan.seed, plan.shard_vertices,
                      plan.segment_size, plan.segments, cfg.sig_bits};
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw std::system_error(errno, std::generic_category(), tmp.string());
            const auto raw = hd.encode();
            write_bytes(out, raw.data(), raw.size());

            ShardTally tally(plan.num_shards());
            bool ok = true;
            std::vector<std::uint64_t> locals, targets;
            std::vector<SigVal> buf;
            for (std::uint64_t s = 0; s < plan.num_shards() && ok; ++s) {
                std::uint64_t count = 0;
                for (std::uint64_t j = 0; j < per_shard; ++j) count += spill->bucket_size(s * per_shard + j);
                locals.clear();
                targets.clear();
                locals.reserve(count);
                targets.reserve(count);
                bool has_prev = false;
                for (std::uint64_t j = 0; j < per_shard; ++j) {
                    buf.clear();
                    spill->read_bucket(s * per_shard + j, buf);
                    for (const auto& r : buf) {
                        const auto a = assign_shard(r.sig, plan.h);
                        const std::uint64_t t = target_of(kind, r, a.local, bits);
                        if (has_prev && a.local == locals.back()) {
                            if (mode == DedupMode::function && t != targets.back())
                                throw DuplicateLocalSignature(fmt::format(
                                    "shard {} has two signatures with local signature {:016x}", s, a.local));
                            ++rep.local_duplicates;
                            continue;
                        }
                        locals.push_back(a.local);
                        targets.push_back(t);
                        has_prev = true;
                    }
                }
                std::vector<SigVal>().swap(buf);
                BitSlab part(bits, plan.shard_vertices);
                SolveStats st;
                ok = solve_shard(gen, locals, targets, strategy, plan.lazy, part, &st);
                tally.add(s, locals.size(), st,
                          working_bytes(locals.capacity(), plan.shard_vertices, bits, strategy));
                if (ok) write_bytes(out, part.words().data(), part.words().size_bytes());
            }
            out.close();
            if (!out) throw std::system_error(EIO, std::generic_category(), "write " + tmp.string());
            if (!ok) {
                last = Failure::shard;
                continue;
            }
            std::filesystem::rename(tmp, output);
            tmp_guard.release();
            rep.total_bits = (kHeaderBytes + hd.slab_words() * 8) * 8;
            fill_report(&rep, bits, plan, strategy, tally, attempt + 1, t0);
            return rep;
        } catch (const DuplicateSignatureConflict&) {
            last = Failure::dup_signature;
            last_error = std::current_exception();
        } catch (const DuplicateLocalSignature&) {
            last = Failure::dup_local;
            last_error = std::current_exception();
        }
    }
    give_up(last, last_error, cfg.max_global_retries);
}

std::uint64_t count_mismatches(const VStruct& vs, const KeyStream& keys, std::uint64_t max_keys) {
    std::uint64_t seen = 0, bad = 0;
    const std::uint64_t mask = low_mask(vs.bits());
    keys.sign_all(vs.plan().seed, vs.sig_bits(), [&](std::span<const SigVal> chunk) {
        for (const auto& r : chunk) {
            if (seen >= max_keys) return;
            ++seen;
            const bool ok = vs.kind() == Kind::filter ? vs.contains(r.sig) : vs.evaluate(r.sig) == (r.value & mask);
            bad += !ok;
        }
    });
    return bad;
}

}  // namespace vsx
