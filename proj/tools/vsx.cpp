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

// vsx: build, query and inspect static functions and filters.
//
// Exit codes: 0 ok, 1 usage, 2 build failure, 3 verification failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "vsx/bounds.hpp"
#include "vsx/error.hpp"
#include "vsx/key_stream.hpp"
#include "vsx/vstruct.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBuild = 2;
constexpr int kExitVerify = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Keys given on the command line: a synthetic set or a text file with one
// key per line (`key<TAB>value` for functions).
struct KeySource {
    std::uint64_t synthetic = 0;
    std::uint64_t key_seed = 42;
    std::string input;

    std::vector<std::string> keys;
    std::vector<std::uint64_t> values;

    [[nodiscard]] bool given() const { return synthetic > 0 || !input.empty(); }

    void add_options(CLI::App* app) {
        app->add_option("--synthetic", synthetic, "Use N pseudo-random 64-bit keys");
        app->add_option("--key-seed", key_seed, "Seed of the synthetic key generator");
        app->add_option("--input", input, "Text file, one key per line (key<TAB>value for functions)");
    }

    std::unique_ptr<vsx::KeyStream> open(bool with_values, unsigned bits) {
        if (synthetic > 0 && !input.empty()) throw UsageError("--synthetic and --input are exclusive");
        if (synthetic > 0)
            return std::make_unique<vsx::SyntheticKeyStream>(synthetic, key_seed, with_values ? bits : 0);
        if (input.empty()) throw UsageError("no keys: use --synthetic N or --input FILE");
        std::ifstream in(input);
        if (!in) throw UsageError("cannot read " + input);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (with_values) {
                const auto tab = line.rfind('\t');
                if (tab == std::string::npos) throw UsageError("expected key<TAB>value: " + line);
                values.push_back(std::stoull(line.substr(tab + 1)));
                line.resize(tab);
            }
            keys.push_back(std::move(line));
        }
        return std::make_unique<vsx::StringKeyStream>(keys, values);
    }
};

std::uint64_t parse_count(const std::string& s) {
    // Accepts plain integers, 2^k and 1eK.
    const auto bad = [&] { return UsageError("not a key count: '" + s + "'"); };
    const auto number = [&](const std::string& t) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            throw bad();
        }
        if (used != t.size() || !(v >= 0)) throw bad();
        return v;
    };
    double v;
    if (const auto caret = s.find('^'); caret != std::string::npos)
        v = std::pow(number(s.substr(0, caret)), number(s.substr(caret + 1)));
    else if (s.find_first_of("eE.") != std::string::npos)
        v = number(s);
    else if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos)
        return std::stoull(s);
    else
        throw bad();
    v = std::round(v);
    if (!(v < 0x1p64)) throw bad();
    return static_cast<std::uint64_t>(v);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

const std::map<std::string, vsx::Construction> kConstructions{{"fuse", vsx::Construction::fuse},
                                                              {"mwhc", vsx::Construction::mwhc}};

std::filesystem::path resolve_offline_dir(const std::string& dir) {
    if (dir != "auto") return dir;
    if (const char* env = std::getenv("VSX_TMPDIR"); env && *env) return env;
    return std::filesystem::temp_directory_path();
}

// Options shared by `build` and `bench`.
struct BuildOptions {
    vsx::BuildConfig cfg;
    std::string construction = "fuse";
    std::optional<double> epsilon;
    std::optional<double> c;
    unsigned sig_bits = 128;
    std::string offline;
    std::optional<unsigned> shard_bits;

    void add_options(CLI::App* app, bool with_bits) {
        app->add_option("--construction", construction, "mwhc or fuse")
            ->check(CLI::IsMember({"mwhc", "fuse"}));
        if (with_bits) app->add_option("--bits", cfg.bits, "Output bits b")->check(CLI::Range(1u, 64u));
        app->add_option("--epsilon", epsilon, "Relative space budget of sharding")->check(CLI::Range(1e-9, 0.999999));
        app->add_option("--eta", cfg.eta, "Duplicate-edge failure budget")->check(CLI::Range(1e-12, 0.999999));
        app->add_option("--c", c, "Expansion factor")->check(CLI::Range(1.000001, 16.0));
        app->add_option("--sig-bits", sig_bits, "Signature width")->check(CLI::IsMember({64u, 128u}));
        app->add_option("--offline", offline, "Spill directory for shard-at-a-time builds ('auto': $VSX_TMPDIR)");
        app->add_option("--workers", cfg.workers, "Build threads")->check(CLI::Range(1u, 1024u));
        app->add_option("--seed", cfg.seed, "Global seed");
        app->add_option("--retries", cfg.max_global_retries, "Global seeds to try")->check(CLI::Range(1u, 1u << 20));
        app->add_option("--shard-bits", shard_bits, "Force the number of sharding bits")->check(CLI::Range(0u, 32u));
        app->add_option("--max-shards", cfg.max_shards, "Global shard cap");
    }

    void finish() {
        cfg.construction = kConstructions.at(construction);
        cfg.epsilon = epsilon;
        cfg.c = c;
        cfg.sig_bits = sig_bits == 64 ? vsx::SigWidth::bits64 : vsx::SigWidth::bits128;
        cfg.shard_bits = shard_bits;
        if (!offline.empty()) cfg.offline_dir = resolve_offline_dir(offline);
    }
};

void print_report(const vsx::BuildReport& r, const std::string& path, vsx::Kind kind) {
    fmt::print("{} {} -> {}\n", vsx::to_string(kind), vsx::to_string(r.plan.construction), path);
    fmt::print("  n            {}\n", r.plan.n);
    fmt::print("  duplicates   {} exact, {} local\n", r.exact_duplicates, r.local_duplicates);
    fmt::print("  h            {} ({} shards, binding: {})\n", r.plan.h, r.plan.num_shards(), r.plan.bounds.binding);
    fmt::print("  shard size   {} vertices, budget {} keys, largest {} keys\n", r.plan.shard_vertices,
               r.plan.shard_budget, r.max_shard_keys);
    fmt::print("  c            {:.4f}{}\n", r.plan.c, r.plan.lazy ? " (lazy elimination)" : "");
    fmt::print("  bits         {} total, {:.4f} per key\n", r.total_bits,
               r.plan.n ? static_cast<double>(r.total_bits) / static_cast<double>(r.plan.n) : 0.0);
    fmt::print("  overhead     {:.2f}%\n", 100 * r.overhead());
    fmt::print("  retries      {}\n", r.attempts - 1);
    fmt::print("  seconds      {:.3f}\n", r.seconds);
}

void write_report_csv(const std::string& path, const vsx::BuildReport& r, vsx::Kind kind) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "kind,construction,n,bits,h,shards,shard_vertices,c,total_bits,overhead,retries,seconds\n";
    out << fmt::format("{},{},{},{},{},{},{},{:.6f},{},{:.6f},{},{:.6f}\n", vsx::to_string(kind),
                       vsx::to_string(r.plan.construction), r.plan.n, r.bits, r.plan.h, r.plan.num_shards(),
                       r.plan.shard_vertices, r.plan.c, r.total_bits, r.overhead(), r.attempts - 1, r.seconds);
}

// ---- build ------------------------------------------------------------------

struct BuildCmd {
    BuildOptions opts;
    KeySource keys;
    bool func = false;
    bool filter = false;
    std::string output;
    std::string csv;
    bool stats = false;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("build", "Build a static function or filter");
        opts.add_options(app, false);
        app->add_option("--bits", opts.cfg.bits, "Output bits b (1 to 64)")->required();
        keys.add_options(app);
        auto* f1 = app->add_flag("--func", func, "Build a static function");
        auto* f2 = app->add_flag("--filter", filter, "Build a filter");
        f1->excludes(f2);
        app->add_option("-o,--output", output, "Output file")->default_val("out.vsx");
        app->add_option("--csv", csv, "Write the build report as CSV");
        app->add_flag("--stats", stats, "Print per-shard peeling statistics");
        app->callback([this] { rc = run(); });
    }

    int rc = kExitOk;

    int run() {
        if (!func && !filter) throw UsageError("choose --func or --filter");
        if (opts.cfg.bits < 1 || opts.cfg.bits > 64) throw UsageError("--bits must be in [1, 64]");
        opts.finish();
        const auto kind = func ? vsx::Kind::function : vsx::Kind::filter;
        auto stream = keys.open(func, opts.cfg.bits);
        vsx::BuildReport report;
        try {
            if (opts.cfg.offline_dir) {
                report = vsx::build_offline(*stream, kind, opts.cfg, output);
            } else {
                auto vs = func ? vsx::build_function(*stream, opts.cfg, &report)
                               : vsx::build_filter(*stream, opts.cfg, &report);
                vs.save(output);
            }
        } catch (const vsx::Error& e) {
            fmt::print(stderr, "build failed: {}\n", e.what());
            return kExitBuild;
        }
        print_report(report, output, kind);
        if (stats) {
            fmt::print("shard,keys,peeled,core,active\n");
            for (std::size_t s = 0; s < report.shards.size(); ++s) {
                const auto& st = report.shards[s];
                fmt::print("{},{},{},{},{}\n", s, st.keys, st.peeled, st.core, st.active);
            }
        }
        if (!csv.empty()) write_report_csv(csv, report, kind);
        return kExitOk;
    }
};

// ---- query ------------------------------------------------------------------

struct QueryCmd {
    std::string file;
    std::vector<std::string> keys;
    std::string input;
    bool u64 = false;
    bool mmap = false;
    int rc = kExitOk;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("query", "Query a structure");
        app->add_option("file", file, "Structure file")->required()->check(CLI::ExistingFile);
        app->add_option("keys", keys, "Keys to look up");
        app->add_option("--input", input, "File with one key per line");
        app->add_flag("--u64", u64, "Keys are unsigned 64-bit integers (as for --synthetic builds)");
        app->add_flag("--mmap", mmap, "Memory-map the structure");
        app->callback([this] { rc = run(); });
    }

    int run() {
        const auto vs = vsx::VStruct::load(file, mmap ? vsx::LoadMode::mmap : vsx::LoadMode::copy);
        if (!input.empty()) {
            std::ifstream in(input);
            if (!in) throw UsageError("cannot read " + input);
            for (std::string line; std::getline(in, line);) keys.push_back(line);
        }
        if (keys.empty()) throw UsageError("no keys to query");
        for (const auto& k : keys) {
            const vsx::Signature sig = u64 ? vs.signature(static_cast<std::uint64_t>(std::stoull(k))) : vs.signature(k);
            if (vs.kind() == vsx::Kind::filter)
                fmt::print("{}\t{}\n", k, vs.contains(sig) ? 1 : 0);
            else
                fmt::print("{}\t{}\n", k, vs.evaluate(sig));
        }
        return kExitOk;
    }
};

// ---- bounds -----------------------------------------------------------------

struct BoundsCmd {
    std::string n_text = "1e9";
    std::string sweep;
    std::optional<double> epsilon;
    double eta = 1e-3;
    double alpha = 1.0;
    std::optional<double> c;
    std::string construction = "fuse";
    std::uint64_t max_shards = 4096;
    std::uint64_t min_fuse_shard_keys = 10'000'000;
    std::string csv;
    int rc = kExitOk;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("bounds", "Sharding bounds for n keys");
        app->add_option("--n", n_text, "Number of keys (accepts 1e12, 2^30)");
        app->add_option("--sweep", sweep, "LO:HI:STEPS_PER_DECADE, log-spaced n values");
        app->add_option("--epsilon", epsilon, "Relative space budget")->check(CLI::Range(1e-9, 0.999999));
        app->add_option("--eta", eta, "Duplicate-edge failure budget")->check(CLI::Range(1e-12, 0.999999));
        app->add_option("--alpha", alpha, "Balls-and-bins constant");
        app->add_option("--c", c, "Expansion factor")->check(CLI::Range(1.000001, 16.0));
        app->add_option("--construction", construction, "mwhc or fuse")->check(CLI::IsMember({"mwhc", "fuse"}));
        app->add_option("--max-shards", max_shards, "Global shard cap");
        app->add_option("--min-fuse-shard", min_fuse_shard_keys, "Smallest fuse shard");
        app->add_option("--csv", csv, "Write the table as CSV");
        app->callback([this] { rc = run(); });
    }

    int run() {
        const auto cons = kConstructions.at(construction);
        const double eps = epsilon.value_or(cons == vsx::Construction::fuse ? 0.001 : 0.01);
        const double cc = c.value_or(cons == vsx::Construction::fuse ? 1.105 : 1.23);
        std::vector<std::uint64_t> ns;
        if (!sweep.empty()) {
            const auto parts = split(sweep, ':');
            if (parts.size() != 3) throw UsageError("--sweep expects LO:HI:STEPS");
            const double lo = std::log10(static_cast<double>(parse_count(parts[0])));
            const double hi = std::log10(static_cast<double>(parse_count(parts[1])));
            const double steps = std::stod(parts[2]);
            if (!(steps > 0) || hi < lo) throw UsageError("bad --sweep");
            for (double e = lo; e <= hi + 1e-9; e += 1 / steps)
                ns.push_back(static_cast<std::uint64_t>(std::llround(std::pow(10.0, e))));
        } else {
            ns.push_back(parse_count(n_text));
        }

        const std::string head =
            "n,construction,epsilon,eta,c,h_balls_bins,S_balls_bins,h_duplicates,S_duplicates,h_min_size,"
            "h_rough_size,h_cap,h,S,expected_shard_size,binding";
        std::ofstream csv_out;
        if (!csv.empty()) {
            csv_out.open(csv);
            if (!csv_out) throw UsageError("cannot write " + csv);
            csv_out << head << '\n';
        }
        fmt::print("{:>16} {:>6} {:>10} {:>6} {:>12} {:>6} {:>6} {:>4} {:>8} {:>16}  {}\n", "n", "h_bb", "S_bb",
                   "h_dup", "S_dup", "h_min", "h_2/e2", "h", "S", "shard size", "binding");
        for (const auto n : ns) {
            const auto b = vsx::resolve_shard_bits({n, eps, alpha, cons, cc, eta, max_shards, min_fuse_shard_keys});
            const vsx::DupBoundParams dp{n, cc, eta};
            const std::uint64_t s_dup = n == 0 ? 1
                                        : cons == vsx::Construction::mwhc ? vsx::max_shards_mwhc_dup(dp)
                                                                          : vsx::max_shards_fuse_dup(dp);
            const double shard = static_cast<double>(n) / static_cast<double>(std::uint64_t{1} << b.h);
            auto s_of = [](unsigned h) { return std::uint64_t{1} << h; };
            fmt::print("{:>16} {:>6} {:>10} {:>6} {:>12} {:>6} {:>6} {:>4} {:>8} {:>16.0f}  {}\n", n, b.balls_bins,
                       s_of(b.balls_bins), b.duplicates, s_dup, b.min_size == 64 ? std::string("-") : std::to_string(b.min_size),
                       b.rough_size, b.h, s_of(b.h), shard, b.binding);
            if (csv_out.is_open())
                csv_out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.1f},{}\n", n, construction, eps,
                                       eta, cc, b.balls_bins, s_of(b.balls_bins), b.duplicates, s_dup,
                                       b.min_size == 64 ? -1 : static_cast<int>(b.min_size), b.rough_size, b.cap,
                                       b.h, s_of(b.h), shard, b.binding);
        }
        return kExitOk;
    }
};

// ---- fpp --------------------------------------------------------------------

struct FppCmd {
    std::string file;
    std::uint64_t probes = 1'000'000;
    std::uint64_t probe_seed = 7;
    KeySource inserted;
    bool mmap = false;
    int rc = kExitOk;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("fpp", "Measure the false-positive rate of a filter");
        app->add_option("file", file, "Filter file")->required()->check(CLI::ExistingFile);
        app->add_option("--probes", probes, "Number of random non-key probes");
        app->add_option("--probe-seed", probe_seed, "Seed of the probe generator");
        inserted.add_options(app);
        app->add_flag("--mmap", mmap, "Memory-map the filter");
        app->callback([this] { rc = run(); });
    }

    int run() {
        if (probes == 0) throw UsageError("--probes must be positive");
        const auto vs = vsx::VStruct::load(file, mmap ? vsx::LoadMode::mmap : vsx::LoadMode::copy);
        if (vs.kind() != vsx::Kind::filter) throw UsageError("fpp needs a filter, not a function");

        // Probes come from a generator stream disjoint in practice from the
        // key generator; a 64-bit collision is negligible at these sizes.
        std::mt19937_64 rng(probe_seed ^ 0x5bd1e9955bd1e995ULL);
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < probes; ++i) hits += vs.contains(vs.signature(rng()));
        const double p = std::ldexp(1.0, -static_cast<int>(vs.bits()));
        const double rate = static_cast<double>(hits) / static_cast<double>(probes);
        const double se = std::sqrt(p * (1 - p) / static_cast<double>(probes));
        fmt::print("probes          {}\n", probes);
        fmt::print("false positives {}\n", hits);
        fmt::print("rate            {:.6e}\n", rate);
        fmt::print("target 2^-{}     {:.6e}\n", vs.bits(), p);
        fmt::print("std error       {:.3e}\n", se);
        fmt::print("95% interval    [{:.6e}, {:.6e}]\n", std::max(0.0, rate - 1.96 * se), rate + 1.96 * se);
        fmt::print("z-score         {:.3f}\n", se > 0 ? (rate - p) / se : 0.0);
        if (inserted.given()) {
            auto stream = inserted.open(false, vs.bits());
            const auto fn = vsx::count_mismatches(vs, *stream, stream->size());
            fmt::print("false negatives {} of {}\n", fn, stream->size());
            if (fn != 0) return kExitVerify;
        }
        return kExitOk;
    }
};

// ---- bench ------------------------------------------------------------------

struct BenchCmd {
    BuildOptions opts;
    std::string sizes = "2^20";
    std::string bits = "8";
    std::string constructions = "fuse";
    std::string kinds = "filter";
    std::uint64_t queries = 1'000'000;
    unsigned query_threads = 1;
    std::string csv;
    int rc = kExitOk;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("bench", "Time builds and queries over a grid; CSV output");
        opts.add_options(app, false);
        app->add_option("--sizes", sizes, "Comma-separated key counts (2^20, 1e6, ...)");
        app->add_option("--bits-list", bits, "Comma-separated output widths");
        app->add_option("--constructions", constructions, "Comma-separated: fuse, mwhc");
        app->add_option("--kinds", kinds, "Comma-separated: filter, function");
        app->add_option("--queries", queries, "Queries per structure");
        app->add_option("--query-threads", query_threads, "Parallel query threads")->check(CLI::Range(1u, 1024u));
        app->add_option("--csv", csv, "Output CSV (default stdout)");
        app->callback([this] { rc = run(); });
    }

    int run() {
        opts.finish();
        std::ofstream file;
        std::ostream* out = &std::cout;
        if (!csv.empty()) {
            file.open(csv);
            if (!file) throw UsageError("cannot write " + csv);
            out = &file;
        }
        *out << "construction,kind,n,bits,h,shards,c,build_ns_per_key,query_ns_per_key,bits_per_key,overhead,"
                "retries,errors\n";
        for (const auto& cons : split(constructions, ',')) {
            if (!kConstructions.count(cons)) throw UsageError("unknown construction " + cons);
            for (const auto& kind_s : split(kinds, ',')) {
                if (kind_s != "filter" && kind_s != "function") throw UsageError("unknown kind " + kind_s);
                const auto kind = kind_s == "filter" ? vsx::Kind::filter : vsx::Kind::function;
                for (const auto& size_s : split(sizes, ','))
                    for (const auto& bits_s : split(bits, ',')) run_one(*out, cons, kind, parse_count(size_s),
                                                                        static_cast<unsigned>(std::stoul(bits_s)));
            }
        }
        return kExitOk;
    }

    void run_one(std::ostream& out, const std::string& cons, vsx::Kind kind, std::uint64_t n, unsigned b) {
        if (b < 1 || b > 64) throw UsageError("bits must be in [1, 64]");
        vsx::BuildConfig cfg = opts.cfg;
        cfg.construction = kConstructions.at(cons);
        cfg.bits = b;
        cfg.offline_dir.reset();
        const vsx::SyntheticKeyStream keys(n, opts.cfg.seed + 1, kind == vsx::Kind::function ? b : 0);
        vsx::BuildReport report;
        const auto t0 = std::chrono::steady_clock::now();
        const auto vs = kind == vsx::Kind::function ? vsx::build_function(keys, cfg, &report)
                                                     : vsx::build_filter(keys, cfg, &report);
        const double build_ns =
            std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - t0).count();

        // Random inserted keys, signed inside the timed loop.
        const std::uint64_t q = n == 0 ? 0 : queries;
        std::vector<std::uint64_t> probe_keys(q);
        std::mt19937_64 rng(n ^ b);
        for (auto& k : probe_keys) k = keys.key(rng() % n);
        std::atomic<std::uint64_t> sink{0};
        const auto t1 = std::chrono::steady_clock::now();
        {
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < query_threads; ++t)
                pool.emplace_back([&, t] {
                    std::uint64_t acc = 0;
                    for (std::uint64_t i = t; i < q; i += query_threads) acc += vs.lookup(vs.signature(probe_keys[i]));
                    sink += acc;
                });
        }
        const double query_ns =
            std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - t1).count();
        const auto errors = vsx::count_mismatches(vs, keys, std::min<std::uint64_t>(n, 100'000));
        out << fmt::format("{},{},{},{},{},{},{:.4f},{:.2f},{:.2f},{:.4f},{:.6f},{},{}\n", cons, vsx::to_string(kind),
                           n, b, report.plan.h, report.plan.num_shards(), report.plan.c,
                           n ? build_ns / static_cast<double>(n) : 0.0,
                           q ? query_ns * query_threads / static_cast<double>(q) : 0.0,
                           n ? static_cast<double>(report.total_bits) / static_cast<double>(n) : 0.0,
                           report.overhead(), report.attempts - 1, errors);
        out.flush();
    }
};

// ---- inspect ----------------------------------------------------------------

struct InspectCmd {
    std::string file;
    bool verify = false;
    bool mmap = false;
    KeySource keys;
    std::uint64_t sample = 100'000;
    int rc = kExitOk;

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("inspect", "Print the header; optionally verify the structure");
        app->add_option("file", file, "Structure file")->required()->check(CLI::ExistingFile);
        app->add_flag("--verify", verify, "Check header integrity and, given the keys, their answers");
        app->add_flag("--mmap", mmap, "Memory-map the structure");
        keys.add_options(app);
        app->add_option("--sample", sample, "Keys checked by --verify");
        app->callback([this] { rc = run(); });
    }

    int run() {
        std::optional<vsx::VStruct> vs;
        try {
            vs = vsx::VStruct::load(file, mmap ? vsx::LoadMode::mmap : vsx::LoadMode::copy);
        } catch (const vsx::FormatError& e) {
            fmt::print(stderr, "invalid structure: {}\n", e.what());
            return kExitVerify;
        }
        const auto& p = vs->plan();
        fmt::print("kind            {}\n", vsx::to_string(vs->kind()));
        fmt::print("construction    {}\n", vsx::to_string(p.construction));
        fmt::print("bits            {}\n", vs->bits());
        fmt::print("signature bits  {}\n", static_cast<unsigned>(vs->sig_bits()));
        fmt::print("n               {}\n", p.n);
        fmt::print("seed            {:#018x}\n", p.seed);
        fmt::print("h               {} ({} shards)\n", p.h, p.num_shards());
        fmt::print("shard vertices  {}\n", p.shard_vertices);
        fmt::print("segment size    {}\n", p.segment_size);
        fmt::print("segments        {}\n", p.segments);
        fmt::print("size            {} bits ({:.4f} per key)\n", vs->size_bits(),
                   p.n ? static_cast<double>(vs->size_bits()) / static_cast<double>(p.n) : 0.0);
        if (!verify) return kExitOk;
        // Loading already validated every header field and the file size.
        fmt::print("header          ok\n");
        if (!keys.given()) return kExitOk;
        auto stream = keys.open(vs->kind() == vsx::Kind::function, vs->bits());
        const auto checked = std::min<std::uint64_t>(sample, stream->size());
        const auto bad = vsx::count_mismatches(*vs, *stream, checked);
        fmt::print("keys            {} checked, {} mismatches\n", checked, bad);
        return bad == 0 ? kExitOk : kExitVerify;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Static functions and filters with sharded hypergraph construction"};
    app.require_subcommand(1);
    BuildCmd build;
    QueryCmd query;
    BoundsCmd bounds;
    FppCmd fpp;
    BenchCmd bench;
    InspectCmd inspect;
    build.add(app);
    query.add(app);
    bounds.add(app);
    fpp.add(app);
    bench.add(app);
    inspect.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const UsageError& e) {
        fmt::print(stderr, "usage error: {}\n", e.what());
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        fmt::print(stderr, "invalid argument: {}\n", e.what());
        return kExitUsage;
    } catch (const vsx::FormatError& e) {
        fmt::print(stderr, "invalid structure: {}\n", e.what());
        return kExitVerify;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitBuild;
    }
    for (int rc : {build.rc, query.rc, bounds.rc, fpp.rc, bench.rc, inspect.rc})
        if (rc != kExitOk) return rc;
    return kExitOk;
}
