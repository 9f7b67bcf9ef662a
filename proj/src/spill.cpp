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

#include "vsx/spill.hpp"

#include <cerrno>
#include <cstdio>
#include <fstream>
#include <memory>
#include <system_error>

#include <fmt/format.h>
#include <json.hpp>

#include "vsx/error.hpp"

namespace vsx {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_file(const std::filesystem::path& p, const char* mode) {
    File f(std::fopen(p.c_str(), mode));
    if (!f) throw std::system_error(errno, std::generic_category(), p.string());
    return f;
}

void write_all(std::FILE* f, const void* data, std::size_t bytes, const std::filesystem::path& p) {
    if (bytes != 0 && std::fwrite(data, 1, bytes, f) != bytes)
        throw std::system_error(errno ? errno : EIO, std::generic_category(), "write " + p.string());
}

void put_le64(std::byte* out, std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<std::byte>(v >> (8 * i));
}

std::uint64_t get_le64(const std::byte* in) noexcept {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::to_integer<std::uint64_t>(in[i]) << (8 * i);
    return v;
}

void encode(const SigVal& r, bool with_values, std::byte* out) noexcept {
    put_le64(out, r.sig.hi);
    put_le64(out + 8, r.sig.lo);
    if (with_values) put_le64(out + 16, r.value);
}

std::uint64_t bucket_of(const Signature& sig, unsigned bits) noexcept {
    return bits == 0 ? 0 : sig.hi >> (64 - bits);
}

void write_manifest(const std::filesystem::path& dir, const SpillManifest& m) {
    nlohmann::json j{{"n", m.n},
                     {"bucket_bits", m.bucket_bits},
                     {"seed", m.seed},
                     {"value_bits", m.value_bits},
                     {"with_values", m.with_values},
                     {"record_bytes", m.record_bytes}};
    const auto p = dir / "manifest.json";
    std::ofstream out(p);
    out << j.dump(2) << '\n';
    if (!out) throw std::system_error(EIO, std::generic_category(), "write " + p.string());
}

}  // namespace

std::filesystem::path spill_bucket_path(const std::filesystem::path& dir, std::uint64_t i) {
    return dir / fmt::format("shard-{:05}.bin", i);
}

SpillSet::SpillSet(std::filesystem::path dir, SpillManifest manifest)
    : dir_(std::move(dir)), manifest_(manifest) {}

SpillSet SpillSet::open(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw FormatError("spill manifest missing in " + dir.string());
    nlohmann::json j;
    try {
        in >> j;
        SpillManifest m;
        m.n = j.at("n").get<std::uint64_t>();
        m.bucket_bits = j.at("bucket_bits").get<unsigned>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.value_bits = j.at("value_bits").get<unsigned>();
        m.with_values = j.at("with_values").get<bool>();
        m.record_bytes = j.at("record_bytes").get<unsigned>();
        if (m.record_bytes != (m.with_values ? 24u : 16u)) throw FormatError("spill manifest: bad record size");
        return SpillSet(dir, m);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("spill manifest: ") + e.what());
    }
}

std::uint64_t SpillSet::bucket_size(std::uint64_t i) const {
    return std::filesystem::file_size(spill_bucket_path(dir_, i)) / manifest_.record_bytes;
}

void SpillSet::read_bucket(std::uint64_t i, std::vector<SigVal>& out) const {
    const auto p = spill_bucket_path(dir_, i);
    const std::uint64_t bytes = std::filesystem::file_size(p);
    if (bytes % manifest_.record_bytes != 0) throw FormatError("truncated spill bucket " + p.string());
    const std::uint64_t count = bytes / manifest_.record_bytes;
    File f = open_file(p, "rb");
    out.reserve(out.size() + count);
    const std::size_t rb = manifest_.record_bytes;
    std::vector<std::byte> buf(rb * 8192);
    std::uint64_t left = count;
    while (left > 0) {
        const std::size_t chunk = static_cast<std::size_t>(std::min<std::uint64_t>(left, 8192));
        if (std::fread(buf.data(), rb, chunk, f.get()) != chunk)
            throw FormatError("truncated spill bucket " + p.string());
        for (std::size_t k = 0; k < chunk; ++k) {
            const std::byte* r = buf.data() + k * rb;
            out.push_back({{get_le64(r), get_le64(r + 8)}, manifest_.with_values ? get_le64(r + 16) : 0});
        }
        left -= chunk;
    }
}

void SpillSet::rewrite_bucket(std::uint64_t i, std::span<const SigVal> records) const {
    const auto p = spill_bucket_path(dir_, i);
    File f = open_file(p, "wb");
    const std::size_t rb = manifest_.record_bytes;
    std::vector<std::byte> buf(rb * 8192);
    for (std::size_t start = 0; start < records.size(); start += 8192) {
        const std::size_t chunk = std::min<std::size_t>(8192, records.size() - start);
        for (std::size_t k = 0; k < chunk; ++k) encode(records[start + k], manifest_.with_values, buf.data() + k * rb);
        write_all(f.get(), buf.data(), chunk * rb, p);
    }
    if (std::fflush(f.get()) != 0) throw std::system_error(errno, std::generic_category(), "flush " + p.string());
}

void SpillSet::remove() const {
    for (std::uint64_t i = 0; i < num_buckets(); ++i) std::filesystem::remove(spill_bucket_path(dir_, i));
    std::filesystem::remove(dir_ / "manifest.json");
}

SpillWriter::SpillWriter(std::filesystem::path dir, unsigned bucket_bits, std::uint64_t seed, unsigned value_bits,
                         bool with_values, std::size_t buffer_bytes)
    : dir_(std::move(dir)) {
    if (bucket_bits > 24) throw std::invalid_argument("SpillWriter: too many buckets");
    manifest_.bucket_bits = bucket_bits;
    manifest_.seed = seed;
    manifest_.value_bits = value_bits;
    manifest_.with_values = with_values;
    manifest_.record_bytes = with_values ? 24 : 16;

    std::filesystem::create_directories(dir_);
    const std::uint64_t buckets = std::uint64_t{1} << bucket_bits;
    per_bucket_ = std::max<std::size_t>(buffer_bytes / buckets, 4096) / manifest_.record_bytes * manifest_.record_bytes;
    buffers_.resize(buckets);
    for (std::uint64_t i = 0; i < buckets; ++i) {
        File f = open_file(spill_bucket_path(dir_, i), "wb");
        buffers_[i].reserve(per_bucket_);
    }
}

void SpillWriter::flush(std::uint64_t bucket) {
    auto& buf = buffers_[bucket];
    if (buf.empty()) return;
    const auto p = spill_bucket_path(dir_, bucket);
    File f = open_file(p, "ab");
    write_all(f.get(), buf.data(), buf.size(), p);
    if (std::fflush(f.get()) != 0) throw std::system_error(errno, std::generic_category(), "flush " + p.string());
    buf.clear();
}

void SpillWriter::append(const SigVal& record) {
    const std::uint64_t b = bucket_of(record.sig, manifest_.bucket_bits);
    auto& buf = buffers_[b];
    const std::size_t at = buf.size();
    buf.resize(at + manifest_.record_bytes);
    encode(record, manifest_.with_values, buf.data() + at);
    ++manifest_.n;
    if (buf.size() >= per_bucket_) flush(b);
}

void SpillWriter::append(std::span<const SigVal> records) {
    for (const auto& r : records) append(r);
}

SpillSet SpillWriter::finish() {
    for (std::uint64_t i = 0; i < buffers_.size(); ++i) flush(i);
    write_manifest(dir_, manifest_);
    return SpillSet(dir_, manifest_);
}

SpillSet spill_to_disk(std::span<const SigVal> records, unsigned bucket_bits, std::uint64_t seed, unsigned value_bits,
                       bool with_values, const std::filesystem::path& dir) {
    SpillWriter w(dir, bucket_bits, seed, value_bits, with_values);
    w.append(records);
    return w.finish();
}

}  // namespace vsx
