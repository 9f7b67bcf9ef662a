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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "vsx/bounds.hpp"
#include "vsx/error.hpp"
#include "vsx/vstruct.hpp"

namespace py = pybind11;

namespace {

using vsx::BuildConfig;
using vsx::BuildReport;
using vsx::VStruct;

// Python keys are either all ints (signed as 64-bit integers) or all
// str/bytes (signed as byte strings; str is UTF-8 encoded).
struct Keys {
    std::vector<std::uint64_t> ints;
    std::vector<std::string> strings;
    std::vector<std::uint64_t> values;

    [[nodiscard]] std::unique_ptr<vsx::KeyStream> stream() const {
        if (!strings.empty()) return std::make_unique<vsx::StringKeyStream>(strings, values);
        return std::make_unique<vsx::U64KeyStream>(ints, values);
    }
};

bool is_int_key(const py::handle& k) { return py::isinstance<py::int_>(k) && !py::isinstance<py::bool_>(k); }

std::string bytes_of_key(const py::handle& k) {
    if (py::isinstance<py::str>(k)) return k.cast<std::string>();
    if (py::isinstance<py::bytes>(k)) return std::string(k.cast<py::bytes>());
    throw py::type_error("keys must be int, str or bytes");
}

Keys collect(const py::iterable& keys, const std::optional<py::iterable>& values) {
    Keys out;
    bool ints = true, first = true;
    for (const auto& k : keys) {
        const bool is_int = is_int_key(k);
        if (first) {
            ints = is_int;
            first = false;
        } else if (is_int != ints) {
            throw py::type_error("keys must be all int or all str/bytes");
        }
        if (ints)
            out.ints.push_back(k.cast<std::uint64_t>());
        else
            out.strings.push_back(bytes_of_key(k));
    }
    if (values) {
        for (const auto& v : *values) out.values.push_back(v.cast<std::uint64_t>());
        const std::size_t n = ints ? out.ints.size() : out.strings.size();
        if (out.values.size() != n) throw py::value_error("keys and values differ in length");
    }
    return out;
}

vsx::Signature signature_of(const VStruct& vs, const py::handle& key) {
    if (is_int_key(key)) return vs.signature(key.cast<std::uint64_t>());
    return vs.signature(bytes_of_key(key));
}

py::dict report_dict(const BuildReport& r) {
    py::dict d;
    d["input_keys"] = r.input_keys;
    d["n"] = r.plan.n;
    d["exact_duplicates"] = r.exact_duplicates;
    d["local_duplicates"] = r.local_duplicates;
    d["bits"] = r.bits;
    d["attempts"] = r.attempts;
    d["seed"] = r.seed;
    d["h"] = r.plan.h;
    d["shards"] = r.plan.num_shards();
    d["shard_vertices"] = r.plan.shard_vertices;
    d["shard_budget"] = r.plan.shard_budget;
    d["c"] = r.plan.c;
    d["lazy"] = r.plan.lazy;
    d["max_shard_keys"] = r.max_shard_keys;
    d["max_core_edges"] = r.max_core_edges;
    d["total_bits"] = r.total_bits;
    d["overhead"] = r.overhead();
    d["seconds"] = r.seconds;
    d["binding"] = r.plan.bounds.binding;
    return d;
}

template <class Build>
py::tuple build_with(Build build, const py::iterable& keys, const std::optional<py::iterable>& values,
                     const BuildConfig& cfg) {
    const Keys k = collect(keys, values);
    const auto stream = k.stream();
    BuildReport report;
    std::optional<VStruct> vs;
    {
        py::gil_scoped_release release;
        vs.emplace(build(*stream, cfg, &report));
    }
    return py::make_tuple(std::move(*vs), report_dict(report));
}

}  // namespace

PYBIND11_MODULE(_vsx, m) {
    m.doc() = "Static functions and filters over sharded random hypergraphs";

    auto error = py::register_exception<vsx::Error>(m, "Error");
    py::register_exception<vsx::DuplicateSignatureConflict>(m, "DuplicateSignatureConflict", error.ptr());
    py::register_exception<vsx::DuplicateLocalSignature>(m, "DuplicateLocalSignature", error.ptr());
    py::register_exception<vsx::RetriesExhausted>(m, "RetriesExhausted", error.ptr());
    py::register_exception<vsx::FormatError>(m, "FormatError", error.ptr());

    py::enum_<vsx::Construction>(m, "Construction")
        .value("mwhc", vsx::Construction::mwhc)
        .value("fuse", vsx::Construction::fuse);
    py::enum_<vsx::Kind>(m, "Kind").value("function", vsx::Kind::function).value("filter", vsx::Kind::filter);
    py::enum_<vsx::PeelBy>(m, "PeelBy").value("index", vsx::PeelBy::index).value("signature", vsx::PeelBy::signature);
    py::enum_<vsx::VisitMemory>(m, "VisitMemory")
        .value("high", vsx::VisitMemory::high)
        .value("low", vsx::VisitMemory::low);

    py::class_<vsx::PeelStrategy>(m, "PeelStrategy")
        .def(py::init([](vsx::PeelBy by, vsx::VisitMemory memory) { return vsx::PeelStrategy{by, memory}; }),
             py::arg("by"), py::arg("memory"))
        .def_readwrite("by", &vsx::PeelStrategy::by)
        .def_readwrite("memory", &vsx::PeelStrategy::memory);

    py::class_<BuildConfig>(m, "BuildConfig")
        .def(py::init<>())
        .def_readwrite("construction", &BuildConfig::construction)
        .def_readwrite("bits", &BuildConfig::bits)
        .def_readwrite("epsilon", &BuildConfig::epsilon)
        .def_readwrite("eta", &BuildConfig::eta)
        .def_readwrite("alpha", &BuildConfig::alpha)
        .def_readwrite("c", &BuildConfig::c)
        .def_property(
            "sig_bits", [](const BuildConfig& c) { return static_cast<unsigned>(c.sig_bits); },
            [](BuildConfig& c, unsigned bits) {
                if (bits != 64 && bits != 128) throw py::value_error("sig_bits must be 64 or 128");
                c.sig_bits = static_cast<vsx::SigWidth>(bits);
            })
        .def_readwrite("small_threshold", &BuildConfig::small_threshold)
        .def_readwrite("seed", &BuildConfig::seed)
        .def_readwrite("max_global_retries", &BuildConfig::max_global_retries)
        .def_readwrite("workers", &BuildConfig::workers)
        .def_readwrite("offline_dir", &BuildConfig::offline_dir)
        .def_readwrite("shard_bits", &BuildConfig::shard_bits)
        .def_readwrite("log2_segment", &BuildConfig::log2_segment)
        .def_readwrite("strategy", &BuildConfig::strategy)
        .def_readwrite("max_shards", &BuildConfig::max_shards)
        .def_readwrite("min_fuse_shard_keys", &BuildConfig::min_fuse_shard_keys)
        .def_readwrite("spill_buffer_bytes", &BuildConfig::spill_buffer_bytes)
        .def("validate", &BuildConfig::validate);

    py::class_<VStruct>(m, "VStruct")
        .def_property_readonly("kind", &VStruct::kind)
        .def_property_readonly("construction", [](const VStruct& v) { return v.plan().construction; })
        .def_property_readonly("bits", &VStruct::bits)
        .def_property_readonly("sig_bits", [](const VStruct& v) { return static_cast<unsigned>(v.sig_bits()); })
        .def_property_readonly("h", [](const VStruct& v) { return v.plan().h; })
        .def_property_readonly("seed", [](const VStruct& v) { return v.plan().seed; })
        .def_property_readonly("shard_vertices", [](const VStruct& v) { return v.plan().shard_vertices; })
        .def_property_readonly("size_bits", &VStruct::size_bits)
        .def("__len__", &VStruct::size)
        .def("__call__", [](const VStruct& v, const py::handle& key) { return v.evaluate(signature_of(v, key)); })
        .def("__contains__", [](const VStruct& v, const py::handle& key) { return v.contains(signature_of(v, key)); })
        .def(
            "evaluate_many",
            [](const VStruct& v, const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& keys) {
                py::array_t<std::uint64_t> out(keys.size());
                const auto in = keys.unchecked<1>();
                auto res = out.mutable_unchecked<1>();
                py::gil_scoped_release release;
                for (py::ssize_t i = 0; i < in.shape(0); ++i) res(i) = v.evaluate(v.signature(in(i)));
                return out;
            },
            py::arg("keys"), "Values of an array of 64-bit integer keys.")
        .def(
            "contains_many",
            [](const VStruct& v, const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& keys) {
                py::array_t<bool> out(keys.size());
                const auto in = keys.unchecked<1>();
                auto res = out.mutable_unchecked<1>();
                py::gil_scoped_release release;
                for (py::ssize_t i = 0; i < in.shape(0); ++i) res(i) = v.contains(v.signature(in(i)));
                return out;
            },
            py::arg("keys"), "Membership of an array of 64-bit integer keys.")
        .def("save", [](const VStruct& v, const std::filesystem::path& p) { v.save(p); }, py::arg("path"))
        .def_static(
            "load",
            [](const std::filesystem::path& p, bool mmap) {
                return VStruct::load(p, mmap ? vsx::LoadMode::mmap : vsx::LoadMode::copy);
            },
            py::arg("path"), py::arg("mmap") = false)
        .def("to_bytes",
             [](const VStruct& v) {
                 std::ostringstream out;
                 v.serialize(out);
                 return py::bytes(out.str());
             })
        .def_static("from_bytes", [](const py::bytes& b) {
            std::istringstream in{std::string(b)};
            return VStruct::deserialize(in);
        });

    m.def(
        "build_function",
        [](const py::iterable& keys, const py::iterable& values, const BuildConfig& cfg) {
            return build_with([](auto&&... a) { return vsx::build_function(a...); }, keys, values, cfg);
        },
        py::arg("keys"), py::arg("values"), py::arg("config"),
        "Builds a static function. Returns (structure, report).");
    m.def(
        "build_filter",
        [](const py::iterable& keys, const BuildConfig& cfg) {
            return build_with([](auto&&... a) { return vsx::build_filter(a...); }, keys, std::nullopt, cfg);
        },
        py::arg("keys"), py::arg("config"), "Builds a static filter. Returns (structure, report).");
    m.def(
        "build_offline",
        [](const py::iterable& keys, const std::optional<py::iterable>& values, vsx::Kind kind, const BuildConfig& cfg,
           const std::filesystem::path& output) {
            const Keys k = collect(keys, values);
            const auto stream = k.stream();
            BuildReport r;
            {
                py::gil_scoped_release release;
                r = vsx::build_offline(*stream, kind, cfg, output);
            }
            return report_dict(r);
        },
        py::arg("keys"), py::arg("values"), py::arg("kind"), py::arg("config"), py::arg("output"));

    m.def("lambert_w0", &vsx::lambert_w0, py::arg("x"));
    m.def(
        "max_shards_mwhc_dup",
        [](std::uint64_t n, double c, double eta) { return vsx::max_shards_mwhc_dup({n, c, eta}); }, py::arg("n"),
        py::arg("c") = 1.23, py::arg("eta") = 1e-3);
    m.def(
        "max_shards_fuse_dup",
        [](std::uint64_t n, double c, double eta) { return vsx::max_shards_fuse_dup({n, c, eta}); }, py::arg("n"),
        py::arg("c") = 1.105, py::arg("eta") = 1e-3);
    m.def(
        "resolve_shard_bits",
        [](std::uint64_t n, double epsilon, double alpha, vsx::Construction construction, double c, double eta,
           std::uint64_t max_shards, std::uint64_t min_fuse_shard_keys) {
            const auto b =
                vsx::resolve_shard_bits({n, epsilon, alpha, construction, c, eta, max_shards, min_fuse_shard_keys});
            py::dict d;
            d["h"] = b.h;
            d["balls_bins"] = b.balls_bins;
            d["duplicates"] = b.duplicates;
            d["min_size"] = b.min_size;
            d["rough_size"] = b.rough_size;
            d["cap"] = b.cap;
            d["binding"] = b.binding;
            return d;
        },
        py::arg("n"), py::arg("epsilon"), py::arg("alpha") = 1.0, py::arg("construction") = vsx::Construction::fuse,
        py::arg("c") = 1.105, py::arg("eta") = 1e-3, py::arg("max_shards") = 4096,
        py::arg("min_fuse_shard_keys") = 10'000'000);
}
