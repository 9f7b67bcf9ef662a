# Copyright 2026 The vsx Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Static functions and filters.

    >>> import vsx
    >>> f, report = vsx.function([10, 20, 30], [1, 2, 3], bits=2)
    >>> f(20)
    2
    >>> flt, _ = vsx.filter(["a", "b"], bits=8)
    >>> "a" in flt
    True
"""

from ._vsx import (
    BuildConfig,
    Construction,
    DuplicateLocalSignature,
    DuplicateSignatureConflict,
    Error,
    FormatError,
    Kind,
    PeelBy,
    PeelStrategy,
    RetriesExhausted,
    VisitMemory,
    VStruct,
    build_filter,
    build_function,
    build_offline,
    lambert_w0,
    max_shards_fuse_dup,
    max_shards_mwhc_dup,
    resolve_shard_bits,
)

__all__ = [
    "BuildConfig",
    "Construction",
    "DuplicateLocalSignature",
    "DuplicateSignatureConflict",
    "Error",
    "FormatError",
    "Kind",
    "PeelBy",
    "PeelStrategy",
    "RetriesExhausted",
    "VStruct",
    "VisitMemory",
    "build_filter",
    "build_function",
    "build_offline",
    "config",
    "filter",
    "function",
    "lambert_w0",
    "load",
    "max_shards_fuse_dup",
    "max_shards_mwhc_dup",
    "resolve_shard_bits",
]


def config(**fields):
    """A BuildConfig with the given fields set; `construction` may be a string."""
    cfg = BuildConfig()
    for name, value in fields.items():
        if name == "construction" and isinstance(value, str):
            value = Construction.__members__[value]
        if not hasattr(cfg, name):
            raise TypeError(f"unknown BuildConfig field {name!r}")
        setattr(cfg, name, value)
    cfg.validate()
    return cfg


def function(keys, values, bits, **fields):
    """Builds a static function; returns (structure, report dict)."""
    return build_function(keys, values, config(bits=bits, **fields))


def filter(keys, bits, **fields):  # noqa: A001 - mirrors the C++ name
    """Builds a filter with false-positive rate 2**-bits; returns (structure, report dict)."""
    return build_filter(keys, config(bits=bits, **fields))


def load(path, mmap=False):
    """Loads a structure written by VStruct.save or the command-line tool."""
    return VStruct.load(path, mmap)
