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

import math
import random

import numpy as np
import pytest

import vsx


def test_identity_function():
    keys = list(range(50_000))
    f, report = vsx.function(keys, keys, bits=16, seed=3)
    assert all(f(k) == k for k in keys)
    assert len(f) == 50_000
    assert report["n"] == 50_000
    assert report["attempts"] >= 1
    np.testing.assert_array_equal(f.evaluate_many(np.arange(50_000, dtype=np.uint64)), np.arange(50_000))


@pytest.mark.parametrize("construction", ["fuse", "mwhc"])
def test_string_keys(construction):
    rng = random.Random(1)
    keys = [f"key-{i}-{rng.random()}" for i in range(20_000)]
    values = [rng.getrandbits(40) for _ in keys]
    f, _ = vsx.function(keys, values, bits=40, construction=construction)
    assert [f(k) for k in keys] == values
    assert f.construction == vsx.Construction.__members__[construction]
    # bytes and str keys with the same UTF-8 encoding are the same key.
    assert f(keys[7].encode()) == values[7]


def test_filter_rate():
    keys = list(range(0, 200_000))
    flt, _ = vsx.filter(keys, bits=6, seed=9)
    assert all(k in flt for k in keys[:10_000])
    probes = np.arange(10**12, 10**12 + 200_000, dtype=np.uint64)
    hits = int(flt.contains_many(probes).sum())
    p = 2**-6
    sd = math.sqrt(p * (1 - p) / len(probes))
    assert abs(hits / len(probes) - p) <= 4 * sd


def test_serialization_round_trip(tmp_path):
    keys = list(range(1000, 11_000))
    f, _ = vsx.function(keys, [k % 256 for k in keys], bits=8)
    blob = f.to_bytes()
    g = vsx.VStruct.from_bytes(blob)
    path = tmp_path / "f.vsx"
    f.save(path)
    for h in (g, vsx.load(path), vsx.load(path, mmap=True)):
        assert [h(k) for k in keys[:500]] == [k % 256 for k in keys[:500]]
    assert path.read_bytes() == blob
    with pytest.raises(vsx.FormatError):
        vsx.VStruct.from_bytes(b"VSXF" + blob[4:40])


def test_offline_matches_memory(tmp_path):
    keys = list(range(30_000))
    cfg = vsx.config(bits=5, seed=4)
    f, _ = vsx.build_filter(keys, cfg)
    cfg.offline_dir = tmp_path / "spill"
    report = vsx.build_offline(keys, None, vsx.Kind.filter, cfg, tmp_path / "off.vsx")
    assert report["n"] == 30_000
    assert (tmp_path / "off.vsx").read_bytes() == f.to_bytes()


def test_errors():
    with pytest.raises(vsx.DuplicateSignatureConflict):
        vsx.function([1, 1], [0, 1], bits=1)
    with pytest.raises(ValueError):
        vsx.function([1, 2], [0, 256], bits=8)
    with pytest.raises(ValueError):
        vsx.config(bits=0)
    with pytest.raises(TypeError):
        vsx.config(colour="red")
    with pytest.raises(TypeError):
        vsx.function([1, "a"], [0, 1], bits=1)


def test_bounds():
    assert vsx.max_shards_mwhc_dup(10**12, 1.23, 1e-3) == 8192
    w = vsx.lambert_w0(500.0)
    assert abs(w * math.exp(w) - 500) < 1e-9 * 500
    b = vsx.resolve_shard_bits(10**12, 0.01, construction=vsx.Construction.mwhc, c=1.23)
    assert b["duplicates"] == 13
    assert b["h"] == min(b["balls_bins"], b["duplicates"], b["rough_size"], b["cap"])
