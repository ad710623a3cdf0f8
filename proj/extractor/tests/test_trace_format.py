import json
import random
import struct

import pytest

from dki_extractor.trace import (MAGIC, TraceFormatError, decode, encode_binary, encode_text, read_manifest,
                                 read_trace, write_manifest, write_trace)
from tracegen import random_trace


def f32(x):
    return struct.unpack("<f", struct.pack("<f", x))[0]


def rounded(t):
    t.attention = [f32(x) for x in t.attention]
    t.hidden_answer = [f32(x) for x in t.hidden_answer]
    t.hidden_candidates = [f32(x) for x in t.hidden_candidates]
    t.answer_logits = {k: (f32(z), f32(p)) for k, (z, p) in t.answer_logits.items()}
    return t


@pytest.mark.parametrize("seed", range(25))
def test_binary_and_text_round_trip(seed):
    t = random_trace(random.Random(seed), layers=1 + seed % 3, heads=1 + seed % 4)
    if seed % 5 == 0:
        t.step_logits = [{3: (0.5, 0.25)}, {}]
    want = rounded(random_trace(random.Random(seed), layers=1 + seed % 3, heads=1 + seed % 4))
    want.step_logits = t.step_logits
    assert decode(encode_binary(t)) == want
    assert decode(encode_text(t).encode()) == want


def test_binary_preamble_layout():
    buf = encode_binary(random_trace(random.Random(1)))
    assert buf[:8] == MAGIC
    version, header_len = struct.unpack("<II", buf[8:16])
    assert version == 1
    header = json.loads(buf[16:16 + header_len])
    assert list(header)[:4] == ["schema_version", "sample_id", "model_meta", "spans"]


@pytest.mark.parametrize("mutate, message", [
    (lambda b: b[:-1], "truncated"),
    (lambda b: b + b"\0", "trailing"),
    (lambda b: b[:8] + struct.pack("<I", 2) + b[12:], "schema version"),
    (lambda b: b"", "neither"),
    (lambda b: b"{}", "format tag"),
])
def test_corruption_is_reported(mutate, message):
    with pytest.raises(TraceFormatError, match=message):
        decode(mutate(encode_binary(random_trace(random.Random(2)))))


def test_encoder_rejects_wrong_section_sizes():
    t = random_trace(random.Random(3))
    t.attention.pop()
    with pytest.raises(TraceFormatError, match="attention"):
        encode_binary(t)


def test_manifest_round_trip_uses_relative_paths(tmp_path):
    (tmp_path / "traces").mkdir()
    p = tmp_path / "traces" / "a.dkt"
    write_trace(p, random_trace(random.Random(4)))
    write_manifest(tmp_path / "manifest.json", [("syn|baseline", p)])
    assert json.loads((tmp_path / "manifest.json").read_text())["traces"][0]["path"] == "traces/a.dkt"
    [(sid, path)] = read_manifest(tmp_path / "manifest.json")
    assert sid == "syn|baseline" and read_trace(path).sample_id == "syn|baseline"


def _write_set(tmp_path, encoding, count=6, corrupt=None):
    entries = []
    for i in range(count):
        t = random_trace(random.Random(100 + i), sample_id=f"s{i}|baseline")
        if corrupt is not None and i == corrupt:
            t.attention[0] += 0.5
        p = tmp_path / f"t{i}.{'dkt' if encoding == 'binary' else 'json'}"
        write_trace(p, t, encoding)
        entries.append((t.sample_id, p))
    write_manifest(tmp_path / "manifest.json", entries)
    return tmp_path / "manifest.json"


@pytest.mark.parametrize("encoding", ["binary", "text"])
def test_cpp_reader_accepts_python_traces(dki, tmp_path, encoding):
    manifest = _write_set(tmp_path, encoding)
    proc = dki(f"validate-traces --manifest {manifest}", check=0)
    assert "6 of 6 traces valid" in proc.stdout


def test_cpp_reader_flags_row_sum_violation(dki, tmp_path):
    manifest = _write_set(tmp_path, "binary", corrupt=2)
    proc = dki(f"validate-traces --json --manifest {manifest}", check=5)
    report = json.loads(proc.stdout)
    assert report["valid"] == 5
    bad = [r for r in report["traces"] if not r["ok"]]
    assert bad[0]["sample_id"] == "s2|baseline"
    assert any(c["name"] == "attention_row_sums" and not c["passed"] for c in bad[0]["checks"])


def test_cpp_reader_rejects_python_schema_bump(dki, tmp_path):
    p = tmp_path / "t.dkt"
    buf = bytearray(encode_binary(random_trace(random.Random(5))))
    buf[8] = 2
    p.write_bytes(bytes(buf))
    proc = dki(f"validate-traces --trace {p}", check=5)
    assert "schema version" in proc.stdout
