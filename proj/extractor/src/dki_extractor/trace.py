"""ActivationTrace files, byte-compatible with the C++ reader.

Binary layout: b"DKITRACE", u32 schema, u32 header length, compact JSON
header, then little-endian f32 sections (attention [L][H][M], hidden_answer
[L][D], hidden_candidates [L][S][D]), the answer logits and the per-step
logits. The text encoding is one JSON object tagged "dki-trace-text".
"""

from __future__ import annotations

import json
import os
import struct
import sys
from array import array
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

SCHEMA_VERSION = 1
MAGIC = b"DKITRACE"
TEXT_FORMAT = "dki-trace-text"


class TraceFormatError(ValueError):
    """Raised when bytes do not decode to a trace of the supported schema."""


@dataclass
class ModelMeta:
    layers: int
    heads: int
    seq_len: int
    hidden: int
    vocab: int
    model_id: str = ""


# Sparse logits: vocab id -> (raw logit, full-vocabulary softmax probability).
SparseLogits = Dict[int, Tuple[float, float]]


@dataclass
class ActivationTrace:
    sample_id: str
    meta: ModelMeta
    spans: List[Tuple[int, int]]  # half-open token ranges, one per candidate
    answer_pos: int
    attention: List[float]  # [L][H][M] row at answer_pos
    hidden_answer: List[float]  # [L][D]
    hidden_candidates: List[float]  # [L][S][D], S = total span tokens
    answer_logits: SparseLogits
    candidate_vocab: List[List[int]]
    decisions: Dict[str, str] = field(default_factory=dict)
    flags: List[str] = field(default_factory=list)
    answer_text: Optional[str] = None
    step_logits: List[SparseLogits] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def span_tokens(self) -> int:
        return sum(max(0, e - b) for b, e in self.spans)

    def expected_sizes(self) -> Tuple[int, int, int]:
        m = self.meta
        return (m.layers * m.heads * m.seq_len, m.layers * m.hidden, m.layers * self.span_tokens() * m.hidden)

    def check_sections(self) -> None:
        got = (len(self.attention), len(self.hidden_answer), len(self.hidden_candidates))
        names = ("attention", "hidden_answer", "hidden_candidates")
        for name, n, want in zip(names, got, self.expected_sizes()):
            if n != want:
                raise TraceFormatError(f"{name} has {n} values, expected {want}")


def _header(t: ActivationTrace) -> dict:
    h = {
        "schema_version": t.schema_version,
        "sample_id": t.sample_id,
        "model_meta": {
            "layers": t.meta.layers,
            "heads": t.meta.heads,
            "seq_len": t.meta.seq_len,
            "hidden": t.meta.hidden,
            "vocab": t.meta.vocab,
            "model_id": t.meta.model_id,
        },
        "spans": [[b, e] for b, e in t.spans],
        "answer_pos": t.answer_pos,
        "candidate_vocab": [list(v) for v in t.candidate_vocab],
        "decisions": dict(sorted(t.decisions.items())),
        "flags": list(t.flags),
    }
    if t.answer_text is not None:
        h["answer_text"] = t.answer_text
    return h


def _f32_bytes(values: Sequence[float]) -> bytes:
    a = array("f", values)
    if a.itemsize != 4:
        raise TraceFormatError("platform float is not 32-bit")
    if sys.byteorder != "little":
        a.byteswap()
    return a.tobytes()


def _f32_values(buf: bytes) -> List[float]:
    a = array("f")
    a.frombytes(buf)
    if sys.byteorder != "little":
        a.byteswap()
    return a.tolist()


def _logit_bytes(logits: SparseLogits) -> bytes:
    out = [struct.pack("<I", len(logits))]
    for vid in sorted(logits):
        z, p = logits[vid]
        out.append(struct.pack("<iff", vid, z, p))
    return b"".join(out)


def encode_binary(t: ActivationTrace) -> bytes:
    t.check_sections()
    header = json.dumps(_header(t), separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    parts = [MAGIC, struct.pack("<II", t.schema_version, len(header)), header]
    parts += [_f32_bytes(t.attention), _f32_bytes(t.hidden_answer), _f32_bytes(t.hidden_candidates)]
    parts.append(_logit_bytes(t.answer_logits))
    parts.append(struct.pack("<I", len(t.step_logits)))
    parts += [_logit_bytes(s) for s in t.step_logits]
    return b"".join(parts)


def _rounded(values: Iterable[float]) -> List[float]:
    # Round through f32 so text and binary encodings carry identical values.
    return _f32_values(_f32_bytes(list(values)))


def _logits_json(logits: SparseLogits) -> list:
    return [[vid, *_rounded(logits[vid])] for vid in sorted(logits)]


def encode_text(t: ActivationTrace) -> str:
    t.check_sections()
    j = {"format": TEXT_FORMAT}
    j.update(_header(t))
    j["attention"] = _rounded(t.attention)
    j["hidden_answer"] = _rounded(t.hidden_answer)
    j["hidden_candidates"] = _rounded(t.hidden_candidates)
    j["answer_logits"] = _logits_json(t.answer_logits)
    j["step_logits"] = [_logits_json(s) for s in t.step_logits]
    return json.dumps(j, ensure_ascii=False, indent=1) + "\n"


def _parse_header(h: dict) -> ActivationTrace:
    if not isinstance(h, dict):
        raise TraceFormatError("header is not an object")
    try:
        version = h["schema_version"]
        if version != SCHEMA_VERSION:
            raise TraceFormatError(f"unsupported schema version {version} (expected {SCHEMA_VERSION})")
        m = h["model_meta"]
        meta = ModelMeta(int(m["layers"]), int(m["heads"]), int(m["seq_len"]), int(m["hidden"]), int(m["vocab"]),
                         m.get("model_id", ""))
        spans = []
        for s in h["spans"]:
            if not isinstance(s, list) or len(s) != 2:
                raise TraceFormatError("span entries must be [begin, end]")
            spans.append((int(s[0]), int(s[1])))
        return ActivationTrace(
            sample_id=h["sample_id"], meta=meta, spans=spans, answer_pos=int(h["answer_pos"]), attention=[],
            hidden_answer=[], hidden_candidates=[], answer_logits={},
            candidate_vocab=[[int(x) for x in v] for v in h["candidate_vocab"]],
            decisions=dict(h.get("decisions", {})), flags=list(h.get("flags", [])), answer_text=h.get("answer_text"),
            schema_version=version)
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, TraceFormatError):
            raise
        raise TraceFormatError(f"invalid header: {e!r}") from e


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if n < 0 or len(self.buf) - self.pos < n:
            raise TraceFormatError(f"truncated {what} at byte {self.pos}")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def f32s(self, n: int, what: str) -> List[float]:
        return _f32_values(self.take(4 * n, what))

    def logits(self) -> SparseLogits:
        out: SparseLogits = {}
        for _ in range(self.u32("logit count")):
            vid, z, p = struct.unpack("<iff", self.take(12, "logit entry"))
            if vid in out:
                raise TraceFormatError(f"duplicate logit id {vid}")
            out[vid] = (z, p)
        return out


def decode(buf: bytes) -> ActivationTrace:
    if buf.startswith(MAGIC):
        r = _Reader(buf[len(MAGIC):])
        version = r.u32("schema version")
        if version != SCHEMA_VERSION:
            raise TraceFormatError(f"unsupported schema version {version} (expected {SCHEMA_VERSION})")
        header_len = r.u32("header length")
        try:
            header = json.loads(r.take(header_len, "header").decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise TraceFormatError(f"header: {e}") from e
        t = _parse_header(header)
        a, d, c = t.expected_sizes()
        t.attention = r.f32s(a, "attention")
        t.hidden_answer = r.f32s(d, "hidden_answer")
        t.hidden_candidates = r.f32s(c, "hidden_candidates")
        t.answer_logits = r.logits()
        t.step_logits = [r.logits() for _ in range(r.u32("step count"))]
        if r.pos != len(r.buf):
            raise TraceFormatError(f"{len(r.buf) - r.pos} trailing bytes")
        return t

    try:
        j = json.loads(buf.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise TraceFormatError("neither a binary trace nor a JSON text trace") from e
    if not isinstance(j, dict) or j.get("format") != TEXT_FORMAT:
        raise TraceFormatError("text trace lacks format tag")
    t = _parse_header(j)

    def logits(rows) -> SparseLogits:
        out: SparseLogits = {}
        for row in rows:
            if not isinstance(row, list) or len(row) != 3:
                raise TraceFormatError("logit entries must be [id, logit, prob]")
            if int(row[0]) in out:
                raise TraceFormatError(f"duplicate logit id {row[0]}")
            out[int(row[0])] = (float(row[1]), float(row[2]))
        return out

    try:
        t.attention = [float(x) for x in j["attention"]]
        t.hidden_answer = [float(x) for x in j["hidden_answer"]]
        t.hidden_candidates = [float(x) for x in j["hidden_candidates"]]
        t.answer_logits = logits(j["answer_logits"])
        t.step_logits = [logits(s) for s in j.get("step_logits", [])]
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, TraceFormatError):
            raise
        raise TraceFormatError(f"invalid section: {e!r}") from e
    t.check_sections()
    return t


def write_trace(path: os.PathLike, t: ActivationTrace, encoding: str = "binary") -> None:
    path = Path(path)
    if encoding == "binary":
        path.write_bytes(encode_binary(t))
    elif encoding == "text":
        path.write_text(encode_text(t), encoding="utf-8")
    else:
        raise ValueError(f"unknown trace encoding '{encoding}' (binary or text)")


def read_trace(path: os.PathLike) -> ActivationTrace:
    return decode(Path(path).read_bytes())


def write_manifest(path: os.PathLike, entries: Iterable[Tuple[str, os.PathLike]]) -> None:
    """Writes {"traces":[{"sample_id","path"}]} with paths relative to the manifest."""
    path = Path(path)
    base = path.parent.resolve()
    rows = []
    for sample_id, p in entries:
        p = Path(p)
        try:
            rel = p.resolve().relative_to(base)
        except ValueError:
            rel = p.resolve()
        rows.append({"sample_id": sample_id, "path": rel.as_posix()})
    path.write_text(json.dumps({"traces": rows}, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def read_manifest(path: os.PathLike) -> List[Tuple[str, Path]]:
    path = Path(path)
    j = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(j, dict) or not isinstance(j.get("traces"), list):
        raise TraceFormatError(f"{path}: manifest needs a 'traces' array")
    out = []
    for e in j["traces"]:
        if not isinstance(e, dict) or "sample_id" not in e or "path" not in e:
            raise TraceFormatError(f"{path}: manifest entries need sample_id and path")
        p = Path(e["path"])
        out.append((e["sample_id"], p if p.is_absolute() else path.parent / p))
    return out
