"""Candidate span location: maps each value to its token range in the record block."""

from __future__ import annotations

from typing import List, Protocol, Sequence, Tuple

from .bundle import PromptRecord

Span = Tuple[int, int]
Offsets = Sequence[Tuple[int, int]]


class Tokenizer(Protocol):
    vocab_size: int

    def encode(self, text: str) -> Tuple[List[int], List[Tuple[int, int]]]:
        """Token ids plus the character range of each token in `text`."""

    def decode(self, ids: Sequence[int]) -> str:
        ...


class SpanError(ValueError):
    """A value could not be aligned to whole tokens; the sample is skipped and logged."""


class AmbiguousSpanError(SpanError):
    """A value occurs more than once in a narrative block."""


def _find_all(haystack: str, needle: str) -> List[int]:
    out, at = [], haystack.find(needle)
    while at != -1:
        out.append(at)
        at = haystack.find(needle, at + 1)
    return out


def value_char_ranges(text: str, block: Span, values: Sequence[str], narrative: bool) -> List[Span]:
    """Character range of each value inside the block, in trajectory order."""
    b, e = block
    body = text[b:e]
    ranges: List[Span] = []
    if narrative:
        cursor = 0
        for t, v in enumerate(values):
            hits = _find_all(body, v)
            if not hits:
                raise SpanError(f"candidate {t} '{v}' does not occur in the narrative block")
            if len(hits) > 1:
                raise AmbiguousSpanError(
                    f"candidate {t} '{v}' occurs {len(hits)} times in the narrative block at offsets "
                    + ", ".join(str(b + h) for h in hits))
            if hits[0] < cursor:
                raise SpanError(f"candidate {t} '{v}' occurs before candidate {t - 1}")
            ranges.append((b + hits[0], b + hits[0] + len(v)))
            cursor = hits[0] + len(v)
        return ranges

    # Record block: "START:", one "cue:value" line per update, "END".
    lines, pos = [], 0
    while pos < len(body):
        nl = body.find("\n", pos)
        nl = len(body) if nl == -1 else nl
        lines.append((pos, nl))
        pos = nl + 1
    if len(lines) != len(values) + 2:
        raise SpanError(f"record block has {len(lines)} lines, expected {len(values) + 2}")
    for t, v in enumerate(values):
        ls, le = lines[t + 1]
        colon = body.find(":", ls, le)
        if colon == -1 or body[colon + 1:le] != v:
            raise SpanError(f"record line {t + 1} '{body[ls:le]}' does not end with ':{v}'")
        ranges.append((b + colon + 1, b + le))
    return ranges


def align_tokens(offsets: Offsets, char_range: Span) -> Span:
    """Smallest token range whose characters cover `char_range`; special tokens (empty offsets) never match."""
    cs, ce = char_range
    hit = [i for i, (s, e) in enumerate(offsets) if e > s and s < ce and e > cs]
    if not hit:
        raise SpanError(f"no token overlaps characters [{cs}, {ce})")
    return hit[0], hit[-1] + 1


def locate_candidate_spans(record: PromptRecord, offsets: Offsets, text: str, shift: int = 0) -> List[Span]:
    """Token spans for every candidate value of `record`.

    `offsets` index into `text`, which holds the prompt at character offset
    `shift` (non-zero when a chat template wraps it). Every span must
    detokenize back to the value: tokens may add surrounding whitespace but no
    other characters.
    """
    block = record.record_block
    ranges = value_char_ranges(record.text, block, record.trajectory.values, record.is_narrative)
    spans: List[Span] = []
    for t, (cs, ce) in enumerate(ranges):
        b, e = align_tokens(offsets, (cs + shift, ce + shift))
        covered = text[offsets[b][0]:offsets[e - 1][1]]
        value = record.trajectory.values[t]
        if covered.strip() != value:
            pieces = [text[s:x] for s, x in offsets[b:e]]
            raise SpanError(f"candidate {t} '{value}' straddles token boundaries: tokens {b}..{e - 1} read "
                            f"{covered!r} as {pieces!r}")
        if spans and b < spans[-1][1]:
            raise SpanError(f"candidate {t} shares token {b} with candidate {t - 1}")
        spans.append((b, e))
    return spans


def candidate_vocab(ids: Sequence[int], spans: Sequence[Span]) -> List[List[int]]:
    """Distinct token ids of each span, in first-occurrence order."""
    out = []
    for b, e in spans:
        seen: List[int] = []
        for i in ids[b:e]:
            if i not in seen:
                seen.append(i)
        out.append(seen)
    return out
