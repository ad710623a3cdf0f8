"""Locates the "latest" value inside a generated answer."""

from __future__ import annotations

import json
import re
from typing import Optional, Tuple

_LATEST = re.compile(r'"latest"\s*:\s*"')


def last_json_object(text: str) -> Optional[Tuple[int, int, dict]]:
    """Start, end and value of the last parseable JSON object in `text`."""
    decoder = json.JSONDecoder()
    found = None
    at = text.find("{")
    while at != -1:
        try:
            obj, end = decoder.raw_decode(text, at)
        except json.JSONDecodeError:
            at = text.find("{", at + 1)
            continue
        if isinstance(obj, dict):
            found = (at, end, obj)
        at = text.find("{", end)
    return found


def latest_value_range(text: str) -> Optional[Tuple[int, int, str]]:
    """Character range and value of the "latest" string field, or None when unparseable."""
    hit = last_json_object(text)
    if hit is None:
        return None
    start, end, obj = hit
    value = obj.get("latest")
    if not isinstance(value, str):
        return None
    m = None
    for m in _LATEST.finditer(text, start, end):
        pass
    if m is None:
        return None
    # The raw field may be escaped; anchor on its first character either way.
    raw_end = m.end()
    decoder = json.JSONDecoder()
    try:
        decoded, stop = decoder.raw_decode(text, raw_end - 1)
    except json.JSONDecodeError:
        return None
    if decoded != value:
        return None
    return raw_end, stop - 1, value
