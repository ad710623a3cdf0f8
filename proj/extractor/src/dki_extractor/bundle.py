"""Prompt bundles written by `dki export-prompts` (one JSON object per line)."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Optional, Tuple

TEMPLATE_VERSION = "dki-prompts/1"


class BundleError(ValueError):
    """Raised for a malformed bundle line; the message carries path:line."""


@dataclass
class Trajectory:
    id: str
    cue: str
    values: List[str]
    source: str = "synthetic"
    document: Optional[str] = None


@dataclass
class PromptRecord:
    sample_id: str
    template_version: str
    variant: str
    trajectory: Trajectory
    text: str
    # UTF-8 byte range of the record block in `text`, as written by the C++ side.
    record_block_bytes: Tuple[int, int]
    line: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def record_block(self) -> Tuple[int, int]:
        """Character range of the record block in `text`."""
        raw = self.text.encode("utf-8")
        b, e = self.record_block_bytes
        return len(raw[:b].decode("utf-8")), len(raw[:e].decode("utf-8"))

    @property
    def is_narrative(self) -> bool:
        return self.variant == "narrative"


def _parse_line(obj: dict, where: str) -> PromptRecord:
    try:
        t = obj["trajectory"]
        traj = Trajectory(id=t["id"], cue=t["cue"], values=list(t["values"]), source=t.get("source", "synthetic"),
                          document=t.get("document"))
        b, e = obj["record_block"]
        rec = PromptRecord(sample_id=obj["sample_id"], template_version=obj["template_version"],
                           variant=obj["variant"], trajectory=traj, text=obj["text"],
                           record_block_bytes=(int(b), int(e)))
    except (KeyError, TypeError, ValueError) as err:
        raise BundleError(f"{where}: missing or invalid field ({err!r})") from err
    n = len(rec.text.encode("utf-8"))
    if not 0 <= rec.record_block_bytes[0] <= rec.record_block_bytes[1] <= n:
        raise BundleError(f"{where}: record_block {list(rec.record_block_bytes)} outside text of {n} bytes")
    return rec


def iter_bundle(path: os.PathLike, template_version: Optional[str] = TEMPLATE_VERSION) -> Iterator[PromptRecord]:
    """Yields prompts in file order; rejects a template version other than the pinned one."""
    path = Path(path)
    with path.open(encoding="utf-8") as f:
        for n, line in enumerate(f, start=1):
            if not line.strip():
                continue
            where = f"{path}:{n}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise BundleError(f"{where}: {err}") from err
            rec = _parse_line(obj, where)
            if template_version is not None and rec.template_version != template_version:
                raise BundleError(
                    f"{where}: template version '{rec.template_version}' (extractor expects '{template_version}')")
            rec.line = n
            yield rec


def read_bundle(path: os.PathLike, template_version: Optional[str] = TEMPLATE_VERSION) -> List[PromptRecord]:
    return list(iter_bundle(path, template_version))
