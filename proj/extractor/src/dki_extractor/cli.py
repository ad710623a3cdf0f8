"""dki-extract: bundle in, traces plus manifest out."""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path
from typing import List, Optional

from .bundle import BundleError, read_bundle
from .extract import ExtractionError, ExtractionJob, extract_trace, load_model
from .spans import SpanError
from .trace import write_manifest, write_trace

log = logging.getLogger("dki_extractor")


def trace_filename(index: int, sample_id: str, encoding: str) -> str:
    safe = re.sub(r"[^A-Za-z0-9._-]+", "_", sample_id).strip("_")[:80]
    return f"{index:05d}_{safe}.{'dkt' if encoding == 'binary' else 'json'}"


def run(records, model, tokenizer, out: Path, model_id: str, encoding: str = "binary", max_new_tokens: int = 64,
        forced_answers: Optional[dict] = None) -> dict:
    """Extracts every record; failures go to skipped.jsonl with the reason. Returns counts."""
    traces_dir = out / "traces"
    traces_dir.mkdir(parents=True, exist_ok=True)
    entries, skipped = [], []
    for i, rec in enumerate(records):
        job = ExtractionJob(record=rec, model_id=model_id, max_new_tokens=max_new_tokens,
                            forced_answer=(forced_answers or {}).get(rec.sample_id))
        try:
            trace = extract_trace(job, model, tokenizer)
        except (SpanError, ExtractionError) as e:
            log.warning("skipped %s: %s", rec.sample_id, e)
            skipped.append({"sample_id": rec.sample_id, "reason": type(e).__name__, "detail": str(e)})
            continue
        path = traces_dir / trace_filename(i, rec.sample_id, encoding)
        write_trace(path, trace, encoding)
        entries.append((rec.sample_id, path))
        log.info("wrote %s (%s)", path.name, ",".join(trace.flags) or "ok")
    write_manifest(out / "manifest.json", entries)
    with (out / "skipped.jsonl").open("w", encoding="utf-8") as f:
        for s in skipped:
            f.write(json.dumps(s, ensure_ascii=False) + "\n")
    return {"written": len(entries), "skipped": len(skipped)}


def main(argv: Optional[List[str]] = None) -> int:
    p = argparse.ArgumentParser(prog="dki-extract", description=__doc__)
    p.add_argument("--bundle", required=True, type=Path, help="prompt bundle from `dki export-prompts`")
    p.add_argument("--model", required=True, help="Hugging Face model id or local path")
    p.add_argument("--out", required=True, type=Path, help="output directory (traces/, manifest.json)")
    p.add_argument("--encoding", choices=("binary", "text"), default="binary")
    p.add_argument("--max-new-tokens", type=int, default=64)
    p.add_argument("--limit", type=int, default=0, help="extract at most this many prompts (0 = all)")
    p.add_argument("--variants", default="", help="comma-separated variant names to keep")
    p.add_argument("-v", "--verbose", action="store_true")
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    try:
        records = read_bundle(args.bundle)
    except (OSError, BundleError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    if args.variants:
        keep = set(args.variants.split(","))
        records = [r for r in records if r.variant in keep]
    if args.limit:
        records = records[:args.limit]
    model, tokenizer = load_model(args.model)
    counts = run(records, model, tokenizer, args.out, args.model, args.encoding, args.max_new_tokens)
    print(f"{counts['written']} traces written, {counts['skipped']} skipped -> {args.out / 'manifest.json'}")
    return 0 if counts["written"] else 5


if __name__ == "__main__":
    sys.exit(main())
