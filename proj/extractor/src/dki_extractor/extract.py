"""Runs a causal LM on one bundled prompt and captures an ActivationTrace.

Capture happens in one post-hoc forward pass over prompt + answer after
greedy generation. torch is imported lazily so the format modules work
without it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .answer import latest_value_range
from .bundle import PromptRecord
from .spans import candidate_vocab, locate_candidate_spans
from .trace import ActivationTrace, ModelMeta

DECISIONS = {
    "attention_capture": "post_hoc_forward_pass",
    "answer_anchor": "first_token_of_latest_value",
    "decoding": "greedy",
}


class ExtractionError(RuntimeError):
    """Sample-level failure (context overflow, empty answer); the caller logs and skips it."""


@dataclass
class ExtractionJob:
    record: PromptRecord
    model_id: str = ""
    max_new_tokens: int = 64
    # Replaces generation with a fixed answer (teacher forcing), for conformance runs.
    forced_answer: Optional[str] = None


def _answer_tokens(tokenizer, gen_ids: Sequence[int]) -> Tuple[str, List[Tuple[int, int]]]:
    """Decoded answer and each generated token's character range, via prefix decoding."""
    offsets, prev = [], ""
    for k in range(len(gen_ids)):
        cur = tokenizer.decode(gen_ids[:k + 1])
        start = len(prev) if cur.startswith(prev) else min(len(prev), len(cur))
        offsets.append((start, len(cur)))
        prev = cur
    return prev, offsets


def _greedy(model, prompt_ids: Sequence[int], max_new_tokens: int, eos_ids: Sequence[int]) -> List[int]:
    import torch

    ids = torch.tensor([list(prompt_ids)], dtype=torch.long)
    out: List[int] = []
    past = None
    step_input = ids
    with torch.no_grad():
        for _ in range(max_new_tokens):
            res = model(input_ids=step_input, past_key_values=past, use_cache=True)
            past = res.past_key_values
            nxt = int(torch.argmax(res.logits[0, -1]).item())
            if nxt in eos_ids:
                break
            out.append(nxt)
            step_input = torch.tensor([[nxt]], dtype=torch.long)
    return out


def _eos_ids(model, tokenizer) -> List[int]:
    ids = []
    for src in (getattr(model, "generation_config", None), getattr(model, "config", None),
                getattr(tokenizer, "tok", None)):
        e = getattr(src, "eos_token_id", None)
        if isinstance(e, int):
            ids.append(e)
        elif isinstance(e, (list, tuple)):
            ids.extend(int(x) for x in e)
    return ids


def _context_limit(model) -> Optional[int]:
    cfg = getattr(model, "config", None)
    for key in ("max_position_embeddings", "n_positions"):
        v = getattr(cfg, key, None)
        if isinstance(v, int):
            return v
    return None


def extract_trace(job: ExtractionJob, model, tokenizer) -> ActivationTrace:
    import torch

    record = job.record
    wrap = getattr(tokenizer, "wrap_prompt", None)
    prompt_text, shift = wrap(record.text) if wrap else (record.text, 0)
    prompt_ids, prompt_offsets = tokenizer.encode(prompt_text)
    limit = _context_limit(model)
    budget = len(prompt_ids) + (len(tokenizer.encode(job.forced_answer)[0]) if job.forced_answer is not None
                                else job.max_new_tokens)
    if limit is not None and budget > limit:
        raise ExtractionError(f"{record.sample_id}: {budget} tokens exceed the context window of {limit}")

    spans = locate_candidate_spans(record, prompt_offsets, prompt_text, shift)

    if job.forced_answer is None:
        gen_ids = _greedy(model, prompt_ids, job.max_new_tokens, _eos_ids(model, tokenizer))
        answer_text, answer_offsets = _answer_tokens(tokenizer, gen_ids)
    else:
        gen_ids, answer_offsets = tokenizer.encode(job.forced_answer)
        answer_text = job.forced_answer
    if not gen_ids:
        raise ExtractionError(f"{record.sample_id}: the model produced no answer tokens")

    flags: List[str] = []
    k = 0
    latest = latest_value_range(answer_text)
    if latest is None:
        flags.append("parse_failed")
    else:
        start, _, value = latest
        k = next((i for i, (s, e) in enumerate(answer_offsets) if e > start), len(gen_ids) - 1)
        if value.strip().casefold() not in {v.strip().casefold() for v in record.trajectory.values}:
            flags.append("divergent_answer")
    answer_pos = len(prompt_ids) + k

    full = torch.tensor([list(prompt_ids) + list(gen_ids)], dtype=torch.long)
    with torch.no_grad():
        res = model(input_ids=full, output_attentions=True, output_hidden_states=True, use_cache=False)
    if res.attentions is None or any(a is None for a in res.attentions):
        raise ExtractionError("model returned no attention weights; load it with attn_implementation='eager'")

    layers = len(res.attentions)
    heads = res.attentions[0].shape[1]
    seq_len = full.shape[1]
    attention = torch.stack([a[0, :, answer_pos, :] for a in res.attentions]).float()  # [L][H][M]
    states = res.hidden_states[1:]  # drop the embedding output
    hidden = states[0].shape[-1]
    hidden_answer = torch.stack([s[0, answer_pos] for s in states]).float()  # [L][D]
    span_index = [i for b, e in spans for i in range(b, e)]
    hidden_candidates = torch.stack([s[0, span_index] for s in states]).float()  # [L][S][D]

    logits = res.logits[0, answer_pos - 1].double()
    log_probs = torch.log_softmax(logits, dim=-1)
    vocab = candidate_vocab(list(prompt_ids), spans)
    wanted = sorted({i for v in vocab for i in v} | {int(gen_ids[k])})
    answer_logits = {}
    for vid in wanted:
        z = float(logits[vid])
        if not math.isfinite(z):
            raise ExtractionError(f"{record.sample_id}: non-finite logit for vocab id {vid}")
        answer_logits[vid] = (z, float(torch.exp(log_probs[vid])))

    decisions = dict(DECISIONS)
    decisions["prompt_char_offset"] = str(shift)
    return ActivationTrace(
        sample_id=record.sample_id,
        meta=ModelMeta(layers=layers, heads=heads, seq_len=seq_len, hidden=hidden, vocab=int(logits.shape[-1]),
                       model_id=job.model_id),
        spans=spans,
        answer_pos=answer_pos,
        attention=attention.reshape(-1).tolist(),
        hidden_answer=hidden_answer.reshape(-1).tolist(),
        hidden_candidates=hidden_candidates.reshape(-1).tolist(),
        answer_logits=answer_logits,
        candidate_vocab=vocab,
        decisions=decisions,
        flags=flags,
        answer_text=answer_text,
    )


def load_model(model_id: str):
    """Loads a causal LM in float32 with eager attention so weights are returned."""
    import torch
    from transformers import AutoModelForCausalLM, AutoTokenizer

    from .tokenizers import HFTokenizer

    tok = AutoTokenizer.from_pretrained(model_id)
    model = AutoModelForCausalLM.from_pretrained(model_id, attn_implementation="eager", dtype=torch.float32)
    model.eval()
    return model, HFTokenizer(tok)
