"""Tokenizer adapters exposing ids plus character offsets."""

from __future__ import annotations

from typing import List, Sequence, Tuple


class CharTokenizer:
    """One token per character (code point modulo the vocabulary, 0 reserved).

    Offline reference tokenizer: offsets are exact, so span alignment never
    straddles a boundary.
    """

    def __init__(self, vocab_size: int = 256):
        self.vocab_size = vocab_size

    def encode(self, text: str) -> Tuple[List[int], List[Tuple[int, int]]]:
        ids = [1 + ord(c) % (self.vocab_size - 1) for c in text]
        return ids, [(i, i + 1) for i in range(len(text))]

    def decode(self, ids: Sequence[int]) -> str:
        return "".join(chr(i - 1) if 0 < i < self.vocab_size else "?" for i in ids)


class HFTokenizer:
    """Wraps a fast Hugging Face tokenizer (offset mapping required)."""

    def __init__(self, tokenizer):
        if not getattr(tokenizer, "is_fast", False):
            raise ValueError("a fast tokenizer is required for character offsets")
        self.tok = tokenizer
        self.vocab_size = len(tokenizer)

    def encode(self, text: str) -> Tuple[List[int], List[Tuple[int, int]]]:
        enc = self.tok(text, add_special_tokens=False, return_offsets_mapping=True)
        return list(enc["input_ids"]), [tuple(o) for o in enc["offset_mapping"]]

    def decode(self, ids: Sequence[int]) -> str:
        return self.tok.decode(list(ids), skip_special_tokens=True)

    def wrap_prompt(self, text: str) -> Tuple[str, int]:
        """Applies the chat template when one exists; returns the string and the prompt's offset in it."""
        if not getattr(self.tok, "chat_template", None):
            return text, 0
        wrapped = self.tok.apply_chat_template([{"role": "user", "content": text}], tokenize=False,
                                               add_generation_prompt=True)
        shift = wrapped.find(text)
        if shift == -1:
            raise ValueError("chat template does not embed the prompt verbatim")
        return wrapped, shift
