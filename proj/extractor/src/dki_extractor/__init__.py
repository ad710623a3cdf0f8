"""Activation trace extractor feeding `dki validate-traces` and `dki analyze`."""

from .bundle import TEMPLATE_VERSION, BundleError, PromptRecord, Trajectory, iter_bundle, read_bundle
from .spans import AmbiguousSpanError, SpanError, candidate_vocab, locate_candidate_spans
from .trace import (SCHEMA_VERSION, ActivationTrace, ModelMeta, TraceFormatError, decode, encode_binary, encode_text,
                    read_manifest, read_trace, write_manifest, write_trace)

__all__ = [
    "TEMPLATE_VERSION", "BundleError", "PromptRecord", "Trajectory", "iter_bundle", "read_bundle",
    "AmbiguousSpanError", "SpanError", "candidate_vocab", "locate_candidate_spans",
    "SCHEMA_VERSION", "ActivationTrace", "ModelMeta", "TraceFormatError", "decode", "encode_binary", "encode_text",
    "read_manifest", "read_trace", "write_manifest", "write_trace",
]
