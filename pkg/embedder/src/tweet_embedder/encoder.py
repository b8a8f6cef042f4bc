"""Batch sentence encoding with a pretrained multilingual transformer.

Two encoder families are exposed: mbert_mean_pool (multilingual BERT,
token states pooled over the attention mask) and laser_style (a
language-agnostic sentence-embedding checkpoint). Either can be redirected
to a local checkout with model_path. Inference runs in eval mode with
gradients off, so identical inputs always produce identical vectors.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

FAMILIES = {
    "mbert_mean_pool": "bert-base-multilingual-cased",
    "laser_style": "sentence-transformers/paraphrase-multilingual-MiniLM-L12-v2",
}
POOLINGS = ("mean", "cls")


class ModelUnavailableError(RuntimeError):
    """The pretrained checkpoint could not be loaded."""


@dataclass(frozen=True)
class EncoderChoice:
    family: str
    max_sequence_length: int = 128
    batch_size: int = 32
    pooling: str = "mean"
    model_path: str | None = None  # local checkout overriding the family default

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {sorted(FAMILIES)}")
        if self.max_sequence_length < 1 or self.batch_size < 1:
            raise ValueError("max_sequence_length and batch_size must be positive")
        if self.pooling not in POOLINGS:
            raise ValueError(f"pooling must be one of {POOLINGS}")

    @property
    def model_name(self) -> str:
        return self.model_path or FAMILIES[self.family]


class Encoder:
    def __init__(self, choice: EncoderChoice):
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise ModelUnavailableError(
                f"transformers/torch not installed ({exc}); pip install torch transformers"
            ) from exc
        self._torch = torch
        self.choice = choice
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(choice.model_name)
            self.model = AutoModel.from_pretrained(choice.model_name)
        except Exception as exc:  # hub/file errors vary by transformers version
            raise ModelUnavailableError(
                f"cannot load {choice.model_name!r}: {exc}. Download the checkpoint "
                "(e.g. huggingface-cli download) or point --model-path at a local copy."
            ) from exc
        self.model.eval()
        self.dim = int(self.model.config.hidden_size)

    def encode_batch(self, texts: Sequence[str]) -> np.ndarray:
        """Encode a batch; texts beyond max_sequence_length are truncated."""
        torch = self._torch
        enc = self.tokenizer(
            list(texts),
            padding=True,
            truncation=True,
            max_length=self.choice.max_sequence_length,
            return_tensors="pt",
        )
        with torch.no_grad():
            hidden = self.model(**enc).last_hidden_state
        if self.choice.pooling == "cls":
            pooled = hidden[:, 0, :]
        else:
            mask = enc["attention_mask"].unsqueeze(-1).to(hidden.dtype)
            pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1)
        return pooled.cpu().numpy().astype(np.float32)

    def encode_all(self, texts: Sequence[str]) -> Iterator[np.ndarray]:
        """Yield one vector per text, in order, batching internally."""
        size = self.choice.batch_size
        for start in range(0, len(texts), size):
            yield from self.encode_batch(texts[start : start + size])


def read_filtered_jsonl(stream) -> tuple[list[tuple[str, str]], int]:
    """Parse (id, text) pairs from the filtered-tweet JSONL; returns (pairs, skipped)."""
    pairs: list[tuple[str, str]] = []
    skipped = 0
    for line in stream:
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            pairs.append((str(obj["id"]), str(obj["text"])))
        except (json.JSONDecodeError, KeyError, TypeError):
            skipped += 1
    return pairs, skipped
