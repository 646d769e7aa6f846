"""Inference backends.

A backend supplies raw model capabilities; the app layer owns the wire
contract and the subword-to-word projection. ``predict_subwords`` returns
subword probabilities plus the word ranges they tile, so every backend is
forced through the same projection path.

The stub backend has no ML dependency and is fully deterministic: fill
tokens and probabilities are derived from CRC32 of the request content.
It exists to carry the wire-contract test suite and to let the data
pipeline run end to end without checkpoints. The transformers backend
loads real finetuned models lazily; it requires the ``models`` extra and
local checkpoint paths.
"""

import zlib
from dataclasses import dataclass
from typing import NamedTuple, Protocol

from .wire import MASK_TOKEN


class SubwordPrediction(NamedTuple):
    probs: list[float]
    word_ranges: list[tuple[int, int]]


class Backend(Protocol):
    name: str

    def load(self) -> None: ...

    def infill(
        self, tokens: list[str], beam_size: int, length_penalty: float
    ) -> list[str]: ...

    def predict_subwords(
        self, source: str, target: str, reference: str | None
    ) -> SubwordPrediction: ...


def _crc_unit(text: str) -> float:
    """Deterministic pseudo-probability in [0, 1] from a string."""
    return (zlib.crc32(text.encode("utf-8")) % 1_000_000) / 999_999.0


_FILL_WORDS = ("the", "of", "and", "to", "a", "in", "that", "is", "was", "for")


class StubBackend:
    """Deterministic model-free backend."""

    name = "stub"

    def load(self) -> None:
        pass

    def infill(
        self, tokens: list[str], beam_size: int, length_penalty: float
    ) -> list[str]:
        context = " ".join(tokens)
        out = []
        for i, tok in enumerate(tokens):
            if tok == MASK_TOKEN:
                pick = zlib.crc32(f"{i}|{context}".encode("utf-8"))
                out.append(_FILL_WORDS[pick % len(_FILL_WORDS)])
            else:
                out.append(tok)
        return out

    def predict_subwords(
        self, source: str, target: str, reference: str | None
    ) -> SubwordPrediction:
        # words of six or more characters split into two subwords, so the
        # projection path sees real multi-subword groups
        probs: list[float] = []
        ranges: list[tuple[int, int]] = []
        context = source if reference is None else f"{source}||{reference}"
        for w, word in enumerate(target.split()):
            pieces = [word] if len(word) < 6 else [word[:3], word[3:]]
            start = len(probs)
            for piece in pieces:
                probs.append(_crc_unit(f"{context}|{w}|{piece}"))
            ranges.append((start, len(probs) - 1))
        return SubwordPrediction(probs=probs, word_ranges=ranges)


@dataclass
class TransformersBackend:
    """Finetuned-checkpoint backend over torch and transformers.

    ``infill_model`` is a seq2seq denoiser (BART family) and
    ``predict_model`` a token classifier whose label 1 means hallucinated.
    Both are loaded from local paths in load(); import of the heavy
    dependencies is deferred until then.
    """

    infill_model: str
    predict_model: str
    device: str = "cpu"
    max_new_tokens: int = 256
    name = "transformers"

    def load(self) -> None:
        import torch  # noqa: F401
        from transformers import (
            AutoModelForSeq2SeqLM,
            AutoModelForTokenClassification,
            AutoTokenizer,
        )

        self._infill_tok = AutoTokenizer.from_pretrained(self.infill_model)
        self._infill = AutoModelForSeq2SeqLM.from_pretrained(
            self.infill_model
        ).to(self.device)
        self._infill.eval()
        self._pred_tok = AutoTokenizer.from_pretrained(
            self.predict_model, use_fast=True
        )
        self._pred = AutoModelForTokenClassification.from_pretrained(
            self.predict_model
        ).to(self.device)
        self._pred.eval()

    def infill(
        self, tokens: list[str], beam_size: int, length_penalty: float
    ) -> list[str]:
        import torch

        text = " ".join(tokens)
        inputs = self._infill_tok(text, return_tensors="pt").to(self.device)
        with torch.no_grad():
            generated = self._infill.generate(
                **inputs,
                num_beams=beam_size,
                length_penalty=length_penalty,
                max_new_tokens=self.max_new_tokens,
            )
        decoded = self._infill_tok.decode(generated[0], skip_special_tokens=True)
        return decoded.split()

    def predict_subwords(
        self, source: str, target: str, reference: str | None
    ) -> SubwordPrediction:
        import torch

        context = source if reference is None else f"{source} {reference}"
        enc = self._pred_tok(
            text=context.split(),
            text_pair=target.split(),
            is_split_into_words=True,
            truncation=True,
            return_tensors="pt",
        ).to(self.device)
        with torch.no_grad():
            logits = self._pred(**enc).logits[0]
        scores = torch.softmax(logits, dim=-1)[:, 1].tolist()

        seq_ids = enc.sequence_ids(0)
        word_ids = enc.word_ids(0)
        probs: list[float] = []
        ranges: list[tuple[int, int]] = []
        current_word = None
        for pos, (seq, word) in enumerate(zip(seq_ids, word_ids)):
            if seq != 1 or word is None:
                continue
            if word != current_word:
                ranges.append((len(probs), len(probs)))
                current_word = word
            else:
                start, _ = ranges[-1]
                ranges[-1] = (start, len(probs))
            probs.append(scores[pos])
        return SubwordPrediction(probs=probs, word_ranges=ranges)
