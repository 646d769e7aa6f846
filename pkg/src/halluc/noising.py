"""Sentence corruption: sampled masking, random replacement, mask insertion.

Per sentence, a masking rate p_m and a replacement rate p_r are drawn
uniformly from [0, h_m] and [0, h_r]; each token is then independently
masked with probability p_m, otherwise replaced by a random vocabulary
token with probability p_r (mask takes precedence, the two never stack).
Extra mask sentinels are inserted before tokens at rate p_ins. Noise acts
on single words, never spans.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import MASK_TOKEN, BitextRecord, TokenSeq

ORIGIN_KEPT = "kept"
ORIGIN_MASKED = "masked"
ORIGIN_REPLACED = "replaced"
ORIGIN_INSERTED = "inserted_mask"


@dataclass(frozen=True)
class NoiseConfig:
    """Noise hyperparameters; h_m and h_r are per-sentence rate upper bounds."""

    h_m: float = 0.6
    h_r: float = 0.3
    p_ins: float = 0.2
    seed: int = 0
    mask_token: str = MASK_TOKEN

    def __post_init__(self):
        for name in ("h_m", "h_r", "p_ins"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if not self.mask_token:
            raise ValueError("mask_token must be nonempty")


@dataclass(frozen=True)
class SampledRates:
    """Per-sentence realized masking and replacement probabilities."""

    p_m: float
    p_r: float

    def __post_init__(self):
        if not 0.0 <= self.p_m <= 1.0 or not 0.0 <= self.p_r <= 1.0:
            raise ValueError(f"rates ({self.p_m}, {self.p_r}) outside [0, 1]")


@dataclass(frozen=True)
class NoisedSeq:
    """A corrupted token sequence plus the bookkeeping to undo it.

    ``origin`` tags every position as kept / masked / replaced /
    inserted_mask; ``original`` is the uncorrupted input. Both are None for
    sequences read back from files, which only preserve the surface tokens.
    """

    tokens: tuple[str, ...]
    origin: tuple[str, ...] | None = None
    original: TokenSeq | None = None
    mask_token: str = MASK_TOKEN

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.origin is not None:
            object.__setattr__(self, "origin", tuple(self.origin))
            if len(self.origin) != len(self.tokens):
                raise ValueError("origin map length differs from token count")
            known = (ORIGIN_KEPT, ORIGIN_MASKED, ORIGIN_REPLACED, ORIGIN_INSERTED)
            for tag in self.origin:
                if tag not in known:
                    raise ValueError(f"unknown origin tag {tag!r}")
            n_real = sum(tag != ORIGIN_INSERTED for tag in self.origin)
            if self.original is not None and n_real != len(self.original):
                raise ValueError(
                    f"{n_real} non-inserted positions for input of length "
                    f"{len(self.original)}"
                )
            for tok, tag in zip(self.tokens, self.origin):
                if tag in (ORIGIN_MASKED, ORIGIN_INSERTED) and tok != self.mask_token:
                    raise ValueError(f"position tagged {tag} holds {tok!r}")

    def __len__(self) -> int:
        return len(self.tokens)


class Vocab:
    """Unigram counts over a corpus, used to draw replacement tokens."""

    def __init__(self, counts: dict[str, int]):
        if not counts:
            raise ValueError("empty vocabulary")
        items = sorted(counts.items())
        self.tokens = tuple(tok for tok, _ in items)
        self.counts = tuple(int(c) for _, c in items)
        if any(c <= 0 for c in self.counts):
            raise ValueError("vocabulary counts must be positive")
        self.total = sum(self.counts)
        self._cum = np.cumsum(np.asarray(self.counts, dtype=np.float64))
        self._members = frozenset(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._members

    def sample(self, rng: np.random.Generator) -> str:
        """Draw one token, frequency weighted."""
        r = rng.random() * self.total
        return self.tokens[int(np.searchsorted(self._cum, r, side="right"))]

    def sample_other(self, rng: np.random.Generator, exclude: str) -> str | None:
        """Draw a token different from ``exclude``; None if none exists."""
        if len(self.tokens) == 1 and self.tokens[0] == exclude:
            return None
        while True:
            tok = self.sample(rng)
            if tok != exclude:
                return tok


def build_vocab(corpus: Iterable[BitextRecord]) -> Vocab:
    """Count target-side tokens over a bitext corpus."""
    counts: dict[str, int] = {}
    n_records = 0
    for rec in corpus:
        n_records += 1
        for tok in rec.target:
            counts[tok] = counts.get(tok, 0) + 1
    if n_records == 0:
        raise ValueError("empty corpus")
    return Vocab(counts)


def record_rng(seed: int, record_id: int, stream: int = 0) -> np.random.Generator:
    """Deterministic per-record RNG stream, independent of processing order."""
    return np.random.default_rng(np.random.SeedSequence([seed, record_id, stream]))


def sample_rates(config: NoiseConfig, rng: np.random.Generator) -> SampledRates:
    """Draw the per-sentence rates: p_m ~ U[0, h_m], p_r ~ U[0, h_r]."""
    return SampledRates(
        p_m=float(rng.uniform(0.0, config.h_m)),
        p_r=float(rng.uniform(0.0, config.h_r)),
    )


def apply_noise(
    tokens: TokenSeq,
    rates: SampledRates,
    p_ins: float,
    vocab: Vocab | None,
    rng: np.random.Generator,
    mask_token: str = MASK_TOKEN,
) -> NoisedSeq:
    """Corrupt one sentence; the origin map records every action taken."""
    if len(tokens) == 0:
        raise ValueError("cannot noise an empty sentence")
    if rates.p_r > 0.0 and vocab is None:
        raise ValueError("replacement noise needs a vocabulary")
    out: list[str] = []
    origin: list[str] = []
    for tok in tokens:
        if p_ins > 0.0 and rng.random() < p_ins:
            out.append(mask_token)
            origin.append(ORIGIN_INSERTED)
        if rates.p_m > 0.0 and rng.random() < rates.p_m:
            out.append(mask_token)
            origin.append(ORIGIN_MASKED)
        elif rates.p_r > 0.0 and rng.random() < rates.p_r:
            replacement = vocab.sample_other(rng, exclude=tok)
            if replacement is None:
                out.append(tok)
                origin.append(ORIGIN_KEPT)
            else:
                out.append(replacement)
                origin.append(ORIGIN_REPLACED)
        else:
            out.append(tok)
            origin.append(ORIGIN_KEPT)
    return NoisedSeq(
        tokens=tuple(out),
        origin=tuple(origin),
        original=tokens,
        mask_token=mask_token,
    )


def strip_insertions(noised: NoisedSeq) -> list[str]:
    """Drop inserted positions, recovering one slot per input token."""
    if noised.origin is None:
        raise ValueError("origin map not available")
    return [
        tok
        for tok, tag in zip(noised.tokens, noised.origin)
        if tag != ORIGIN_INSERTED
    ]


def write_noised_tsv(
    records: Sequence[BitextRecord], noised: Sequence[NoisedSeq], path
) -> None:
    """Emit bitext TSV with a third column holding the noised target."""
    if len(records) != len(noised):
        raise ValueError("record and noised sequence counts differ")
    with open(path, "w", encoding="utf-8") as fh:
        for rec, ns in zip(records, noised):
            fh.write(f"{rec.source.text}\t{rec.target.text}\t{' '.join(ns.tokens)}\n")
