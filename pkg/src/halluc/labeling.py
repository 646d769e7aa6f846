"""Pseudo-label assignment and training-example assembly.

The corrupted target is aligned to its base sentence with a minimal
unit-cost edit script; every position touched by a deletion or substitution
is labeled hallucinated, everything else faithful. On top of that sit the
subword-to-word projection and the assembly of classifier training inputs
(source, dropped reference, corrupted target) plus their masked-LM
companions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .corpus import MASK_TOKEN, SEP_TOKEN, BitextRecord, LabeledSeq, TokenSeq
from .infill import InfillRequest, InfillResult
from .noising import (
    NoiseConfig,
    NoisedSeq,
    SampledRates,
    Vocab,
    apply_noise,
    build_vocab,
    record_rng,
    sample_rates,
)

MATCH = "match"
SUBSTITUTE = "substitute"
DELETE = "delete"
INSERT = "insert"

SEG_SOURCE = "source"
SEG_REFERENCE = "reference"
SEG_TARGET = "target"
SEG_SEP = "sep"


class EditOp(NamedTuple):
    """One edit step; i indexes the corrupted side, j the base side."""

    kind: str
    i: int | None
    j: int | None


@dataclass(frozen=True)
class EditScript:
    """A minimal edit script transforming the corrupted sequence into the base."""

    ops: tuple[EditOp, ...]
    total_cost: int

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        cost = sum(op.kind != MATCH for op in self.ops)
        if cost != self.total_cost:
            raise ValueError(
                f"total_cost {self.total_cost} but {cost} non-match operations"
            )


def edit_script(t_prime: TokenSeq, t: TokenSeq) -> EditScript:
    """Minimal unit-cost edit script from t_prime to t.

    Backtrace ties resolve match > substitute > delete > insert, so the
    script (and the labels derived from it) is deterministic; substitution is
    preferred over paired indels, which labels both sides of a swap.
    """
    a = t_prime.tokens
    b = t.tokens
    n, m = len(a), len(b)
    rows = [list(range(m + 1))]
    for i in range(1, n + 1):
        ai = a[i - 1]
        prev = rows[-1]
        cur = [i] + [0] * m
        for j in range(1, m + 1):
            best = prev[j - 1] + (ai != b[j - 1])
            via_delete = prev[j] + 1
            if via_delete < best:
                best = via_delete
            via_insert = cur[j - 1] + 1
            if via_insert < best:
                best = via_insert
            cur[j] = best
        rows.append(cur)
    ops = []
    i, j = n, m
    while i > 0 or j > 0:
        cell = rows[i][j]
        if i > 0 and j > 0 and a[i - 1] == b[j - 1] and rows[i - 1][j - 1] == cell:
            ops.append(EditOp(MATCH, i - 1, j - 1))
            i -= 1
            j -= 1
        elif i > 0 and j > 0 and rows[i - 1][j - 1] + 1 == cell:
            ops.append(EditOp(SUBSTITUTE, i - 1, j - 1))
            i -= 1
            j -= 1
        elif i > 0 and rows[i - 1][j] + 1 == cell:
            ops.append(EditOp(DELETE, i - 1, None))
            i -= 1
        else:
            ops.append(EditOp(INSERT, None, j - 1))
            j -= 1
    ops.reverse()
    return EditScript(ops=tuple(ops), total_cost=rows[n][m])


def labels_from_script(script: EditScript, length: int) -> tuple[int, ...]:
    """Mark every corrupted-side position touched by delete or substitute."""
    labels = [0] * length
    for op in script.ops:
        if op.kind == DELETE or op.kind == SUBSTITUTE:
            labels[op.i] = 1
    return tuple(labels)


def assign_labels(t_prime: TokenSeq, t: TokenSeq) -> LabeledSeq:
    """Hallucination pseudo-labels for t_prime relative to its base t."""
    if len(t_prime) == 0:
        raise ValueError("cannot label an empty sequence")
    script = edit_script(t_prime, t)
    return LabeledSeq(t_prime, labels_from_script(script, len(t_prime)))


# ---------------------------------------------------------------------------
# Subword-to-word projection


@dataclass(frozen=True)
class SubwordMap:
    """Inclusive (start, end) subword index range per word, in order."""

    ranges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "ranges", tuple((int(s), int(e)) for s, e in self.ranges)
        )
        expected = 0
        for w, (start, end) in enumerate(self.ranges):
            if start != expected or end < start:
                raise ValueError(f"word {w} has range ({start}, {end}); ranges must "
                                 "be contiguous, in order, and nonempty")
            expected = end + 1

    @property
    def n_subwords(self) -> int:
        return self.ranges[-1][1] + 1 if self.ranges else 0

    def __len__(self) -> int:
        return len(self.ranges)


def project_word_labels(
    subword_preds: Sequence[float], smap: SubwordMap
) -> list:
    """Lift subword predictions to word level.

    A word is hallucinated if any of its subwords is (hard labels), and its
    probability is the max over its subwords (soft scores).
    """
    if len(subword_preds) != smap.n_subwords:
        raise ValueError(
            f"{len(subword_preds)} subword predictions for {smap.n_subwords} subwords"
        )
    out = []
    for start, end in smap.ranges:
        out.append(max(subword_preds[start : end + 1]))
    return out


# ---------------------------------------------------------------------------
# Training example assembly


@dataclass(frozen=True)
class TrainConfig:
    """Assembly hyperparameters for classifier and masked-LM examples.

    alpha is the masked-LM loss weight recorded for the downstream trainer
    (0.6 for translation, 0.5 for summarization); it never affects assembly.
    """

    dropout_rate: float = 0.3
    mlm_mask_prob: float = 0.3
    alpha: float = 0.6
    seed: int = 0
    mlm_mask_source: bool = True
    sep_token: str = SEP_TOKEN
    mask_token: str = MASK_TOKEN

    def __post_init__(self):
        for name in ("dropout_rate", "mlm_mask_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")


@dataclass(frozen=True)
class TrainingExample:
    """Concatenated (source, dropped reference, corrupted target) input.

    ``label_span`` covers exactly the target segment; separators never carry
    labels.
    """

    pieces: tuple[str, ...]
    segment_map: tuple[str, ...]
    label_span: tuple[int, ...]

    def __post_init__(self):
        if len(self.pieces) != len(self.segment_map):
            raise ValueError("segment map length differs from piece count")
        n_target = sum(seg == SEG_TARGET for seg in self.segment_map)
        if len(self.label_span) != n_target:
            raise ValueError(
                f"{len(self.label_span)} labels for {n_target} target positions"
            )

    def _segment(self, name: str) -> tuple[str, ...]:
        return tuple(
            tok for tok, seg in zip(self.pieces, self.segment_map) if seg == name
        )

    @property
    def source_segment(self) -> tuple[str, ...]:
        return self._segment(SEG_SOURCE)

    @property
    def reference_segment(self) -> tuple[str, ...]:
        return self._segment(SEG_REFERENCE)

    @property
    def target_segment(self) -> tuple[str, ...]:
        return self._segment(SEG_TARGET)


@dataclass(frozen=True)
class MlmExample:
    """A (source, target) concatenation with randomly masked positions."""

    pieces: tuple[str, ...]
    mask_positions: tuple[int, ...]
    originals: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "mask_positions", tuple(self.mask_positions))
        object.__setattr__(self, "originals", tuple(self.originals))
        if len(self.mask_positions) != len(self.originals):
            raise ValueError("one original token per masked position required")
        seen = set()
        for pos in self.mask_positions:
            if pos < 0 or pos >= len(self.pieces) or pos in seen:
                raise ValueError(f"bad mask position {pos}")
            seen.add(pos)

    def masked_pieces(self, mask_token: str = MASK_TOKEN) -> tuple[str, ...]:
        out = list(self.pieces)
        for pos in self.mask_positions:
            out[pos] = mask_token
        return tuple(out)


def make_training_example(
    s: TokenSeq,
    t: TokenSeq,
    t_prime: LabeledSeq,
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> TrainingExample:
    """Assemble one classifier input, dropping reference tokens at random.

    Each token of t survives with probability 1 - dropout_rate; labels attach
    to the corrupted-target segment only.
    """
    kept_ref = [
        tok for tok in t if cfg.dropout_rate == 0.0 or rng.random() >= cfg.dropout_rate
    ]
    pieces = (
        list(s.tokens)
        + [cfg.sep_token]
        + kept_ref
        + [cfg.sep_token]
        + list(t_prime.tokens)
    )
    segment_map = (
        [SEG_SOURCE] * len(s)
        + [SEG_SEP]
        + [SEG_REFERENCE] * len(kept_ref)
        + [SEG_SEP]
        + [SEG_TARGET] * len(t_prime)
    )
    return TrainingExample(
        pieces=tuple(pieces),
        segment_map=tuple(segment_map),
        label_span=tuple(t_prime.labels),
    )


def make_mlm_example(
    s: TokenSeq, t: TokenSeq, cfg: TrainConfig, rng: np.random.Generator
) -> MlmExample:
    """Assemble one masked-LM companion over (source, target) only."""
    pieces = list(s.tokens) + [cfg.sep_token] + list(t.tokens)
    maskable = []
    if cfg.mlm_mask_source:
        maskable.extend(range(len(s)))
    maskable.extend(range(len(s) + 1, len(pieces)))
    positions = [
        pos
        for pos in maskable
        if cfg.mlm_mask_prob > 0.0 and rng.random() < cfg.mlm_mask_prob
    ]
    return MlmExample(
        pieces=tuple(pieces),
        mask_positions=tuple(positions),
        originals=tuple(pieces[pos] for pos in positions),
    )


# ---------------------------------------------------------------------------
# Full synthesis pipeline


@dataclass(frozen=True)
class SynthesisOutput:
    """Everything produced for one bitext record."""

    record: BitextRecord
    rates: SampledRates
    noised: NoisedSeq
    filled: TokenSeq
    labeled: LabeledSeq
    example: TrainingExample
    mlm: MlmExample

    @property
    def label_density(self) -> float:
        return sum(self.labeled.labels) / len(self.labeled)


def synthesize_record(
    record: BitextRecord,
    noise_cfg: NoiseConfig,
    train_cfg: TrainConfig,
    infiller,
    vocab: Vocab | None,
    use_paraphrase: bool = False,
) -> SynthesisOutput:
    """Run noising, infilling, labeling and assembly for one record.

    RNG streams derive from (seed, record_id), so results do not depend on
    processing order. With use_paraphrase the noise applies to the paraphrase
    and labels are computed against it, never against the true target.
    """
    if use_paraphrase:
        if record.paraphrase is None:
            raise ValueError(f"record {record.record_id} has no paraphrase")
        base = record.paraphrase
    else:
        base = record.target
    noise_rng = record_rng(noise_cfg.seed, record.record_id, stream=0)
    infill_rng = record_rng(noise_cfg.seed, record.record_id, stream=1)
    assemble_rng = record_rng(train_cfg.seed, record.record_id, stream=2)
    rates = sample_rates(noise_cfg, noise_rng)
    noised = apply_noise(
        base, rates, noise_cfg.p_ins, vocab, noise_rng, mask_token=noise_cfg.mask_token
    )
    result: InfillResult = infiller(InfillRequest(noised), infill_rng)
    labeled = assign_labels(result.filled, base)
    example = make_training_example(
        record.source, record.target, labeled, train_cfg, assemble_rng
    )
    mlm = make_mlm_example(record.source, record.target, train_cfg, assemble_rng)
    return SynthesisOutput(
        record=record,
        rates=rates,
        noised=noised,
        filled=result.filled,
        labeled=labeled,
        example=example,
        mlm=mlm,
    )


def build_synthetic_dataset(
    bitext: Iterable[BitextRecord],
    noise_cfg: NoiseConfig,
    train_cfg: TrainConfig,
    infiller,
    use_paraphrase: bool = False,
    vocab: Vocab | None = None,
    workers: int = 1,
) -> Iterator[SynthesisOutput]:
    """Run the synthesis pipeline over a corpus, in input order.

    The replacement vocabulary defaults to the target-side unigram counts of
    the corpus itself. With workers > 1 records are processed by a thread
    pool; per-record RNG streams keep the output identical to a serial run.
    """
    records = list(bitext)
    if vocab is None and noise_cfg.h_r > 0.0:
        vocab = build_vocab(records)

    def one(record: BitextRecord) -> SynthesisOutput:
        return synthesize_record(
            record, noise_cfg, train_cfg, infiller, vocab, use_paraphrase
        )

    if workers <= 1:
        yield from map(one, records)
        return
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(one, records)


def training_record_json(example: TrainingExample, record_id: int) -> str:
    """One training-file line: the example's segments plus its labels."""
    obj = {
        "record_id": record_id,
        "source": list(example.source_segment),
        "reference": list(example.reference_segment),
        "target_prime": list(example.target_segment),
        "labels": list(example.label_span),
    }
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def mlm_record_json(
    mlm: MlmExample, record_id: int, mask_token: str = MASK_TOKEN
) -> str:
    """One masked-LM file line, parallel to the training file."""
    obj = {
        "record_id": record_id,
        "masked_pieces": list(mlm.masked_pieces(mask_token)),
        "mask_positions": list(mlm.mask_positions),
        "originals": list(mlm.originals),
    }
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)
