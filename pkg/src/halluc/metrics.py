"""Measurement machinery for token-level hallucination detection.

Token precision/recall/F1 with hallucination (label 1) as the positive
class, sentence-level probability and ratio scores with their Spearman
correlation against gold ratios, Fleiss' kappa over annotator rating
matrices, pooled corpus hallucination percentages, the mutual-argmax
alignment baseline, and ingestion of external sentence scorers.

Degenerate cases raise DegenerateMetricError instead of returning silent
zeros, with one exception: precision over zero predicted positives (and,
symmetrically, recall over zero gold positives) reports 0.0 plus a
``degenerate`` flag so corpus aggregation stays total.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .corpus import RATINGS, AnnotationRecord, EvalRecord, TokenSeq
from .errors import DegenerateMetricError

HARD_LABEL_THRESHOLD = 0.5

SimilarityProvider = Callable[[str, str], float]


# ---------------------------------------------------------------------------
# Token-level precision / recall / F1


@dataclass(frozen=True)
class TokenPRF:
    """Micro-averaged scores for the hallucination class.

    ``degenerate`` is set when either denominator was empty (no predicted
    positives for precision, no gold positives for recall); the affected
    score is reported as 0.
    """

    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    degenerate: bool = False


def prf_from_counts(tp: int, fp: int, fn: int) -> TokenPRF:
    degenerate = tp + fp == 0 or tp + fn == 0
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall
        else 0.0
    )
    return TokenPRF(precision, recall, f1, tp, fp, fn, degenerate)


def token_prf(gold: Sequence[int], pred: Sequence[int]) -> TokenPRF:
    """Precision, recall and F1 of the hallucination labels (positive = 1)."""
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold labels but {len(pred)} predictions")
    tp = fp = fn = 0
    for g, p in zip(gold, pred):
        if g not in (0, 1) or p not in (0, 1):
            raise ValueError(f"labels must be 0/1, got gold={g!r} pred={p!r}")
        if p == 1 and g == 1:
            tp += 1
        elif p == 1:
            fp += 1
        elif g == 1:
            fn += 1
    return prf_from_counts(tp, fp, fn)


def corpus_token_prf(
    pairs: Iterable[tuple[Sequence[int], Sequence[int]]]
) -> TokenPRF:
    """Micro-aggregate over (gold, pred) pairs by pooling counts."""
    tp = fp = fn = 0
    for gold, pred in pairs:
        part = token_prf(gold, pred)
        tp += part.tp
        fp += part.fp
        fn += part.fn
    return prf_from_counts(tp, fp, fn)


# ---------------------------------------------------------------------------
# Sentence-level scores


def harden(probs: Sequence[float], threshold: float = HARD_LABEL_THRESHOLD) -> list:
    """Probabilities to hard labels; ties at the threshold flag the token."""
    return [1 if p >= threshold else 0 for p in probs]


def sentence_score_prob(probs: Sequence[float]) -> float:
    """Mean hallucination probability over the sentence."""
    if len(probs) == 0:
        raise ValueError("cannot score an empty sentence")
    return float(sum(probs) / len(probs))


def sentence_score_ratio(
    values: Sequence[float], threshold: float = HARD_LABEL_THRESHOLD
) -> float:
    """Fraction of hallucinated tokens; probabilities are hardened first."""
    if len(values) == 0:
        raise ValueError("cannot score an empty sentence")
    hard = harden(values, threshold)
    return float(sum(hard) / len(hard))


# ---------------------------------------------------------------------------
# Spearman correlation


def _average_ranks(xs: np.ndarray) -> np.ndarray:
    order = np.argsort(xs, kind="stable")
    ranks = np.empty(len(xs), dtype=float)
    sorted_vals = xs[order]
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman's rho: Pearson correlation of average ranks."""
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise DegenerateMetricError("need at least two points for a correlation")
    ax = np.asarray(xs, dtype=float)
    ay = np.asarray(ys, dtype=float)
    if np.all(ax == ax[0]) or np.all(ay == ay[0]):
        raise DegenerateMetricError("correlation undefined for a constant sequence")
    rx = _average_ranks(ax)
    ry = _average_ranks(ay)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = math.sqrt(float(np.dot(rx, rx)) * float(np.dot(ry, ry)))
    return float(np.dot(rx, ry) / denom)


# ---------------------------------------------------------------------------
# Fleiss' kappa


@dataclass(frozen=True)
class RatingMatrix:
    """Items-by-categories matrix of annotator counts.

    Every row sums to the same number of raters.
    """

    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "counts", tuple(tuple(int(c) for c in row) for row in self.counts)
        )
        if not self.counts:
            raise ValueError("rating matrix has no items")
        width = len(self.counts[0])
        total = sum(self.counts[0])
        for idx, row in enumerate(self.counts):
            if len(row) != width:
                raise ValueError(f"item {idx} has {len(row)} categories, not {width}")
            if any(c < 0 for c in row):
                raise ValueError(f"item {idx} has a negative count")
            if sum(row) != total:
                raise ValueError(
                    f"item {idx} has {sum(row)} ratings; expected {total}"
                )

    @property
    def n_items(self) -> int:
        return len(self.counts)

    @property
    def n_categories(self) -> int:
        return len(self.counts[0])

    @property
    def n_raters(self) -> int:
        return sum(self.counts[0])


def fleiss_kappa(matrix: RatingMatrix | Sequence[Sequence[int]]) -> float:
    """Chance-corrected agreement over a rating matrix.

    kappa = (P_bar - Pe_bar) / (1 - Pe_bar), with per-item observed agreement
    and squared-marginal chance agreement.
    """
    if not isinstance(matrix, RatingMatrix):
        matrix = RatingMatrix(tuple(tuple(row) for row in matrix))
    n = matrix.n_raters
    if matrix.n_items < 2:
        raise DegenerateMetricError("need at least two items")
    if n < 2:
        raise DegenerateMetricError("need at least two raters")
    counts = np.asarray(matrix.counts, dtype=float)
    p_items = (np.sum(counts * counts, axis=1) - n) / (n * (n - 1))
    p_bar = float(np.mean(p_items))
    marginals = np.sum(counts, axis=0) / (matrix.n_items * n)
    pe_bar = float(np.sum(marginals * marginals))
    if pe_bar >= 1.0:
        raise DegenerateMetricError(
            "all ratings fall in a single category; kappa undefined"
        )
    return (p_bar - pe_bar) / (1.0 - pe_bar)


def token_rating_matrix(records: Sequence[AnnotationRecord]) -> RatingMatrix:
    """One item per annotated token, categories (faithful, hallucinated)."""
    rows = []
    for rec in records:
        for pos in range(len(rec.tokens)):
            ones = sum(seq.labels[pos] for seq in rec.machine_output)
            rows.append((rec.n_annotators - ones, ones))
    return RatingMatrix(tuple(rows))


def sentence_rating_matrix(records: Sequence[AnnotationRecord]) -> RatingMatrix:
    """One item per sentence, categories in the fixed rating order."""
    rows = []
    for idx, rec in enumerate(records):
        if rec.sentence_rating is None:
            raise ValueError(f"record {idx} has no sentence ratings")
        row = [0] * len(RATINGS)
        for rating in rec.sentence_rating:
            row[RATINGS.index(rating)] += 1
        rows.append(tuple(row))
    return RatingMatrix(tuple(rows))


# ---------------------------------------------------------------------------
# Corpus percentages


def corpus_hallucination_pct(
    records: Iterable[EvalRecord], which: str = "gold"
) -> float:
    """Pooled percentage of hallucinated tokens over the corpus.

    ``which`` selects gold labels or predictions; predictions fall back to
    hardened probabilities when hard labels are absent.
    """
    if which not in ("gold", "pred"):
        raise ValueError(f"which must be 'gold' or 'pred', not {which!r}")
    ones = 0
    total = 0
    for rec in records:
        labels = _labels_of(rec, which)
        ones += sum(labels)
        total += len(labels)
    if total == 0:
        raise ValueError("empty corpus")
    return 100.0 * ones / total


def _labels_of(rec: EvalRecord, which: str) -> Sequence[int]:
    if which == "gold":
        return rec.gold_labels
    if rec.pred_labels is not None:
        return rec.pred_labels
    if rec.pred_probs is not None:
        return harden(rec.pred_probs)
    raise ValueError(f"record {rec.record_id} has no predictions")


# ---------------------------------------------------------------------------
# Alignment baseline


def identity_similarity(a: str, b: str) -> float:
    return 1.0 if a == b else 0.0


def align_score(
    output: TokenSeq, source: TokenSeq, sim: SimilarityProvider
) -> float:
    """Fraction of output tokens in a mutual-argmax alignment with the source.

    A pair is aligned iff each token attains the other's row or column
    maximum. A constant row or column carries no ordering signal, so its
    token never aligns; the score depends only on the relative order of
    similarities, never their scale.
    """
    if len(output) == 0 or len(source) == 0:
        raise ValueError("alignment needs nonempty sequences")
    m = np.empty((len(output), len(source)), dtype=float)
    for i, out_tok in enumerate(output):
        for j, src_tok in enumerate(source):
            m[i, j] = sim(out_tok, src_tok)
    if not np.isfinite(m).all():
        raise ValueError("similarity provider returned a non-finite value")
    row_constant = m.max(axis=1) == m.min(axis=1)
    col_constant = m.max(axis=0) == m.min(axis=0)
    col_max = m.max(axis=0)
    aligned = 0
    for i in range(len(output)):
        if row_constant[i]:
            continue
        row = m[i]
        best = row.max()
        for j in np.flatnonzero(row == best):
            if not col_constant[j] and m[i, j] == col_max[j]:
                aligned += 1
                break
    return aligned / len(output)


# ---------------------------------------------------------------------------
# External scores


def ingest_external_score(record: EvalRecord, name: str) -> float:
    """Sentence score from an external system, oriented as hallucination.

    Entailment probabilities flip to 1 - P_e; every other scorer passes
    through unchanged.
    """
    scores = record.external_scores or {}
    if name not in scores:
        raise ValueError(f"record {record.record_id} has no {name!r} score")
    value = scores[name]
    if name == "entailment":
        return 1.0 - value
    return value


# ---------------------------------------------------------------------------
# Evaluation report


@dataclass(frozen=True)
class EvalReport:
    """The full metric report for one system's predictions.

    Correlations are None when undefined (constant scores or no
    probabilities supplied).
    """

    precision: float
    recall: float
    f1: float
    spearman_prob: float | None
    spearman_ratio: float | None
    pct_gold: float
    pct_pred: float
    n_records: int
    n_tokens: int
    degenerate_prf: bool

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "spearman_prob": self.spearman_prob,
            "spearman_ratio": self.spearman_ratio,
            "pct_gold": self.pct_gold,
            "pct_pred": self.pct_pred,
            "n_records": self.n_records,
            "n_tokens": self.n_tokens,
            "degenerate_prf": self.degenerate_prf,
        }


def _maybe_spearman(xs: Sequence[float], ys: Sequence[float]):
    try:
        return spearman(xs, ys)
    except DegenerateMetricError:
        return None


def build_report(records: Sequence[EvalRecord]) -> EvalReport:
    """Score a corpus of predictions against its gold labels.

    The human sentence score is the gold hallucination ratio; the model's
    probability and ratio scores correlate against it via Spearman's rho.
    """
    if not records:
        raise ValueError("no records to evaluate")
    prf = corpus_token_prf(
        (rec.gold_labels, _labels_of(rec, "pred")) for rec in records
    )
    gold_ratios = [sentence_score_ratio(rec.gold_labels) for rec in records]
    pred_ratios = [
        sentence_score_ratio(
            rec.pred_probs if rec.pred_probs is not None else _labels_of(rec, "pred")
        )
        for rec in records
    ]
    spearman_ratio = _maybe_spearman(pred_ratios, gold_ratios)
    if all(rec.pred_probs is not None for rec in records):
        prob_scores = [sentence_score_prob(rec.pred_probs) for rec in records]
        spearman_prob = _maybe_spearman(prob_scores, gold_ratios)
    else:
        spearman_prob = None
    return EvalReport(
        precision=prf.precision,
        recall=prf.recall,
        f1=prf.f1,
        spearman_prob=spearman_prob,
        spearman_ratio=spearman_ratio,
        pct_gold=corpus_hallucination_pct(records, "gold"),
        pct_pred=corpus_hallucination_pct(records, "pred"),
        n_records=len(records),
        n_tokens=sum(len(rec.output) for rec in records),
        degenerate_prf=prf.degenerate,
    )


def write_report(report: EvalReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.as_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
