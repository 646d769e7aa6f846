"""Data model and file formats: bitext, token-level annotations, eval records.

Tokenization is whitespace based throughout; every string field in the file
formats is a pre-tokenized, single-space-separated sentence. The annotation
text format is one sentence per line with each token suffixed by its binary
label, e.g. ``the[0] disposition[0] pattern[0] with[0] pm-2.[1]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import ParseError

# Reserved sentinel strings. Plain corpus tokens must never collide with
# these; noised sequences and training pieces use them deliberately.
MASK_TOKEN = "<mask>"
SEP_TOKEN = "<sep>"
RESERVED_TOKENS = (MASK_TOKEN, SEP_TOKEN)

RATING_INCOMPREHENSIBLE = "incomprehensible"
RATING_FAITHFUL = "faithful"
RATING_HALLUCINATED = "hallucinated"
RATINGS = (RATING_INCOMPREHENSIBLE, RATING_FAITHFUL, RATING_HALLUCINATED)


@dataclass(frozen=True)
class TokenSeq:
    """An immutable whitespace-tokenized sentence."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for idx, tok in enumerate(self.tokens):
            if not tok:
                raise ValueError(f"empty token at position {idx}")
            if any(ch.isspace() for ch in tok):
                raise ValueError(f"token {tok!r} at position {idx} contains whitespace")
            if tok in RESERVED_TOKENS:
                raise ValueError(f"reserved sentinel {tok!r} at position {idx}")

    @classmethod
    def from_text(cls, text: str) -> "TokenSeq":
        return cls(tuple(text.split()))

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, idx):
        return self.tokens[idx]


@dataclass(frozen=True)
class LabeledSeq:
    """A token sequence with one binary hallucination label per token.

    Label 1 marks a hallucinated token, 0 a faithful one. ``probs`` optionally
    carries per-token hallucination probabilities in [0, 1].
    """

    tokens: TokenSeq
    labels: tuple[int, ...]
    probs: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != len(self.tokens):
            raise ValueError(
                f"got {len(self.labels)} labels for {len(self.tokens)} tokens"
            )
        for idx, lab in enumerate(self.labels):
            if lab not in (0, 1):
                raise ValueError(f"label at position {idx} is {lab!r}, expected 0 or 1")
        if self.probs is not None:
            object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
            if len(self.probs) != len(self.tokens):
                raise ValueError(
                    f"got {len(self.probs)} probs for {len(self.tokens)} tokens"
                )
            for idx, p in enumerate(self.probs):
                if not 0.0 <= p <= 1.0:
                    raise ValueError(f"prob at position {idx} is {p!r}, outside [0, 1]")

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class BitextRecord:
    """One parallel sentence pair, optionally with a paraphrased target."""

    source: TokenSeq
    target: TokenSeq
    paraphrase: TokenSeq | None = None
    record_id: int = 0

    def __post_init__(self):
        if len(self.source) == 0:
            raise ValueError(f"record {self.record_id}: empty source")
        if len(self.target) == 0:
            raise ValueError(f"record {self.record_id}: empty target")
        if self.record_id < 0:
            raise ValueError(f"negative record_id {self.record_id}")


@dataclass(frozen=True)
class AnnotationRecord:
    """One machine output labeled independently by several annotators.

    Every annotator labels the same token sequence; ``sentence_rating`` holds
    the optional per-annotator three-way rating of the whole sentence.
    """

    machine_output: tuple[LabeledSeq, ...]
    source: TokenSeq | None = None
    sentence_rating: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "machine_output", tuple(self.machine_output))
        if not self.machine_output:
            raise ValueError("need at least one annotator")
        first = self.machine_output[0].tokens
        for k, seq in enumerate(self.machine_output[1:], start=2):
            if seq.tokens != first:
                raise ValueError(f"annotator {k} labels a different token sequence")
        if self.sentence_rating is not None:
            object.__setattr__(self, "sentence_rating", tuple(self.sentence_rating))
            if len(self.sentence_rating) != len(self.machine_output):
                raise ValueError("need one sentence rating per annotator")
            for r in self.sentence_rating:
                if r not in RATINGS:
                    raise ValueError(f"unknown sentence rating {r!r}")

    @property
    def tokens(self) -> TokenSeq:
        return self.machine_output[0].tokens

    @property
    def n_annotators(self) -> int:
        return len(self.machine_output)


@dataclass(frozen=True)
class EvalRecord:
    """One evaluation unit: source, machine output, gold and predicted labels.

    ``external_scores`` maps scorer names to sentence-level reals supplied by
    outside systems (e.g. an entailment probability under ``"entailment"``).
    """

    source: TokenSeq
    output: TokenSeq
    gold_labels: tuple[int, ...]
    pred_labels: tuple[int, ...] | None = None
    pred_probs: tuple[float, ...] | None = None
    external_scores: dict[str, float] | None = None
    record_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gold_labels", tuple(self.gold_labels))
        n = len(self.output)
        if len(self.gold_labels) != n:
            raise ValueError(
                f"record {self.record_id}: {len(self.gold_labels)} gold labels "
                f"for {n} output tokens"
            )
        if any(lab not in (0, 1) for lab in self.gold_labels):
            raise ValueError(f"record {self.record_id}: gold labels must be 0/1")
        if self.pred_labels is not None:
            object.__setattr__(self, "pred_labels", tuple(self.pred_labels))
            if len(self.pred_labels) != n:
                raise ValueError(
                    f"record {self.record_id}: {len(self.pred_labels)} predicted "
                    f"labels for {n} output tokens"
                )
            if any(lab not in (0, 1) for lab in self.pred_labels):
                raise ValueError(f"record {self.record_id}: pred labels must be 0/1")
        if self.pred_probs is not None:
            object.__setattr__(
                self, "pred_probs", tuple(float(p) for p in self.pred_probs)
            )
            if len(self.pred_probs) != n:
                raise ValueError(
                    f"record {self.record_id}: {len(self.pred_probs)} predicted "
                    f"probs for {n} output tokens"
                )
            if any(not 0.0 <= p <= 1.0 for p in self.pred_probs):
                raise ValueError(f"record {self.record_id}: probs outside [0, 1]")


# ---------------------------------------------------------------------------
# Annotation line format


def parse_annotation_line(line: str) -> LabeledSeq:
    """Parse one ``word[0] word[1] ...`` annotation line.

    Raises ParseError on an empty line or any token whose suffix is not
    exactly ``[0]`` or ``[1]``; the error names the offending token index.
    """
    raw = line.split()
    if not raw:
        raise ParseError("empty annotation line")
    tokens = []
    labels = []
    for idx, item in enumerate(raw):
        if len(item) < 4 or item[-3] != "[" or item[-1] != "]":
            raise ParseError(f"token {item!r} lacks a [0]/[1] suffix", token_index=idx)
        digit = item[-2]
        if digit not in "01":
            raise ParseError(f"token {item!r} has label {digit!r}", token_index=idx)
        word = item[:-3]
        if not word:
            raise ParseError("empty word before label suffix", token_index=idx)
        if "[" in word or "]" in word:
            raise ParseError(f"word {word!r} contains a bracket", token_index=idx)
        tokens.append(word)
        labels.append(int(digit))
    return LabeledSeq(TokenSeq(tuple(tokens)), tuple(labels))


def serialize_annotation_line(seq: LabeledSeq) -> str:
    """Render a LabeledSeq back to the annotation line format.

    Inverse of :func:`parse_annotation_line`: parse(serialize(x)) == x, and
    canonical single-space lines round-trip byte-identically.
    """
    for idx, tok in enumerate(seq.tokens):
        if "[" in tok or "]" in tok:
            raise ValueError(f"token {tok!r} at position {idx} contains a bracket")
    return " ".join(f"{tok}[{lab}]" for tok, lab in zip(seq.tokens, seq.labels))


def majority_vote(annotations: Sequence[Sequence[int]]) -> list[int]:
    """Per-position majority label over several annotators' label lists.

    A position gets label 1 only on a strict majority of 1-votes; exact ties
    resolve to 0 (faithful), so hallucination is flagged only with majority
    evidence.
    """
    if not annotations:
        raise ValueError("need at least one annotator")
    n = len(annotations[0])
    for k, labels in enumerate(annotations[1:], start=2):
        if len(labels) != n:
            raise ValueError(
                f"annotator {k} has {len(labels)} labels, expected {n}"
            )
    n_annotators = len(annotations)
    out = []
    for pos in range(n):
        ones = sum(labels[pos] for labels in annotations)
        out.append(1 if 2 * ones > n_annotators else 0)
    return out


# ---------------------------------------------------------------------------
# Bitext ingestion


def load_bitext(path, fmt: str = "tsv") -> Iterator[BitextRecord]:
    """Stream BitextRecords from a TSV or JSONL bitext file.

    TSV columns are ``source \\t target [\\t paraphrase]``; JSONL objects carry
    ``source``/``target`` and an optional ``paraphrase``. Records are yielded
    in file order with sequential record_ids starting at 0.
    """
    if fmt not in ("tsv", "jsonl"):
        raise ValueError(f"unknown bitext format {fmt!r}")
    with open(path, encoding="utf-8") as fh:
        rid = 0
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if fmt == "tsv":
                cols = line.split("\t")
                if len(cols) < 2:
                    raise ParseError("missing target column", line=lineno)
                if len(cols) > 3:
                    raise ParseError(f"{len(cols)} columns, expected 2 or 3", line=lineno)
                source, target = cols[0], cols[1]
                paraphrase = cols[2] if len(cols) == 3 else None
            else:
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"bad JSON: {exc}", line=lineno) from exc
                if "source" not in obj:
                    raise ParseError("missing field 'source'", line=lineno)
                if "target" not in obj:
                    raise ParseError("missing field 'target'", line=lineno)
                source, target = obj["source"], obj["target"]
                paraphrase = obj.get("paraphrase")
                for name, value in (("source", source), ("target", target)):
                    if not isinstance(value, str):
                        raise ParseError(
                            f"field {name!r} must be a space-separated string",
                            line=lineno,
                        )
                if paraphrase is not None and not isinstance(paraphrase, str):
                    raise ParseError(
                        "field 'paraphrase' must be a space-separated string",
                        line=lineno,
                    )
            try:
                record = BitextRecord(
                    source=TokenSeq.from_text(source),
                    target=TokenSeq.from_text(target),
                    paraphrase=TokenSeq.from_text(paraphrase) if paraphrase else None,
                    record_id=rid,
                )
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from exc
            yield record
            rid += 1


def write_bitext_tsv(records: Iterable[BitextRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            cols = [rec.source.text, rec.target.text]
            if rec.paraphrase is not None:
                cols.append(rec.paraphrase.text)
            fh.write("\t".join(cols) + "\n")


# ---------------------------------------------------------------------------
# Annotation ingestion and consolidation


def load_annotation_file(path) -> list[LabeledSeq]:
    """Load an annotation text file, one labeled sentence per line."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(parse_annotation_line(line))
            except ParseError as exc:
                raise ParseError(str(exc), line=lineno) from exc
    return out


def write_annotation_file(seqs: Iterable[LabeledSeq], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for seq in seqs:
            fh.write(serialize_annotation_line(seq) + "\n")


def load_ratings_file(path) -> list[tuple[str, ...]]:
    """Load per-annotator sentence ratings, one line per sentence.

    Each line holds k whitespace-separated rating names out of
    incomprehensible / faithful / hallucinated, one per annotator.
    """
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = tuple(line.split())
            if not parts:
                continue
            for r in parts:
                if r not in RATINGS:
                    raise ParseError(f"unknown sentence rating {r!r}", line=lineno)
            out.append(parts)
    return out


def gather_annotations(
    label_paths: Sequence,
    ratings_path=None,
) -> list[AnnotationRecord]:
    """Assemble AnnotationRecords from k parallel annotator files.

    All files must have the same number of sentences and, per sentence,
    identical token sequences.
    """
    if len(label_paths) < 1:
        raise ValueError("need at least one annotation file")
    per_annotator = [load_annotation_file(p) for p in label_paths]
    n_sentences = len(per_annotator[0])
    for k, seqs in enumerate(per_annotator[1:], start=2):
        if len(seqs) != n_sentences:
            raise ValueError(
                f"annotator file {label_paths[k - 1]} has {len(seqs)} sentences, "
                f"expected {n_sentences}"
            )
    ratings = None
    if ratings_path is not None:
        ratings = load_ratings_file(ratings_path)
        if len(ratings) != n_sentences:
            raise ValueError(
                f"ratings file has {len(ratings)} lines for {n_sentences} sentences"
            )
        for lineno, row in enumerate(ratings, start=1):
            if len(row) != len(label_paths):
                raise ParseError(
                    f"{len(row)} ratings for {len(label_paths)} annotators",
                    line=lineno,
                )
    records = []
    for i in range(n_sentences):
        try:
            records.append(
                AnnotationRecord(
                    machine_output=tuple(seqs[i] for seqs in per_annotator),
                    sentence_rating=ratings[i] if ratings else None,
                )
            )
        except ValueError as exc:
            raise ValueError(f"sentence {i}: {exc}") from exc
    return records


def majority_rating(ratings: Sequence[str]) -> str | None:
    """Rating shared by a strict majority of annotators, else None."""
    counts: dict[str, int] = {}
    for r in ratings:
        counts[r] = counts.get(r, 0) + 1
    best, best_count = max(counts.items(), key=lambda kv: kv[1])
    return best if 2 * best_count > len(ratings) else None


@dataclass
class Consolidation:
    """Majority-voted annotations with the incomprehensible drops counted."""

    kept: list[AnnotationRecord] = field(default_factory=list)
    majority: list[LabeledSeq] = field(default_factory=list)
    dropped_incomprehensible: int = 0


def consolidate_annotations(records: Sequence[AnnotationRecord]) -> Consolidation:
    """Majority-vote token labels; drop incomprehensible-majority sentences."""
    result = Consolidation()
    for rec in records:
        if rec.sentence_rating is not None:
            if majority_rating(rec.sentence_rating) == RATING_INCOMPREHENSIBLE:
                result.dropped_incomprehensible += 1
                continue
        voted = majority_vote([seq.labels for seq in rec.machine_output])
        result.kept.append(rec)
        result.majority.append(LabeledSeq(rec.tokens, tuple(voted)))
    return result


# ---------------------------------------------------------------------------
# Eval records (JSONL)


def _eval_record_from_obj(obj: dict, lineno: int, default_id: int) -> EvalRecord:
    for name in ("source", "output", "gold_labels"):
        if name not in obj:
            raise ParseError(f"missing field {name!r}", line=lineno)
    for name in ("source", "output"):
        if not isinstance(obj[name], str):
            raise ParseError(
                f"field {name!r} must be a space-separated string", line=lineno
            )
    try:
        return EvalRecord(
            source=TokenSeq.from_text(obj["source"]),
            output=TokenSeq.from_text(obj["output"]),
            gold_labels=tuple(obj["gold_labels"]),
            pred_labels=tuple(obj["pred_labels"]) if obj.get("pred_labels") is not None else None,
            pred_probs=tuple(obj["pred_probs"]) if obj.get("pred_probs") is not None else None,
            external_scores=dict(obj["external_scores"]) if obj.get("external_scores") else None,
            record_id=int(obj.get("record_id", default_id)),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), line=lineno) from exc


def load_eval_records(path) -> list[EvalRecord]:
    """Load eval records from a JSONL file (see EvalRecord for the schema)."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON: {exc}", line=lineno) from exc
            out.append(_eval_record_from_obj(obj, lineno, default_id=len(out)))
    return out


def write_eval_records(records: Iterable[EvalRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj = {
                "record_id": rec.record_id,
                "source": rec.source.text,
                "output": rec.output.text,
                "gold_labels": list(rec.gold_labels),
            }
            if rec.pred_labels is not None:
                obj["pred_labels"] = list(rec.pred_labels)
            if rec.pred_probs is not None:
                obj["pred_probs"] = list(rec.pred_probs)
            if rec.external_scores is not None:
                obj["external_scores"] = dict(sorted(rec.external_scores.items()))
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
