"""Subword-to-word projection, service side.

The wire carries word-level probabilities only, so the projection rule
lives here as well as in the training library: a word's score is the max
over its subwords, hence a word is flagged as soon as any subword is.
Ranges are inclusive (start, end) pairs that must tile the subword axis
from zero, one pair per word, in order.
"""

from collections.abc import Sequence


def project_subword_to_word(
    subword_values: Sequence[float],
    word_ranges: Sequence[tuple[int, int]],
) -> list[float]:
    expected = 0
    out = []
    for w, (start, end) in enumerate(word_ranges):
        if start != expected or end < start:
            raise ValueError(
                f"word {w} has subword range ({start}, {end}); ranges must be "
                "contiguous, in order, and nonempty"
            )
        expected = end + 1
    if len(subword_values) != expected:
        raise ValueError(
            f"{len(subword_values)} subword values for {expected} mapped subwords"
        )
    for start, end in word_ranges:
        out.append(max(subword_values[start : end + 1]))
    return out
