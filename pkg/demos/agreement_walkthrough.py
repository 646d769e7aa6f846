"""Measure inter-annotator agreement and build a consolidated benchmark.

Three annotators label the same three outputs token by token; one sentence
is rated incomprehensible by a majority and dropped. Prints the Fleiss
kappa over token labels, the sentence-rating kappa, and the majority-vote
benchmark that survives consolidation.

Run: python3 demos/agreement_walkthrough.py
"""

from halluc import (
    AnnotationRecord,
    LabeledSeq,
    TokenSeq,
    consolidate_annotations,
    fleiss_kappa,
    sentence_rating_matrix,
    serialize_annotation_line,
    token_rating_matrix,
)

def seq(text, labels):
    return LabeledSeq(TokenSeq(text.split()), tuple(labels))

records = [
    AnnotationRecord(
        machine_output=(
            seq("the reactor output is stable", (0, 0, 1, 0, 0)),
            seq("the reactor output is stable", (0, 0, 1, 0, 0)),
            seq("the reactor output is stable", (0, 1, 1, 0, 0)),
        ),
        sentence_rating=("faithful", "faithful", "hallucinated"),
    ),
    AnnotationRecord(
        machine_output=(
            seq("pressure valve seven three", (0, 0, 1, 1)),
            seq("pressure valve seven three", (0, 0, 1, 1)),
            seq("pressure valve seven three", (0, 0, 0, 1)),
        ),
        sentence_rating=("hallucinated", "hallucinated", "hallucinated"),
    ),
    AnnotationRecord(
        machine_output=(
            seq("gg hh ii jj", (1, 1, 1, 1)),
            seq("gg hh ii jj", (1, 1, 0, 1)),
            seq("gg hh ii jj", (1, 1, 1, 0)),
        ),
        sentence_rating=(
            "incomprehensible",
            "incomprehensible",
            "hallucinated",
        ),
    ),
]

token_kappa = fleiss_kappa(token_rating_matrix(records))
sentence_kappa = fleiss_kappa(sentence_rating_matrix(records))
print(f"token-level Fleiss kappa   : {token_kappa:.4f}")
print(f"sentence-level Fleiss kappa: {sentence_kappa:.4f}")

result = consolidate_annotations(records)
print(f"dropped as incomprehensible: {result.dropped_incomprehensible}")
print()
print("consolidated benchmark (majority vote per token):")
for majority in result.majority:
    print(" ", serialize_annotation_line(majority))
