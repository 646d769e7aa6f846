"""Score a small batch of predictions against gold token labels.

Builds a handful of eval records, pools token-level precision/recall/F1,
correlates predicted sentence scores with gold hallucination ratios, and
prints the assembled report. Also demonstrates the degenerate-correlation
guard on a constant input.

Run: python3 demos/evaluation_walkthrough.py
"""

import json

from halluc import (
    DegenerateMetricError,
    EvalRecord,
    TokenSeq,
    build_report,
    harden,
    sentence_score_ratio,
    spearman,
    token_prf,
)

records = [
    EvalRecord(
        source=TokenSeq("die Sitzung beginnt um neun".split()),
        output=TokenSeq("the meeting starts at nine sharp".split()),
        gold_labels=(0, 0, 0, 0, 0, 1),
        pred_probs=(0.1, 0.2, 0.1, 0.3, 0.2, 0.9),
        record_id=0,
    ),
    EvalRecord(
        source=TokenSeq("er liest ein Buch".split()),
        output=TokenSeq("he reads a newspaper".split()),
        gold_labels=(0, 0, 0, 1),
        pred_probs=(0.2, 0.1, 0.4, 0.6),
        record_id=1,
    ),
    EvalRecord(
        source=TokenSeq("wir fahren morgen".split()),
        output=TokenSeq("we leave tomorrow".split()),
        gold_labels=(0, 0, 0),
        pred_probs=(0.1, 0.2, 0.8),
        record_id=2,
    ),
]

print("per-record view:")
for rec in records:
    pred = harden(rec.pred_probs)
    prf = token_prf(rec.gold_labels, pred)
    ratio = sentence_score_ratio(rec.pred_probs)
    print(
        f"  record {rec.record_id}: gold={list(rec.gold_labels)} "
        f"pred={list(pred)} f1={prf.f1:.2f} pred_ratio={ratio:.2f}"
    )

report = build_report(records)
print()
print("pooled report:")
print(json.dumps(report.as_dict(), indent=2, sort_keys=True))

print()
print("degenerate guard: spearman over a constant sequence raises")
try:
    spearman([0.5, 0.5, 0.5], [0.1, 0.2, 0.3])
except DegenerateMetricError as exc:
    print("  DegenerateMetricError:", exc)
