"""Command-line pipeline orchestration.

Three subcommands wire the library together: ``synthesize`` runs
corpus -> noising -> infilling -> labeling and emits the training and
masked-LM files, ``evaluate`` scores a prediction file against gold labels,
and ``agreement`` computes annotator agreement plus the majority-voted
benchmark. Exit codes: 0 success, 1 input error, 2 remote-service error,
3 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from .corpus import (
    EvalRecord,
    consolidate_annotations,
    gather_annotations,
    load_bitext,
    load_eval_records,
    write_annotation_file,
)
from .errors import RemoteServiceError
from .infill import DEFAULT_MAX_IN_FLIGHT, make_infiller
from .labeling import (
    TrainConfig,
    build_synthetic_dataset,
    mlm_record_json,
    training_record_json,
)
from .metrics import (
    build_report,
    fleiss_kappa,
    sentence_rating_matrix,
    token_rating_matrix,
    write_report,
)
from .noising import NoiseConfig, build_vocab

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_REMOTE = 2
EXIT_INTERNAL = 3

ENDPOINT_ENV = "HALLUC_ENDPOINT"

TASK_PRESETS = {
    "mt": {"h_m": 0.6, "h_r": 0.3, "dropout": 0.3, "alpha": 0.6},
    "summarization": {"h_m": 0.4, "h_r": 0.2, "dropout": 0.5, "alpha": 0.5},
}
DEFAULT_P_INS = 0.2
DEFAULT_MLM_PROB = 0.3


@dataclass(frozen=True)
class PipelineConfig:
    """Fully resolved synthesis settings: task presets plus overrides."""

    task: str
    seed: int
    h_m: float
    h_r: float
    p_ins: float
    dropout: float
    mlm_prob: float
    alpha: float
    infiller: str
    endpoint: str | None
    workers: int
    use_paraphrase: bool


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """Apply task presets, explicit flags winning over preset values."""
    preset = TASK_PRESETS[args.task]

    def pick(value, key):
        return preset[key] if value is None else value

    endpoint = args.endpoint or os.environ.get(ENDPOINT_ENV) or None
    workers = args.workers if args.workers is not None else os.cpu_count() or 1
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if args.infiller == "remote" and not endpoint:
        raise ValueError(
            f"remote infiller needs --endpoint or the {ENDPOINT_ENV} variable"
        )
    return PipelineConfig(
        task=args.task,
        seed=args.seed,
        h_m=pick(args.hm, "h_m"),
        h_r=pick(args.hr, "h_r"),
        p_ins=args.p_ins,
        dropout=pick(args.dropout, "dropout"),
        mlm_prob=args.mlm_prob,
        alpha=pick(args.alpha, "alpha"),
        infiller=args.infiller,
        endpoint=endpoint,
        workers=workers,
        use_paraphrase=args.use_paraphrase,
    )


def cmd_synthesize(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    records = list(load_bitext(args.bitext, fmt=args.format))
    if not records:
        raise ValueError(f"no records in {args.bitext}")
    noise_cfg = NoiseConfig(h_m=cfg.h_m, h_r=cfg.h_r, p_ins=cfg.p_ins, seed=cfg.seed)
    train_cfg = TrainConfig(
        dropout_rate=cfg.dropout,
        mlm_mask_prob=cfg.mlm_prob,
        alpha=cfg.alpha,
        seed=cfg.seed,
    )
    vocab = None
    if cfg.h_r > 0.0 or cfg.infiller == "stochastic":
        vocab = build_vocab(records)
    infiller = make_infiller(
        cfg.infiller,
        vocab=vocab,
        endpoint=cfg.endpoint,
        max_in_flight=DEFAULT_MAX_IN_FLIGHT,
    )
    n = 0
    density_sum = 0.0
    p_m_sum = 0.0
    p_r_sum = 0.0
    with open(args.out_train, "w", encoding="utf-8") as train_fh, open(
        args.out_mlm, "w", encoding="utf-8"
    ) as mlm_fh:
        stream = build_synthetic_dataset(
            records,
            noise_cfg,
            train_cfg,
            infiller,
            use_paraphrase=cfg.use_paraphrase,
            vocab=vocab,
            workers=cfg.workers,
        )
        for out in stream:
            rid = out.record.record_id
            train_fh.write(training_record_json(out.example, rid) + "\n")
            mlm_fh.write(mlm_record_json(out.mlm, rid) + "\n")
            n += 1
            density_sum += out.label_density
            p_m_sum += out.rates.p_m
            p_r_sum += out.rates.p_r
    print(
        f"task={cfg.task} h_m={cfg.h_m:.3g} h_r={cfg.h_r:.3g} "
        f"p_ins={cfg.p_ins:.3g} dropout={cfg.dropout:.3g} "
        f"mlm_prob={cfg.mlm_prob:.3g} alpha={cfg.alpha:.3g} seed={cfg.seed} "
        f"infiller={cfg.infiller} workers={cfg.workers}"
    )
    print(
        f"records={n} label_density={density_sum / n:.4f} "
        f"mean_p_m={p_m_sum / n:.4f} mean_p_r={p_r_sum / n:.4f}"
    )
    print(f"wrote {args.out_train}")
    print(f"wrote {args.out_mlm}")
    return EXIT_OK


def _merge_eval_records(gold, pred) -> list:
    """Join two eval files on record_id; gold is authoritative for labels."""
    pred_by_id = {}
    for rec in pred:
        if rec.record_id in pred_by_id:
            raise ValueError(f"duplicate record_id {rec.record_id} in predictions")
        pred_by_id[rec.record_id] = rec
    seen = set()
    merged = []
    for g in gold:
        if g.record_id in seen:
            raise ValueError(f"duplicate record_id {g.record_id} in gold")
        seen.add(g.record_id)
        p = pred_by_id.pop(g.record_id, None)
        if p is None:
            raise ValueError(f"record {g.record_id} is missing from predictions")
        if p.output.tokens != g.output.tokens:
            raise ValueError(
                f"record {g.record_id}: output tokens differ between files"
            )
        if p.pred_labels is None and p.pred_probs is None:
            raise ValueError(f"record {g.record_id} carries no predictions")
        scores = dict(g.external_scores or {})
        scores.update(p.external_scores or {})
        merged.append(
            EvalRecord(
                source=g.source,
                output=g.output,
                gold_labels=g.gold_labels,
                pred_labels=p.pred_labels,
                pred_probs=p.pred_probs,
                external_scores=scores or None,
                record_id=g.record_id,
            )
        )
    if pred_by_id:
        extra = min(pred_by_id)
        raise ValueError(f"record {extra} in predictions has no gold counterpart")
    return merged


def cmd_evaluate(args: argparse.Namespace) -> int:
    gold = load_eval_records(args.gold)
    pred = load_eval_records(args.pred)
    if not gold:
        raise ValueError(f"no records in {args.gold}")
    merged = _merge_eval_records(gold, pred)
    report = build_report(merged)
    write_report(report, args.out)

    def fmt(value):
        return "n/a" if value is None else f"{value:.4f}"

    print(
        f"records={report.n_records} tokens={report.n_tokens} "
        f"precision={report.precision:.4f} recall={report.recall:.4f} "
        f"f1={report.f1:.4f}"
    )
    print(
        f"spearman_prob={fmt(report.spearman_prob)} "
        f"spearman_ratio={fmt(report.spearman_ratio)} "
        f"pct_gold={report.pct_gold:.2f} pct_pred={report.pct_pred:.2f}"
    )
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_agreement(args: argparse.Namespace) -> int:
    if len(args.annotations) < 2:
        raise ValueError("agreement needs at least two annotation files")
    records = gather_annotations(args.annotations, ratings_path=args.ratings)
    if not records:
        raise ValueError("annotation files are empty")
    token_kappa = fleiss_kappa(token_rating_matrix(records))
    sentence_kappa = None
    if args.ratings is not None:
        sentence_kappa = fleiss_kappa(sentence_rating_matrix(records))
    consolidation = consolidate_annotations(records)
    write_annotation_file(consolidation.majority, args.out)
    n_tokens = sum(len(rec.tokens) for rec in records)
    print(
        f"annotators={records[0].n_annotators} sentences={len(records)} "
        f"tokens={n_tokens}"
    )
    print(f"token_kappa={token_kappa:.4f}")
    if sentence_kappa is not None:
        print(f"sentence_kappa={sentence_kappa:.4f}")
    else:
        print("sentence_kappa=n/a (no ratings file)")
    print(f"dropped_incomprehensible={consolidation.dropped_incomprehensible}")
    print(f"wrote {args.out}")
    if args.report is not None:
        payload = {
            "token_kappa": token_kappa,
            "sentence_kappa": sentence_kappa,
            "n_annotators": records[0].n_annotators,
            "n_sentences": len(records),
            "n_tokens": n_tokens,
            "dropped_incomprehensible": consolidation.dropped_incomprehensible,
        }
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {args.report}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; remap to input-error."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="halluc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    syn = sub.add_parser("synthesize", help="build a synthetic labeled dataset")
    syn.add_argument("bitext", help="parallel corpus path")
    syn.add_argument(
        "--format", choices=("tsv", "jsonl"), default="tsv",
        help="bitext file format",
    )
    syn.add_argument("--out-train", default="train.jsonl")
    syn.add_argument("--out-mlm", default="mlm.jsonl")
    syn.add_argument("--task", choices=tuple(TASK_PRESETS), default="mt")
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--hm", type=float, default=None, help="mask-rate cap h_m")
    syn.add_argument("--hr", type=float, default=None, help="replace-rate cap h_r")
    syn.add_argument("--p-ins", type=float, default=DEFAULT_P_INS)
    syn.add_argument("--dropout", type=float, default=None)
    syn.add_argument("--mlm-prob", type=float, default=DEFAULT_MLM_PROB)
    syn.add_argument("--alpha", type=float, default=None)
    syn.add_argument(
        "--infiller", choices=("identity", "stochastic", "remote"),
        default="stochastic",
    )
    syn.add_argument("--endpoint", default=None)
    syn.add_argument("--workers", type=int, default=None)
    syn.add_argument("--use-paraphrase", action="store_true")
    syn.set_defaults(func=cmd_synthesize)

    ev = sub.add_parser("evaluate", help="score predictions against gold labels")
    ev.add_argument("gold", help="gold eval JSONL path")
    ev.add_argument("pred", help="prediction eval JSONL path")
    ev.add_argument("--out", default="report.json")
    ev.set_defaults(func=cmd_evaluate)

    ag = sub.add_parser("agreement", help="inter-annotator agreement and majority vote")
    ag.add_argument("annotations", nargs="+", help="annotator label files")
    ag.add_argument("--ratings", default=None, help="sentence ratings file")
    ag.add_argument("--out", default="benchmark.txt")
    ag.add_argument("--report", default=None, help="optional kappa report JSON")
    ag.set_defaults(func=cmd_agreement)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RemoteServiceError as exc:
        print(f"halluc: remote service error: {exc}", file=sys.stderr)
        return EXIT_REMOTE
    except (ValueError, OSError) as exc:
        print(f"halluc: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"halluc: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
