"""Metric stack: PRF, sentence scores, Spearman, kappa, alignment."""

import numpy as np
import pytest

from halluc import (
    AnnotationRecord,
    DegenerateMetricError,
    EvalRecord,
    LabeledSeq,
    RatingMatrix,
    TokenSeq,
    align_score,
    build_report,
    corpus_hallucination_pct,
    corpus_token_prf,
    fleiss_kappa,
    harden,
    identity_similarity,
    ingest_external_score,
    sentence_rating_matrix,
    sentence_score_prob,
    sentence_score_ratio,
    spearman,
    token_prf,
    token_rating_matrix,
)


def _eval_record(gold, pred=None, probs=None, rid=0, scores=None):
    n = len(gold)
    return EvalRecord(
        source=TokenSeq(("s",)),
        output=TokenSeq(tuple(f"o{i}" for i in range(n))),
        gold_labels=tuple(gold),
        pred_labels=tuple(pred) if pred is not None else None,
        pred_probs=tuple(probs) if probs is not None else None,
        external_scores=scores,
        record_id=rid,
    )


class TestTokenPRF:
    def test_half_half(self):
        prf = token_prf([1, 0, 0, 1], [1, 1, 0, 0])
        assert (prf.precision, prf.recall, prf.f1) == (0.5, 0.5, 0.5)
        assert (prf.tp, prf.fp, prf.fn) == (1, 1, 1)
        assert not prf.degenerate

    def test_perfect(self):
        prf = token_prf([1, 0, 1], [1, 0, 1])
        assert (prf.precision, prf.recall, prf.f1) == (1.0, 1.0, 1.0)

    def test_no_predicted_positives_flagged(self):
        prf = token_prf([1, 0], [0, 0])
        assert prf.precision == 0.0
        assert prf.degenerate

    def test_no_gold_positives_flagged(self):
        prf = token_prf([0, 0], [1, 0])
        assert prf.recall == 0.0
        assert prf.degenerate

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            token_prf([0], [0, 1])

    def test_non_binary_rejected(self):
        with pytest.raises(ValueError):
            token_prf([0, 2], [0, 1])

    def test_micro_pooling_matches_brute_force(self):
        rng = np.random.default_rng(0)
        pairs = []
        all_gold = []
        all_pred = []
        for _ in range(100):
            n = int(rng.integers(1, 20))
            gold = [int(v) for v in rng.integers(0, 2, size=n)]
            pred = [int(v) for v in rng.integers(0, 2, size=n)]
            pairs.append((gold, pred))
            all_gold.extend(gold)
            all_pred.extend(pred)
        pooled = corpus_token_prf(pairs)
        flat = token_prf(all_gold, all_pred)
        assert pooled == flat

    def test_swap_symmetry(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            n = int(rng.integers(1, 15))
            gold = [int(v) for v in rng.integers(0, 2, size=n)]
            pred = [int(v) for v in rng.integers(0, 2, size=n)]
            a = token_prf(gold, pred)
            b = token_prf(pred, gold)
            assert a.precision == b.recall
            assert a.recall == b.precision
            assert a.f1 == b.f1
            assert (a.fp, a.fn) == (b.fn, b.fp)


class TestSentenceScores:
    def test_prob_mean(self):
        assert sentence_score_prob([0.2, 0.4]) == pytest.approx(0.3)
        assert sentence_score_prob([0.0, 0.0]) == 0.0

    def test_prob_empty_rejected(self):
        with pytest.raises(ValueError):
            sentence_score_prob([])

    def test_prob_matches_compensated_sum(self):
        rng = np.random.default_rng(2)
        probs = [float(p) for p in rng.random(10_000)]
        oracle = float(np.sum(np.asarray(probs, dtype=np.float64))) / len(probs)
        assert abs(sentence_score_prob(probs) - oracle) < 1e-12

    def test_ratio_counts(self):
        assert sentence_score_ratio([1, 0, 0, 0]) == 0.25
        assert sentence_score_ratio([1, 1, 1]) == 1.0

    def test_ratio_hardens_probs(self):
        assert sentence_score_ratio([0.6, 0.4, 0.7]) == pytest.approx(2 / 3)

    def test_threshold_ties_flag(self):
        assert harden([0.5, 0.49999, 0.50001]) == [1, 0, 1]

    def test_ratio_equals_prob_on_hard_labels(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            labels = [int(v) for v in rng.integers(0, 2, size=int(rng.integers(1, 20)))]
            assert sentence_score_ratio(labels) == sentence_score_prob(labels)


class TestSpearman:
    def test_identical_orderings(self):
        assert spearman([1, 5, 9], [2, 3, 40]) == pytest.approx(1.0)

    def test_reversed(self):
        assert spearman([1, 2, 3], [9, 5, 1]) == pytest.approx(-1.0)

    def test_hand_oracle(self):
        assert spearman([1, 2, 3], [3, 1, 2]) == pytest.approx(-0.5, abs=1e-12)

    def test_constant_rejected(self):
        with pytest.raises(DegenerateMetricError):
            spearman([1.0, 1.0, 1.0], [1, 2, 3])
        with pytest.raises(DegenerateMetricError):
            spearman([1, 2, 3], [7, 7, 7])

    def test_too_short(self):
        with pytest.raises(DegenerateMetricError):
            spearman([1], [2])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            spearman([1, 2], [1, 2, 3])

    def test_self_correlation(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            xs = [float(v) for v in rng.integers(0, 50, size=10)]
            if len(set(xs)) < 2:
                continue
            assert spearman(xs, xs) == pytest.approx(1.0)

    def test_symmetry(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            xs = [float(v) for v in rng.integers(0, 20, size=12)]
            ys = [float(v) for v in rng.integers(0, 20, size=12)]
            if len(set(xs)) < 2 or len(set(ys)) < 2:
                continue
            assert spearman(xs, ys) == pytest.approx(spearman(ys, xs))

    def test_tied_ranks_average(self):
        # xs ties at both ends; ranks become (1.5, 1.5, 3.5, 3.5)
        got = spearman([2.0, 2.0, 5.0, 5.0], [1.0, 2.0, 3.0, 4.0])
        rx = np.array([1.5, 1.5, 3.5, 3.5])
        ry = np.array([1.0, 2.0, 3.0, 4.0])
        rx -= rx.mean()
        ry -= ry.mean()
        expected = float(np.dot(rx, ry) / np.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))
        assert got == pytest.approx(expected, abs=1e-12)


class TestFleissKappa:
    def test_hand_oracle(self):
        assert fleiss_kappa([[3, 0], [2, 1]]) == pytest.approx(-0.2, abs=1e-12)

    def test_perfect_agreement_two_categories(self):
        assert fleiss_kappa([[3, 0], [0, 3]]) == pytest.approx(1.0)

    def test_single_category_degenerate(self):
        with pytest.raises(DegenerateMetricError):
            fleiss_kappa([[3, 0], [3, 0]])

    def test_needs_two_items_and_raters(self):
        with pytest.raises(DegenerateMetricError):
            fleiss_kappa([[2, 1]])
        with pytest.raises(DegenerateMetricError):
            fleiss_kappa([[1, 0], [0, 1]])

    def test_row_sum_invariant(self):
        with pytest.raises(ValueError):
            RatingMatrix(((2, 1), (1, 1)))

    def test_permutation_invariance(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            n_items = int(rng.integers(2, 10))
            rows = []
            for _ in range(n_items):
                a = int(rng.integers(0, 4))
                rows.append((a, 3 - a))
            try:
                base = fleiss_kappa(rows)
            except DegenerateMetricError:
                continue
            shuffled = [rows[i] for i in rng.permutation(n_items)]
            assert fleiss_kappa(shuffled) == pytest.approx(base)
            flipped = [(b, a) for a, b in rows]
            assert fleiss_kappa(flipped) == pytest.approx(base)

    def test_token_rating_matrix(self):
        tok = TokenSeq(("w1", "w2"))
        rec = AnnotationRecord(
            machine_output=(
                LabeledSeq(tok, (1, 0)),
                LabeledSeq(tok, (1, 1)),
                LabeledSeq(tok, (0, 0)),
            )
        )
        matrix = token_rating_matrix([rec])
        assert matrix.counts == ((1, 2), (2, 1))

    def test_sentence_rating_matrix(self):
        tok = TokenSeq(("w",))
        rec = AnnotationRecord(
            machine_output=(LabeledSeq(tok, (0,)), LabeledSeq(tok, (0,))),
            sentence_rating=("faithful", "hallucinated"),
        )
        matrix = sentence_rating_matrix([rec])
        assert matrix.counts == ((0, 1, 1),)

    def test_sentence_matrix_requires_ratings(self):
        tok = TokenSeq(("w",))
        rec = AnnotationRecord(machine_output=(LabeledSeq(tok, (0,)),))
        with pytest.raises(ValueError):
            sentence_rating_matrix([rec])


class TestCorpusPct:
    def test_pooled(self):
        records = [
            _eval_record([1, 1, 0, 0], rid=0),
            _eval_record([1, 0, 0, 0, 0, 0], rid=1),
        ]
        assert corpus_hallucination_pct(records, "gold") == pytest.approx(30.0)

    def test_all_zero(self):
        records = [_eval_record([0, 0], rid=0)]
        assert corpus_hallucination_pct(records, "gold") == 0.0

    def test_pred_requires_predictions(self):
        with pytest.raises(ValueError) as err:
            corpus_hallucination_pct([_eval_record([0], rid=5)], "pred")
        assert "5" in str(err.value)

    def test_pred_hardens_probs(self):
        records = [_eval_record([0, 0], probs=[0.9, 0.1], rid=0)]
        assert corpus_hallucination_pct(records, "pred") == pytest.approx(50.0)

    def test_order_invariance(self):
        rng = np.random.default_rng(7)
        records = [
            _eval_record(
                [int(v) for v in rng.integers(0, 2, size=int(rng.integers(1, 10)))],
                rid=i,
            )
            for i in range(50)
        ]
        base = corpus_hallucination_pct(records, "gold")
        shuffled = [records[i] for i in rng.permutation(len(records))]
        assert corpus_hallucination_pct(shuffled, "gold") == base


class TestAlignScore:
    def test_identical_sequences(self):
        seq = TokenSeq(("a", "b", "c"))
        assert align_score(seq, seq, identity_similarity) == 1.0

    def test_disjoint_vocabulary(self):
        out = TokenSeq(("a", "b"))
        src = TokenSeq(("x", "y"))
        assert align_score(out, src, identity_similarity) == 0.0

    def test_mutual_argmax_case(self):
        matrix = [[0.9, 0.1, 0.1], [0.1, 0.8, 0.1], [0.2, 0.1, 0.05]]
        out = TokenSeq(("o0", "o1", "o2"))
        src = TokenSeq(("s0", "s1", "s2"))

        def sim(o, s):
            return matrix[int(o[1])][int(s[1])]

        assert align_score(out, src, sim) == pytest.approx(2 / 3)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            align_score(TokenSeq(()), TokenSeq(("a",)), identity_similarity)

    def test_non_finite_similarity_rejected(self):
        out = TokenSeq(("a",))
        src = TokenSeq(("b",))
        with pytest.raises(ValueError):
            align_score(out, src, lambda o, s: float("nan"))

    def test_monotone_rescaling_invariance(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            n, m = int(rng.integers(1, 6)), int(rng.integers(1, 6))
            values = rng.integers(0, 5, size=(n, m))
            out = TokenSeq(tuple(f"o{i}" for i in range(n)))
            src = TokenSeq(tuple(f"s{j}" for j in range(m)))

            def sim(o, s, v=values):
                return float(v[int(o[1:])][int(s[1:])])

            def rescaled(o, s, v=values):
                x = float(v[int(o[1:])][int(s[1:])])
                return 0.3 * x**3 + 1.7 * x - 4.0

            assert align_score(out, src, sim) == align_score(out, src, rescaled)


class TestExternalScores:
    def test_entailment_flips(self):
        rec = _eval_record([0], scores={"entailment": 0.9})
        assert ingest_external_score(rec, "entailment") == pytest.approx(0.1)
        rec0 = _eval_record([0], scores={"entailment": 0.0})
        assert ingest_external_score(rec0, "entailment") == 1.0

    def test_other_scores_pass_through(self):
        rec = _eval_record([0], scores={"alignment": 0.42})
        assert ingest_external_score(rec, "alignment") == 0.42

    def test_missing_score_names_record(self):
        rec = _eval_record([0], rid=9)
        with pytest.raises(ValueError) as err:
            ingest_external_score(rec, "entailment")
        assert "9" in str(err.value)


class TestReport:
    def test_report_fields(self):
        records = [
            _eval_record([1, 0], probs=[0.8, 0.2], rid=0),
            _eval_record([0, 1, 1], probs=[0.1, 0.9, 0.6], rid=1),
            _eval_record([0, 0], probs=[0.2, 0.1], rid=2),
        ]
        report = build_report(records)
        payload = report.as_dict()
        for field in (
            "precision",
            "recall",
            "f1",
            "spearman_prob",
            "spearman_ratio",
            "pct_gold",
            "pct_pred",
        ):
            assert field in payload
        assert report.f1 == 1.0
        assert report.n_records == 3
        assert report.n_tokens == 7

    def test_labels_only_report_has_null_prob_correlation(self):
        records = [
            _eval_record([1, 0], pred=[1, 0], rid=0),
            _eval_record([0, 0], pred=[0, 1], rid=1),
        ]
        report = build_report(records)
        assert report.spearman_prob is None

    def test_constant_scores_yield_null_correlation(self):
        records = [
            _eval_record([1, 0], probs=[0.5, 0.5], rid=0),
            _eval_record([1, 1], probs=[0.5, 0.5], rid=1),
        ]
        report = build_report(records)
        assert report.spearman_prob is None

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            build_report([])
