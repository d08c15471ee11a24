import random

import pytest

from piiqa.model import Corpus, GroundTruth, Span, SpanAnnotation, Submission, Task, default_registry
from piiqa.rca import (
    LengthBinConfig,
    LocaleBins,
    PromptMismatch,
    UnknownAxis,
    categorize_disagreement,
    confusion_pairs,
    distributions,
    length_bin,
    rca_report,
)

REG = default_registry()

PROMPT = "code 123 word 456 tail more words here padding"


def ann(start, end, pii_type="PIN", text=None):
    return SpanAnnotation(Span(start, end), pii_type, text if text is not None else PROMPT[start:end])


def gt_of(*annotations, task_id="t1"):
    return GroundTruth(task_id, list(annotations))


def sub_of(*annotations, task_id="t1", annotator="a1"):
    return Submission(f"s-{task_id}-{annotator}", task_id, annotator, list(annotations))


class TestCategorizeDisagreement:
    def test_identical_empty_set(self):
        gt = gt_of(ann(5, 8), ann(14, 17, "CREDIT DEBIT CVV"))
        sub = sub_of(ann(5, 8), ann(14, 17, "CREDIT DEBIT CVV"))
        assert categorize_disagreement(gt, sub, registry=REG) == frozenset()

    def test_type_confusion_same_span(self):
        gt = gt_of(ann(5, 8, "CREDIT DEBIT CVV"))
        sub = sub_of(ann(5, 8, "PIN"))
        assert categorize_disagreement(gt, sub, registry=REG) == {"PII_TYPE"}

    def test_span_jitter_whitespace_only(self):
        # one extra trailing space: same normalized text, imperfect IoU
        gt = gt_of(ann(5, 8))
        sub = sub_of(ann(5, 9))  # "123" vs "123 "
        assert categorize_disagreement(gt, sub, registry=REG) == {"PII_SPAN"}

    def test_span_jitter_with_text_change(self):
        gt = gt_of(ann(5, 8))
        sub = sub_of(ann(6, 9))  # "123" vs "23 "
        assert categorize_disagreement(gt, sub, registry=REG) == {"PII_SPAN", "PII_TEXT"}

    def test_count_mismatch(self):
        gt = gt_of(ann(0, 4, "NAME"), ann(5, 8), ann(14, 17))
        sub = sub_of(ann(0, 4, "NAME"), ann(5, 8))
        cats = categorize_disagreement(gt, sub, registry=REG)
        assert "NUMBER_OF_PIIS" in cats

    def test_order_swap(self):
        gt = gt_of(ann(0, 4, "NAME"), ann(5, 8, "PIN"))
        sub = sub_of(ann(0, 4, "PIN"), ann(5, 8, "NAME"))
        cats = categorize_disagreement(gt, sub, registry=REG)
        assert "SAME_PII_ORDER" in cats

    def test_text_only_difference(self):
        gt = gt_of(ann(5, 8, "PIN", text="123"))
        sub = sub_of(SpanAnnotation(Span(5, 8), "PIN", "999"))
        assert categorize_disagreement(gt, sub, registry=REG) == {"PII_TEXT"}

    def test_disjoint_same_type_is_span_issue(self):
        gt = gt_of(ann(5, 8))
        sub = sub_of(ann(14, 17))
        cats = categorize_disagreement(gt, sub, registry=REG)
        assert "PII_SPAN" in cats
        assert "NUMBER_OF_PIIS" not in cats

    def test_overlap_below_tau(self):
        gt = gt_of(ann(0, 10, "NAME"))
        sub = sub_of(ann(8, 20, "NAME"))
        cats = categorize_disagreement(gt, sub, tau=0.5, registry=REG)
        assert "PII_SPAN" in cats

    def test_prompt_mismatch(self):
        with pytest.raises(PromptMismatch):
            categorize_disagreement(gt_of(task_id="t1"), sub_of(task_id="t2"), registry=REG)

    def test_self_comparison_is_empty_randomized(self):
        rng = random.Random(17)
        for _ in range(50):
            annotations = []
            cursor = 0
            for _ in range(rng.randrange(0, 5)):
                start = cursor + rng.randrange(0, 4)
                end = start + rng.randrange(1, 6)
                annotations.append(SpanAnnotation(
                    Span(start, end), rng.choice(["NAME", "PIN", "DATE"]), "x" * (end - start)))
                cursor = end + 1
            gt = gt_of(*annotations)
            sub = sub_of(*annotations)
            assert categorize_disagreement(gt, sub, registry=REG) == frozenset()

    def test_order_and_count_mutually_exclusive(self):
        rng = random.Random(23)
        types = ["NAME", "PIN", "DATE", "PHONE"]
        for _ in range(100):
            def rand_anns():
                out, cursor = [], 0
                for _ in range(rng.randrange(0, 4)):
                    start = cursor + rng.randrange(0, 3)
                    end = start + rng.randrange(1, 5)
                    out.append(SpanAnnotation(Span(start, end), rng.choice(types), "y" * (end - start)))
                    cursor = end + 1
                return out
            cats = categorize_disagreement(gt_of(*rand_anns()), sub_of(*rand_anns()), registry=REG)
            assert not ({"SAME_PII_ORDER", "NUMBER_OF_PIIS"} <= cats)

    def test_fine_incorrect_rows_never_empty(self):
        from piiqa.metrics import type_sequence
        rng = random.Random(31)
        types = ["NAME", "PIN", "DATE"]
        for _ in range(200):
            def rand_anns():
                out, cursor = [], 0
                for _ in range(rng.randrange(0, 4)):
                    start = cursor + rng.randrange(0, 3)
                    end = start + rng.randrange(1, 5)
                    out.append(SpanAnnotation(Span(start, end), rng.choice(types), "z" * (end - start)))
                    cursor = end + 1
                return out
            gt, sub = gt_of(*rand_anns()), sub_of(*rand_anns())
            if type_sequence(gt, REG) != type_sequence(sub, REG):
                assert categorize_disagreement(gt, sub, registry=REG), (gt, sub)


def corpus_with_confusions(n_confused, n_clean=3, phase="pilot",
                           confusions=(("CREDIT DEBIT CVV", "PIN"),)):
    corpus = Corpus()
    i = 0
    for type_pair in confusions:
        for _ in range(n_confused):
            task_id = f"t{i:03d}"
            corpus.add_task(Task(task_id, "pl-PL", phase, "finance", PROMPT))
            corpus.ground_truths[task_id] = gt_of(ann(5, 8, type_pair[0]), task_id=task_id)
            corpus.add_submission(sub_of(ann(5, 8, type_pair[1]), task_id=task_id))
            i += 1
    for _ in range(n_clean):
        task_id = f"t{i:03d}"
        corpus.add_task(Task(task_id, "pl-PL", phase, "finance", PROMPT))
        corpus.ground_truths[task_id] = gt_of(ann(5, 8, "PIN"), task_id=task_id)
        corpus.add_submission(sub_of(ann(5, 8, "PIN"), task_id=task_id))
        i += 1
    return corpus


class TestConfusionPairs:
    def test_seeded_cvv_pin(self):
        corpus = corpus_with_confusions(5)
        ranked = confusion_pairs(corpus, registry=REG)
        top = ranked["pilot"][0]
        assert (top.type_a, top.type_b) == ("CREDIT DEBIT CVV", "PIN")
        assert top.count == 5

    def test_error_free_corpus(self):
        corpus = corpus_with_confusions(0, n_clean=4)
        assert confusion_pairs(corpus, registry=REG) == {}

    def test_pilot_table_pair_set(self):
        seeded = [
            ("CREDIT DEBIT NUMBER", "BANK ACCOUNT NUMBER"),
            ("CREDIT DEBIT CVV", "PIN"),
            ("SSN", "HEALTH ID"),
            ("TIN", "SSN"),
            ("AWS SECRET KEY", "AWS ACCESS KEY ID"),
        ]
        corpus = corpus_with_confusions(2, n_clean=0, confusions=seeded)
        ranked = confusion_pairs(corpus, registry=REG)["pilot"]
        got = {(p.type_a, p.type_b) for p in ranked}
        assert got == {tuple(sorted(pair)) for pair in seeded}

    def test_unordered_keying(self):
        corpus = Corpus()
        for i, (gt_type, sub_type) in enumerate([("PIN", "CREDIT DEBIT CVV"),
                                                 ("CREDIT DEBIT CVV", "PIN")]):
            task_id = f"t{i}"
            corpus.add_task(Task(task_id, "pl-PL", "pilot", "finance", PROMPT))
            corpus.ground_truths[task_id] = gt_of(ann(5, 8, gt_type), task_id=task_id)
            corpus.add_submission(sub_of(ann(5, 8, sub_type), task_id=task_id))
        ranked = confusion_pairs(corpus, registry=REG)["pilot"]
        assert len(ranked) == 1 and ranked[0].count == 2

    def test_top_k(self):
        corpus = corpus_with_confusions(
            2, n_clean=0,
            confusions=[("CREDIT DEBIT CVV", "PIN"), ("SSN", "HEALTH ID"), ("TIN", "SSN")])
        ranked = confusion_pairs(corpus, top_k=2, registry=REG)["pilot"]
        assert len(ranked) == 2


class TestLengthBin:
    @pytest.mark.parametrize("words,expected", [
        (25, "S"), (29, "S"), (30, "M"), (100, "M"), (239, "M"),
        (240, "L"), (1199, "L"), (1200, "XL"), (2000, "XL"), (3500, "XL"),
    ])
    def test_default_bounds(self, words, expected):
        assert length_bin("w " * words) == expected

    def test_clamp_above_xl(self, caplog):
        with caplog.at_level("WARNING"):
            assert length_bin("w " * 4000) == "XL"
        assert "clamped" in caplog.text

    def test_char_mode_override(self):
        cfg = LengthBinConfig(overrides={"zh-CN": LocaleBins(count_mode="chars")})
        prompt = "一" * 35  # 35 chars, 1 whitespace-word
        assert length_bin(prompt, cfg, "zh-CN") == "M"
        assert length_bin(prompt, cfg, "pl-PL") == "S"

    def test_boundaries_must_increase(self):
        with pytest.raises(ValueError):
            LocaleBins(bounds=(30, 30, 1200, 3500))


def distribution_corpus(domains, with_gt=True):
    corpus = Corpus()
    for i, (locale, domain) in enumerate(domains):
        task_id = f"t{i:03d}"
        corpus.add_task(Task(task_id, locale, "pilot", domain, PROMPT))
        if with_gt:
            corpus.ground_truths[task_id] = gt_of(
                ann(0, 4, "NAME"), ann(5, 8, "PIN"), task_id=task_id)
    return corpus


class TestDistributions:
    def test_single_domain(self):
        corpus = distribution_corpus([("pl-PL", "finance")] * 4)
        (report,) = distributions(corpus, "domain", registry=REG)
        assert report.group == "pl"
        assert report.proportions == {"finance": 1.0}

    def test_proportions_sum_to_one(self):
        corpus = distribution_corpus(
            [("pl-PL", "finance"), ("pl-PL", "health"), ("pl-PL", "travel"),
             ("nl-BE", "it"), ("nl-NL", "it"), ("nl-NL", "media")])
        for report in distributions(corpus, "domain", registry=REG):
            assert sum(report.proportions.values()) == pytest.approx(1.0, abs=1e-9)

    def test_locale_groups_merged(self):
        corpus = distribution_corpus([("nl-BE", "it"), ("nl-NL", "media")])
        reports = distributions(corpus, "domain", registry=REG)
        assert [r.group for r in reports] == ["nl"]
        assert reports[0].total == 2

    def test_category_axis_uses_merge_map(self):
        corpus = distribution_corpus([("pl-PL", "finance")])
        (report,) = distributions(corpus, "pii_category", registry=REG)
        # NAME stays NAME; PIN maps into CREDIT CARD
        assert report.proportions == {"CREDIT CARD": 0.5, "NAME": 0.5}

    def test_duplication_invariance(self):
        base = [("pl-PL", "finance"), ("pl-PL", "health")]
        single = distributions(distribution_corpus(base), "domain", registry=REG)
        tripled = distributions(distribution_corpus(base * 3), "domain", registry=REG)
        assert single[0].proportions == tripled[0].proportions

    def test_unknown_axis(self):
        with pytest.raises(UnknownAxis):
            distributions(Corpus(), "sentiment")


class TestRcaReport:
    def test_empty_window(self, caplog):
        with caplog.at_level("WARNING"):
            report = rca_report(Corpus(), "pilot", registry=REG)
        assert report.empty and report.reviewed_tasks == 0
        assert all(v == 0 for v in report.category_counts.values())

    def test_seeded_span_errors(self):
        corpus = Corpus()
        for i in range(10):
            task_id = f"t{i:03d}"
            corpus.add_task(Task(task_id, "pl-PL", "training", "finance", PROMPT))
            corpus.ground_truths[task_id] = gt_of(ann(5, 8), task_id=task_id)
            corpus.add_submission(sub_of(ann(5, 9), task_id=task_id))
        report = rca_report(corpus, "training", registry=REG)
        assert report.category_counts["PII_SPAN"] == 10
        assert report.affected_locales["PII_SPAN"] == ["pl-PL"]

    def test_trend_sign(self):
        noisy = corpus_with_confusions(6, phase="pilot")
        quieter = corpus_with_confusions(2, phase="pilot")
        first = rca_report(noisy, "pilot", registry=REG)
        second = rca_report(quieter, "pilot", baseline=first, registry=REG)
        assert second.trend["PII_TYPE"] == -1
        assert second.trend["PII_SPAN"] == 0
