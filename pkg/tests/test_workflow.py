import random

import pytest

from piiqa.model import Corpus, Review, Span, SpanAnnotation, Submission, Task
from piiqa.workflow import (
    DEFAULT_PHASES,
    InsufficientPool,
    InvalidGroundTruth,
    InvalidReview,
    InvalidState,
    Phase,
    PoolMember,
    TaskState,
    UnknownSubmission,
    assign,
    phase_report,
    quality_score,
    record_review,
    route,
)

PROMPT = "Jan Kowalski melduje problem z kontem numer 12345678901234567890123456"


def make_task(task_id="t1", phase="production", locale="pl-PL"):
    return Task(task_id, locale, phase, "finance", PROMPT)


def make_corpus(task, annotators=("a1", "a2"), annotations=None):
    corpus = Corpus()
    corpus.add_task(task)
    for a in annotators:
        corpus.add_submission(
            Submission(f"s-{task.id}-{a}", task.id, a, list(annotations or [])))
    return corpus


def name_ann():
    return SpanAnnotation(Span(0, 12), "NAME", "Jan Kowalski")


class TestPhase:
    def test_defaults_valid(self):
        assert DEFAULT_PHASES["pilot"].qa_sampling == 1.0
        assert DEFAULT_PHASES["production"].ira_threshold == 0.85

    @pytest.mark.parametrize("name,rate", [
        ("pilot", 0.9), ("training", 0.4), ("training", 0.9), ("production", 0.5),
    ])
    def test_sampling_bounds_enforced(self, name, rate):
        with pytest.raises(ValueError):
            Phase(name, qa_sampling=rate)

    def test_threshold_bounds(self):
        with pytest.raises(ValueError):
            Phase("production", qa_sampling=0.12, ira_threshold=0.5)


class TestStateMachine:
    def test_happy_path(self):
        state = TaskState("t1")
        for status in ("assigned", "dual_annotated", "arbitration", "reviewed"):
            state.advance(status, at=0)
        assert state.status == "reviewed"
        assert [t.status for t in state.history] == [
            "assigned", "dual_annotated", "arbitration", "reviewed"]

    def test_cannot_skip_dual_annotated(self):
        state = TaskState("t1")
        state.advance("assigned", at=0)
        with pytest.raises(InvalidState):
            state.advance("arbitration", at=1)

    def test_accepted_is_terminal(self):
        state = TaskState("t1")
        state.advance("assigned", 0)
        state.advance("dual_annotated", 1)
        state.advance("accepted", 2)
        with pytest.raises(InvalidState):
            state.advance("reviewed", 3)


class TestAssign:
    def test_least_loaded_tiebreak_by_id(self):
        pool = [PoolMember(a, frozenset({"pl-PL"})) for a in ("a3", "a1", "a2")]
        assert assign(make_task(), pool) == ["a1", "a2"]

    def test_load_rotates(self):
        pool = [PoolMember(a, frozenset({"pl-PL"})) for a in ("a1", "a2", "a3")]
        assert assign(make_task("t1"), pool) == ["a1", "a2"]
        assert assign(make_task("t2"), pool) == ["a3", "a1"]

    def test_insufficient_pool(self):
        with pytest.raises(InsufficientPool):
            assign(make_task(), [PoolMember("a1", frozenset({"pl-PL"}))])

    def test_unqualified_never_assigned(self):
        pool = [
            PoolMember("a1", frozenset({"pl-PL"}), qualified=False),
            PoolMember("a2", frozenset({"pl-PL"})),
            PoolMember("a3", frozenset({"pl-PL"})),
        ]
        for i in range(5):
            assert "a1" not in assign(make_task(f"t{i}"), pool)

    def test_locale_mismatch_excluded(self):
        pool = [PoolMember("a1", frozenset({"fi-FI"})),
                PoolMember("a2", frozenset({"pl-PL"})),
                PoolMember("a3", frozenset({"pl-PL"}))]
        assert assign(make_task(), pool) == ["a2", "a3"]


def dual_annotated_state(task_id="t1"):
    state = TaskState(task_id)
    state.advance("assigned", 0)
    state.advance("dual_annotated", 1)
    return state


class TestRoute:
    def test_below_threshold_always_arbitration(self):
        state = dual_annotated_state()
        decision = route(state, 0.80, DEFAULT_PHASES["production"], random.Random(1))
        assert decision.status == "arbitration"
        assert decision.reason == "below_threshold"
        assert state.status == "arbitration"

    def test_pilot_reviews_everything(self):
        for seed in range(20):
            state = dual_annotated_state()
            decision = route(state, 1.0, DEFAULT_PHASES["pilot"], random.Random(seed))
            assert decision.status == "arbitration"

    def test_production_sampling(self):
        # draw 0.50 > 0.12 -> accepted
        class FixedDraw(random.Random):
            def random(self):
                return 0.50

        state = dual_annotated_state()
        decision = route(state, 0.95, DEFAULT_PHASES["production"], FixedDraw())
        assert decision.status == "accepted"
        assert decision.draw == 0.50

    def test_route_requires_dual_annotated(self):
        state = TaskState("t1")
        with pytest.raises(InvalidState):
            route(state, 0.9, DEFAULT_PHASES["production"], random.Random(0))

    def test_sampled_fraction_production(self):
        rng = random.Random(42)
        audited = 0
        n = 10_000
        for i in range(n):
            state = dual_annotated_state(f"t{i}")
            decision = route(state, 0.95, DEFAULT_PHASES["production"], rng)
            audited += decision.status == "arbitration"
        assert 0.10 <= audited / n <= 0.14

    def test_draw_recorded_in_history(self):
        state = dual_annotated_state()
        route(state, 0.95, DEFAULT_PHASES["production"], random.Random(3))
        assert "draw" in state.history[-1].meta
        assert state.history[-1].meta["ira"] == 0.95


class TestRecordReview:
    def arbitration_state(self):
        state = dual_annotated_state()
        state.advance("arbitration", 2)
        return state

    def test_accept_as_is(self):
        task = make_task()
        corpus = make_corpus(task, annotations=[name_ann()])
        state = self.arbitration_state()
        review = Review(task.id, "qa1", "s-t1-a1", [name_ann()],
                        frozenset(), "accepted_as_is")
        record_review(state, review, task, corpus)
        assert state.status == "reviewed"
        assert corpus.ground_truths[task.id].annotations == [name_ann()]
        assert corpus.reviews[task.id].verdict == "accepted_as_is"

    def test_corrected_with_missing_label(self):
        task = make_task()
        corpus = make_corpus(task, annotations=[])
        state = self.arbitration_state()
        review = Review(task.id, "qa1", "s-t1-a1", [name_ann()],
                        frozenset({"missing_labels"}), "corrected")
        record_review(state, review, task, corpus)
        assert corpus.ground_truths[task.id].annotations[0].pii_type == "NAME"

    def test_review_on_accepted_task_invalid(self):
        task = make_task()
        corpus = make_corpus(task, annotations=[name_ann()])
        state = dual_annotated_state()
        state.advance("accepted", 2)
        review = Review(task.id, "qa1", "s-t1-a1", [name_ann()],
                        frozenset(), "accepted_as_is")
        with pytest.raises(InvalidState):
            record_review(state, review, task, corpus)

    def test_unknown_submission(self):
        task = make_task()
        corpus = make_corpus(task, annotations=[name_ann()])
        review = Review(task.id, "qa1", "s-t1-zz", [name_ann()],
                        frozenset(), "accepted_as_is")
        with pytest.raises(UnknownSubmission):
            record_review(self.arbitration_state(), review, task, corpus)

    def test_invalid_ground_truth(self):
        task = make_task()
        corpus = make_corpus(task, annotations=[name_ann()])
        bad = SpanAnnotation(Span(0, 3), "NAME", "WRONG")
        review = Review(task.id, "qa1", "s-t1-a1", [bad],
                        frozenset({"incorrect_span"}), "corrected")
        with pytest.raises(InvalidGroundTruth):
            record_review(self.arbitration_state(), review, task, corpus)

    def test_categories_required_when_corrected(self):
        task = make_task()
        corpus = make_corpus(task, annotations=[name_ann()])
        review = Review(task.id, "qa1", "s-t1-a1", [name_ann()],
                        frozenset(), "corrected")
        with pytest.raises(InvalidReview):
            record_review(self.arbitration_state(), review, task, corpus)

    def test_categories_forbidden_when_accepted(self):
        task = make_task()
        corpus = make_corpus(task, annotations=[name_ann()])
        review = Review(task.id, "qa1", "s-t1-a1", [name_ann()],
                        frozenset({"incorrect_span"}), "accepted_as_is")
        with pytest.raises(InvalidReview):
            record_review(self.arbitration_state(), review, task, corpus)


def reviewed_corpus(outcomes):
    """outcomes: list of (chosen_annotator, verdict) per task for pool a1/a2."""
    corpus = Corpus()
    for i, (chosen, verdict) in enumerate(outcomes):
        task = make_task(f"t{i}")
        corpus.add_task(task)
        for a in ("a1", "a2"):
            corpus.add_submission(
                Submission(f"s-{task.id}-{a}", task.id, a, [name_ann()]))
        categories = frozenset() if verdict == "accepted_as_is" else frozenset({"incorrect_span"})
        corpus.reviews[task.id] = Review(
            task.id, "qa1", f"s-{task.id}-{chosen}", [name_ann()], categories, verdict)
    return corpus


class TestQualityScore:
    def test_seventeen_of_twenty(self):
        outcomes = [("a1", "accepted_as_is")] * 17 + [("a1", "corrected")] * 3
        corpus = reviewed_corpus(outcomes)
        qs = quality_score("a1", corpus, min_reviewed=10)
        assert qs.score == pytest.approx(0.85)
        assert qs.reviewed_count == 20
        assert qs.qualified

    def test_no_reviews(self):
        qs = quality_score("a1", Corpus())
        assert qs.score is None and not qs.qualified and qs.reviewed_count == 0

    def test_all_accepted(self):
        corpus = reviewed_corpus([("a1", "accepted_as_is")] * 12)
        assert quality_score("a1", corpus).score == 1.0

    def test_other_annotator_chosen_counts_against(self):
        corpus = reviewed_corpus([("a2", "accepted_as_is")] * 10)
        qs = quality_score("a1", corpus)
        assert qs.score == 0.0 and qs.reviewed_count == 10

    def test_lenient_variant(self):
        corpus = reviewed_corpus([("a1", "corrected")] * 10)
        assert quality_score("a1", corpus).score == 0.0
        assert quality_score("a1", corpus, corrected_weight=0.5).score == 0.5

    def test_min_reviewed_gate(self):
        corpus = reviewed_corpus([("a1", "accepted_as_is")] * 5)
        assert not quality_score("a1", corpus, min_reviewed=10).qualified
        assert quality_score("a1", corpus, min_reviewed=5).qualified

    def test_monotone_in_outcome(self):
        # identical history, then one accepted vs one rejected review: the
        # accepted outcome never scores lower
        base = [("a1", "accepted_as_is")] * 6 + [("a2", "accepted_as_is")] * 4
        better = reviewed_corpus(base + [("a1", "accepted_as_is")])
        worse = reviewed_corpus(base + [("a1", "rejected")])
        score_better = quality_score("a1", better).score
        score_worse = quality_score("a1", worse).score
        assert score_better > score_worse
        assert quality_score("a1", better).reviewed_count == \
               quality_score("a1", worse).reviewed_count


class TestPhaseReport:
    def test_counts_partition_reviewed(self):
        outcomes = ([("a1", "accepted_as_is")] * 3 + [("a1", "corrected")] * 2
                    + [("a2", "rejected")])
        corpus = reviewed_corpus(outcomes)
        report = phase_report(corpus, "production")
        by_locale = report.verdict_counts["pl-PL"]
        assert by_locale == {"accepted_as_is": 3, "corrected": 2, "rejected": 1}
        assert sum(by_locale.values()) == report.reviewed_tasks == 6

    def test_histogram(self):
        corpus = reviewed_corpus([("a1", "corrected")] * 5)
        report = phase_report(corpus, "production")
        assert report.category_histogram["incorrect_span"] == 5
        assert report.category_histogram["missing_labels"] == 0

    def test_no_reviews_in_phase(self):
        corpus = reviewed_corpus([("a1", "accepted_as_is")])
        report = phase_report(corpus, "pilot")
        assert report.reviewed_tasks == 0 and report.verdict_counts == {}
