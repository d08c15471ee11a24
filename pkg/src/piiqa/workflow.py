"""Task lifecycle: dual assignment, IRA-threshold routing, phase-dependent
QA sampling, review recording against the QA rubric, and annotator quality
scores.

Tasks move created -> assigned -> dual_annotated -> accepted | arbitration
-> reviewed. Tasks whose inter-rater agreement falls below the phase
threshold always go to arbitration; agreed tasks are audited (also through
arbitration, the single review path) with the phase's QA sampling
probability. Sampling draws come from a caller-supplied seeded RNG and are
recorded on the transition for auditability.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .model import (
    Corpus,
    GroundTruth,
    Registry,
    Review,
    Task,
    check_annotation,
    default_registry,
)

ERROR_CATEGORIES = ("missing_labels", "wrong_labels_added", "incorrect_span")
VERDICTS = ("accepted_as_is", "corrected", "rejected")

STATUSES = ("created", "assigned", "dual_annotated", "accepted", "arbitration", "reviewed")
_ALLOWED = {
    "created": {"assigned"},
    "assigned": {"dual_annotated"},
    "dual_annotated": {"accepted", "arbitration"},
    "accepted": set(),
    "arbitration": {"reviewed"},
    "reviewed": set(),
}


class WorkflowError(Exception):
    pass


class InvalidState(WorkflowError):
    pass


class InsufficientPool(WorkflowError):
    pass


class UnknownSubmission(WorkflowError):
    pass


class InvalidGroundTruth(WorkflowError):
    pass


class InvalidReview(WorkflowError):
    pass


@dataclass(frozen=True)
class Phase:
    """Phase policy: QA sampling rate for agreed tasks and IRA threshold."""

    name: str
    qa_sampling: float
    ira_threshold: float = 0.85

    def __post_init__(self) -> None:
        if self.name not in ("pilot", "training", "production"):
            raise ValueError(f"unknown phase {self.name!r}")
        if not 0.85 <= self.ira_threshold <= 1.0:
            raise ValueError("ira_threshold must be in [0.85, 1.0]")
        bounds = {"pilot": (1.0, 1.0), "training": (0.5, 0.8),
                  "production": (0.10, 0.15)}[self.name]
        if not bounds[0] <= self.qa_sampling <= bounds[1]:
            raise ValueError(
                f"{self.name} qa_sampling {self.qa_sampling} outside {bounds}")


DEFAULT_PHASES = {
    "pilot": Phase("pilot", qa_sampling=1.0),
    "training": Phase("training", qa_sampling=0.65),
    "production": Phase("production", qa_sampling=0.12),
}


@dataclass(frozen=True)
class Transition:
    status: str
    at: int  # logical clock tick
    meta: dict = field(default_factory=dict)


@dataclass
class TaskState:
    """Current status plus the ordered transition log."""

    task_id: str
    status: str = "created"
    history: list[Transition] = field(default_factory=list)

    def advance(self, to: str, at: int, **meta) -> None:
        if to not in _ALLOWED[self.status]:
            raise InvalidState(f"{self.task_id}: {self.status} -> {to}")
        self.status = to
        self.history.append(Transition(to, at, meta))


@dataclass
class PoolMember:
    annotator_id: str
    locales: frozenset[str]
    qualified: bool = True
    load: int = 0


def assign(task: Task, pool: list[PoolMember], n: int = 2) -> list[str]:
    """Pick n distinct qualified annotators for the task's locale,
    least-loaded first, ties broken by annotator id."""
    eligible = [m for m in pool if m.qualified and task.locale in m.locales]
    if len(eligible) < n:
        raise InsufficientPool(
            f"{task.id}: need {n} qualified annotators for {task.locale}, "
            f"have {len(eligible)}")
    eligible.sort(key=lambda m: (m.load, m.annotator_id))
    chosen = eligible[:n]
    for member in chosen:
        member.load += 1
    return [m.annotator_id for m in chosen]


@dataclass(frozen=True)
class RouteDecision:
    status: str  # accepted | arbitration
    reason: str  # below_threshold | qa_sample | agreed
    draw: float | None = None


def route(state: TaskState, ira: float, phase: Phase,
          sampler: random.Random, at: int = 0) -> RouteDecision:
    """Route a dual-annotated task by its IRA score.

    Below the threshold the task always goes to arbitration. At or above
    it, the task is audited (sent to arbitration) with probability
    qa_sampling, recorded draw included; otherwise it is accepted.
    """
    if state.status != "dual_annotated":
        raise InvalidState(f"{state.task_id}: cannot route from {state.status}")
    if not 0.0 <= ira <= 1.0:
        raise ValueError(f"ira out of range: {ira}")
    if ira < phase.ira_threshold:
        decision = RouteDecision("arbitration", "below_threshold")
    elif phase.qa_sampling >= 1.0:
        decision = RouteDecision("arbitration", "qa_sample", draw=0.0)
    else:
        draw = sampler.random()
        if draw < phase.qa_sampling:
            decision = RouteDecision("arbitration", "qa_sample", draw=draw)
        else:
            decision = RouteDecision("accepted", "agreed", draw=draw)
    state.advance(decision.status, at, ira=ira, reason=decision.reason,
                  draw=decision.draw)
    return decision


def validate_review(review: Review, task: Task, corpus: Corpus,
                    registry: Registry | None = None) -> None:
    """Check rubric consistency and ground-truth validity for the prompt."""
    registry = registry or default_registry()
    if review.verdict not in VERDICTS:
        raise InvalidReview(f"unknown verdict {review.verdict!r}")
    bad = set(review.error_categories) - set(ERROR_CATEGORIES)
    if bad:
        raise InvalidReview(f"unknown error categories {sorted(bad)}")
    if (review.verdict == "accepted_as_is") != (not review.error_categories):
        raise InvalidReview(
            "error_categories must be empty exactly when verdict is accepted_as_is")
    if corpus.submission_by_id(task.id, review.chosen_submission_id) is None:
        raise UnknownSubmission(
            f"{review.chosen_submission_id} does not belong to {task.id}")
    for gt_ann in review.ground_truth:
        code = check_annotation(task.prompt, gt_ann, task.locale, registry)
        if code is not None:
            raise InvalidGroundTruth(f"{task.id}: {code}")


def record_review(state: TaskState, review: Review, task: Task, corpus: Corpus,
                  at: int = 0, registry: Registry | None = None) -> None:
    """Persist a QA review: task must be in arbitration; the review becomes
    the task's ground truth and the state moves to reviewed."""
    if state.status != "arbitration":
        raise InvalidState(f"{state.task_id}: cannot review from {state.status}")
    validate_review(review, task, corpus, registry)
    corpus.reviews[task.id] = review
    corpus.ground_truths[task.id] = GroundTruth(task.id, list(review.ground_truth),
                                                source="review")
    state.advance("reviewed", at, reviewer=review.reviewer_id,
                  verdict=review.verdict,
                  categories=sorted(review.error_categories))


@dataclass(frozen=True)
class QualityScore:
    annotator_id: str
    score: float | None
    reviewed_count: int
    qualified: bool


def quality_score(annotator_id: str, corpus: Corpus, threshold: float = 0.85,
                  min_reviewed: int = 10, corrected_weight: float = 0.0) -> QualityScore:
    """Share of reviewed tasks the annotator participated in whose chosen
    submission was theirs and accepted as-is.

    corrected_weight > 0 enables the lenient variant where a corrected
    choice still earns partial credit (default strict: corrections count
    against the annotator).
    """
    reviewed = 0
    credit = 0.0
    for task_id, review in corpus.reviews.items():
        subs = corpus.submissions.get(task_id, [])
        mine = [s for s in subs if s.annotator_id == annotator_id]
        if not mine:
            continue
        reviewed += 1
        chosen_is_mine = any(s.id == review.chosen_submission_id for s in mine)
        if chosen_is_mine and review.verdict == "accepted_as_is":
            credit += 1.0
        elif chosen_is_mine and review.verdict == "corrected":
            credit += corrected_weight
    score = credit / reviewed if reviewed else None
    qualified = score is not None and score >= threshold and reviewed >= min_reviewed
    return QualityScore(annotator_id, score, reviewed, qualified)


@dataclass(frozen=True)
class PhaseReport:
    phase: str
    verdict_counts: dict[str, dict[str, int]]  # locale -> verdict -> count
    category_histogram: dict[str, int]
    reviewed_tasks: int


def phase_report(corpus: Corpus, phase: str) -> PhaseReport:
    """Accepted/corrected/rejected counts per locale plus the rubric
    error-category histogram for one phase."""
    verdicts: dict[str, dict[str, int]] = {}
    histogram = {c: 0 for c in ERROR_CATEGORIES}
    reviewed = 0
    for task_id, review in sorted(corpus.reviews.items()):
        task = corpus.tasks.get(task_id)
        if task is None or task.phase != phase:
            continue
        reviewed += 1
        per_locale = verdicts.setdefault(task.locale, {v: 0 for v in VERDICTS})
        per_locale[review.verdict] += 1
        for category in review.error_categories:
            histogram[category] += 1
    return PhaseReport(phase, verdicts, histogram, reviewed)
