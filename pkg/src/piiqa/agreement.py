"""Pairwise and per-task inter-annotator agreement over span annotations.

A pair of submissions is scored on three components — span (IoU of matched
spans), type (matched spans with equal canonical type) and text (matched
spans with equal normalized text) — each divided by max(|A|, |B|) so that
missing and extra annotations penalize both sides symmetrically. The task
score is the arithmetic mean of all pairwise overall scores.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .model import Corpus, Span, SpanAnnotation, Submission, normalize_text

DEFAULT_TAU = 0.5


class AgreementError(Exception):
    pass


class TaskMismatch(AgreementError):
    pass


class InsufficientSubmissions(AgreementError):
    pass


@dataclass(frozen=True)
class MatchedPair:
    left: int
    right: int
    iou: float


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple[MatchedPair, ...]
    unmatched_left: tuple[int, ...]
    unmatched_right: tuple[int, ...]


@dataclass(frozen=True)
class AgreementBreakdown:
    span_score: float
    type_score: float
    text_score: float

    @property
    def overall(self) -> float:
        return (self.span_score + self.type_score + self.text_score) / 3.0


def overlap_1d(a: Span, b: Span) -> int:
    """Number of character indices shared by two spans."""
    return max(0, min(a.end, b.end) - max(a.start, b.start))


def iou(a: Span, b: Span) -> float:
    """Intersection over union of the spans' character index sets."""
    inter = overlap_1d(a, b)
    union = len(a) + len(b) - inter
    return inter / union if union > 0 else 0.0


def match_spans(
    left: list[SpanAnnotation],
    right: list[SpanAnnotation],
    tau: float = DEFAULT_TAU,
) -> MatchResult:
    """One-to-one greedy matching of two annotation lists by descending IoU.

    Only candidate pairs with iou >= tau are considered. Ties are broken by
    (left start, left end, right start, right end) ascending, which makes the
    matched set independent of input order for distinct spans.
    """
    if not 0 < tau <= 1:
        raise ValueError(f"tau must be in (0, 1], got {tau}")
    candidates = []
    for i, a in enumerate(left):
        for j, b in enumerate(right):
            score = iou(a.span, b.span)
            if score >= tau:
                candidates.append((-score, a.span.start, a.span.end,
                                   b.span.start, b.span.end, i, j))
    candidates.sort()

    used_left: set[int] = set()
    used_right: set[int] = set()
    pairs = []
    for neg_score, _, _, _, _, i, j in candidates:
        if i in used_left or j in used_right:
            continue
        used_left.add(i)
        used_right.add(j)
        pairs.append(MatchedPair(i, j, -neg_score))
    return MatchResult(
        pairs=tuple(pairs),
        unmatched_left=tuple(i for i in range(len(left)) if i not in used_left),
        unmatched_right=tuple(j for j in range(len(right)) if j not in used_right),
    )


def pair_agreement(
    sub_a: Submission,
    sub_b: Submission,
    tau: float = DEFAULT_TAU,
) -> AgreementBreakdown:
    """Agreement breakdown between two submissions for the same task.

    Two empty submissions ("No PII Found" on both sides) agree fully; an
    empty submission against a non-empty one scores zero on all components.
    """
    if sub_a.task_id != sub_b.task_id:
        raise TaskMismatch(f"{sub_a.task_id} vs {sub_b.task_id}")
    a, b = sub_a.annotations, sub_b.annotations
    if not a and not b:
        return AgreementBreakdown(1.0, 1.0, 1.0)
    if not a or not b:
        return AgreementBreakdown(0.0, 0.0, 0.0)

    denom = max(len(a), len(b))
    result = match_spans(a, b, tau)
    span_score = sum(p.iou for p in result.pairs) / denom
    type_hits = sum(1 for p in result.pairs
                    if a[p.left].pii_type == b[p.right].pii_type)
    text_hits = sum(1 for p in result.pairs
                    if normalize_text(a[p.left].text) == normalize_text(b[p.right].text))
    return AgreementBreakdown(span_score, type_hits / denom, text_hits / denom)


def task_agreement(submissions: list[Submission], tau: float = DEFAULT_TAU) -> float:
    """Mean of pairwise overall agreement over all unordered submission pairs."""
    if len(submissions) < 2:
        raise InsufficientSubmissions(
            f"need >= 2 submissions, got {len(submissions)}")
    overalls = []
    for i in range(len(submissions)):
        for j in range(i + 1, len(submissions)):
            overalls.append(pair_agreement(submissions[i], submissions[j], tau).overall)
    return sum(overalls) / len(overalls)


@dataclass
class AgreementMatrix:
    """Mean pairwise agreement between annotators over their shared tasks.

    Cells are only defined where support (shared-task count) is positive;
    absent cells are reported as None, not zero.
    """

    annotators: list[str] = field(default_factory=list)
    _sums: dict[tuple[str, str], float] = field(default_factory=dict)
    _support: dict[tuple[str, str], int] = field(default_factory=dict)

    @staticmethod
    def _key(a: str, b: str) -> tuple[str, str]:
        return (a, b) if a <= b else (b, a)

    def record(self, a: str, b: str, overall: float) -> None:
        key = self._key(a, b)
        self._sums[key] = self._sums.get(key, 0.0) + overall
        self._support[key] = self._support.get(key, 0) + 1

    def cell(self, a: str, b: str) -> float | None:
        key = self._key(a, b)
        if key not in self._support:
            return None
        return self._sums[key] / self._support[key]

    def support(self, a: str, b: str) -> int:
        return self._support.get(self._key(a, b), 0)

    def to_rows(self) -> list[dict]:
        rows = []
        for a, b in sorted(self._support):
            rows.append({
                "annotator_a": a,
                "annotator_b": b,
                "agreement": self._sums[(a, b)] / self._support[(a, b)],
                "support": self._support[(a, b)],
            })
        return rows


def annotator_matrix(corpus: Corpus, tau: float = DEFAULT_TAU) -> AgreementMatrix:
    """Aggregate pairwise agreement into an annotator-by-annotator matrix.

    The diagonal records each annotator's self-agreement (1.0 by definition)
    with support equal to the number of tasks they annotated.
    """
    matrix = AgreementMatrix()
    seen: set[str] = set()
    for task_id in sorted(corpus.submissions):
        subs = corpus.submissions[task_id]
        for sub in subs:
            if sub.annotator_id not in seen:
                seen.add(sub.annotator_id)
                matrix.annotators.append(sub.annotator_id)
            matrix.record(sub.annotator_id, sub.annotator_id, 1.0)
        for i in range(len(subs)):
            for j in range(i + 1, len(subs)):
                overall = pair_agreement(subs[i], subs[j], tau).overall
                matrix.record(subs[i].annotator_id, subs[j].annotator_id, overall)
    matrix.annotators.sort()
    return matrix
