"""Ground-truth comparison and accuracy metrics.

Each (task, submission) pair with an established ground truth is one row.
Rows are compared on canonical PII type sequences ordered by span position:
fine-grained correctness requires the exact sequence (order and count),
coarse-grained requires at least one common type. Recall is computed over
rows whose ground truth contains PII; FPR over rows whose ground truth is
empty (the only unambiguous row-level negatives — an alternative that
counts any row introducing a spurious type as a false positive is available
via ``negatives="all_rows"``). Undefined ratios are reported as None rather
than 0 to distinguish "no data" from a perfect score.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Literal

from .model import Corpus, GroundTruth, Registry, SpanAnnotation, Submission, default_registry

Grain = Literal["fine", "coarse"]

AGREEMENT = "agreement"
DISAGREEMENT = "disagreement"
NOT_REVIEWED = "not_reviewed"


@dataclass(frozen=True)
class RowVerdict:
    task_id: str
    annotator_id: str | None
    taxonomy: str  # agreement | disagreement | not_reviewed
    fine_correct: bool | None = None
    coarse_correct: bool | None = None
    gt_count: int | None = None
    sub_count: int | None = None
    introduces_extra_type: bool | None = None

    @property
    def reviewed(self) -> bool:
        return self.taxonomy != NOT_REVIEWED


@dataclass(frozen=True)
class MetricsReport:
    locale: str | None
    phase: str | None
    rows: int
    na_rows: int
    recall_fine: float | None
    recall_coarse: float | None
    fpr_fine: float | None
    fpr_coarse: float | None
    tp_fine: int
    fn_fine: int
    tp_coarse: int
    fn_coarse: int
    fp: int
    tn: int


def type_sequence(source: Submission | GroundTruth | Iterable[SpanAnnotation],
                  registry: Registry | None = None) -> list[str]:
    """Canonical PII types ordered by span start (ties by end).

    Empty list means "No PII Found".
    """
    registry = registry or default_registry()
    annotations = getattr(source, "annotations", source)
    ordered = sorted(annotations, key=lambda a: (a.span.start, a.span.end))
    return [registry.canonical_type(a.pii_type) for a in ordered]


def row_correct_fine(gt_seq: list[str], sub_seq: list[str]) -> bool:
    """Exact order and count match of the type sequences."""
    return gt_seq == sub_seq


def row_correct_coarse(gt_seq: list[str], sub_seq: list[str]) -> bool:
    """At least one type in common (as multisets); two empty rows agree."""
    if not gt_seq and not sub_seq:
        return True
    return bool(Counter(gt_seq) & Counter(sub_seq))


def classify_row(gt: GroundTruth | None, sub: Submission,
                 registry: Registry | None = None) -> RowVerdict:
    """Classify one submission against the task's ground truth (if any)."""
    if gt is None:
        return RowVerdict(sub.task_id, sub.annotator_id, NOT_REVIEWED)
    registry = registry or default_registry()
    gt_seq = type_sequence(gt, registry)
    sub_seq = type_sequence(sub, registry)
    fine = row_correct_fine(gt_seq, sub_seq)
    extra = bool(Counter(sub_seq) - Counter(gt_seq))
    return RowVerdict(
        task_id=sub.task_id,
        annotator_id=sub.annotator_id,
        taxonomy=AGREEMENT if fine else DISAGREEMENT,
        fine_correct=fine,
        coarse_correct=row_correct_coarse(gt_seq, sub_seq),
        gt_count=len(gt_seq),
        sub_count=len(sub_seq),
        introduces_extra_type=extra,
    )


def _reviewed(rows: Iterable[RowVerdict]) -> list[RowVerdict]:
    return [r for r in rows if r.reviewed]


def recall(rows: Iterable[RowVerdict], grain: Grain = "fine") -> float | None:
    """TP / (TP + FN) over rows whose ground truth contains PII."""
    tp = fn = 0
    for row in _reviewed(rows):
        if not row.gt_count:
            continue
        correct = row.fine_correct if grain == "fine" else row.coarse_correct
        if correct:
            tp += 1
        else:
            fn += 1
    return tp / (tp + fn) if tp + fn else None


def fpr(rows: Iterable[RowVerdict], grain: Grain = "fine",
        negatives: Literal["gt_empty", "all_rows"] = "gt_empty") -> float | None:
    """FP / (FP + TN) over negative rows.

    Default negatives are rows with empty ground truth; a row is a false
    positive when the annotator reported PII anyway. With
    negatives="all_rows" every row counts, and a row is a false positive
    when the submission introduces any type absent from the ground truth
    multiset. Row-level FPR does not depend on the grain; the parameter is
    accepted so reports can carry both columns uniformly.
    """
    del grain
    fp = tn = 0
    for row in _reviewed(rows):
        if negatives == "gt_empty":
            if row.gt_count:
                continue
            if row.sub_count:
                fp += 1
            else:
                tn += 1
        else:
            if row.introduces_extra_type:
                fp += 1
            else:
                tn += 1
    return fp / (fp + tn) if fp + tn else None


def corpus_rows(corpus: Corpus, registry: Registry | None = None) -> list[RowVerdict]:
    """One RowVerdict per (task, submission), in deterministic order."""
    registry = registry or default_registry()
    rows = []
    for task_id in sorted(corpus.tasks):
        gt = corpus.ground_truths.get(task_id)
        for sub in corpus.submissions.get(task_id, []):
            rows.append(classify_row(gt, sub, registry))
    return rows


def metrics_report(
    corpus: Corpus,
    group_by: tuple[str, ...] = ("locale", "phase"),
    negatives: Literal["gt_empty", "all_rows"] = "gt_empty",
    registry: Registry | None = None,
) -> list[MetricsReport]:
    """Per-group recall/FPR at both grains plus the underlying counts.

    group_by may contain "locale" and/or "phase"; an empty tuple yields a
    single corpus-wide report.
    """
    unknown = set(group_by) - {"locale", "phase"}
    if unknown:
        raise ValueError(f"unknown grouping keys: {sorted(unknown)}")
    registry = registry or default_registry()

    grouped: dict[tuple[str | None, str | None], list[RowVerdict]] = {}
    for task_id in sorted(corpus.tasks):
        task = corpus.tasks[task_id]
        key = (task.locale if "locale" in group_by else None,
               task.phase if "phase" in group_by else None)
        gt = corpus.ground_truths.get(task_id)
        bucket = grouped.setdefault(key, [])
        for sub in corpus.submissions.get(task_id, []):
            bucket.append(classify_row(gt, sub, registry))

    reports = []
    for key in sorted(grouped, key=lambda k: (k[0] or "", k[1] or "")):
        rows = grouped[key]
        reviewed = _reviewed(rows)
        tp_f = sum(1 for r in reviewed if r.gt_count and r.fine_correct)
        fn_f = sum(1 for r in reviewed if r.gt_count and not r.fine_correct)
        tp_c = sum(1 for r in reviewed if r.gt_count and r.coarse_correct)
        fn_c = sum(1 for r in reviewed if r.gt_count and not r.coarse_correct)
        if negatives == "gt_empty":
            fp = sum(1 for r in reviewed if not r.gt_count and r.sub_count)
            tn = sum(1 for r in reviewed if not r.gt_count and not r.sub_count)
        else:
            fp = sum(1 for r in reviewed if r.introduces_extra_type)
            tn = sum(1 for r in reviewed if not r.introduces_extra_type)
        reports.append(MetricsReport(
            locale=key[0],
            phase=key[1],
            rows=len(rows),
            na_rows=len(rows) - len(reviewed),
            recall_fine=recall(rows, "fine"),
            recall_coarse=recall(rows, "coarse"),
            fpr_fine=fpr(rows, "fine", negatives),
            fpr_coarse=fpr(rows, "coarse", negatives),
            tp_fine=tp_f, fn_fine=fn_f, tp_coarse=tp_c, fn_coarse=fn_c,
            fp=fp, tn=tn,
        ))
    return reports
