"""Root-cause analysis of annotation disagreements, confusion-pair mining,
prompt length binning and dataset distribution reports.

Disagreement categories follow the closed taxonomy used in weekly RCA:
PII_TYPE, PII_SPAN, PII_TEXT, NUMBER_OF_PIIS, SAME_PII_ORDER. A submission
identical to the ground truth maps to the empty set; any row that is not
fine-grained correct maps to at least one category.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

from .agreement import DEFAULT_TAU, match_spans, overlap_1d
from .metrics import type_sequence
from .model import (
    Corpus,
    GroundTruth,
    Registry,
    Submission,
    default_registry,
    normalize_text,
)

log = logging.getLogger(__name__)

RCA_CATEGORIES = ("PII_TYPE", "PII_SPAN", "PII_TEXT", "NUMBER_OF_PIIS", "SAME_PII_ORDER")

AXES = ("domain", "length_bin", "pii_category")


class RcaError(Exception):
    pass


class PromptMismatch(RcaError):
    pass


class UnknownAxis(RcaError):
    pass


def categorize_disagreement(gt: GroundTruth, sub: Submission,
                            tau: float = DEFAULT_TAU,
                            registry: Registry | None = None) -> frozenset[str]:
    """Categories of disagreement between a submission and the ground truth.

    Span matching uses the same one-to-one IoU matcher as agreement scoring.
    PII_SPAN covers imperfectly aligned matches, overlapping pairs that fell
    below tau, and (when counts agree) annotations with no counterpart at
    all, so that the result is empty exactly when the two annotation sets
    are identical after normalization.
    """
    if gt.task_id != sub.task_id:
        raise PromptMismatch(f"{gt.task_id} vs {sub.task_id}")
    registry = registry or default_registry()
    left = sorted(gt.annotations, key=lambda a: (a.span.start, a.span.end))
    right = sorted(sub.annotations, key=lambda a: (a.span.start, a.span.end))

    categories: set[str] = set()
    if len(left) != len(right):
        categories.add("NUMBER_OF_PIIS")

    gt_seq = type_sequence(left, registry)
    sub_seq = type_sequence(right, registry)
    if Counter(gt_seq) == Counter(sub_seq) and gt_seq != sub_seq:
        categories.add("SAME_PII_ORDER")

    result = match_spans(left, right, tau)
    matched_keys = {(p.left, p.right) for p in result.pairs}
    for pair in result.pairs:
        a, b = left[pair.left], right[pair.right]
        if registry.canonical_type(a.pii_type) != registry.canonical_type(b.pii_type):
            categories.add("PII_TYPE")
        if pair.iou < 1.0:
            categories.add("PII_SPAN")
        if normalize_text(a.text) != normalize_text(b.text):
            categories.add("PII_TEXT")

    # overlapping pairs that fell below the matching threshold
    for i in result.unmatched_left:
        for j, b in enumerate(right):
            if (i, j) not in matched_keys and overlap_1d(left[i].span, b.span) > 0:
                categories.add("PII_SPAN")
    for j in result.unmatched_right:
        for i, a in enumerate(left):
            if (i, j) not in matched_keys and overlap_1d(a.span, right[j].span) > 0:
                categories.add("PII_SPAN")

    # equal counts but some annotation has no counterpart: pure span drift
    if len(left) == len(right) and (result.unmatched_left or result.unmatched_right):
        categories.add("PII_SPAN")

    return frozenset(categories)


@dataclass(frozen=True)
class ConfusionPair:
    type_a: str
    type_b: str
    count: int
    phase: str

    def __post_init__(self) -> None:
        if self.type_a == self.type_b:
            raise ValueError("confusion pair must join two distinct types")


def confusion_pairs(corpus: Corpus, top_k: int | None = None,
                    tau: float = DEFAULT_TAU,
                    registry: Registry | None = None) -> dict[str, list[ConfusionPair]]:
    """Mine type mismatches on matched spans between submissions and ground
    truth, keyed as unordered pairs and ranked per phase by count (ties
    alphabetical)."""
    registry = registry or default_registry()
    counts: dict[str, Counter] = {}
    for task_id in sorted(corpus.tasks):
        gt = corpus.ground_truths.get(task_id)
        if gt is None:
            continue
        task = corpus.tasks[task_id]
        gt_anns = gt.annotations
        for sub in corpus.submissions.get(task_id, []):
            result = match_spans(gt_anns, sub.annotations, tau)
            for pair in result.pairs:
                a = registry.canonical_type(gt_anns[pair.left].pii_type)
                b = registry.canonical_type(sub.annotations[pair.right].pii_type)
                if a != b:
                    key = tuple(sorted((a, b)))
                    counts.setdefault(task.phase, Counter())[key] += 1

    ranked: dict[str, list[ConfusionPair]] = {}
    for phase, counter in counts.items():
        pairs = [ConfusionPair(a, b, n, phase) for (a, b), n in counter.items()]
        pairs.sort(key=lambda p: (-p.count, p.type_a, p.type_b))
        ranked[phase] = pairs[:top_k] if top_k else pairs
    return ranked


@dataclass(frozen=True)
class LocaleBins:
    bounds: tuple[int, int, int, int] = (30, 240, 1200, 3500)
    count_mode: str = "words"  # words | chars

    def __post_init__(self) -> None:
        if list(self.bounds) != sorted(set(self.bounds)):
            raise ValueError("bin boundaries must be strictly increasing")
        if self.count_mode not in ("words", "chars"):
            raise ValueError(f"unknown count mode {self.count_mode!r}")


@dataclass(frozen=True)
class LengthBinConfig:
    """Word-count boundaries per bin; per-locale overrides allow e.g.
    character-count bins for zh locales."""

    default: LocaleBins = LocaleBins()
    overrides: dict = field(default_factory=dict)  # locale code -> LocaleBins

    def for_locale(self, locale: str) -> LocaleBins:
        return self.overrides.get(locale, self.default)


BIN_LABELS = ("S", "M", "L", "XL")


def prompt_length(prompt: str, mode: str = "words") -> int:
    if mode == "chars":
        return sum(1 for ch in prompt if not ch.isspace())
    return len(prompt.split())


def length_bin(prompt: str, cfg: LengthBinConfig | None = None,
               locale: str = "") -> str:
    """Assign a prompt to its S/M/L/XL length bin.

    Lengths above the XL upper bound clamp to XL (logged as a warning).
    """
    bins = (cfg or LengthBinConfig()).for_locale(locale)
    n = prompt_length(prompt, bins.count_mode)
    s_max, l_min, xl_min, xl_max = bins.bounds
    if n > xl_max:
        log.warning("prompt length %d above XL bound %d (locale=%s); clamped",
                    n, xl_max, locale or "?")
        return "XL"
    if n < s_max:
        return "S"
    if n < l_min:
        return "M"
    if n < xl_min:
        return "L"
    return "XL"


@dataclass(frozen=True)
class DistributionReport:
    axis: str
    group: str
    counts: dict[str, int]
    proportions: dict[str, float]
    total: int


def distributions(corpus: Corpus, axis: str,
                  bin_cfg: LengthBinConfig | None = None,
                  registry: Registry | None = None,
                  groups: dict | None = None) -> list[DistributionReport]:
    """Normalized bucket proportions per locale group for one axis.

    domain and length_bin count tasks; pii_category counts ground-truth
    annotations mapped through the 18-category merge. groups overrides the
    registry's locale merge map per locale code.
    """
    if axis not in AXES:
        raise UnknownAxis(axis)
    registry = registry or default_registry()
    counts: dict[str, Counter] = {}
    for task_id in sorted(corpus.tasks):
        task = corpus.tasks[task_id]
        group = (groups or {}).get(task.locale) or registry.locale_group(task.locale)
        bucket_counts = counts.setdefault(group, Counter())
        if axis == "domain":
            bucket_counts[task.domain] += 1
        elif axis == "length_bin":
            bucket_counts[length_bin(task.prompt, bin_cfg, task.locale)] += 1
        else:
            gt = corpus.ground_truths.get(task_id)
            if gt is None:
                continue
            for ann in gt.annotations:
                category = registry.category_of(registry.canonical_type(ann.pii_type))
                bucket_counts[category] += 1

    reports = []
    for group in sorted(counts):
        bucket_counts = counts[group]
        total = sum(bucket_counts.values())
        if total == 0:
            continue
        proportions = {k: v / total for k, v in sorted(bucket_counts.items())}
        reports.append(DistributionReport(axis, group, dict(sorted(bucket_counts.items())),
                                          proportions, total))
    return reports


@dataclass(frozen=True)
class RcaReport:
    window: str
    reviewed_tasks: int
    category_counts: dict[str, int]
    confusion: list[ConfusionPair]
    affected_locales: dict[str, list[str]]  # category -> locales
    trend: dict[str, int] | None  # category -> sign vs baseline window
    empty: bool = False


def rca_report(corpus: Corpus, window: str,
               baseline: RcaReport | None = None,
               tau: float = DEFAULT_TAU,
               registry: Registry | None = None) -> RcaReport:
    """Aggregate disagreement categories over reviewed tasks of one phase
    window; optionally compare against a previous window's report."""
    registry = registry or default_registry()
    category_counts = {c: 0 for c in RCA_CATEGORIES}
    affected: dict[str, set[str]] = {c: set() for c in RCA_CATEGORIES}
    reviewed = 0
    for task_id in sorted(corpus.tasks):
        task = corpus.tasks[task_id]
        if task.phase != window:
            continue
        gt = corpus.ground_truths.get(task_id)
        if gt is None:
            continue
        reviewed += 1
        task_categories: set[str] = set()
        for sub in corpus.submissions.get(task_id, []):
            task_categories |= categorize_disagreement(gt, sub, tau, registry)
        for category in task_categories:
            category_counts[category] += 1
            affected[category].add(task.locale)

    if reviewed == 0:
        log.warning("rca window %r contains no reviewed tasks", window)

    confusion = confusion_pairs(corpus, tau=tau, registry=registry).get(window, [])
    trend = None
    if baseline is not None:
        trend = {}
        for category in RCA_CATEGORIES:
            delta = category_counts[category] - baseline.category_counts.get(category, 0)
            trend[category] = (delta > 0) - (delta < 0)
    return RcaReport(
        window=window,
        reviewed_tasks=reviewed,
        category_counts=category_counts,
        confusion=confusion,
        affected_locales={c: sorted(s) for c, s in affected.items() if s},
        trend=trend,
        empty=reviewed == 0,
    )
