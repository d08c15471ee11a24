"""End-to-end three-phase pipeline run over a synthetic corpus: generate,
score agreement, route, review (oracle QA back-fills from generator ground
truth), and emit tabular reports.

Everything is driven by (spec, config, seed); report files are
byte-identical across runs with the same inputs.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from .agreement import annotator_matrix, match_spans, pair_agreement, task_agreement
from .config import PipelineConfig
from .metrics import MetricsReport, metrics_report
from .model import Corpus, Registry, Review, Submission, default_registry
from .rca import RcaReport, confusion_pairs, distributions, rca_report
from .store import Store, export_corpus, from_corpus
from .synth import CorpusSpec, gen_corpus
from .workflow import quality_score

REVIEWER_ID = "qa-sim"
REJECT_BELOW = 0.3


def derive_review(task_id: str, gt_annotations, submissions: list[Submission],
                  tau: float) -> Review:
    """Oracle QA review: pick the submission closest to the reference,
    restore the reference as ground truth, and tag rubric categories from
    the differences."""
    reference = Submission("gt", task_id, "gt", list(gt_annotations))

    def closeness(sub: Submission) -> float:
        return pair_agreement(reference, sub, tau).overall

    chosen = sorted(submissions, key=lambda s: (-closeness(s), s.id))[0]
    gt_sorted = sorted(gt_annotations, key=lambda a: (a.span.start, a.span.end))
    sub_sorted = sorted(chosen.annotations, key=lambda a: (a.span.start, a.span.end))

    if gt_sorted == sub_sorted:
        return Review(task_id, REVIEWER_ID, chosen.id, list(gt_annotations),
                      frozenset(), "accepted_as_is")

    categories = set()
    result = match_spans(gt_sorted, sub_sorted, tau)
    if result.unmatched_left:
        categories.add("missing_labels")
    if result.unmatched_right:
        categories.add("wrong_labels_added")
    for pair in result.pairs:
        if gt_sorted[pair.left].pii_type != sub_sorted[pair.right].pii_type:
            categories.add("wrong_labels_added")
        if pair.iou < 1.0:
            categories.add("incorrect_span")
    verdict = "rejected" if closeness(chosen) < REJECT_BELOW else "corrected"
    return Review(task_id, REVIEWER_ID, chosen.id, list(gt_annotations),
                  frozenset(categories), verdict)


@dataclass
class RoutingSummary:
    # phase -> counts of routing outcomes
    below_threshold: dict = field(default_factory=dict)
    qa_sampled: dict = field(default_factory=dict)
    accepted: dict = field(default_factory=dict)

    def record(self, phase: str, reason: str) -> None:
        bucket = {"below_threshold": self.below_threshold,
                  "qa_sample": self.qa_sampled,
                  "agreed": self.accepted}[reason]
        bucket[phase] = bucket.get(phase, 0) + 1

    def audited_fraction(self, phase: str) -> float | None:
        """QA-audit share among tasks at or above the IRA threshold."""
        sampled = self.qa_sampled.get(phase, 0)
        passed = self.accepted.get(phase, 0)
        total = sampled + passed
        return sampled / total if total else None


@dataclass
class SimulationResult:
    store: Store
    ira_by_task: dict[str, float]
    routing: RoutingSummary
    metrics: list[MetricsReport]
    rca_by_phase: dict[str, RcaReport]
    out_dir: Path | None = None


def measure_miss_rate(corpus: Corpus, phase: str) -> float | None:
    """Fraction of ground-truth annotations with no overlapping submission
    annotation; recovers the injected miss rate independently of confusion
    and jitter noise."""
    total = missed = 0
    for task_id, task in corpus.tasks.items():
        if task.phase != phase:
            continue
        gt = corpus.ground_truths.get(task_id)
        if gt is None or not gt.annotations:
            continue
        for sub in corpus.submissions.get(task_id, []):
            for ann in gt.annotations:
                total += 1
                hit = any(min(ann.span.end, other.span.end)
                          > max(ann.span.start, other.span.start)
                          for other in sub.annotations)
                missed += not hit
    return missed / total if total else None


def run_pipeline(store: Store, config: PipelineConfig, seed: int,
                 registry: Registry | None = None) -> SimulationResult:
    """Route every dual-annotated task and oracle-review the arbitration
    queue, then compute all aggregate reports."""
    registry = registry or default_registry()
    phases = config.phases()
    sampler = random.Random(f"{seed}:route")
    routing = RoutingSummary()
    ira_by_task: dict[str, float] = {}
    corpus = store.corpus

    for task_id in sorted(corpus.tasks):
        state = store.states[task_id]
        if state.status != "dual_annotated":
            continue
        task = corpus.tasks[task_id]
        ira = task_agreement(corpus.submissions[task_id], config.tau)
        ira_by_task[task_id] = ira
        decision = store.route_task(task_id, ira, phases[task.phase], sampler)
        routing.record(task.phase, decision.reason)

    for task_id in sorted(corpus.tasks):
        if store.states[task_id].status != "arbitration":
            continue
        gt = corpus.ground_truths.get(task_id)
        if gt is None:
            continue  # nothing to review against in a live corpus
        review = derive_review(task_id, gt.annotations,
                               corpus.submissions[task_id], config.tau)
        store.review_task(review)

    reports = metrics_report(corpus, negatives=config.fpr_negatives,
                             registry=registry)
    rca_by_phase: dict[str, RcaReport] = {}
    previous = None
    for phase in ("pilot", "training", "production"):
        report = rca_report(corpus, phase, baseline=previous, tau=config.tau,
                            registry=registry)
        rca_by_phase[phase] = report
        previous = report
    return SimulationResult(store, ira_by_task, routing, reports, rca_by_phase)


def simulate(spec: CorpusSpec, config: PipelineConfig | None = None,
             out_dir: str | Path | None = None,
             registry: Registry | None = None) -> SimulationResult:
    """Generate a corpus from the spec and run the full pipeline; when
    out_dir is given, write the store, the exchange file and report files."""
    registry = registry or default_registry()
    config = config or PipelineConfig()
    corpus = gen_corpus(spec, registry)
    root = Path(out_dir) / "store" if out_dir is not None else None
    store = from_corpus(corpus, root, registry)
    result = run_pipeline(store, config, spec.seed, registry)
    if out_dir is not None:
        result.out_dir = Path(out_dir)
        export_corpus(store, Path(out_dir) / "corpus.jsonl")
        write_reports(result, Path(out_dir), config, registry)
    return result


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _write_tsv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(_fmt(cell) for cell in row) + "\n")


METRICS_HEADER = ["locale", "phase", "grain", "recall", "fpr", "tp", "fn",
                  "fp", "tn", "rows", "na_rows"]


def metrics_rows(reports: list[MetricsReport]) -> list[list]:
    """Tabular phase-trend rows, one per locale x phase x grain."""
    rows = []
    for report in reports:
        for grain in ("fine", "coarse"):
            rows.append([
                report.locale or "*", report.phase or "*", grain,
                getattr(report, f"recall_{grain}"), getattr(report, f"fpr_{grain}"),
                getattr(report, f"tp_{grain}"), getattr(report, f"fn_{grain}"),
                report.fp, report.tn, report.rows, report.na_rows,
            ])
    return rows


def write_reports(result: SimulationResult, out_dir: Path,
                  config: PipelineConfig, registry: Registry) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = result.store.corpus

    _write_tsv(out_dir / "metrics.tsv", METRICS_HEADER,
               metrics_rows(result.metrics))

    _write_tsv(out_dir / "task_agreement.tsv", ["task_id", "ira"],
               [[task_id, ira] for task_id, ira in sorted(result.ira_by_task.items())])

    matrix = annotator_matrix(corpus, config.tau)
    _write_tsv(out_dir / "agreement_matrix.tsv",
               ["annotator_a", "annotator_b", "agreement", "support"],
               [[r["annotator_a"], r["annotator_b"], r["agreement"], r["support"]]
                for r in matrix.to_rows()])

    rows = []
    for phase, report in result.rca_by_phase.items():
        for category, count in report.category_counts.items():
            trend = report.trend.get(category) if report.trend else ""
            rows.append([phase, category, count,
                         ";".join(report.affected_locales.get(category, [])), trend])
    _write_tsv(out_dir / "rca.tsv",
               ["phase", "category", "count", "locales", "trend"], rows)

    rows = []
    for phase, pairs in sorted(confusion_pairs(corpus, tau=config.tau,
                                               registry=registry).items()):
        for pair in pairs:
            rows.append([phase, pair.type_a, pair.type_b, pair.count])
    _write_tsv(out_dir / "confusions.tsv",
               ["phase", "type_a", "type_b", "count"], rows)

    rows = []
    for axis in ("domain", "length_bin", "pii_category"):
        for report in distributions(corpus, axis, config.bins, registry,
                                    config.locale_groups):
            for bucket, proportion in report.proportions.items():
                rows.append([axis, report.group, bucket, report.counts[bucket],
                             proportion])
    _write_tsv(out_dir / "distributions.tsv",
               ["axis", "group", "bucket", "count", "proportion"], rows)

    annotators = sorted({s.annotator_id for subs in corpus.submissions.values()
                         for s in subs})
    rows = []
    for annotator in annotators:
        qs = quality_score(annotator, corpus, config.quality_threshold,
                           config.quality_min_reviewed,
                           config.quality_corrected_weight)
        rows.append([annotator, qs.score, qs.reviewed_count, int(qs.qualified)])
    _write_tsv(out_dir / "quality.tsv",
               ["annotator", "score", "reviewed", "qualified"], rows)

    phases = sorted(set(result.routing.below_threshold)
                    | set(result.routing.qa_sampled) | set(result.routing.accepted))
    rows = [[phase,
             result.routing.below_threshold.get(phase, 0),
             result.routing.qa_sampled.get(phase, 0),
             result.routing.accepted.get(phase, 0),
             result.routing.audited_fraction(phase)] for phase in phases]
    _write_tsv(out_dir / "routing.tsv",
               ["phase", "below_threshold", "qa_sampled", "accepted",
                "audited_fraction"], rows)
