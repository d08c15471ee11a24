"""File-backed store and the line-delimited exchange format.

The store is a single directory of JSONL collections (tasks, submissions,
ground truths, reviews) plus an append-only transition log; every write
appends one fsync-free line, atomic at the record level for desk-scale
volumes. The exchange format uses the same record schemas; export order is
deterministic (task id, then record kind) and unknown fields on imported
records are preserved through a round trip.

Record schemas (JSON object per line, comment lines start with '#'):

  task          id, locale, phase, domain, prompt
  submission    id, task_id, annotator_id, annotations
  ground_truth  task_id, source, annotations
  review        task_id, reviewer_id, chosen_submission_id, verdict,
                error_categories, ground_truth, [request_id]

Annotations are encoded as objects with start/end (scalar-value offsets,
end-exclusive), type and text.
"""
from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .model import (
    Corpus,
    GroundTruth,
    PiiModelError,
    Registry,
    Review,
    Span,
    SpanAnnotation,
    Submission,
    Task,
    check_annotation,
    default_registry,
)
from .workflow import (
    ERROR_CATEGORIES,
    Phase,
    RouteDecision,
    TaskState,
    VERDICTS,
    record_review,
    route,
)

HEADER = "# piiqa-exchange v1"

KIND_ORDER = {"task": 0, "submission": 1, "ground_truth": 2, "review": 3}

KNOWN_FIELDS = {
    "task": {"kind", "id", "locale", "phase", "domain", "prompt"},
    "submission": {"kind", "id", "task_id", "annotator_id", "annotations"},
    "ground_truth": {"kind", "task_id", "source", "annotations"},
    "review": {"kind", "task_id", "reviewer_id", "chosen_submission_id",
               "verdict", "error_categories", "ground_truth", "request_id"},
}

COLLECTION_FILES = {
    "task": "tasks.jsonl",
    "submission": "submissions.jsonl",
    "ground_truth": "ground_truths.jsonl",
    "review": "reviews.jsonl",
}
TRANSITIONS_FILE = "transitions.jsonl"


class StoreError(Exception):
    pass


class UnreadableFile(StoreError):
    pass


class UnwritableFile(StoreError):
    pass


@dataclass(frozen=True)
class Rejected:
    line: int
    kind: str | None
    reason: str


@dataclass
class ImportReport:
    loaded: Counter = field(default_factory=Counter)
    rejected: list[Rejected] = field(default_factory=list)

    @property
    def loaded_total(self) -> int:
        return sum(self.loaded.values())


def annotations_to_json(annotations: list[SpanAnnotation]) -> list[dict]:
    return [{"start": a.span.start, "end": a.span.end, "type": a.pii_type,
             "text": a.text} for a in annotations]


def annotations_from_json(raw: list) -> list[SpanAnnotation]:
    out = []
    for item in raw:
        out.append(SpanAnnotation(Span(int(item["start"]), int(item["end"])),
                                  str(item["type"]), str(item["text"])))
    return out


def record_for(obj, extras: dict | None = None) -> dict:
    """Serialize a store object to its exchange record."""
    if isinstance(obj, Task):
        record = {"kind": "task", "id": obj.id, "locale": obj.locale,
                  "phase": obj.phase, "domain": obj.domain, "prompt": obj.prompt}
    elif isinstance(obj, Submission):
        record = {"kind": "submission", "id": obj.id, "task_id": obj.task_id,
                  "annotator_id": obj.annotator_id,
                  "annotations": annotations_to_json(obj.annotations)}
    elif isinstance(obj, GroundTruth):
        record = {"kind": "ground_truth", "task_id": obj.task_id,
                  "source": obj.source,
                  "annotations": annotations_to_json(obj.annotations)}
    elif isinstance(obj, Review):
        record = {"kind": "review", "task_id": obj.task_id,
                  "reviewer_id": obj.reviewer_id,
                  "chosen_submission_id": obj.chosen_submission_id,
                  "verdict": obj.verdict,
                  "error_categories": sorted(obj.error_categories),
                  "ground_truth": annotations_to_json(obj.ground_truth)}
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")
    if extras:
        for key, value in extras.items():
            record.setdefault(key, value)
    return record


def dumps_record(record: dict) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False,
                      separators=(",", ":"))


class Store:
    """Durable collections plus derived task states and a logical clock.

    A Store with root=None lives purely in memory (used by the generator
    before export and in tests); otherwise every mutation appends to the
    corresponding collection file.
    """

    def __init__(self, root: str | Path | None = None,
                 registry: Registry | None = None) -> None:
        self.root = Path(root) if root is not None else None
        self.registry = registry or default_registry()
        self.corpus = Corpus()
        self.states: dict[str, TaskState] = {}
        self.extras: dict[tuple[str, str], dict] = {}
        self.request_index: dict[str, str] = {}
        self.clock = 0
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)
            self._load_collections()

    # ---- loading / persistence ----

    def _load_collections(self) -> None:
        for kind in ("task", "submission", "ground_truth", "review"):
            path = self.root / COLLECTION_FILES[kind]
            if not path.exists():
                continue
            for line in path.read_text(encoding="utf-8").splitlines():
                if not line or line.startswith("#"):
                    continue
                self._apply_record(json.loads(line), persist=False)
        transitions_path = self.root / TRANSITIONS_FILE
        if transitions_path.exists():
            for line in transitions_path.read_text(encoding="utf-8").splitlines():
                if not line or line.startswith("#"):
                    continue
                entry = json.loads(line)
                state = self.states.get(entry["task_id"])
                if state is not None:
                    state.status = entry["status"]
                    self.clock = max(self.clock, int(entry["at"]) + 1)
        self._reconcile_states()

    def _append(self, filename: str, record: dict) -> None:
        if self.root is None:
            return
        try:
            with open(self.root / filename, "a", encoding="utf-8") as fh:
                fh.write(dumps_record(record) + "\n")
                fh.flush()
        except OSError as exc:
            raise UnwritableFile(str(exc)) from exc

    def tick(self) -> int:
        self.clock += 1
        return self.clock

    # ---- mutations ----

    def add_task(self, task: Task, extras: dict | None = None,
                 persist: bool = True) -> None:
        self.corpus.add_task(task)
        self.states[task.id] = TaskState(task.id)
        if extras:
            self.extras[("task", task.id)] = extras
        if persist:
            self._append(COLLECTION_FILES["task"], record_for(task, extras))

    def add_submission(self, sub: Submission, extras: dict | None = None,
                       persist: bool = True) -> None:
        self.corpus.add_submission(sub)
        if extras:
            self.extras[("submission", sub.id)] = extras
        if persist:
            self._append(COLLECTION_FILES["submission"], record_for(sub, extras))
        self._derive_pre_route_state(sub.task_id)

    def set_ground_truth(self, gt: GroundTruth, extras: dict | None = None,
                         persist: bool = True) -> None:
        self.corpus.ground_truths[gt.task_id] = gt
        if extras:
            self.extras[("ground_truth", gt.task_id)] = extras
        if persist:
            self._append(COLLECTION_FILES["ground_truth"], record_for(gt, extras))

    def route_task(self, task_id: str, ira: float, phase: Phase,
                   sampler: random.Random) -> RouteDecision:
        state = self._state(task_id)
        decision = route(state, ira, phase, sampler, at=self.tick())
        self._append(TRANSITIONS_FILE, {
            "task_id": task_id, "status": state.status,
            "at": state.history[-1].at, "meta": state.history[-1].meta})
        return decision

    def review_task(self, review: Review, request_id: str | None = None) -> bool:
        """Record a review; returns False when the request id was already
        processed (idempotent replay)."""
        if request_id is not None and request_id in self.request_index:
            return False
        state = self._state(review.task_id)
        task = self.corpus.tasks[review.task_id]
        record_review(state, review, task, self.corpus, at=self.tick(),
                      registry=self.registry)
        extras = {"request_id": request_id} if request_id else None
        self._append(COLLECTION_FILES["review"], record_for(review, extras))
        self._append(COLLECTION_FILES["ground_truth"],
                     record_for(self.corpus.ground_truths[review.task_id]))
        self._append(TRANSITIONS_FILE, {
            "task_id": review.task_id, "status": state.status,
            "at": state.history[-1].at, "meta": state.history[-1].meta})
        if request_id is not None:
            self.request_index[request_id] = review.task_id
        return True

    def _state(self, task_id: str) -> TaskState:
        state = self.states.get(task_id)
        if state is None:
            raise KeyError(f"unknown task {task_id}")
        return state

    # ---- state derivation ----

    def _derive_pre_route_state(self, task_id: str) -> None:
        """Submissions drive created -> assigned -> dual_annotated."""
        state = self._state(task_id)
        n = len(self.corpus.submissions.get(task_id, []))
        if state.status == "created" and n >= 1:
            state.status = "assigned"
        if state.status == "assigned" and n >= 2:
            state.status = "dual_annotated"

    def _reconcile_states(self) -> None:
        for task_id, state in self.states.items():
            if state.status in ("created", "assigned"):
                self._derive_pre_route_state(task_id)
            if task_id in self.corpus.reviews:
                state.status = "reviewed"

    def _apply_record(self, record: dict, persist: bool) -> None:
        kind = record.get("kind")
        extras = {k: v for k, v in record.items()
                  if k not in KNOWN_FIELDS.get(kind, set())}
        if kind == "task":
            task = Task(record["id"], record["locale"], record["phase"],
                        record["domain"], record["prompt"])
            self.add_task(task, extras or None, persist=persist)
        elif kind == "submission":
            sub = Submission(record["id"], record["task_id"], record["annotator_id"],
                             annotations_from_json(record["annotations"]))
            self.add_submission(sub, extras or None, persist=persist)
        elif kind == "ground_truth":
            gt = GroundTruth(record["task_id"],
                             annotations_from_json(record["annotations"]),
                             source=record.get("source", "review"))
            self.set_ground_truth(gt, extras or None, persist=persist)
        elif kind == "review":
            review = Review(record["task_id"], record["reviewer_id"],
                            record["chosen_submission_id"],
                            annotations_from_json(record["ground_truth"]),
                            frozenset(record.get("error_categories", [])),
                            record["verdict"])
            self.corpus.reviews[review.task_id] = review
            self.corpus.ground_truths[review.task_id] = GroundTruth(
                review.task_id, list(review.ground_truth), source="review")
            request_id = record.get("request_id")
            if request_id:
                self.request_index[request_id] = review.task_id
            if persist:
                self._append(COLLECTION_FILES["review"], record_for(review, extras or None))
            state = self.states.get(review.task_id)
            if state is not None:
                state.status = "reviewed"
        else:
            raise StoreError(f"unknown record kind {kind!r}")


def from_corpus(corpus: Corpus, root: str | Path | None = None,
                registry: Registry | None = None) -> Store:
    """Build a store (optionally file-backed) from an in-memory corpus."""
    store = Store(root, registry)
    for task_id in sorted(corpus.tasks):
        store.add_task(corpus.tasks[task_id])
    for task_id in sorted(corpus.submissions):
        for sub in corpus.submissions[task_id]:
            store.add_submission(sub)
    for task_id in sorted(corpus.ground_truths):
        store.set_ground_truth(corpus.ground_truths[task_id])
    for task_id in sorted(corpus.reviews):
        review = corpus.reviews[task_id]
        store.corpus.reviews[task_id] = review
        store._append(COLLECTION_FILES["review"], record_for(review))
        store.states[task_id].status = "reviewed"
    return store


# ---- exchange import/export ----

def _validate_annotations(prompt: str, locale: str, raw: list,
                          registry: Registry) -> tuple[list[SpanAnnotation] | None, str | None]:
    """Parse, canonicalize and validate an annotation list; returns
    (annotations, None) or (None, reason)."""
    try:
        annotations = annotations_from_json(raw)
    except (KeyError, TypeError, ValueError) as exc:
        return None, f"malformed annotations: {exc}"
    canonical = []
    for ann in annotations:
        try:
            pii_type = registry.canonical_type(ann.pii_type)
        except PiiModelError:
            return None, f"UnknownLabel: {ann.pii_type!r}"
        ann = SpanAnnotation(ann.span, pii_type, ann.text)
        code = check_annotation(prompt, ann, locale, registry)
        if code is not None:
            return None, code
        canonical.append(ann)
    return canonical, None


def import_corpus(store: Store, path: str | Path) -> ImportReport:
    """Load an exchange file; valid records are stored, invalid ones are
    rejected with their line number and reason (partial import permitted)."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UnreadableFile(str(exc)) from exc

    report = ImportReport()
    parsed: list[tuple[int, dict]] = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            report.rejected.append(Rejected(line_no, None, f"invalid json: {exc.msg}"))
            continue
        kind = record.get("kind")
        if kind not in KIND_ORDER:
            report.rejected.append(Rejected(line_no, kind, f"unknown kind {kind!r}"))
            continue
        parsed.append((line_no, record))

    # tasks first, then submissions, then ground truths, then reviews
    parsed.sort(key=lambda item: (KIND_ORDER[item[1]["kind"]], item[0]))
    for line_no, record in parsed:
        reason = _import_one(store, record)
        if reason is None:
            report.loaded[record["kind"]] += 1
        else:
            report.rejected.append(Rejected(line_no, record["kind"], reason))
    return report


def _import_one(store: Store, record: dict) -> str | None:
    kind = record["kind"]
    registry = store.registry
    corpus = store.corpus
    try:
        if kind == "task":
            for key in ("id", "locale", "phase", "domain", "prompt"):
                if key not in record:
                    return f"missing field {key!r}"
            if record["id"] in corpus.tasks:
                return f"conflict: duplicate task id {record['id']!r}"
            try:
                registry.resolve_locale(record["locale"])
            except PiiModelError:
                return f"unknown locale {record['locale']!r}"
            if record["phase"] not in ("pilot", "training", "production"):
                return f"unknown phase {record['phase']!r}"
            store._apply_record(record, persist=True)
            return None

        task_id = record.get("task_id")
        if task_id not in corpus.tasks:
            return f"unknown task {task_id!r}"
        task = corpus.tasks[task_id]

        if kind == "submission":
            for key in ("id", "annotator_id", "annotations"):
                if key not in record:
                    return f"missing field {key!r}"
            if any(s.id == record["id"] for s in corpus.submissions[task_id]):
                return f"conflict: duplicate submission id {record['id']!r}"
            annotations, reason = _validate_annotations(
                task.prompt, task.locale, record["annotations"], registry)
            if reason:
                return reason
            record = dict(record, annotations=annotations_to_json(annotations))
            store._apply_record(record, persist=True)
            return None

        if kind == "ground_truth":
            annotations, reason = _validate_annotations(
                task.prompt, task.locale, record.get("annotations", []), registry)
            if reason:
                return reason
            if task_id in corpus.ground_truths and \
                    corpus.ground_truths[task_id].source == "review":
                return "conflict: ground truth already established by review"
            record = dict(record, annotations=annotations_to_json(annotations))
            store._apply_record(record, persist=True)
            return None

        # review
        for key in ("reviewer_id", "chosen_submission_id", "verdict"):
            if key not in record:
                return f"missing field {key!r}"
        if task_id in corpus.reviews:
            return f"conflict: task {task_id!r} already reviewed"
        if record["verdict"] not in VERDICTS:
            return f"unknown verdict {record['verdict']!r}"
        categories = set(record.get("error_categories", []))
        if categories - set(ERROR_CATEGORIES):
            return f"unknown error categories {sorted(categories - set(ERROR_CATEGORIES))}"
        if (record["verdict"] == "accepted_as_is") != (not categories):
            return "error_categories inconsistent with verdict"
        if corpus.submission_by_id(task_id, record["chosen_submission_id"]) is None:
            return f"unknown submission {record['chosen_submission_id']!r}"
        annotations, reason = _validate_annotations(
            task.prompt, task.locale, record.get("ground_truth", []), registry)
        if reason:
            return reason
        record = dict(record, ground_truth=annotations_to_json(annotations))
        store._apply_record(record, persist=True)
        return None
    except (PiiModelError, StoreError, KeyError, ValueError) as exc:
        return f"{type(exc).__name__}: {exc}"


def export_corpus(store: Store, path: str | Path,
                  locale: str | None = None, phase: str | None = None) -> int:
    """Write the store's logical content as an exchange file in
    deterministic order; returns the number of records written."""
    corpus = store.corpus

    def keep(task: Task) -> bool:
        return ((locale is None or task.locale == locale)
                and (phase is None or task.phase == phase))

    entries: list[tuple[tuple, dict]] = []
    for task_id in sorted(corpus.tasks):
        task = corpus.tasks[task_id]
        if not keep(task):
            continue
        entries.append(((task_id, 0, ""),
                        record_for(task, store.extras.get(("task", task_id)))))
        for sub in sorted(corpus.submissions[task_id], key=lambda s: s.id):
            entries.append(((task_id, 1, sub.id),
                            record_for(sub, store.extras.get(("submission", sub.id)))))
        gt = corpus.ground_truths.get(task_id)
        if gt is not None:
            entries.append(((task_id, 2, ""),
                            record_for(gt, store.extras.get(("ground_truth", task_id)))))
        review = corpus.reviews.get(task_id)
        if review is not None:
            extras = dict(store.extras.get(("review", task_id), {}))
            request_id = next((rid for rid, tid in store.request_index.items()
                               if tid == task_id), None)
            if request_id:
                extras.setdefault("request_id", request_id)
            entries.append(((task_id, 3, ""), record_for(review, extras or None)))

    entries.sort(key=lambda item: item[0])
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(HEADER + "\n")
            for _, record in entries:
                fh.write(dumps_record(record) + "\n")
    except OSError as exc:
        raise UnwritableFile(str(exc)) from exc
    return len(entries)


def logical_content(store: Store) -> dict:
    """Canonical serialization of the store's logical content, used to
    compare stores for round-trip identity."""
    corpus = store.corpus
    return {
        "tasks": {tid: record_for(t) for tid, t in sorted(corpus.tasks.items())},
        "submissions": {
            tid: [record_for(s) for s in sorted(subs, key=lambda s: s.id)]
            for tid, subs in sorted(corpus.submissions.items())},
        "ground_truths": {tid: record_for(g)
                          for tid, g in sorted(corpus.ground_truths.items())},
        "reviews": {tid: record_for(r)
                    for tid, r in sorted(corpus.reviews.items())},
    }
