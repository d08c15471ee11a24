"""Canonical domain model: locales, the PII type registry, label
normalization, category mapping, and span-annotation validity rules.

All reference data (locales, types, aliases, per-locale registry entries,
format templates) is loaded from tab-separated files under ``data/`` and is
immutable after load. Character offsets throughout the pipeline count
Unicode scalar values (Python code points), end-exclusive.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

DATA_DIR = Path(__file__).parent / "data"

LOCALE_CODE_RE = re.compile(r"^[a-z]{2}-[A-Z]{2,3}$")

# document domains used across the corpus (balanced mix expected)
DOMAINS = ("finance", "health", "it", "insurance", "media", "retail", "travel")

PHASE_NAMES = ("pilot", "training", "production")


class PiiModelError(Exception):
    """Base for reference-data and validation errors."""


class UnknownLabel(PiiModelError):
    pass


class UnknownLocale(PiiModelError):
    pass


class AnnotationInvalid(PiiModelError):
    """Raised by validate_annotation; ``code`` identifies the violation."""

    code = "invalid"


class SpanOutOfBounds(AnnotationInvalid):
    code = "SpanOutOfBounds"


class TextMismatch(AnnotationInvalid):
    code = "TextMismatch"


class TypeNotInLocale(AnnotationInvalid):
    code = "TypeNotInLocale"


@dataclass(frozen=True)
class Locale:
    code: str
    group: str

    def __post_init__(self) -> None:
        if not LOCALE_CODE_RE.match(self.code):
            raise UnknownLocale(f"malformed locale code: {self.code!r}")


@dataclass(frozen=True)
class PiiType:
    name: str
    locale_specific: bool
    category: str


@dataclass(frozen=True, order=True)
class Span:
    """Half-open character interval [start, end) in scalar-value offsets.

    Well-formedness (0 <= start < end <= prompt length) is checked by
    validate_annotation, which knows the prompt.
    """

    start: int
    end: int

    def __len__(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class SpanAnnotation:
    span: Span
    pii_type: str
    text: str


@dataclass(frozen=True)
class RegistryEntry:
    locale: str
    pii_type: str
    locale_specific: bool
    template_id: str
    description: str


@dataclass
class Task:
    id: str
    locale: str
    phase: str
    domain: str
    prompt: str


@dataclass
class Submission:
    id: str
    task_id: str
    annotator_id: str
    annotations: list[SpanAnnotation]

    @property
    def no_pii_found(self) -> bool:
        return not self.annotations


@dataclass
class GroundTruth:
    task_id: str
    annotations: list[SpanAnnotation]
    source: str = "review"  # "review" | "generator"


@dataclass
class Review:
    task_id: str
    reviewer_id: str
    chosen_submission_id: str
    ground_truth: list[SpanAnnotation]
    error_categories: frozenset[str]
    verdict: str  # accepted_as_is | corrected | rejected


@dataclass
class Corpus:
    """In-memory view of a dataset: tasks with submissions, ground truths
    (from a QA review or a generator) and review records."""

    tasks: dict[str, Task] = field(default_factory=dict)
    submissions: dict[str, list[Submission]] = field(default_factory=dict)
    ground_truths: dict[str, GroundTruth] = field(default_factory=dict)
    reviews: dict[str, Review] = field(default_factory=dict)

    def add_task(self, task: Task) -> None:
        if task.id in self.tasks:
            raise ValueError(f"duplicate task id {task.id}")
        self.tasks[task.id] = task
        self.submissions.setdefault(task.id, [])

    def add_submission(self, sub: Submission) -> None:
        if sub.task_id not in self.tasks:
            raise KeyError(f"submission for unknown task {sub.task_id}")
        self.submissions[sub.task_id].append(sub)

    def submission_by_id(self, task_id: str, sub_id: str) -> Submission | None:
        for sub in self.submissions.get(task_id, []):
            if sub.id == sub_id:
                return sub
        return None


def normalize_label(raw: str) -> str:
    """Trim, uppercase and collapse internal whitespace."""
    return " ".join(raw.split()).upper()


def normalize_text(raw: str) -> str:
    """Normalization used when comparing extracted PII text between
    annotators: trim, casefold, collapse internal whitespace."""
    return " ".join(raw.split()).casefold()


def _read_tsv(path: Path) -> list[list[str]]:
    rows = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#"):
            continue
        rows.append(line.split("\t"))
    return rows


class Registry:
    """Immutable reference data: locales, canonical PII types with their
    category mapping, the label alias table, per-locale registry entries and
    format-template patterns."""

    def __init__(
        self,
        locales: dict[str, Locale],
        locale_aliases: dict[str, str],
        types: dict[str, PiiType],
        aliases: dict[str, str],
        entries: dict[str, dict[str, RegistryEntry]],
        template_patterns: dict[str, str],
    ) -> None:
        self.locales = locales
        self.locale_aliases = locale_aliases
        self.types = types
        self.aliases = aliases
        self.entries = entries
        self.template_patterns = template_patterns
        self.categories = sorted({t.category for t in types.values()})

    @classmethod
    def load(cls, data_dir: Path = DATA_DIR) -> "Registry":
        locales: dict[str, Locale] = {}
        locale_aliases: dict[str, str] = {}
        for row in _read_tsv(data_dir / "locales.tsv"):
            code, group = row[0], row[1]
            locales[code] = Locale(code=code, group=group)
            if len(row) > 2 and row[2]:
                for alias in row[2].split(","):
                    locale_aliases[alias.strip()] = code

        types = {}
        for name, flag, category in _read_tsv(data_dir / "types.tsv"):
            types[name] = PiiType(name, flag == "1", category)

        aliases = {}
        for alias, canonical in _read_tsv(data_dir / "aliases.tsv"):
            if canonical not in types:
                raise PiiModelError(f"alias target not canonical: {canonical}")
            aliases[normalize_label(alias)] = canonical

        entries: dict[str, dict[str, RegistryEntry]] = {c: {} for c in locales}
        for locale, name, flag, tid, desc in _read_tsv(data_dir / "registry.tsv"):
            if locale not in locales:
                raise UnknownLocale(f"registry row for unknown locale {locale}")
            if name not in types:
                raise UnknownLabel(f"registry row for unknown type {name}")
            entries[locale][name] = RegistryEntry(locale, name, flag == "1", tid, desc)

        template_patterns = {}
        for tid, pattern in _read_tsv(data_dir / "templates.tsv"):
            template_patterns[tid] = pattern

        return cls(locales, locale_aliases, types, aliases, entries, template_patterns)

    # ---- locales ----

    def resolve_locale(self, code: str) -> Locale:
        """Resolve a locale code, accepting configured alternate spellings."""
        canonical = self.locale_aliases.get(code, code)
        locale = self.locales.get(canonical)
        if locale is None:
            raise UnknownLocale(code)
        return locale

    def locale_group(self, code: str) -> str:
        return self.resolve_locale(code).group

    # ---- labels ----

    def canonical_type(self, raw_label: str) -> str:
        """Normalize a raw label to its canonical registry name.

        Normalization is trim + uppercase + whitespace collapse, then the
        alias table. Idempotent on canonical names.
        """
        label = normalize_label(raw_label)
        if not label:
            raise UnknownLabel("empty label")
        label = self.aliases.get(label, label)
        if label not in self.types:
            raise UnknownLabel(raw_label)
        return label

    def category_of(self, pii_type: str) -> str:
        try:
            return self.types[pii_type].category
        except KeyError:
            raise UnknownLabel(pii_type) from None

    # ---- per-locale registry ----

    def registry_for(self, locale: str) -> frozenset[str]:
        code = self.resolve_locale(locale).code
        return frozenset(self.entries[code])

    def entry(self, locale: str, pii_type: str) -> RegistryEntry | None:
        code = self.resolve_locale(locale).code
        return self.entries[code].get(pii_type)

    def total_entries(self) -> int:
        return sum(len(v) for v in self.entries.values())


@lru_cache(maxsize=1)
def default_registry() -> Registry:
    return Registry.load()


def validate_annotation(prompt: str, ann: SpanAnnotation, locale: str,
                        registry: Registry | None = None) -> None:
    """Raise a specific AnnotationInvalid subclass if the annotation does not
    fit the prompt: span within bounds, text equal to the prompt slice, and
    type registered for the locale."""
    registry = registry or default_registry()
    span = ann.span
    if span.start < 0 or span.start >= span.end or span.end > len(prompt):
        raise SpanOutOfBounds(
            f"span [{span.start}, {span.end}) invalid for prompt length {len(prompt)}")
    if prompt[ann.span.start:ann.span.end] != ann.text:
        raise TextMismatch(
            f"text {ann.text!r} != prompt[{ann.span.start}:{ann.span.end}]")
    if ann.pii_type not in registry.registry_for(locale):
        raise TypeNotInLocale(f"{ann.pii_type} not registered for {locale}")


def check_annotation(prompt: str, ann: SpanAnnotation, locale: str,
                     registry: Registry | None = None) -> str | None:
    """Like validate_annotation but returns the violation code (or None)."""
    try:
        validate_annotation(prompt, ann, locale, registry)
    except AnnotationInvalid as exc:
        return exc.code
    return None
