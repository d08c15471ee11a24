"""Locale-aware synthetic corpus generation with exact ground truth, plus
parameterized simulated annotators that inject controlled errors.

Format templates use a small brace-token pattern language ({d3} = three
digits, {u2} = two uppercase letters, {w} = a lowercase word, {zh3} = three
CJK characters, ...); everything outside braces is literal. Each template
both generates values and compiles to a validating regex, so every
generated value can be checked against its own template. Values are
plausible but fictitious: no real checksum algorithms.

Generation is a pure function of (spec, seed): every task derives its own
RNG from a string key, so corpora are byte-identical across runs and
independent of scheduling.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field

from .model import (
    DOMAINS,
    Corpus,
    GroundTruth,
    Registry,
    Span,
    SpanAnnotation,
    Submission,
    Task,
    default_registry,
)

DIGITS = "0123456789"
UPPER = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
LOWER = "abcdefghijklmnopqrstuvwxyz"
HEX = "0123456789abcdef"
CJK_POOL = "安宝城达风光海京林明南平青山天文西星月州"
DEVANAGARI_POOL = "अबकदगहजलमनपरसतवय"
ARABIC_POOL = "ابتجدرزسطعفقكلمنهوي"

_TOKEN_RE = re.compile(r"\{([a-zA-Z]+?)(\d*)\}")


class SynthError(Exception):
    pass


class NoTemplate(SynthError):
    pass


class BinInfeasible(SynthError):
    pass


class SpecInvalid(SynthError):
    pass


def _pool_token(pool: str, char_class: str):
    def gen(rng: random.Random, n: int) -> str:
        return "".join(rng.choice(pool) for _ in range(n))

    return gen, lambda n: f"{char_class}{{{n}}}"


def _word(rng: random.Random, _n: int) -> str:
    return "".join(rng.choice(LOWER) for _ in range(rng.randint(3, 8)))


def _capitalized(rng: random.Random, _n: int) -> str:
    return rng.choice(UPPER) + "".join(rng.choice(LOWER) for _ in range(rng.randint(2, 7)))


def _octet(rng: random.Random, _n: int) -> str:
    return str(rng.randint(0, 255))


_TOKENS: dict[str, tuple] = {
    "d": _pool_token(DIGITS, "[0-9]"),
    "u": _pool_token(UPPER, "[A-Z]"),
    "a": _pool_token(LOWER, "[a-z]"),
    "h": _pool_token(HEX, "[0-9a-f]"),
    "zh": _pool_token(CJK_POOL, r"[一-鿿]"),
    "dev": _pool_token(DEVANAGARI_POOL, r"[ऀ-ॿ]"),
    "arb": _pool_token(ARABIC_POOL, r"[؀-ۿ]"),
    "w": (_word, lambda n: "[a-z]{3,8}"),
    "W": (_capitalized, lambda n: "[A-Z][a-z]{2,7}"),
    "o": (_octet, lambda n: "[0-9]{1,3}"),
}


class FormatTemplate:
    """A generator expression plus the matching predicate derived from it."""

    def __init__(self, template_id: str, pattern: str) -> None:
        self.template_id = template_id
        self.pattern = pattern
        self._parts = self._parse(pattern)
        self._regex = re.compile("".join(
            re.escape(part) if isinstance(part, str) else _TOKENS[part[0]][1](part[1])
            for part in self._parts))

    @staticmethod
    def _parse(pattern: str) -> list:
        parts: list = []
        pos = 0
        for match in _TOKEN_RE.finditer(pattern):
            if match.start() > pos:
                parts.append(pattern[pos:match.start()])
            name, count = match.group(1), match.group(2)
            if name not in _TOKENS:
                raise SpecInvalid(f"unknown token {{{name}}} in {pattern!r}")
            parts.append((name, int(count) if count else 1))
            pos = match.end()
        if pos < len(pattern):
            parts.append(pattern[pos:])
        return parts

    def generate(self, rng: random.Random) -> str:
        return "".join(
            part if isinstance(part, str) else _TOKENS[part[0]][0](rng, part[1])
            for part in self._parts)

    def matches(self, value: str) -> bool:
        return self._regex.fullmatch(value) is not None

    def __repr__(self) -> str:
        return f"FormatTemplate({self.template_id!r}, {self.pattern!r})"


class TemplateLibrary:
    """Compiled format templates for a registry's (locale, type) entries."""

    def __init__(self, registry: Registry | None = None) -> None:
        self.registry = registry or default_registry()
        self._compiled: dict[str, FormatTemplate] = {}

    def template(self, locale: str, pii_type: str) -> FormatTemplate:
        entry = self.registry.entry(locale, pii_type)
        if entry is None:
            raise NoTemplate(f"({locale}, {pii_type}) not in registry")
        tid = entry.template_id
        if tid not in self._compiled:
            pattern = self.registry.template_patterns.get(tid)
            if pattern is None:
                raise NoTemplate(f"template {tid} has no pattern")
            self._compiled[tid] = FormatTemplate(tid, pattern)
        return self._compiled[tid]


def gen_value(locale: str, pii_type: str, rng: random.Random,
              library: TemplateLibrary | None = None) -> str:
    """Generate one synthetic PII value for (locale, type)."""
    library = library or TemplateLibrary()
    return library.template(locale, pii_type).generate(rng)


# filler lexicons (pseudo-words; per script so offsets are exercised on
# non-Latin prompts too)
_FILLER = {
    "latin": ["nova", "terra", "portal", "faktura", "klient", "numer", "konto",
              "zlecenie", "umowa", "raport", "system", "dostawa", "adres",
              "pomoc", "zapyta", "dziala", "moja", "prosze", "votre", "dank"],
    "zh": ["请问", "账户", "系统", "帮助", "订单", "号码", "客户", "支付",
           "地址", "登录", "信息", "问题", "需要", "更新", "无法", "提交"],
    "hi": ["कृपया", "खाता", "नंबर", "मदद", "ग्राहक", "आदेश", "भुगतान", "पता",
           "सिस्टम", "जानकारी", "समस्या", "अपडेट", "लॉगिन", "सबमिट"],
    "ar": ["حساب", "رقم", "مساعدة", "عميل", "طلب", "دفع", "عنوان", "نظام",
           "معلومات", "مشكلة", "تحديث", "دخول", "ارسال", "شكرا"],
}
_SCRIPT_OF_GROUP = {"zh": "zh", "hi": "hi", "ar": "ar"}


def filler_words(locale: str, n: int, rng: random.Random,
                 registry: Registry | None = None) -> list[str]:
    registry = registry or default_registry()
    script = _SCRIPT_OF_GROUP.get(registry.locale_group(locale), "latin")
    lexicon = _FILLER[script]
    return [rng.choice(lexicon) for _ in range(n)]


# sampling ranges per length bin (word counts); XL generation is capped
# below the real XL upper bound to keep corpora fast to build
BIN_WORD_RANGES = {"S": (5, 29), "M": (30, 239), "L": (240, 600), "XL": (1200, 1600)}


def gen_prompt(locale: str, domain: str, bin_label: str, n_pii: int,
               rng: random.Random,
               registry: Registry | None = None,
               library: TemplateLibrary | None = None,
               type_weights: dict[str, float] | None = None,
               ) -> tuple[str, list[SpanAnnotation]]:
    """Build a prompt whose word count falls in the bin, containing exactly
    n_pii annotations whose spans slice the prompt precisely."""
    if bin_label not in BIN_WORD_RANGES:
        raise SpecInvalid(f"unknown bin {bin_label!r}")
    if n_pii < 0:
        raise SpecInvalid("n_pii must be >= 0")
    registry = registry or default_registry()
    library = library or TemplateLibrary(registry)
    lo, hi = BIN_WORD_RANGES[bin_label]
    if n_pii > hi:
        raise BinInfeasible(f"{n_pii} PIIs cannot fit a {bin_label} prompt")

    types = _draw_types(locale, n_pii, rng, registry, type_weights)
    values = [gen_value(locale, t, rng, library) for t in types]
    words_from_pii = sum(len(v.split()) for v in values)
    if words_from_pii > hi:
        raise BinInfeasible(
            f"{n_pii} values need {words_from_pii} words, above {bin_label} bound {hi}")

    target = max(rng.randint(lo, hi), words_from_pii, 1)
    items: list[tuple[str, str | None]] = [
        (word, None) for word in filler_words(locale, target - words_from_pii, rng, registry)]
    for pii_type, value in zip(types, values):
        items.insert(rng.randint(0, len(items)), (value, pii_type))

    prompt_parts: list[str] = []
    annotations: list[SpanAnnotation] = []
    offset = 0
    for i, (text, pii_type) in enumerate(items):
        if i:
            offset += 1  # joining space
        if pii_type is not None:
            annotations.append(SpanAnnotation(Span(offset, offset + len(text)), pii_type, text))
        prompt_parts.append(text)
        offset += len(text)
    return " ".join(prompt_parts), annotations


def _draw_types(locale: str, n: int, rng: random.Random, registry: Registry,
                weights: dict[str, float] | None) -> list[str]:
    available = sorted(registry.registry_for(locale))
    if weights:
        unknown = set(weights) - set(available)
        if unknown:
            raise SpecInvalid(f"weighted types not in {locale} registry: {sorted(unknown)}")
        remainder = 1.0 - sum(weights.values())
        if remainder < -1e-9:
            raise SpecInvalid("type weights exceed 1")
        rest = [t for t in available if t not in weights]
        population = list(weights) + rest
        shares = list(weights.values()) + [max(remainder, 0.0) / len(rest)] * len(rest)
        return rng.choices(population, weights=shares, k=n) if n else []
    return rng.choices(available, k=n) if n else []


# common look-alike types used to build confusion matrices; partners absent
# from a locale's registry fall back to the true type at simulation time
CONFUSABLE = {
    "ADDRESS": "NAME",
    "AGE": "DATE",
    "AWS ACCESS KEY ID": "AWS SECRET KEY",
    "AWS SECRET KEY": "AWS ACCESS KEY ID",
    "BANK ACCOUNT NUMBER": "CREDIT DEBIT NUMBER",
    "BANK ROUTING": "PHONE",
    "CREDIT DEBIT CVV": "PIN",
    "CREDIT DEBIT EXPIRY": "DATE",
    "CREDIT DEBIT NUMBER": "BANK ACCOUNT NUMBER",
    "DATE": "CREDIT DEBIT EXPIRY",
    "DRIVER ID": "LICENSE PLATE",
    "EMAIL": "USERNAME",
    "HEALTH ID": "NATIONAL ID",
    "IP ADDRESS": "MAC ADDRESS",
    "LICENSE PLATE": "DRIVER ID",
    "MAC ADDRESS": "IP ADDRESS",
    "NAME": "USERNAME",
    "NATIONAL ID": "SSN",
    "PASSPORT NUMBER": "NATIONAL ID",
    "PASSWORD": "PIN",
    "PHONE": "BANK ROUTING",
    "PIN": "CREDIT DEBIT CVV",
    "SSN": "HEALTH ID",
    "SWIFT CODE": "USERNAME",
    "TIN": "SSN",
    "URL": "EMAIL",
    "USERNAME": "EMAIL",
    "AADHAR ID": "PAN ID",
    "PAN ID": "AADHAR ID",
}


@dataclass(frozen=True)
class AnnotatorProfile:
    """Error injection rates for one simulated annotator."""

    miss_rate: float = 0.0
    confusion: dict = field(default_factory=dict)  # type -> {type -> prob}
    span_jitter: int = 0
    spurious_rate: float = 0.0

    def __post_init__(self) -> None:
        for name, p in (("miss_rate", self.miss_rate), ("spurious_rate", self.spurious_rate)):
            if not 0.0 <= p <= 1.0:
                raise SpecInvalid(f"{name} must be in [0, 1], got {p}")
        if self.span_jitter < 0:
            raise SpecInvalid("span_jitter must be >= 0")
        for source, row in self.confusion.items():
            total = sum(row.values())
            if abs(total - 1.0) > 1e-9:
                raise SpecInvalid(f"confusion row for {source} sums to {total}")

    @classmethod
    def with_rates(cls, miss: float, confusion_rate: float, spurious: float,
                   jitter: int = 0) -> "AnnotatorProfile":
        """Build a profile whose per-type confusion follows CONFUSABLE."""
        confusion = {}
        if confusion_rate > 0:
            for source, partner in CONFUSABLE.items():
                confusion[source] = {partner: confusion_rate,
                                     source: 1.0 - confusion_rate}
        return cls(miss_rate=miss, confusion=confusion, spurious_rate=spurious,
                   span_jitter=jitter)


ZERO_ERROR = AnnotatorProfile()

DEFAULT_PHASE_PROFILES = {
    "pilot": AnnotatorProfile.with_rates(0.30, 0.15, 0.05, jitter=1),
    "training": AnnotatorProfile.with_rates(0.10, 0.05, 0.02, jitter=1),
    "production": AnnotatorProfile.with_rates(0.02, 0.01, 0.005, jitter=0),
}


def _tokens_with_offsets(prompt: str):
    for match in re.finditer(r"\S+", prompt):
        yield match.start(), match.end(), match.group()


def simulate_annotator(prompt: str, gt: GroundTruth, profile: AnnotatorProfile,
                       rng: random.Random,
                       locale_types: frozenset[str]) -> list[SpanAnnotation]:
    """Produce one noisy submission from the ground truth.

    Each annotation is independently dropped (miss), retyped (confusion,
    falling back to the truth when the drawn type is not registered for the
    locale), and boundary-jittered within span_jitter, clamped to the
    prompt. With spurious_rate probability one non-PII token is reported as
    a random PII type.
    """
    annotations: list[SpanAnnotation] = []
    ordered = sorted(gt.annotations, key=lambda a: (a.span.start, a.span.end))
    for ann in ordered:
        if rng.random() < profile.miss_rate:
            continue
        pii_type = ann.pii_type
        row = profile.confusion.get(pii_type)
        if row:
            drawn = rng.choices(list(row), weights=list(row.values()), k=1)[0]
            if drawn in locale_types:
                pii_type = drawn
        start, end = ann.span.start, ann.span.end
        if profile.span_jitter:
            start += rng.randint(-profile.span_jitter, profile.span_jitter)
            end += rng.randint(-profile.span_jitter, profile.span_jitter)
            start = max(0, start)
            end = min(len(prompt), end)
            if start >= end:
                start, end = ann.span.start, ann.span.end
        annotations.append(SpanAnnotation(Span(start, end), pii_type, prompt[start:end]))

    if profile.spurious_rate and rng.random() < profile.spurious_rate:
        gt_spans = [a.span for a in ordered]
        candidates = [
            (s, e, text) for s, e, text in _tokens_with_offsets(prompt)
            if all(e <= span.start or s >= span.end for span in gt_spans)
        ]
        if candidates:
            s, e, text = candidates[rng.randrange(len(candidates))]
            spurious_type = rng.choice(sorted(locale_types))
            annotations.append(SpanAnnotation(Span(s, e), spurious_type, text))

    annotations.sort(key=lambda a: (a.span.start, a.span.end))
    return annotations


# task volume ranges per phase (used when a spec opts into volume checks)
TASK_VOLUME_RANGES = {
    "ar-UAE": {"pilot": (75, 80), "training": (1000, 1200), "production": (4000, 4200)},
    "fi-FI": {"pilot": (95, 100), "training": (1000, 1200), "production": (4000, 4200)},
    "hi-IN": {"pilot": (70, 75), "training": (1000, 1200), "production": (4000, 4200)},
    "no-NO": {"pilot": (150, 170), "training": (1000, 1200), "production": (4000, 4200)},
    "nl-BE": {"pilot": (25, 30), "training": (300, 350), "production": (1000, 1200)},
    "nl-NL": {"pilot": (70, 75), "training": (700, 800), "production": (2500, 2600)},
    "pl-PL": {"pilot": (80, 85), "training": (1000, 1200), "production": (4000, 4200)},
    "pt-BR": {"pilot": (50, 55), "training": (700, 800), "production": (2500, 2600)},
    "pt-PT": {"pilot": (25, 30), "training": (300, 400), "production": (1000, 1200)},
    "sv-SE": {"pilot": (80, 85), "training": (1000, 1200), "production": (4000, 4200)},
    "vi-VN": {"pilot": (25, 170), "training": (300, 1200), "production": (1000, 4200)},
    "zh-CN": {"pilot": (75, 80), "training": (700, 800), "production": (2500, 2600)},
    "zh-SG": {"pilot": (25, 30), "training": (300, 350), "production": (1000, 1200)},
}

DEFAULT_BIN_MIX = {"S": 0.45, "M": 0.45, "L": 0.08, "XL": 0.02}
DEFAULT_DENSITY = {1: 0.6, 2: 0.3, 3: 0.1}
DEFAULT_TYPE_WEIGHTS = {"NAME": 0.40}


@dataclass
class LocalePlan:
    counts: dict[str, int]  # phase -> number of tasks
    domain_mix: dict[str, float] | None = None
    bin_mix: dict[str, float] | None = None
    density: dict[int, float] | None = None
    negative_fraction: float = 0.2
    type_weights: dict[str, float] | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.negative_fraction < 1.0:
            raise SpecInvalid("negative_fraction must be in (0, 1)")
        for phase in self.counts:
            if phase not in ("pilot", "training", "production"):
                raise SpecInvalid(f"unknown phase {phase!r}")
            if self.counts[phase] < 0:
                raise SpecInvalid("task counts must be >= 0")


@dataclass
class CorpusSpec:
    seed: int
    locales: dict[str, LocalePlan]
    profiles: dict[str, AnnotatorProfile] = field(default_factory=lambda: dict(DEFAULT_PHASE_PROFILES))
    annotators_per_locale: int = 4
    validate_volumes: bool = False

    def __post_init__(self) -> None:
        if self.annotators_per_locale < 2:
            raise SpecInvalid("need at least 2 annotators per locale")
        registry = default_registry()
        for code, plan in self.locales.items():
            registry.resolve_locale(code)
            if self.validate_volumes:
                for phase, count in plan.counts.items():
                    lo, hi = TASK_VOLUME_RANGES[code][phase]
                    if not lo <= count <= hi:
                        raise SpecInvalid(
                            f"{code} {phase} count {count} outside [{lo}, {hi}]")


def _weighted_choice(rng: random.Random, mix: dict) -> object:
    keys = list(mix)
    return rng.choices(keys, weights=[mix[k] for k in keys], k=1)[0]


def gen_corpus(spec: CorpusSpec, registry: Registry | None = None) -> Corpus:
    """Generate the full corpus: tasks with exact ground truth and two noisy
    submissions per task using the phase's annotator profile."""
    registry = registry or default_registry()
    library = TemplateLibrary(registry)
    corpus = Corpus()
    for locale in sorted(spec.locales):
        plan = spec.locales[locale]
        locale_types = registry.registry_for(locale)
        annotators = [f"ann-{locale}-{k}" for k in range(spec.annotators_per_locale)]
        for phase in ("pilot", "training", "production"):
            count = plan.counts.get(phase, 0)
            profile = spec.profiles.get(phase, ZERO_ERROR)
            for i in range(count):
                key = f"{spec.seed}:{locale}:{phase}:{i}"
                rng = random.Random(key)
                task_id = f"t-{locale}-{phase}-{i:05d}"
                domain = _weighted_choice(rng, plan.domain_mix or {d: 1 for d in DOMAINS})
                bin_label = _weighted_choice(rng, plan.bin_mix or DEFAULT_BIN_MIX)
                if rng.random() < plan.negative_fraction:
                    n_pii = 0
                else:
                    n_pii = _weighted_choice(rng, plan.density or DEFAULT_DENSITY)
                prompt, annotations = gen_prompt(
                    locale, domain, bin_label, n_pii, rng, registry, library,
                    plan.type_weights if plan.type_weights is not None else DEFAULT_TYPE_WEIGHTS)
                corpus.add_task(Task(task_id, locale, phase, domain, prompt))
                corpus.ground_truths[task_id] = GroundTruth(task_id, annotations,
                                                            source="generator")
                first = i % len(annotators)
                second = (i + 1) % len(annotators)
                for slot, annotator in enumerate((annotators[first], annotators[second])):
                    sub_rng = random.Random(f"{key}:ann:{slot}")
                    sub_annotations = simulate_annotator(
                        prompt, corpus.ground_truths[task_id], profile, sub_rng,
                        locale_types)
                    corpus.add_submission(Submission(
                        f"s-{task_id}-{annotator}", task_id, annotator, sub_annotations))
    return corpus
