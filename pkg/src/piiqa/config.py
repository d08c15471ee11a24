"""Pipeline configuration: thresholds, QA sampling rates, matching tau,
length-bin boundaries and locale-group overrides.

Loaded from a YAML file; every field has a sensible default so an empty
config is valid.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .rca import LengthBinConfig, LocaleBins
from .workflow import Phase

DEFAULT_QA_SAMPLING = {"pilot": 1.0, "training": 0.65, "production": 0.12}


class ConfigError(Exception):
    pass


@dataclass
class PipelineConfig:
    tau: float = 0.5
    ira_threshold: float = 0.85
    qa_sampling: dict = field(default_factory=lambda: dict(DEFAULT_QA_SAMPLING))
    quality_threshold: float = 0.85
    quality_min_reviewed: int = 10
    quality_corrected_weight: float = 0.0
    fpr_negatives: str = "gt_empty"
    bins: LengthBinConfig = field(default_factory=LengthBinConfig)
    locale_groups: dict = field(default_factory=dict)  # code -> merged group

    def __post_init__(self) -> None:
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError(f"tau must be in (0, 1], got {self.tau}")
        if self.fpr_negatives not in ("gt_empty", "all_rows"):
            raise ConfigError(f"unknown fpr_negatives {self.fpr_negatives!r}")
        missing = {"pilot", "training", "production"} - set(self.qa_sampling)
        if missing:
            raise ConfigError(f"qa_sampling missing phases: {sorted(missing)}")

    def phases(self) -> dict[str, Phase]:
        return {name: Phase(name, qa_sampling=rate, ira_threshold=self.ira_threshold)
                for name, rate in self.qa_sampling.items()}

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        kwargs: dict = {}
        for key in ("tau", "ira_threshold", "qa_sampling", "locale_groups"):
            if key in raw:
                kwargs[key] = raw[key]
        quality = raw.get("quality", {})
        if "threshold" in quality:
            kwargs["quality_threshold"] = quality["threshold"]
        if "min_reviewed" in quality:
            kwargs["quality_min_reviewed"] = quality["min_reviewed"]
        if "corrected_weight" in quality:
            kwargs["quality_corrected_weight"] = quality["corrected_weight"]
        metrics = raw.get("metrics", {})
        if "fpr_negatives" in metrics:
            kwargs["fpr_negatives"] = metrics["fpr_negatives"]
        if "bins" in raw:
            kwargs["bins"] = _parse_bins(raw["bins"])
        return cls(**kwargs)


def _parse_bins(raw: dict) -> LengthBinConfig:
    def parse_one(spec: dict) -> LocaleBins:
        kwargs = {}
        if "bounds" in spec:
            kwargs["bounds"] = tuple(spec["bounds"])
        if "count_mode" in spec:
            kwargs["count_mode"] = spec["count_mode"]
        return LocaleBins(**kwargs)

    default = parse_one(raw.get("default", {}))
    overrides = {code: parse_one(spec)
                 for code, spec in raw.get("overrides", {}).items()}
    return LengthBinConfig(default=default, overrides=overrides)
