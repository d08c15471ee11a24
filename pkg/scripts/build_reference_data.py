#!/usr/bin/env python3
"""Regenerate registry.tsv, templates.tsv and registry_manifest.tsv.

The per-locale registry is large but mechanical: every locale carries the
universal PII types plus locale-variant entries (own format template per
locale) and a national-identifier cluster that differs by locale. Rather
than hand-editing ~340 rows, edit the dictionaries below and rerun:

    python scripts/build_reference_data.py
"""
from __future__ import annotations

from pathlib import Path

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "piiqa" / "data"

LOCALES = [
    "ar-UAE", "fi-FI", "hi-IN", "nl-BE", "nl-NL", "no-NO",
    "pl-PL", "pt-BR", "pt-PT", "sv-SE", "vi-VN", "zh-CN", "zh-SG",
]

# script family used for name/address templates and prompt filler
SCRIPT = {
    "ar-UAE": "ar", "hi-IN": "hi", "zh-CN": "zh", "zh-SG": "zh",
}

# universal types: one shared template; NAME and ADDRESS vary by script
UNIVERSAL = {
    "AGE": "{d2}",
    "AWS ACCESS KEY ID": "AKIA{u16}",
    "AWS SECRET KEY": "{h40}",
    "CREDIT DEBIT CVV": "{d3}",
    "CREDIT DEBIT EXPIRY": "{d2}/{d2}",
    "CREDIT DEBIT NUMBER": "{d4} {d4} {d4} {d4}",
    "DATE": "{d2}-{d2}-{d4}",
    "EMAIL": "{w}{d2}@{w}.com",
    "IP ADDRESS": "{o}.{o}.{o}.{o}",
    "MAC ADDRESS": "{h2}:{h2}:{h2}:{h2}:{h2}:{h2}",
    "PASSWORD": "{a5}{d2}{u2}!{d2}",
    "PHONE": "{d3}-{d3}-{d4}",
    "PIN": "{d4}",
    "SWIFT CODE": "{u6}{d2}",
    "URL": "https://www.{w}.com/{w}",
    "USERNAME": "{w}{d3}",
}

NAME_BY_SCRIPT = {
    "latin": "{W} {W}",
    "zh": "{zh3}",
    "hi": "{dev4} {dev5}",
    "ar": "{arb4} {arb6}",
}
ADDRESS_BY_SCRIPT = {
    "latin": "{d3} {W} {W}",
    "zh": "{zh4}路{d3}号",
    "hi": "{d3} {dev5} {dev4}",
    "ar": "{d3} {arb5} {arb4}",
}

# locale-variant types: every locale has its own format template
VARIANT = {
    "BANK ACCOUNT NUMBER": {
        "ar-UAE": "AE{d21}", "fi-FI": "FI{d16}", "hi-IN": "{d14}",
        "nl-BE": "BE{d14}", "nl-NL": "NL{d2}{u4}{d10}", "no-NO": "NO{d13}",
        "pl-PL": "PL{d26}", "pt-BR": "{d8}-{d1}", "pt-PT": "PT50{d21}",
        "sv-SE": "SE{d22}", "vi-VN": "{d12}", "zh-CN": "{d19}", "zh-SG": "{d10}",
    },
    "BANK ROUTING": {
        "ar-UAE": "{d9}", "fi-FI": "{d6}", "hi-IN": "{u4}0{d6}",
        "nl-BE": "{d8}", "nl-NL": "{d8}", "no-NO": "{d4}",
        "pl-PL": "{d8}", "pt-BR": "{d8}", "pt-PT": "{d8}",
        "sv-SE": "{d5}", "vi-VN": "{d8}", "zh-CN": "{d12}", "zh-SG": "{d7}",
    },
    "DRIVER ID": {
        "ar-UAE": "{d7}", "fi-FI": "{d6}-{d4}", "hi-IN": "{u2}{d2} {d11}",
        "nl-BE": "{d10}", "nl-NL": "{d10}", "no-NO": "{d11}",
        "pl-PL": "{u1}{d7}", "pt-BR": "{d11}", "pt-PT": "{u1}-{d7}",
        "sv-SE": "{d6}-{d4}", "vi-VN": "{d12}", "zh-CN": "{d18}", "zh-SG": "S{d7}{u1}",
    },
    "HEALTH ID": {
        "ar-UAE": "{d10}", "fi-FI": "{d10}", "hi-IN": "{d2}-{d4}-{d4}",
        "nl-BE": "{d11}", "nl-NL": "{d9}", "no-NO": "{d11}",
        "pl-PL": "{d3} {d3} {d3}", "pt-BR": "{d15}", "pt-PT": "{d9}",
        "sv-SE": "{d10}", "vi-VN": "{u2}{d13}", "zh-CN": "{d12}", "zh-SG": "T{d7}{u1}",
    },
    "LICENSE PLATE": {
        "ar-UAE": "{u1} {d5}", "fi-FI": "{u3}-{d3}", "hi-IN": "{u2} {d2} {u2} {d4}",
        "nl-BE": "{d1}-{u3}-{d3}", "nl-NL": "{d2}-{u3}-{d1}", "no-NO": "{u2} {d5}",
        "pl-PL": "{u2} {d5}", "pt-BR": "{u3}{d1}{u1}{d2}", "pt-PT": "{u2}-{d2}-{u2}",
        "sv-SE": "{u3} {d3}", "vi-VN": "{d2}{u1}-{d5}", "zh-CN": "京{u1}{d5}", "zh-SG": "S{u2}{d4}{u1}",
    },
    "PASSPORT NUMBER": {
        "ar-UAE": "{u1}{d8}", "fi-FI": "{u2}{d7}", "hi-IN": "{u1}{d7}",
        "nl-BE": "{u2}{d6}", "nl-NL": "{u2}{d6}{u1}", "no-NO": "{u2}{d7}",
        "pl-PL": "{u2}{d7}", "pt-BR": "{u2}{d6}", "pt-PT": "{u1}{d6}",
        "sv-SE": "{d8}", "vi-VN": "{u1}{d7}", "zh-CN": "E{d8}", "zh-SG": "K{d7}{u1}",
    },
}

# national-identifier cluster: membership differs by locale
NATIONAL = {
    "ar-UAE": {"NATIONAL ID": "784-{d4}-{d7}-{d1}", "SSN": "{d9}"},
    "fi-FI": {"NATIONAL ID": "{d6}-{d3}{u1}", "SSN": "{d6}+{d4}"},
    "hi-IN": {"AADHAR ID": "{d4} {d4} {d4}", "PAN ID": "{u5}{d4}{u1}"},
    "nl-BE": {"NATIONAL ID": "{d2}.{d2}.{d2}-{d3}.{d2}", "SSN": "{d11}"},
    "nl-NL": {"NATIONAL ID": "{d9}", "SSN": "{d9}"},
    "no-NO": {"NATIONAL ID": "{d11}", "SSN": "{d6} {d5}"},
    "pl-PL": {"NATIONAL ID": "{d11}", "SSN": "{d11}", "TIN": "{d10}"},
    "pt-BR": {"NATIONAL ID": "{d9}", "SSN": "{d11}", "TIN": "{d3}.{d3}.{d3}-{d2}"},
    "pt-PT": {"NATIONAL ID": "{d8} {d1} {u2}{d1}", "SSN": "{d11}", "TIN": "{d9}"},
    "sv-SE": {"NATIONAL ID": "{d8}-{d4}", "SSN": "{d6}-{d4}"},
    "vi-VN": {"NATIONAL ID": "{d12}", "SSN": "{d10}"},
    "zh-CN": {"NATIONAL ID": "{d18}", "SSN": "{d18}", "TIN": "{d15}"},
    "zh-SG": {"NATIONAL ID": "S{d7}{u1}", "SSN": "S{d7}{u1}", "TIN": "{d9}{u1}"},
}


def slug(name: str) -> str:
    return name.lower().replace(" ", "_").replace("/", "_")


def main() -> None:
    templates: dict[str, str] = {}
    rows: list[tuple[str, str, int, str, str]] = []

    for script, pattern in NAME_BY_SCRIPT.items():
        templates[f"name.{script}"] = pattern
    for script, pattern in ADDRESS_BY_SCRIPT.items():
        templates[f"address.{script}"] = pattern
    for pii_type, pattern in UNIVERSAL.items():
        templates[slug(pii_type)] = pattern

    for locale in LOCALES:
        script = SCRIPT.get(locale, "latin")
        rows.append((locale, "NAME", 0, f"name.{script}", "personal name"))
        rows.append((locale, "ADDRESS", 0, f"address.{script}", "street address"))
        for pii_type in UNIVERSAL:
            rows.append((locale, pii_type, 0, slug(pii_type),
                         f"{pii_type.lower()} (shared format)"))
        for pii_type, by_locale in VARIANT.items():
            tid = f"{slug(pii_type)}.{locale}"
            templates[tid] = by_locale[locale]
            rows.append((locale, pii_type, 1, tid,
                         f"{pii_type.lower()} ({locale} format)"))
        for pii_type, pattern in NATIONAL[locale].items():
            tid = f"{slug(pii_type)}.{locale}"
            templates[tid] = pattern
            rows.append((locale, pii_type, 1, tid,
                         f"{pii_type.lower()} ({locale} format)"))

    rows.sort(key=lambda r: (r[0], r[1]))
    with open(DATA_DIR / "registry.tsv", "w", encoding="utf-8") as fh:
        fh.write("# locale\ttype\tlocale_specific\ttemplate_id\tdescription\n")
        for locale, pii_type, flag, tid, desc in rows:
            fh.write(f"{locale}\t{pii_type}\t{flag}\t{tid}\t{desc}\n")

    with open(DATA_DIR / "templates.tsv", "w", encoding="utf-8") as fh:
        fh.write("# template_id\tpattern\n")
        for tid in sorted(templates):
            fh.write(f"{tid}\t{templates[tid]}\n")

    counts = {loc: sum(1 for r in rows if r[0] == loc) for loc in LOCALES}
    with open(DATA_DIR / "registry_manifest.tsv", "w", encoding="utf-8") as fh:
        fh.write("# locale\tentry_count\n")
        for loc in LOCALES:
            fh.write(f"{loc}\t{counts[loc]}\n")
        fh.write(f"TOTAL\t{sum(counts.values())}\n")

    print(f"{len(rows)} registry entries, {len(templates)} templates")


if __name__ == "__main__":
    main()
