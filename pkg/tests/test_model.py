import pytest

from piiqa.model import (
    DATA_DIR,
    Registry,
    Span,
    SpanAnnotation,
    SpanOutOfBounds,
    TextMismatch,
    TypeNotInLocale,
    UnknownLabel,
    UnknownLocale,
    check_annotation,
    default_registry,
    normalize_label,
    validate_annotation,
)


@pytest.fixture(scope="module")
def reg() -> Registry:
    return default_registry()


class TestCanonicalType:
    def test_case_and_whitespace(self, reg):
        assert reg.canonical_type(" ssn ") == "SSN"
        assert reg.canonical_type("credit  debit\tnumber") == "CREDIT DEBIT NUMBER"

    def test_alias_table(self, reg):
        assert reg.canonical_type("CVV") == "CREDIT DEBIT CVV"
        assert reg.canonical_type("CREDIT/DEBIT NUMBER") == "CREDIT DEBIT NUMBER"
        assert reg.canonical_type("PAN") == "PAN ID"
        assert reg.canonical_type("phone number") == "PHONE"

    def test_unknown_label(self, reg):
        with pytest.raises(UnknownLabel):
            reg.canonical_type("FROBNICATOR ID")
        with pytest.raises(UnknownLabel):
            reg.canonical_type("   ")

    def test_idempotent(self, reg):
        for raw in ["CVV", " ssn ", "name", "EMAIL ADDRESS", "Pan"]:
            once = reg.canonical_type(raw)
            assert reg.canonical_type(once) == once


class TestCategories:
    def test_table_mappings(self, reg):
        assert reg.category_of("TIN") == "TAX NUMBER"
        assert reg.category_of("SSN") == "TAX NUMBER"
        assert reg.category_of("PAN ID") == "TAX NUMBER"
        assert reg.category_of("MAC ADDRESS") == "IP ADDRESS"
        assert reg.category_of("ADDRESS") == "ADDRESS"
        assert reg.category_of("LICENSE PLATE") == "VEHICLE NUMBER"
        assert reg.category_of("USERNAME") == "LOGIN INFO"
        assert reg.category_of("PASSWORD") == "LOGIN INFO"

    def test_total_and_surjective(self, reg):
        cats = {reg.category_of(t) for t in reg.types}
        assert cats == set(reg.categories)
        assert len(reg.categories) == 18

    def test_unknown_type(self, reg):
        with pytest.raises(UnknownLabel):
            reg.category_of("NOT A TYPE")


class TestLocaleRegistry:
    def test_hindi_national_cluster(self, reg):
        types = reg.registry_for("hi-IN")
        assert {"AADHAR ID", "PAN ID"} <= types
        assert "SSN" not in types and "TIN" not in types

    def test_polish_national_cluster(self, reg):
        assert {"NATIONAL ID", "SSN", "TIN"} <= reg.registry_for("pl-PL")
        assert "AADHAR ID" not in reg.registry_for("pl-PL")

    def test_unknown_locale(self, reg):
        with pytest.raises(UnknownLocale):
            reg.registry_for("en-XX")

    def test_locale_aliases(self, reg):
        assert reg.resolve_locale("ar-AFB").code == "ar-UAE"
        assert reg.resolve_locale("vi-VI").code == "vi-VN"
        assert reg.locale_group("nl-BE") == "nl"
        assert reg.locale_group("nl-NL") == "nl"

    def test_cardinality_matches_manifest(self, reg):
        total = reg.total_entries()
        assert 300 <= total <= 380
        manifest = {}
        for line in (DATA_DIR / "registry_manifest.tsv").read_text().splitlines():
            if line.startswith("#") or not line:
                continue
            key, count = line.split("\t")
            manifest[key] = int(count)
        assert manifest["TOTAL"] == total
        for code in reg.locales:
            assert manifest[code] == len(reg.entries[code])

    def test_every_entry_has_template(self, reg):
        for code, entries in reg.entries.items():
            for entry in entries.values():
                assert entry.template_id in reg.template_patterns, entry


class TestValidateAnnotation:
    def test_exact_slice_ok(self, reg):
        ann = SpanAnnotation(Span(0, 12), "NAME", "Jan Kowalski")
        assert check_annotation("Jan Kowalski", ann, "pl-PL", reg) is None

    def test_text_mismatch(self, reg):
        ann = SpanAnnotation(Span(0, 12), "NAME", "Jan")
        with pytest.raises(TextMismatch):
            validate_annotation("Jan Kowalski", ann, "pl-PL", reg)

    def test_inverted_span(self, reg):
        ann = SpanAnnotation(Span(5, 3), "NAME", "xx")
        with pytest.raises(SpanOutOfBounds):
            validate_annotation("Jan Kowalski", ann, "pl-PL", reg)

    def test_span_past_end(self, reg):
        ann = SpanAnnotation(Span(0, 99), "NAME", "Jan Kowalski")
        assert check_annotation("Jan Kowalski", ann, "pl-PL", reg) == "SpanOutOfBounds"

    def test_type_not_in_locale(self, reg):
        prompt = "id 1234 5678 9012"
        ann = SpanAnnotation(Span(3, 17), "AADHAR ID", "1234 5678 9012")
        with pytest.raises(TypeNotInLocale):
            validate_annotation(prompt, ann, "pl-PL", reg)
        assert check_annotation(prompt, ann, "hi-IN", reg) is None

    def test_multiscript_offsets_are_scalar_values(self, reg):
        # CJK and Devanagari both count one scalar value per character
        prompt = "用户 王小明 登录"
        ann = SpanAnnotation(Span(3, 6), "NAME", "王小明")
        assert check_annotation(prompt, ann, "zh-CN", reg) is None

    def test_reconstruction_lossless(self, reg):
        prompt = "कॉल करें: 123-456-7890 पर"
        start = prompt.index("123")
        ann = SpanAnnotation(Span(start, start + 12), "PHONE", "123-456-7890")
        validate_annotation(prompt, ann, "hi-IN", reg)
        assert prompt[ann.span.start:ann.span.end] == ann.text


def test_normalize_label():
    assert normalize_label("  foo   bar ") == "FOO BAR"
