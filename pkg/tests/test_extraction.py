"""Tests for the regex-based record extractor used by the map stage."""

from dataclasses import replace
from pathlib import Path

from matnav.evidence import Chunk, RankedChunk, merge_records, normalize_material
from matnav.pipeline.extraction import DEFAULT_PATTERNS, RegexExtractor

CORPUS_DIR = Path(__file__).resolve().parents[1] / "src" / "matnav" / "fixtures" / "corpus"


def _chunk(text: str) -> Chunk:
    return Chunk(doc_id="doc", start=0, text=text)


def _extract(text: str):
    return RegexExtractor()([_chunk(text)])


class TestDefaultPatterns:
    def test_verb_phrase_form(self):
        # "has / exhibits / shows a Debye temperature of <val> K"
        for verb in ("has", "exhibits", "shows"):
            recs = _extract(f"Cu {verb} a Debye temperature of 343 K, the textbook value.")
            assert len(recs) == 1
            rec = recs[0]
            assert rec.material == "Cu"
            assert rec.value == 343.0
            assert rec.unit == "K"
            assert rec.property_name == "debye_temperature"

    def test_of_phrase_form(self):
        cases = [
            ("The Debye temperature of MgB2 reaches 748 K.", "MgB2", 748.0),
            ("The Debye temperature of GaAs was measured at 360 K.", "GaAs", 360.0),
            ("The Debye temperature of InSe is about 190 K.", "InSe", 190.0),
            ("The Debye temperature of TiO2 is approximately 760 K.", "TiO2", 760.0),
        ]
        for text, material, value in cases:
            recs = _extract(text)
            assert [(r.material, r.value) for r in recs] == [(material, value)]

    def test_parenthetical_form(self):
        recs = _extract("A duplicate determination reads: (Theta_D = 470 K was found for a pure Fe).")
        assert [(r.material, r.value) for r in recs] == [("Fe", 470.0)]

    def test_material_names_keep_qualifiers(self):
        # Downstream normalization, not the extractor, resolves these.
        recs = _extract("alpha-W has a Debye temperature of 400 K.")
        assert recs[0].material == "alpha-W"
        recs = _extract("C (diamond) exhibits a Debye temperature of 2230 K.")
        assert recs[0].material == "C (diamond)"

    def test_decimal_values(self):
        recs = _extract("CaF2 has a Debye temperature of 508.5 K.")
        assert recs[0].value == 508.5

    def test_snippet_is_the_matched_text(self):
        recs = _extract("Pb exhibits a Debye temperature of 105 K, the softest case.")
        assert recs[0].source_snippet == "Pb exhibits a Debye temperature of 105 K"

    def test_leading_prose_lands_in_the_material_name(self):
        # The material group matches from the earliest viable offset, so
        # prose running into the sentence is captured too. The downstream
        # normalizer flags such names unresolvable instead of guessing.
        recs = _extract("In this study Pb exhibits a Debye temperature of 105 K.")
        assert recs[0].material == "In this study Pb"
        names = normalize_material(recs[0].material)
        assert not any(n.resolved for n in names)

    def test_prose_without_measurements_yields_nothing(self):
        text = (
            "Stiff bonding raises sound velocities even in dense metals, and "
            "the Debye model compresses that scale into a single temperature."
        )
        assert _extract(text) == []

    def test_multiple_sentences_in_one_chunk(self):
        text = (
            "Pb exhibits a Debye temperature of 105 K, the softest lattice here.\n"
            "The Debye temperature of GaAs was measured at 360 K.\n"
        )
        recs = _extract(text)
        assert sorted((r.material, r.value) for r in recs) == [("GaAs", 360.0), ("Pb", 105.0)]


class TestExtractorPlumbing:
    def test_ranked_chunks_are_unwrapped(self):
        chunk = _chunk("Cu exhibits a Debye temperature of 343 K.")
        plain = RegexExtractor()([chunk])
        ranked = RegexExtractor()([RankedChunk(chunk=chunk, score=0.7)])
        assert ranked == plain

    def test_property_name_and_unit_are_configurable(self):
        ex = RegexExtractor(
            property_name="melting_point",
            unit="C",
            patterns=(r"(?P<mat>[A-Z][a-z]?) melts at (?P<val>\d+) C",),
        )
        recs = ex([_chunk("W melts at 3422 C under argon.")])
        assert recs[0].property_name == "melting_point"
        assert recs[0].unit == "C"
        assert recs[0].value == 3422.0

    def test_default_patterns_all_name_both_groups(self):
        for pattern in DEFAULT_PATTERNS:
            assert "(?P<mat>" in pattern and "(?P<val>" in pattern


class TestBundledCorpus:
    def test_corpus_yields_twenty_two_raw_records(self):
        ex = RegexExtractor()
        recs = []
        for path in sorted(CORPUS_DIR.glob("*.txt")):
            recs += ex([Chunk(doc_id=path.name, start=0, text=path.read_text())])
        assert len(recs) == 22
        assert all(r.unit == "K" for r in recs)
        assert all(1.0 < r.value < 5000.0 for r in recs)

    def test_duplicate_determinations_merge_away(self):
        # Fe 470 K and Si 645 K each appear twice across the survey files.
        ex = RegexExtractor()
        recs = []
        by_doc = {}
        for path in sorted(CORPUS_DIR.glob("*.txt")):
            text = path.read_text()
            got = ex([Chunk(doc_id=path.name, start=0, text=text)])
            by_doc[path.name] = (text, got)
            recs += got
        normed = [
            replace(r, normalized=tuple(str(n) for n in normalize_material(r.material) if n.resolved))
            for r in recs
        ]
        merged = merge_records([normed])
        assert len(merged) == 20
        values = {(r.normalized, r.value) for r in merged}
        assert (("Fe",), 470.0) in values
        assert (("Si",), 645.0) in values

    def test_snippets_trace_back_to_their_documents(self):
        ex = RegexExtractor()
        for path in sorted(CORPUS_DIR.glob("*.txt")):
            text = path.read_text()
            for rec in ex([Chunk(doc_id=path.name, start=0, text=text)]):
                assert rec.source_snippet in text
