import numpy as np
import pytest

from glyphforge.boxfile import Unicharset
from glyphforge.errors import DataError
from glyphforge.features import GlyphFeatures, build_training_file
from glyphforge.lexicon import AmbigRule, AmbigTable, build_dawg
from glyphforge.boxfile import extract_unicharset
from glyphforge.raster import Bitmap
from glyphforge.recognize import (
    REJECT,
    classify_glyph,
    propose_boxes,
    recognize_page,
    to_box_page,
    _suggest,
)
from glyphforge.synth import KNOWN_WRITERS, PRISTINE_WRITER, render_page
from glyphforge.training import (
    ClassFrequencies,
    LangBundle,
    NormProtos,
    Prototype,
    PrototypeSet,
    train_bundle,
)


def _unit(index, dim=128):
    v = np.zeros(dim)
    v[index] = 1.0
    return v


def _manual_bundle(freqs=None):
    """Three classes with orthogonal unit prototypes and equal cn stats."""
    classes = ["1", "2", "3"]
    protos = PrototypeSet(
        classes={g: [Prototype(_unit(i), 10)] for i, g in enumerate(classes)}
    )
    normp = NormProtos(
        classes={g: (np.zeros(8), np.ones(8)) for g in classes}
    )
    freqs = ClassFrequencies(counts=freqs or {g: 10 for g in classes})
    empty = build_dawg([])
    return LangBundle(
        lang_code="num",
        unicharset=Unicharset(entries=[(g, True, 10) for g in classes]),
        prototypes=protos,
        normprotos=normp,
        frequencies=freqs,
        freq_dawg=empty,
        word_dawg=empty,
        user_words=empty,
        ambigs=AmbigTable(),
    )


def _feats(micro, cn=None):
    return GlyphFeatures(
        micro=np.asarray(micro, dtype=np.float32),
        cn=np.zeros(8, np.float32) if cn is None else np.asarray(cn, np.float32),
    )


class TestClassifyGlyph:
    def test_exact_prototype_match(self):
        bundle = _manual_bundle()
        cls = classify_glyph(_feats(_unit(2)), bundle)
        assert cls.label == "3"
        assert cls.distance == 0.0
        assert cls.alternatives[0] == ("3", 0.0)

    def test_all_zero_micro_rejected(self):
        cls = classify_glyph(_feats(np.zeros(128)), _manual_bundle())
        assert cls.label == REJECT
        assert cls.rejected

    def test_equidistant_tie_broken_by_frequency(self):
        bundle = _manual_bundle(freqs={"1": 100, "2": 50, "3": 50})
        probe = (_unit(0) + _unit(1)) / np.linalg.norm(_unit(0) + _unit(1))
        cls = classify_glyph(_feats(probe), bundle)
        assert cls.label == "1"

    def test_equal_frequency_tie_broken_by_codepoint(self):
        bundle = _manual_bundle(freqs={"1": 50, "2": 50, "3": 50})
        probe = (_unit(1) + _unit(2)) / np.linalg.norm(_unit(1) + _unit(2))
        assert classify_glyph(_feats(probe), bundle).label == "2"

    def test_distance_above_threshold_rejected(self):
        bundle = _manual_bundle()
        probe = np.ones(128) / np.sqrt(128.0)
        cls = classify_glyph(_feats(probe), bundle, reject_threshold=0.5)
        assert cls.label == REJECT
        assert cls.distance > 0.5
        assert cls.alternatives  # candidates still reported

    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(61)
        bundle = _manual_bundle()
        for _ in range(50):
            v = rng.random(128)
            v /= np.linalg.norm(v)
            accepted_at = [
                t
                for t in (0.2, 0.5, 0.8, 1.1, 1.4)
                if not classify_glyph(_feats(v), bundle, reject_threshold=t).rejected
            ]
            # once accepted, raising the threshold keeps it accepted
            assert accepted_at == [t for t in (0.2, 0.5, 0.8, 1.1, 1.4) if t >= (accepted_at[0] if accepted_at else 99)]

    def test_weight_scaling_leaves_labels_unchanged(self):
        rng = np.random.default_rng(62)
        bundle = _manual_bundle()
        scaled = _manual_bundle()
        for protos in scaled.prototypes.classes.values():
            for p in protos:
                p.weight *= 7
        scaled.frequencies = ClassFrequencies(
            counts={g: n * 7 for g, n in bundle.frequencies.counts.items()}
        )
        for _ in range(40):
            v = rng.random(128)
            v /= np.linalg.norm(v)
            assert (
                classify_glyph(_feats(v), bundle).label
                == classify_glyph(_feats(v), scaled).label
            )

    def test_pruner_keeps_top_classes_only(self):
        # put class "3" far away in cn space: it must not survive a P=2 prune
        bundle = _manual_bundle()
        bundle.normprotos.classes["3"] = (np.full(8, 50.0), np.ones(8))
        cls = classify_glyph(_feats(_unit(2)), bundle, pruner_keep=2)
        assert cls.label != "3"

    def test_dimension_mismatch(self):
        with pytest.raises(DataError):
            classify_glyph(
                GlyphFeatures(micro=np.zeros(64, np.float32), cn=np.zeros(8, np.float32)),
                _manual_bundle(),
            )


def _trained_pristine():
    bitmap, boxes = render_page("0123456789", PRISTINE_WRITER)
    tf, _ = build_training_file(bitmap, boxes)
    bundle = train_bundle("num", [tf], extract_unicharset([boxes]), seed=0)
    return bitmap, boxes, bundle


class TestRecognizePage:
    def test_blank_page(self):
        bundle = _manual_bundle()
        result = recognize_page(Bitmap(np.zeros((40, 40), np.uint8)), bundle)
        assert result.lines == []
        assert result.text == ""

    def test_self_consistency_on_prototype_page(self):
        bitmap, boxes, bundle = _trained_pristine()
        result = recognize_page(bitmap, bundle)
        labels = [it.classification.label for line in result.lines for it in line.items]
        assert labels == [rec.glyph for rec in boxes.records]
        assert all(
            it.classification.distance < 1e-6
            for line in result.lines
            for it in line.items
        )
        assert REJECT not in labels

    def test_perturbed_page_mostly_correct(self):
        rng = np.random.default_rng(63)
        writer = KNOWN_WRITERS[0]
        train_pages = [render_page("0123456789" * 4, writer, rng) for _ in range(3)]
        trs = []
        all_boxes = []
        for bm, boxes in train_pages:
            tf, _ = build_training_file(bm, boxes)
            trs.append(tf)
            all_boxes.append(boxes)
        bundle = train_bundle("num", trs, extract_unicharset(all_boxes), seed=1)
        test_bm, test_boxes = render_page("0123456789" * 5, writer, rng)
        result = recognize_page(test_bm, bundle)
        from glyphforge.evaluate import match_boxes

        counts = match_boxes(test_boxes, result).counts
        assert counts.c_t >= 45

    def test_text_excludes_rejections(self):
        bitmap, _, bundle = _trained_pristine()
        result = recognize_page(bitmap, bundle, reject_threshold=0.0)
        # even with everything rejected, structure remains
        assert all(
            it.classification.rejected or it.classification.distance == 0.0
            for line in result.lines
            for it in line.items
        )
        accepted = [
            it.classification.label
            for line in result.lines
            for it in line.items
            if not it.classification.rejected
        ]
        assert "".join(result.text.split("\n")) == "".join(accepted)


class TestSuggestions:
    def test_single_rule_rewrite_to_freq_hit(self):
        bundle = _manual_bundle()
        bundle.freq_dawg = build_dawg(["71"])
        bundle.ambigs = AmbigTable(rules=[AmbigRule(("7",), ("1",), False)])
        assert _suggest("77", bundle) == "71"

    def test_no_suggestion_when_text_in_dawg(self):
        bundle = _manual_bundle()
        bundle.word_dawg = build_dawg(["12"])
        bundle.freq_dawg = build_dawg(["13"])
        bundle.ambigs = AmbigTable(rules=[AmbigRule(("2",), ("3",), False)])
        assert _suggest("12", bundle) is None

    def test_no_rule_applies(self):
        bundle = _manual_bundle()
        bundle.freq_dawg = build_dawg(["99"])
        bundle.ambigs = AmbigTable(rules=[AmbigRule(("0",), ("9",), False)])
        assert _suggest("12", bundle) is None


class TestBoxOutputs:
    def test_to_box_page_maps_rejects_to_placeholder(self):
        bitmap, boxes, bundle = _trained_pristine()
        result = recognize_page(bitmap, bundle, reject_threshold=-1.0)
        page = to_box_page(result)
        assert len(page.records) == len(boxes.records)
        assert all(rec.glyph == "?" for rec in page.records)

    def test_propose_boxes_without_bundle(self):
        bitmap, boxes, _ = _trained_pristine()
        page = propose_boxes(bitmap, None)
        assert len(page.records) == len(boxes.records)
        assert all(rec.glyph == "?" for rec in page.records)
        assert [(r.left, r.bottom, r.right, r.top) for r in page.records] == [
            (r.left, r.bottom, r.right, r.top) for r in boxes.records
        ]

    def test_propose_boxes_with_bundle_labels(self):
        bitmap, boxes, bundle = _trained_pristine()
        page = propose_boxes(bitmap, bundle)
        assert [r.glyph for r in page.records] == [r.glyph for r in boxes.records]
