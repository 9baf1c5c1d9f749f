import numpy as np
import pytest

from glyphforge.boxfile import Unicharset
from glyphforge.errors import BundleError, EmptyTrainingSetError, FormatError
from glyphforge.features import GlyphFeatures, TrainingFile
from glyphforge.lexicon import AmbigRule, AmbigTable
from glyphforge.training import (
    ClassFrequencies,
    NormProtos,
    PrototypeSet,
    Prototype,
    assemble_bundle,
    cluster_cn,
    cluster_micro,
    count_frequencies,
    dump_frequencies,
    dump_normprotos,
    dump_prototypes,
    lloyd,
    load_bundle,
    load_frequencies,
    load_normprotos,
    load_prototypes,
    prototype_budget,
    train_bundle,
)
from oracles import lloyd_reference


def _tf(entries):
    return TrainingFile(
        entries=[
            (
                g,
                GlyphFeatures(
                    micro=np.asarray(micro, dtype=np.float32),
                    cn=np.asarray(cn, dtype=np.float32),
                ),
            )
            for g, micro, cn in entries
        ]
    )


def _vec(value, dim=128):
    return np.full(dim, value, dtype=np.float64)


class TestPrototypeBudget:
    def test_caps(self):
        assert prototype_budget(10) == 1
        assert prototype_budget(21) == 2
        assert prototype_budget(1000) == 8
        assert prototype_budget(1000, k_max=3) == 3
        assert prototype_budget(1) == 1


class TestClusterMicro:
    def test_identical_vectors_single_prototype(self):
        tf = _tf([("7", _vec(0.25), _vec(0, 8)) for _ in range(10)])
        ps = cluster_micro([tf], k_max=1, seed=0)
        protos = ps.classes["7"]
        assert len(protos) == 1
        assert protos[0].weight == 10
        assert np.allclose(protos[0].centroid, 0.25, atol=1e-7)

    def test_planted_two_clusters_recovered(self):
        # 5-sigma separation; recovery judged per dimension against 0.1 sigma
        rng = np.random.default_rng(99)
        d, n, sigma = 128, 5000, 0.05
        mu1, mu2 = np.zeros(d), np.zeros(d)
        mu2[0] = 5 * sigma
        pts = np.concatenate(
            [rng.normal(mu1, sigma, size=(n, d)), rng.normal(mu2, sigma, size=(n, d))]
        )
        tf = _tf([("0", p, np.zeros(8)) for p in pts])
        ps = cluster_micro([tf], k_max=2, seed=3)
        centroids = np.stack([p.centroid for p in ps.classes["0"]])
        assert len(centroids) == 2
        for mu in (mu1, mu2):
            per_dim = np.abs(centroids - mu).max(axis=1).min()
            assert per_dim < 0.1 * sigma

    def test_deterministic_for_fixed_seed(self):
        rng = np.random.default_rng(7)
        entries = [
            (str(d), rng.random(128), np.zeros(8)) for d in range(3) for _ in range(30)
        ]
        a = cluster_micro([_tf(entries)], k_max=4, seed=11)
        b = cluster_micro([_tf(entries)], k_max=4, seed=11)
        assert a == b
        assert dump_prototypes(a) == dump_prototypes(b)
        c = cluster_micro([_tf(entries)], k_max=4, seed=12)
        assert dump_prototypes(a) != dump_prototypes(c)

    def test_weights_sum_to_class_count(self):
        rng = np.random.default_rng(8)
        entries = [("5", rng.random(128), np.zeros(8)) for _ in range(83)]
        ps = cluster_micro([_tf(entries)], k_max=8, seed=0)
        assert sum(p.weight for p in ps.classes["5"]) == 83

    def test_no_samples_is_error(self):
        with pytest.raises(EmptyTrainingSetError):
            cluster_micro([TrainingFile(entries=[])], seed=0)

    def test_matches_reference_lloyd(self):
        rng = np.random.default_rng(9)
        x = np.concatenate(
            [rng.normal(0, 0.1, (40, 16)), rng.normal(1, 0.1, (40, 16))]
        )
        init = np.stack([x[0], x[40]])
        ours, labels, history = lloyd(x, init)
        ref_centers, ref_labels = lloyd_reference(x, init)
        assert np.allclose(ours, ref_centers)
        assert np.array_equal(labels, ref_labels)

    def test_objective_nonincreasing_and_fixed_point(self):
        rng = np.random.default_rng(10)
        x = rng.random((120, 12))
        init = x[rng.choice(120, size=5, replace=False)]
        centers, labels, history = lloyd(x, init)
        assert all(a >= b - 1e-12 for a, b in zip(history, history[1:]))
        from glyphforge import kernels

        again, _ = kernels.assign_nearest(x, centers)
        assert np.array_equal(again, labels)

    def test_empty_cluster_reseeded_to_far_point(self):
        # two duplicate centers guarantee one starts empty; it must claim
        # the farthest point instead of dying
        x = np.array([[0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [5.0, 5.0]])
        init = np.array([[0.0, 0.0], [0.0, 0.0]])
        centers, labels, history = lloyd(x, init)
        counts = np.bincount(labels, minlength=2)
        assert (counts > 0).all()
        assert any(np.allclose(c, [5.0, 5.0]) for c in centers)
        assert all(a >= b - 1e-12 for a, b in zip(history, history[1:]))


class TestClusterCn:
    def test_two_point_statistics(self):
        tf = _tf([("3", _vec(0), _vec(0, 8)), ("3", _vec(0), _vec(2, 8))])
        protos = cluster_cn([tf])
        mean, var = protos.classes["3"]
        assert np.allclose(mean, 1.0)
        assert np.allclose(var, 1.0)

    def test_single_sample_variance_floor(self):
        tf = _tf([("9", _vec(0), _vec(0.5, 8))])
        mean, var = cluster_cn([tf]).classes["9"]
        assert np.allclose(mean, 0.5)
        assert np.allclose(var, 1e-4)

    def test_standard_normal_statistics(self):
        rng = np.random.default_rng(55)
        tf = _tf([("1", _vec(0), rng.normal(0, 1, 8)) for _ in range(1000)])
        mean, var = cluster_cn([tf]).classes["1"]
        assert np.abs(mean).max() < 0.1
        assert np.abs(var - 1.0).max() < 0.15


def _toy_bundle(out_dir=None, lang="num"):
    rng = np.random.default_rng(77)
    entries = [(str(d), rng.random(128), rng.random(8)) for d in range(10) for _ in range(3)]
    tf = _tf(entries)
    uni = Unicharset(entries=[(str(d), True, 3) for d in range(10)])
    return train_bundle(
        lang,
        [tf],
        uni,
        freq_words=["12", "42"],
        words=["1", "2", "123"],
        user_words=["7"],
        ambigs=AmbigTable(rules=[AmbigRule(("1",), ("7",), False)]),
        seed=5,
        out_dir=out_dir,
    )


class TestBundle:
    def test_assemble_writes_eight_prefixed_files(self, tmp_path):
        _toy_bundle(out_dir=tmp_path / "tessdata")
        names = sorted(p.name for p in (tmp_path / "tessdata").iterdir())
        expected = sorted(
            f"num.{part}"
            for part in (
                "unicharset",
                "inttemp",
                "normproto",
                "pffmtable",
                "freq-dawg",
                "word-dawg",
                "user-words",
                "DangAmbigs",
            )
        )
        assert [n for n in names if not n.endswith("README.txt")] == expected

    def test_roundtrip_lossless(self, tmp_path):
        bundle = _toy_bundle(out_dir=tmp_path / "td")
        loaded = load_bundle(tmp_path / "td", "num")
        assert loaded.unicharset == bundle.unicharset
        assert loaded.prototypes == bundle.prototypes
        assert loaded.normprotos == bundle.normprotos
        assert loaded.frequencies == bundle.frequencies
        assert loaded.freq_dawg == bundle.freq_dawg
        assert loaded.word_dawg == bundle.word_dawg
        assert loaded.user_words == bundle.user_words
        assert loaded.ambigs == bundle.ambigs

    def test_missing_component_named(self, tmp_path):
        bundle = _toy_bundle()
        with pytest.raises(BundleError) as err:
            assemble_bundle(
                "num",
                unicharset=bundle.unicharset,
                prototypes=bundle.prototypes,
                normprotos=None,
                frequencies=bundle.frequencies,
                freq_dawg=bundle.freq_dawg,
                word_dawg=bundle.word_dawg,
                user_words=bundle.user_words,
                ambigs=bundle.ambigs,
            )
        assert "normproto" in str(err.value)

    def test_missing_file_on_load_named(self, tmp_path):
        _toy_bundle(out_dir=tmp_path / "td")
        (tmp_path / "td" / "num.pffmtable").unlink()
        with pytest.raises(BundleError) as err:
            load_bundle(tmp_path / "td", "num")
        assert "pffmtable" in str(err.value)

    def test_bad_lang_code(self):
        bundle = _toy_bundle()
        for bad in ("n", "nums", "NUM", "n1m"):
            with pytest.raises(BundleError):
                assemble_bundle(
                    bad,
                    unicharset=bundle.unicharset,
                    prototypes=bundle.prototypes,
                    normprotos=bundle.normprotos,
                    frequencies=bundle.frequencies,
                    freq_dawg=bundle.freq_dawg,
                    word_dawg=bundle.word_dawg,
                    user_words=bundle.user_words,
                    ambigs=bundle.ambigs,
                )

    def test_empty_dictionaries_allowed(self, tmp_path):
        rng = np.random.default_rng(78)
        tf = _tf([("1", rng.random(128), rng.random(8))])
        uni = Unicharset(entries=[("1", True, 1)])
        bundle = train_bundle("abc", [tf], uni, out_dir=tmp_path)
        loaded = load_bundle(tmp_path, "abc")
        assert loaded.freq_dawg.words() == []
        assert len(loaded.ambigs) == 0

    def test_geometry_header_checked(self):
        ps = PrototypeSet(classes={"1": [Prototype(np.zeros(128), 1)]})
        data = bytearray(dump_prototypes(ps))
        data[8] = 16  # claim a 16-cell grid
        with pytest.raises(FormatError) as err:
            load_prototypes(bytes(data))
        assert "geometry" in str(err.value)

    def test_part_streams_reject_corruption(self):
        ps = PrototypeSet(classes={"1": [Prototype(np.zeros(128), 1)]})
        np_protos = NormProtos(classes={"1": (np.zeros(8), np.ones(8))})
        freqs = ClassFrequencies(counts={"1": 3})
        for dump, load in (
            (lambda: dump_prototypes(ps), load_prototypes),
            (lambda: dump_normprotos(np_protos), load_normprotos),
            (lambda: dump_frequencies(freqs), load_frequencies),
        ):
            data = dump()
            with pytest.raises(FormatError):
                load(data[:-3])
            with pytest.raises(FormatError):
                load(b"XXXX" + data[4:])

    def test_frequencies_total(self):
        rng = np.random.default_rng(79)
        entries = [(str(d), rng.random(128), rng.random(8)) for d in range(4) for _ in range(6)]
        freqs = count_frequencies([_tf(entries)])
        assert freqs.total() == 24
