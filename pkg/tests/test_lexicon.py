import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glyphforge.errors import DataError, FormatError, ParseError
from glyphforge.lexicon import (
    AmbigRule,
    AmbigTable,
    build_dawg,
    load_dawg,
    parse_ambigs,
    parse_wordlist,
    serialize_dawg,
    write_ambigs,
    write_wordlist,
)
from oracles import trie_minimal_states

digit_words = st.lists(st.text("0123456789", min_size=1, max_size=8), max_size=60)


class TestBuildDawg:
    def test_empty_language(self):
        d = build_dawg([])
        assert "1" not in d
        assert "" not in d
        assert d.words() == []
        assert len(d) == 1

    def test_small_example(self):
        d = build_dawg(["1", "12", "13"])
        assert all(w in d for w in ("1", "12", "13"))
        assert "2" not in d and "123" not in d and "" not in d
        assert len(d) == trie_minimal_states(["1", "12", "13"]) == 3

    def test_duplicates_deduplicated(self):
        d = build_dawg(["42", "42", "42"])
        assert d.words() == ["42"]

    def test_membership_against_set_oracle(self):
        rng = np.random.default_rng(51)
        words = {
            "".join(str(x) for x in rng.integers(0, 10, size=rng.integers(1, 9)))
            for _ in range(500)
        }
        d = build_dawg(sorted(words))
        for _ in range(10_000):
            probe = "".join(str(x) for x in rng.integers(0, 10, size=rng.integers(1, 9)))
            assert (probe in d) == (probe in words)

    def test_minimality_equals_trie_oracle(self):
        rng = np.random.default_rng(52)
        for _ in range(25):
            words = [
                "".join(str(x) for x in rng.integers(0, 10, size=rng.integers(1, 8)))
                for _ in range(rng.integers(1, 120))
            ]
            assert len(build_dawg(words)) == trie_minimal_states(words)

    @given(digit_words)
    @settings(max_examples=150, deadline=None)
    def test_language_equals_dedup_input(self, words):
        d = build_dawg(words)
        assert d.words() == sorted(set(words))
        assert len(d) == trie_minimal_states(words)

    def test_alphabet_violation_names_word(self):
        with pytest.raises(DataError) as err:
            build_dawg(["12", "1a"], alphabet=set("0123456789"))
        assert "1a" in str(err.value)

    def test_empty_word_accepted_at_root(self):
        d = build_dawg(["", "1"])
        assert "" in d and "1" in d


class TestDawgSerialization:
    def test_roundtrip_language_and_state_count(self):
        d = build_dawg(["1", "12", "13"])
        loaded = load_dawg(serialize_dawg(d))
        assert loaded == d
        assert len(loaded) == len(d)
        assert loaded.words() == d.words()

    def test_empty_language_roundtrip(self):
        d = build_dawg([])
        assert load_dawg(serialize_dawg(d)).words() == []

    def test_truncated_stream(self):
        data = serialize_dawg(build_dawg(["123", "456"]))
        for cut in (0, 3, 10, len(data) - 1):
            with pytest.raises(FormatError):
                load_dawg(data[:cut])

    def test_trailing_garbage(self):
        data = serialize_dawg(build_dawg(["1"]))
        with pytest.raises(FormatError):
            load_dawg(data + b"x")

    def test_bad_magic_and_version(self):
        data = bytearray(serialize_dawg(build_dawg(["1"])))
        bad = bytes(b"XXXX") + bytes(data[4:])
        with pytest.raises(FormatError):
            load_dawg(bad)
        data[4] = 99
        with pytest.raises(FormatError):
            load_dawg(bytes(data))

    @given(digit_words)
    @settings(max_examples=60, deadline=None)
    def test_roundtrip_random(self, words):
        d = build_dawg(words)
        assert load_dawg(serialize_dawg(d)) == d


class TestWordlist:
    def test_basic(self):
        assert parse_wordlist(b"12\n7\n") == ["12", "7"]

    def test_empty(self):
        assert parse_wordlist(b"") == []

    def test_trim_and_blank_skip(self):
        assert parse_wordlist(b"  42  \n\n") == ["42"]

    def test_invalid_utf8_reports_offset(self):
        with pytest.raises(ParseError) as err:
            parse_wordlist(b"12\n\xff9\n")
        assert "byte 3" in str(err.value)

    def test_write_roundtrip(self):
        words = ["1", "22", "333"]
        assert parse_wordlist(write_wordlist(words)) == words


class TestAmbigs:
    def test_empty_file_is_valid(self):
        assert len(parse_ambigs(b"")) == 0

    def test_single_rule_optional(self):
        table = parse_ambigs(b"1 O 1 0\n")
        assert table.rules == [AmbigRule(("O",), ("0",), False)]

    def test_multiglyph_source(self):
        table = parse_ambigs(b"2 l l 1 1")
        assert table.rules == [AmbigRule(("l", "l"), ("1",), False)]

    def test_mandatory_flag(self):
        table = parse_ambigs(b"1 O 1 0 1\n1 S 1 5 0\n")
        assert table.rules[0].mandatory is True
        assert table.rules[1].mandatory is False

    def test_malformed_counts_report_line(self):
        with pytest.raises(ParseError) as err:
            parse_ambigs(b"1 O 1 0\n3 a b 1 c\n")
        assert err.value.line == 2
        with pytest.raises(ParseError):
            parse_ambigs(b"0 1 x\n")
        with pytest.raises(ParseError):
            parse_ambigs(b"1 O 1 0 5\n")
        with pytest.raises(ParseError):
            parse_ambigs(b"1 O 1 0 1 junk\n")

    def test_write_roundtrip(self):
        table = AmbigTable(
            rules=[
                AmbigRule(("O",), ("0",), False),
                AmbigRule(("l", "l"), ("1", "1"), True),
            ]
        )
        assert parse_ambigs(write_ambigs(table)) == table
