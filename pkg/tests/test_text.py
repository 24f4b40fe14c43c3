import logging
import math

import pytest
from hypothesis import given, strategies as st

from hmatranslit.text import (
    Alphabet, CharSubstitution, DataError, ForeignVocab, NameDictionary, NamePair,
    build_alphabet, consonant_token, cv_join, cv_split, is_cv_token, load_dictionary,
    load_name_pairs, load_vocab, mean_length_ratio, normalize, render_cv, vowel_token,
    write_name_pairs,
)

# decomposed sequence -> precomposed codepoint, typed from the Unicode tables
COMPOSED = [
    ("e\u0301", "\u00e9"), ("a\u0300", "\u00e0"), ("o\u0308", "\u00f6"), ("u\u0308", "\u00fc"),
    ("n\u0303", "\u00f1"), ("c\u0327", "\u00e7"), ("a\u030a", "\u00e5"), ("i\u0302", "\u00ee"),
    ("s\u030c", "\u0161"), ("z\u030c", "\u017e"), ("g\u0306", "\u011f"), ("a\u0304", "\u0101"),
    ("E\u0301", "\u00c9"), ("O\u0303", "\u00d5"), ("\u0928\u093c", "\u0929"),
    ("\u0930\u093c", "\u0931"), ("\u0627\u0653", "\u0622"), ("\u0430\u0306", "\u04d1"),
    ("\u0435\u0308", "\u0451"), ("\u1100\u1161", "\uac00"),
]


@pytest.mark.parametrize("decomposed,composed", COMPOSED)
def test_normalize_composes(decomposed, composed):
    assert normalize(decomposed) == composed


@given(st.text(alphabet=st.characters(blacklist_categories=("Cs", "Zs", "Zl", "Zp", "Cc")), min_size=1))
def test_normalize_idempotent(word):
    try:
        once = normalize(word, "target")
    except DataError:
        return
    assert normalize(once, "target") == once


def test_normalize_strips_and_lowercases_target_only():
    assert normalize("  Obama\n", "target") == "obama"
    assert normalize("Obama", "source") == "Obama"


@pytest.mark.parametrize("raw", ["", "   ", "\t"])
def test_normalize_rejects_empty(raw):
    with pytest.raises(DataError):
        normalize(raw)


def test_normalize_rejects_internal_space():
    with pytest.raises(DataError):
        normalize("barack obama", "target")


@given(st.lists(st.text(alphabet="abcdefgxyzαβγ", min_size=1, max_size=8), min_size=1, max_size=10))
def test_alphabet_roundtrip(words):
    alpha = build_alphabet(words)
    assert list(alpha.symbols) == sorted(alpha.symbols)
    for w in words:
        ids = alpha.encode(w)
        assert all(0 <= i < len(alpha) for i in ids)
        assert "".join(alpha.symbols[i] for i in ids) == w


def test_alphabet_unknown_and_empty():
    alpha = build_alphabet(["ab"])
    assert alpha.encode("az") == [0, alpha.unk_id]
    assert alpha.size == 3
    with pytest.raises(ValueError):
        build_alphabet([])
    with pytest.raises(ValueError):
        Alphabet.from_symbols("aa")


def test_name_pair_validation():
    with pytest.raises(DataError):
        NamePair("", "x")
    with pytest.raises(DataError):
        NamePair("a", "x", "alien")


def test_dictionary_and_vocab_normalize():
    d = NameDictionary(["Obama", "obama", "Vidyul"])
    assert len(d) == 2 and "obama" in d and "vidyul" in d
    v = ForeignVocab(["ab", "ab", "ba"])
    assert list(v) == ["ab", "ba"]


# --- CV split -----------------------------------------------------------------------


def test_cv_split_examples():
    # two syllables from the same consonant row with different vowels
    ta, ti = cv_split("ጠ"), cv_split("ጢ")
    assert ta[0] == ti[0] and ta[1] != ti[1]
    assert render_cv(ta) == "C36 V0"
    assert render_cv(ti) == "C36 V2"


def test_cv_split_whole_block_exhaustive():
    seen = {}
    for code in range(0x1200, 0x1380):
        split = cv_split(chr(code))
        offset = code - 0x1200
        assert split == consonant_token(offset // 8) + vowel_token(offset % 8)
        assert split not in seen
        seen[split] = code
        assert cv_join(split) == chr(code)
    tokens = {ch for s in seen for ch in s}
    assert len(tokens) == 48 + 8


def test_cv_split_passthrough_and_mixed():
    assert cv_split("abc") == "abc"
    word = "aለbጠ"
    split = cv_split(word)
    assert len(split) == 6
    assert cv_join(split) == word
    assert not any(is_cv_token(ch) for ch in "abለ")


@given(st.text(alphabet=st.sampled_from([chr(c) for c in range(0x1200, 0x1380)] + list("xyz-")), max_size=12))
def test_cv_split_inverse(word):
    assert cv_join(cv_split(word)) == word


def test_cv_join_rejects_dangling_consonant():
    with pytest.raises(ValueError):
        cv_join(consonant_token(3))


def test_char_substitution_swaps_simultaneously():
    swap = CharSubstitution({"ղ": "գ", "գ": "ղ", "ւո": "ու"})
    assert swap("ղգ") == "գղ"
    assert swap("ւո") == "ու"
    assert swap("abc") == "abc"


def test_char_substitution_load(tmp_path):
    p = tmp_path / "map.tsv"
    p.write_text("a\tb\nb\ta\n", encoding="utf-8")
    assert CharSubstitution.load(p)("abba") == "baab"
    p.write_text("a\n", encoding="utf-8")
    with pytest.raises(DataError):
        CharSubstitution.load(p)


@given(st.lists(st.tuples(st.text("ab", min_size=1, max_size=9), st.text("xy", min_size=1, max_size=9)),
                min_size=1, max_size=30))
def test_mean_length_ratio_matches_fsum(raw):
    pairs = [NamePair(s, t) for s, t in raw]
    expected = math.fsum(len(t) / len(s) for s, t in raw) / len(raw)
    assert mean_length_ratio(pairs) == pytest.approx(expected, rel=1e-12)


# --- loaders --------------------------------------------------------------------------


def test_load_name_pairs(tmp_path, caplog):
    p = tmp_path / "pairs.tsv"
    p.write_text(
        "ओबामा\tObama\tforeign\n"
        "\n"
        "बराक ओबामा\tBarack Obama\n"
        "एक दो\tone\n"
        "ओबामा\tobama\n"
        "विदुल\tvidul\t\tvidyul\n",
        encoding="utf-8",
    )
    with caplog.at_level(logging.WARNING):
        pairs = load_name_pairs(p)
    assert [(q.source, q.target) for q in pairs] == [
        ("ओबामा", "obama"), ("बराक", "barack"), ("विदुल", "vidul"), ("विदुल", "vidyul"),
    ]
    assert pairs[0].origin_tag == "foreign"
    assert "blank line" in caplog.text and "token count mismatch" in caplog.text


def test_load_name_pairs_errors(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("ok\tfine\nonlyone\n", encoding="utf-8")
    with pytest.raises(DataError, match=":2:"):
        load_name_pairs(p)
    with pytest.raises(DataError):
        load_name_pairs(tmp_path / "missing.tsv")


def test_load_name_pairs_source_transform(tmp_path):
    p = tmp_path / "pairs.tsv"
    p.write_text("ጠጢ\ttati\n", encoding="utf-8")
    (pair,) = load_name_pairs(p, cv_split)
    assert pair.source == cv_split("ጠጢ")


def test_write_read_roundtrip(tmp_path):
    pairs = [NamePair("ab", "x", "native"), NamePair("ba", "yy")]
    p = tmp_path / "out.tsv"
    write_name_pairs(p, pairs)
    assert load_name_pairs(p) == pairs


def test_load_word_lists(tmp_path):
    d = tmp_path / "dict.txt"
    d.write_text("Obama\nobama\n\nVidyul\n", encoding="utf-8")
    assert sorted(load_dictionary(d)) == ["obama", "vidyul"]
    v = tmp_path / "vocab.txt"
    v.write_text("ab\nab\ncd\n", encoding="utf-8")
    assert list(load_vocab(v)) == ["ab", "cd"]
