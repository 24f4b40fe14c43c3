"""Alphabets, words, name-pair datasets and script utilities."""

from __future__ import annotations

import logging
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

log = logging.getLogger(__name__)

ORIGIN_TAGS = ("native", "foreign", "untagged")

# Ethiopic syllabary U+1200..U+137F
ETHIOPIC_START = 0x1200
ETHIOPIC_SIZE = 0x180

# synthetic consonant/vowel tokens live in the Private Use Area
_CONS_BASE = 0xE000
_VOWEL_BASE = 0xEF00


class DataError(ValueError):
    """Malformed or missing input data."""


def normalize(raw: str, side: str = "source") -> str:
    """Canonical single-token form: NFC, stripped, lowercased on the target side."""
    if side not in ("source", "target"):
        raise ValueError(f"side must be 'source' or 'target', got {side!r}")
    word = unicodedata.normalize("NFC", raw).strip()
    if side == "target":
        word = word.lower()
    if not word:
        raise DataError(f"empty word after normalization: {raw!r}")
    if any(ch.isspace() for ch in word):
        raise DataError(f"word contains internal whitespace: {raw!r}")
    return word


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple
    index: dict = field(compare=False, repr=False)

    @classmethod
    def from_symbols(cls, symbols: Iterable[str]) -> "Alphabet":
        symbols = tuple(symbols)
        if len(set(symbols)) != len(symbols):
            raise ValueError("alphabet symbols must be distinct")
        return cls(symbols, {s: i for i, s in enumerate(symbols)})

    @property
    def unk_id(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def size(self) -> int:
        """Number of ids including the reserved unknown id."""
        return len(self.symbols) + 1

    def id(self, symbol: str) -> int:
        return self.index.get(symbol, self.unk_id)

    def encode(self, word: str) -> list[int]:
        return [self.index.get(ch, self.unk_id) for ch in word]

    def __contains__(self, symbol) -> bool:
        return symbol in self.index


def build_alphabet(words: Sequence[str]) -> Alphabet:
    """Alphabet over every symbol in ``words``, ordered by codepoint."""
    if not words:
        raise ValueError("cannot build an alphabet from an empty word list")
    return Alphabet.from_symbols(sorted(set().union(*map(set, words))))


@dataclass(frozen=True)
class NamePair:
    source: str
    target: str
    origin_tag: Optional[str] = None

    def __post_init__(self):
        if not self.source or not self.target:
            raise DataError(f"empty side in name pair {self.source!r} / {self.target!r}")
        if self.origin_tag is not None and self.origin_tag not in ORIGIN_TAGS:
            raise DataError(f"unknown origin tag {self.origin_tag!r}")


class NameDictionary:
    """Set of normalized Latin-script names with exact-match membership."""

    def __init__(self, names: Iterable[str] = ()):
        self.names = frozenset(normalize(n, "target") for n in names)

    def __contains__(self, word: str) -> bool:
        return word in self.names

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(sorted(self.names))


class ForeignVocab:
    """Deduplicated foreign-script words, first-occurrence order."""

    def __init__(self, words: Iterable[str] = ()):
        self.words = list(dict.fromkeys(normalize(w, "source") for w in words))

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words)


# --- consonant/vowel splitting -------------------------------------------------


def consonant_token(row: int) -> str:
    return chr(_CONS_BASE + row)


def vowel_token(col: int) -> str:
    return chr(_VOWEL_BASE + col)


def is_cv_token(ch: str) -> bool:
    return _CONS_BASE <= ord(ch) < _VOWEL_BASE + 8


def cv_split(word: str, block_start: int = ETHIOPIC_START, block_size: int = ETHIOPIC_SIZE) -> str:
    """Replace each in-block syllable by a consonant token and a vowel token.

    The consonant token encodes ``offset // 8`` and the vowel token ``offset % 8``.
    Characters outside the block are passed through.
    """
    out = []
    for ch in word:
        offset = ord(ch) - block_start
        if 0 <= offset < block_size:
            row, col = divmod(offset, 8)
            out.append(consonant_token(row))
            out.append(vowel_token(col))
        else:
            out.append(ch)
    return "".join(out)


def cv_join(word: str, block_start: int = ETHIOPIC_START) -> str:
    """Inverse of :func:`cv_split`."""
    out = []
    i = 0
    while i < len(word):
        code = ord(word[i])
        if _CONS_BASE <= code < _VOWEL_BASE:
            if i + 1 >= len(word) or not (_VOWEL_BASE <= ord(word[i + 1]) < _VOWEL_BASE + 8):
                raise ValueError(f"dangling consonant token at position {i}")
            row = code - _CONS_BASE
            col = ord(word[i + 1]) - _VOWEL_BASE
            out.append(chr(block_start + row * 8 + col))
            i += 2
        else:
            out.append(word[i])
            i += 1
    return "".join(out)


def render_cv(word: str) -> str:
    """Readable form of a split word, e.g. ``C36 V0 C36 V2``."""
    parts = []
    for ch in word:
        code = ord(ch)
        if _CONS_BASE <= code < _VOWEL_BASE:
            parts.append(f"C{code - _CONS_BASE}")
        elif _VOWEL_BASE <= code < _VOWEL_BASE + 8:
            parts.append(f"V{code - _VOWEL_BASE}")
        else:
            parts.append(ch)
    return " ".join(parts)


# --- character substitution maps ----------------------------------------------


class CharSubstitution:
    """Simultaneous multi-character substitution, longest match first.

    Used for mechanical spelling conversions such as mapping one dialect's
    orthography onto another before training.
    """

    def __init__(self, mapping: dict[str, str]):
        self.mapping = dict(mapping)
        if "" in self.mapping:
            raise ValueError("empty substitution key")
        keys = sorted(self.mapping, key=lambda k: (-len(k), k))
        self._pattern = re.compile("|".join(map(re.escape, keys))) if keys else None

    def __call__(self, text: str) -> str:
        if self._pattern is None:
            return text
        return self._pattern.sub(lambda m: self.mapping[m.group(0)], text)

    @classmethod
    def load(cls, path) -> "CharSubstitution":
        mapping = {}
        for lineno, line in _read_lines(path):
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise DataError(f"{path}:{lineno}: expected 2 tab-separated columns, got {len(cols)}")
            src = unicodedata.normalize("NFC", cols[0])
            mapping[src] = unicodedata.normalize("NFC", cols[1])
        return cls(mapping)


# --- statistics -----------------------------------------------------------------


def mean_length_ratio(pairs: Sequence[NamePair]) -> float:
    """Average of ``len(target) / len(source)`` over ``pairs``."""
    if not pairs:
        raise ValueError("mean_length_ratio of an empty pair list")
    return sum(len(p.target) / len(p.source) for p in pairs) / len(pairs)


# --- loaders ----------------------------------------------------------------------


def _read_lines(path):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            yield lineno, line.rstrip("\n").rstrip("\r")


def load_name_pairs(
    path,
    source_transform: Optional[Callable[[str], str]] = None,
) -> list[NamePair]:
    """Read a name-pair TSV.

    Columns: source, target, optional origin tag, then optional extra
    references for the same source. Multi-token names are split into aligned
    token pairs; rows whose token counts differ are skipped with a warning.
    """
    pairs: list[NamePair] = []
    seen = set()
    for lineno, line in _read_lines(path):
        if not line.strip():
            log.warning("%s:%d: blank line skipped", path, lineno)
            continue
        cols = line.split("\t")
        if len(cols) < 2:
            raise DataError(f"{path}:{lineno}: expected at least 2 columns, got {len(cols)}")
        tag = None
        if len(cols) >= 3 and cols[2].strip():
            tag = cols[2].strip().lower()
            if tag not in ORIGIN_TAGS:
                raise DataError(f"{path}:{lineno}: unknown origin tag {cols[2]!r}")
        targets = [cols[1]] + [c for c in cols[3:] if c.strip()]
        src_tokens = cols[0].split()
        for target in targets:
            tgt_tokens = target.split()
            if len(src_tokens) != len(tgt_tokens) or not src_tokens:
                log.warning("%s:%d: token count mismatch, row skipped", path, lineno)
                continue
            for s, t in zip(src_tokens, tgt_tokens):
                try:
                    s = normalize(s, "source")
                    t = normalize(t, "target")
                except DataError as exc:
                    raise DataError(f"{path}:{lineno}: {exc}") from None
                if source_transform is not None:
                    s = source_transform(s)
                if (s, t) in seen:
                    continue
                seen.add((s, t))
                pairs.append(NamePair(s, t, tag))
    return pairs


def _load_word_list(path, side):
    words = []
    for lineno, line in _read_lines(path):
        if not line.strip():
            log.warning("%s:%d: blank line skipped", path, lineno)
            continue
        for token in line.split():
            words.append(normalize(token, side))
    return words


def load_dictionary(path) -> NameDictionary:
    return NameDictionary(_load_word_list(path, "target"))


def load_vocab(path, source_transform: Optional[Callable[[str], str]] = None) -> ForeignVocab:
    words = _load_word_list(path, "source")
    if source_transform is not None:
        words = [source_transform(w) for w in words]
    return ForeignVocab(words)


def write_name_pairs(path, pairs: Iterable[NamePair]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            row = [p.source, p.target] + ([p.origin_tag] if p.origin_tag else [])
            fh.write("\t".join(row) + "\n")
