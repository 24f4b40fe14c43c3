"""Synthetic substitution language for tests, demos and the acceptance suite.

Each source symbol has a fixed Latin rendering of one or two letters, drawn
at random when the language is built; a word's transliteration is the
concatenation of its symbols' renderings.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from .text import NamePair

TOY_SOURCE = "აბგდევზთ"


@dataclass
class ToyLanguage:
    table: dict

    @classmethod
    def build(cls, seed: int = 0, symbols: str = TOY_SOURCE, letters: str = string.ascii_lowercase):
        rng = np.random.default_rng(seed)
        table = {}
        used = set()
        for s in symbols:
            while True:
                size = int(rng.integers(1, 3))
                out = "".join(rng.choice(list(letters), size))
                if out not in used:
                    break
            used.add(out)
            table[s] = out
        return cls(table)

    @property
    def symbols(self) -> str:
        return "".join(self.table)

    def transliterate(self, word: str) -> str:
        return "".join(self.table[c] for c in word)

    def random_words(self, count: int, rng, min_len: int = 3, max_len: int = 8, exclude=()) -> list[str]:
        seen = set(exclude)
        words = []
        syms = list(self.symbols)
        while len(words) < count:
            n = int(rng.integers(min_len, max_len + 1))
            w = "".join(rng.choice(syms, n))
            if w not in seen:
                seen.add(w)
                words.append(w)
        return words

    def pairs(self, words) -> list[NamePair]:
        return [NamePair(w, self.transliterate(w)) for w in words]


def mutate(word: str, rng, letters: str = string.ascii_lowercase) -> str:
    """Replace, insert or delete one letter."""
    i = int(rng.integers(len(word)))
    op = int(rng.integers(3))
    ch = str(rng.choice(list(letters)))
    if op == 0:
        return word[:i] + ch + word[i + 1:]
    if op == 1:
        return word[:i] + ch + word[i:]
    return (word[:i] + word[i + 1:]) or ch


@dataclass
class ToySetup:
    language: ToyLanguage
    seed: list
    vocab: list
    dictionary: list
    dev: list
    test: list


def make_toy_setup(
    seed: int = 0,
    n_seed: int = 50,
    n_vocab: int = 500,
    n_distractors: int = 1500,
    n_dev: int = 100,
    n_test: int = 100,
    min_len: int = 3,
    max_len: int = 8,
    seed_len: tuple = None,
) -> ToySetup:
    """Seed pairs, unlabeled vocabulary, dictionary with distractors, dev and test pairs."""
    rng = np.random.default_rng(seed)
    lang = ToyLanguage.build(seed)
    lo, hi = seed_len or (min_len, max_len)
    seed_words = lang.random_words(n_seed, rng, lo, hi)
    words = lang.random_words(n_vocab + n_dev + n_test, rng, min_len, max_len, exclude=seed_words)
    vocab = words[:n_vocab]
    dev_words = words[n_vocab:n_vocab + n_dev]
    test_words = words[n_vocab + n_dev:]
    words = seed_words + words
    truths = [lang.transliterate(w) for w in vocab]
    reserved = {lang.transliterate(w) for w in words}
    distractors = []
    seen = set(truths)
    while len(distractors) < n_distractors:
        base = truths[int(rng.integers(len(truths)))]
        d = mutate(base, rng)
        if d not in seen and d not in reserved:
            seen.add(d)
            distractors.append(d)
    return ToySetup(
        lang,
        lang.pairs(seed_words),
        vocab,
        truths + distractors,
        lang.pairs(dev_words),
        lang.pairs(test_words),
    )


def make_toy_kb(
    language: ToyLanguage,
    n_entities: int = 2000,
    n_queries: int = 300,
    alias_fraction: float = 0.3,
    seed: int = 0,
    min_len: int = 3,
    max_len: int = 8,
):
    """Entities named by toy transliterations, some with a source-script alias.

    Returns (kb, queries): kb rows are (entity id, [names]) and queries are
    (source-script mention, gold entity id).
    """
    rng = np.random.default_rng(seed)
    words = language.random_words(n_entities, rng, min_len, max_len)
    kb = []
    for i, w in enumerate(words):
        names = [language.transliterate(w)]
        if rng.random() < alias_fraction:
            names.append(w)
        kb.append((f"E{i:05d}", names))
    picks = rng.choice(n_entities, n_queries, replace=False)
    queries = [(words[i], kb[i][0]) for i in sorted(picks)]
    return kb, queries
