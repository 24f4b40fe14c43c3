"""Monotone character alignment and oracle action sequences.

An alignment links every target character to one source position, with
positions non-decreasing along the target. Source positions may receive no
target characters. Indices are 0-based.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from typing import Iterable, Optional, Sequence

import numpy as np

from ._jit import njit

STEP = "<step>"
FANOUT_PENALTY = 0.1
_TIE_TOL = 1e-9


@njit
def monotone_align_kernel(first, cont, fanout):
    """Min-cost monotone total alignment for (n, m) link-cost matrices.

    ``first[i, j]`` is paid when y_j is the first character linked to x_i and
    ``cont[i, j]`` when it continues x_i's segment (plus ``fanout``).
    Returns (links, total_cost); ties go to the earlier source position.
    """
    n, m = first.shape
    dp = np.empty((m, n))
    back = np.zeros((m, n), dtype=np.int64)
    for i in range(n):
        dp[0, i] = first[i, 0]
    for j in range(1, m):
        best = np.inf
        best_i = -1
        for i in range(n):
            # best over strictly earlier positions, earliest argmin on ties
            stay = dp[j - 1, i] + fanout + cont[i, j]
            if best_i >= 0 and best + first[i, j] <= stay + 1e-9:
                dp[j, i] = first[i, j] + best
                back[j, i] = best_i
            else:
                dp[j, i] = stay
                back[j, i] = i
            if dp[j - 1, i] < best - 1e-9:
                best = dp[j - 1, i]
                best_i = i
    links = np.empty(m, dtype=np.int64)
    end = 0
    for i in range(1, n):
        if dp[m - 1, i] < dp[m - 1, end] - 1e-9:
            end = i
    total = dp[m - 1, end]
    links[m - 1] = end
    for j in range(m - 1, 0, -1):
        links[j - 1] = back[j, links[j]]
    return links, total


def identity_costs(x: str, y: str) -> np.ndarray:
    """0 where symbols are identical, 1 elsewhere."""
    xs = np.array([ord(c) for c in x])
    ys = np.array([ord(c) for c in y])
    return (xs[:, None] != ys[None, :]).astype(np.float64)


def _table(counts, smoothing):
    targets = set()
    for row in counts.values():
        targets.update(row)
    v = max(len(targets), 1)
    table = {}
    for s, row in counts.items():
        total = sum(row.values()) + smoothing * v
        table[s] = {t: -math.log((c + smoothing) / total) for t, c in row.items()}
    return table, -math.log(smoothing / (smoothing * v + 1.0))


def _fill(table, floor, x, y):
    out = np.full((len(x), len(y)), floor)
    for i, s in enumerate(x):
        row = table.get(s)
        if row is None:
            continue
        for j, t in enumerate(y):
            c = row.get(t)
            if c is not None:
                out[i, j] = c
    return out


class CharCostModel:
    """Link costs ``-log p(target char | source char, role)`` estimated from a corpus.

    The role is whether the target character opens a source character's
    segment or continues it. Both tables start from word-level co-occurrence
    counts and are refined by re-counting links of the current best alignments.
    """

    def __init__(self, first: dict, cont: dict, floor: float, cont_floor: float):
        self.first = first
        self.cont = cont
        self.floor = floor
        self.cont_floor = cont_floor

    def matrices(self, x: str, y: str) -> tuple:
        return _fill(self.first, self.floor, x, y), _fill(self.cont, self.cont_floor, x, y)

    @classmethod
    def from_counts(cls, first_counts, cont_counts=None, smoothing: float = 0.1) -> "CharCostModel":
        first, floor = _table(first_counts, smoothing)
        cont, cont_floor = _table(first_counts if cont_counts is None else cont_counts, smoothing)
        return cls(first, cont, floor, cont_floor)

    @classmethod
    def fit(cls, pairs: Iterable, iterations: int = 10) -> "CharCostModel":
        pairs = [(p.source, p.target) for p in pairs]
        counts = defaultdict(Counter)
        for x, y in pairs:
            w = 1.0 / len(x)
            for s in x:
                for t in y:
                    counts[s][t] += w
        model = cls.from_counts(counts)
        prev = None
        for _ in range(iterations):
            first, cont = defaultdict(Counter), defaultdict(Counter)
            links_all = []
            for x, y in pairs:
                links = align(x, y, model)
                links_all.append(links)
                for j, i in enumerate(links):
                    table = cont if j and links[j - 1] == i else first
                    table[x[i]][y[j]] += 1.0
            model = cls.from_counts(first, cont)
            if links_all == prev:
                break
            prev = links_all
        return model


def _matrices(x, y, costs):
    if costs is None:
        m = identity_costs(x, y)
        return m, m
    return costs.matrices(x, y)


def align(x: str, y: str, costs: Optional[CharCostModel] = None) -> tuple:
    """Minimum-cost monotone alignment of ``y`` onto ``x``.

    Cost is the sum of link costs plus ``FANOUT_PENALTY`` for every target
    character beyond the first linked to one source position. Without a cost
    model, identical symbols link for free and everything else costs 1.
    """
    if not x or not y:
        raise ValueError("align needs non-empty words")
    first, cont = _matrices(x, y, costs)
    links, _ = monotone_align_kernel(first, cont, FANOUT_PENALTY)
    return tuple(int(i) for i in links)


def alignment_cost(x: str, y: str, links: Sequence[int], costs: Optional[CharCostModel] = None) -> float:
    first, cont = _matrices(x, y, costs)
    total = 0.0
    for j, i in enumerate(links):
        if j and links[j - 1] == i:
            total += cont[i, j] + FANOUT_PENALTY
        else:
            total += first[i, j]
    return float(total)


def check_alignment(x: str, y: str, links: Sequence[int]) -> None:
    if len(links) != len(y):
        raise ValueError("alignment must link every target character")
    prev = 0
    for i in links:
        if not 0 <= i < len(x):
            raise ValueError(f"source index {i} out of range")
        if i < prev:
            raise ValueError("alignment is not monotone")
        prev = i


def oracle_actions(x: str, y: str, links: Sequence[int]) -> tuple:
    """Emit each source position's linked characters, then a step."""
    check_alignment(x, y, links)
    actions = []
    j = 0
    for i in range(len(x)):
        while j < len(y) and links[j] == i:
            actions.append(y[j])
            j += 1
        actions.append(STEP)
    return tuple(actions)


def execute_actions(x: str, actions: Iterable[str]) -> str:
    out = []
    steps = 0
    for a in actions:
        if a == STEP:
            steps += 1
            if steps > len(x):
                raise ValueError("attention overrun: more steps than source characters")
        else:
            if steps >= len(x):
                raise ValueError("attention overrun: emission after the final step")
            out.append(a)
    return "".join(out)


def attention_trace(actions: Iterable[str]) -> list[int]:
    """0-based attention position at which each emission happens."""
    pos = 0
    trace = []
    for a in actions:
        if a == STEP:
            pos += 1
        else:
            trace.append(pos)
    return trace


def format_alignment(x: str, y: str, links: Sequence[int]) -> str:
    segs = []
    for i, ch in enumerate(x):
        segs.append(f"{ch}→" + "".join(y[j] for j, a in enumerate(links) if a == i))
    return " ".join(segs)
