"""Beam search over action sequences and the U / DC inference strategies."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .model import ModelParams, encode

log = logging.getLogger(__name__)


def emission_cap(n: int) -> int:
    """Largest number of characters a decode of an ``n``-symbol word may emit."""
    return 4 + 3 * n


@dataclass(frozen=True)
class Hypothesis:
    text: str
    actions: tuple  # action ids
    score: float
    terminal: bool = True
    capped: bool = False

    def sort_key(self):
        return (-self.score, self.actions)


def _merge(finished: dict, hyp: Hypothesis) -> None:
    old = finished.get(hyp.text)
    if old is None or hyp.sort_key() < old.sort_key():
        finished[hyp.text] = hyp


def beam_search(m: ModelParams, x: str, width: int = 10, cap: Optional[int] = None) -> list[Hypothesis]:
    """Ranked terminal hypotheses for ``x``, best first.

    Every live hypothesis is expanded by every action and the best ``width``
    expansions survive; equal scores are ordered by their action-id sequence.
    Expansions that complete the last step are collected as results, those that
    would emit past ``cap`` characters are set aside as invalid. Derivations of
    the same string are merged, keeping the best.
    """
    if width < 1:
        raise ValueError("beam width must be >= 1")
    if not x:
        raise ValueError("cannot decode an empty word")
    n = len(x)
    cap = emission_cap(n) if cap is None else cap
    p = m.params
    enc = encode(m, x).vectors
    step = m.step_id
    V = m.n_actions
    symbols = m.target.symbols

    # live hypotheses, kept in lexicographic order of their action sequences
    prev = np.array([step], dtype=np.int64)
    pos = np.zeros(1, dtype=np.int64)
    hidden = np.zeros((1, m.hidden_size))
    scores = np.zeros(1)
    n_emit = [0]
    actions: list[tuple] = [()]
    finished: dict[str, Hypothesis] = {}
    capped: list[Hypothesis] = []

    while len(actions):
        logp, hidden_new = kernels.decoder_step_batch(
            p["act_emb"], p["dec.Wx"], p["dec.Wh"], p["dec.b"], p["out.W"], p["out.b"],
            prev, enc[pos], hidden,
        )
        cand = (scores[:, None] + logp).reshape(-1)
        B = len(actions)
        parent = np.repeat(np.arange(B), V)
        act = np.tile(np.arange(V), B)
        order = np.lexsort((act, parent, -cand))[:width]

        keep = []
        for idx in order:
            b, a = int(parent[idx]), int(act[idx])
            seq = actions[b] + (a,)
            if a == step:
                if pos[b] + 1 == n:
                    text = "".join(symbols[i] for i in seq if i != step)
                    _merge(finished, Hypothesis(text, seq, float(cand[idx])))
                    continue
            elif n_emit[b] >= cap:
                text = "".join(symbols[i] for i in seq[:-1] if i != step)
                capped.append(Hypothesis(text, seq, float(cand[idx]), terminal=False, capped=True))
                continue
            keep.append(idx)

        if not keep:
            break
        keep = np.array(keep)
        keep = keep[np.lexsort((act[keep], parent[keep]))]
        kb = parent[keep]
        ka = act[keep]
        actions = [actions[b] + (a,) for b, a in zip(kb.tolist(), ka.tolist())]
        n_emit = [n_emit[b] + (a != step) for b, a in zip(kb.tolist(), ka.tolist())]
        pos = pos[kb] + (ka == step)
        prev = ka.astype(np.int64)
        hidden = hidden_new[kb]
        scores = cand[keep]

        if len(finished) >= width:
            kth = sorted(h.score for h in finished.values())[-width]
            if scores.max() < kth:
                break

    ranked = sorted(finished.values(), key=Hypothesis.sort_key)[:width]
    if not ranked and capped:
        best = min(capped, key=Hypothesis.sort_key)
        log.warning("no hypothesis for %r terminated within %d emissions; returning a capped one", x, cap)
        return [best]
    return ranked


def infer_unconstrained(m: ModelParams, x: str, width: int = 10) -> str:
    beam = beam_search(m, x, width)
    return beam[0].text if beam else ""


def select_dict_constrained(beam: Sequence[Hypothesis], dictionary) -> tuple[str, bool]:
    """First beam string found in ``dictionary``, else the top string."""
    for hyp in beam:
        if hyp.text in dictionary:
            return hyp.text, True
    return (beam[0].text if beam else ""), False


def infer_dict_constrained(m: ModelParams, x: str, width: int, dictionary) -> tuple[str, bool]:
    return select_dict_constrained(beam_search(m, x, width), dictionary)


def nbest(m: ModelParams, x: str, width: int = 10) -> list[str]:
    return [h.text for h in beam_search(m, x, width)]
