"""Self-training by constrained discovery over unlabeled foreign vocabulary.

Each round decodes every vocabulary word with the current model, admits the
(word, hypothesis) pairs that pass four discovery constraints, and retrains a
fresh model on the seed pairs plus the admitted ones. The admitted set is
rebuilt from scratch every round.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .decoding import beam_search
from .model import ModelParams, TrainConfig, train
from .text import NamePair, mean_length_ratio

log = logging.getLogger(__name__)

CONSTRAINTS = ("dictionary", "likelihood", "length_ratio", "min_length")


@dataclass
class BootstrapConfig:
    delta_min: float  # log-probability threshold
    epsilon: float
    L0_min: int = 10
    top_k: int = 10
    beam_width: int = 10
    max_iterations: int = 10
    patience: int = 1
    L_floor: int = 1

    def __post_init__(self):
        if self.delta_min != self.delta_min or self.epsilon != self.epsilon:
            raise ValueError("delta_min and epsilon must be finite")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if not 1 <= self.top_k <= self.beam_width:
            raise ValueError("need 1 <= top_k <= beam_width")
        if self.L_floor < 1:
            raise ValueError("L_floor must be >= 1")
        if self.max_iterations < 0 or self.patience < 1:
            raise ValueError("max_iterations must be >= 0 and patience >= 1")


def violated_constraints(x: str, y: str, score: float, dictionary, r: float,
                         eps: float, delta_min: float, L_t: int) -> tuple:
    """Names of the discovery constraints that (x, y) fails, in a fixed order."""
    failed = []
    if y not in dictionary:
        failed.append("dictionary")
    if not score > delta_min:
        failed.append("likelihood")
    if abs(len(y) / len(x) - r) > eps:
        failed.append("length_ratio")
    if not len(y) > L_t:
        failed.append("min_length")
    return tuple(failed)


def check_constraints(x: str, y: str, score: float, dictionary, r: float,
                      eps: float, delta_min: float, L_t: int) -> bool:
    return not violated_constraints(x, y, score, dictionary, r, eps, delta_min, L_t)


@dataclass(frozen=True)
class MinedPair:
    source: str
    target: str
    score: float
    actions: tuple = ()  # action ids of the best derivation


@dataclass
class MinedSet:
    pairs: list
    iteration: int
    L_t: int
    rejections: Counter = field(default_factory=Counter)
    miner: Optional[ModelParams] = field(default=None, repr=False)

    def __len__(self):
        return len(self.pairs)

    def name_pairs(self) -> list[NamePair]:
        return [NamePair(p.source, p.target) for p in self.pairs]


def mine(m: ModelParams, vocab, dictionary, cfg: BootstrapConfig, r: float,
         L_t: int, iteration: int = 0) -> MinedSet:
    """Admit every top-k hypothesis of every vocabulary word that passes all constraints."""
    out = MinedSet([], iteration, L_t, miner=m)
    seen = set()
    for x in vocab:
        for hyp in beam_search(m, x, cfg.beam_width)[:cfg.top_k]:
            failed = violated_constraints(x, hyp.text, hyp.score, dictionary, r,
                                          cfg.epsilon, cfg.delta_min, L_t)
            if failed:
                out.rejections.update(failed)
                continue
            if (x, hyp.text) not in seen:
                seen.add((x, hyp.text))
                out.pairs.append(MinedPair(x, hyp.text, hyp.score, hyp.actions))
    return out


@dataclass
class IterationRecord:
    iteration: int
    mined_count: int
    dev_acc1: float
    L_t_min: int


def _dev_acc(m: ModelParams, dev, width) -> float:
    scores = [h["dev_acc1"] for h in m.history if h.get("dev_acc1") is not None]
    if scores:
        return max(scores)
    from .evaluation import acc_at_1

    return acc_at_1(m, dev, width=width).acc_at_1


def bootstrap(
    seed: Sequence[NamePair],
    vocab,
    dictionary,
    dev: Sequence[NamePair],
    cfg: BootstrapConfig,
    train_cfg: Optional[TrainConfig] = None,
    mined_log: Optional[list] = None,
) -> tuple[ModelParams, list[IterationRecord]]:
    """Iterate mining and retraining until dev acc@1 stops improving.

    Every round trains from a fresh initialization (seeded with the run seed
    plus the round number) on the full seed list and that round's mined pairs.
    Returns the best model by dev acc@1 across rounds and the per-round audit.
    If ``mined_log`` is given, each round's MinedSet is appended to it.
    """
    if not seed or not dev:
        raise ValueError("bootstrap needs non-empty seed and dev sets")
    train_cfg = train_cfg or TrainConfig(beam_width=cfg.beam_width)
    seed = list(seed)
    vocab = list(vocab)
    r = mean_length_ratio(seed)

    model = train(seed, dev, train_cfg)
    acc = _dev_acc(model, dev, train_cfg.beam_width)
    audit = [IterationRecord(0, 0, acc, cfg.L0_min)]
    log.info("iteration 0: dev acc@1 %.4f", acc)
    best_model, best_acc = model, acc
    if not vocab:
        return best_model, audit

    L_t = cfg.L0_min
    stale = 0
    for t in range(1, cfg.max_iterations + 1):
        mined = mine(model, vocab, dictionary, cfg, r, L_t, t)
        if mined_log is not None:
            mined_log.append(mined)
        model = train(seed + mined.name_pairs(), dev, replace(train_cfg, seed=train_cfg.seed + t))
        acc = _dev_acc(model, dev, train_cfg.beam_width)
        audit.append(IterationRecord(t, len(mined), acc, L_t))
        log.info("iteration %d: mined %d, dev acc@1 %.4f, L_min %d", t, len(mined), acc, L_t)
        L_t = max(cfg.L_floor, L_t - 1)
        if acc > best_acc:
            best_model, best_acc = model, acc
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    return best_model, audit


def write_audit(path, audit: Sequence[IterationRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iteration\tmined_count\tdev_acc1\tL_t_min\n")
        for rec in audit:
            fh.write(f"{rec.iteration}\t{rec.mined_count}\t{rec.dev_acc1!r}\t{rec.L_t_min}\n")
