"""acc@1, native/foreign breakdown, subsampling protocol and candidate generation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .decoding import beam_search, select_dict_constrained
from .model import ModelParams
from .text import DataError, NamePair, _read_lines, normalize

log = logging.getLogger(__name__)


@dataclass
class EvalRow:
    source: str
    references: tuple
    prediction: str
    correct: bool
    origin_tag: Optional[str] = None
    used_dictionary: Optional[bool] = None


@dataclass
class EvalReport:
    rows: list
    strategy: str = "U"

    @property
    def acc_at_1(self) -> float:
        if not self.rows:
            return 0.0
        return sum(r.correct for r in self.rows) / len(self.rows)

    @property
    def per_example(self) -> list:
        return self.rows

    def write_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("source\treferences\tprediction\tcorrect\torigin\n")
            for r in self.rows:
                fh.write(f"{r.source}\t{'|'.join(r.references)}\t{r.prediction}\t{int(r.correct)}\t{r.origin_tag or ''}\n")


def group_references(pairs: Sequence[NamePair]) -> list[tuple]:
    """(source, references, tag) per distinct source, in first-seen order."""
    grouped: dict[str, list] = {}
    tags: dict[str, Optional[str]] = {}
    for p in pairs:
        refs = grouped.setdefault(p.source, [])
        if p.target not in refs:
            refs.append(p.target)
        tags.setdefault(p.source, p.origin_tag)
    return [(s, tuple(refs), tags[s]) for s, refs in grouped.items()]


def acc_at_1(
    m: ModelParams,
    test: Sequence[NamePair],
    strategy: str = "U",
    width: int = 10,
    dictionary=None,
) -> EvalReport:
    """Exact-match accuracy of the best prediction against any reference."""
    if strategy not in ("U", "DC"):
        raise ValueError(f"strategy must be 'U' or 'DC', got {strategy!r}")
    if strategy == "DC" and dictionary is None:
        raise ValueError("DC inference needs a dictionary")
    rows = []
    for source, refs, tag in group_references(test):
        beam = beam_search(m, source, width)
        if strategy == "U":
            pred, used = (beam[0].text if beam else ""), None
        else:
            pred, used = select_dict_constrained(beam, dictionary)
        rows.append(EvalRow(source, refs, pred, pred in refs, tag, used))
    return EvalReport(rows, strategy)


@dataclass
class Breakdown:
    acc_native: Optional[float]
    acc_foreign: Optional[float]
    ratio: Optional[float]
    n_native: int
    n_foreign: int


def native_foreign_ratio(acc_native: Optional[float], acc_foreign: Optional[float]) -> Optional[float]:
    if acc_native is None or acc_foreign is None or acc_foreign == 0:
        return None
    return acc_native / acc_foreign


def native_foreign_breakdown(report: EvalReport, tags: Optional[dict] = None) -> Breakdown:
    """Per-class acc@1; classes come from ``tags`` (source -> tag) or the rows."""
    groups = {"native": [], "foreign": []}
    for r in report.rows:
        tag = tags.get(r.source) if tags is not None else r.origin_tag
        if tag not in groups:
            raise ValueError(f"example {r.source!r} is not tagged native or foreign")
        groups[tag].append(r.correct)
    acc = {k: (sum(v) / len(v) if v else None) for k, v in groups.items()}
    return Breakdown(acc["native"], acc["foreign"],
                     native_foreign_ratio(acc["native"], acc["foreign"]),
                     len(groups["native"]), len(groups["foreign"]))


@dataclass
class SubsampleResult:
    scores: list
    seeds: list

    @property
    def mean(self) -> float:
        return float(np.mean(self.scores))


def subsample_protocol(
    full_train: Sequence,
    n: int,
    eval_fn: Callable[[list], float],
    seeds: Sequence[int] = (0, 1, 2, 3, 4),
) -> SubsampleResult:
    """Run ``eval_fn`` on ``n`` examples drawn without replacement per seed."""
    if n > len(full_train):
        raise ValueError(f"cannot draw {n} examples from {len(full_train)}")
    scores = []
    for s in seeds:
        rng = np.random.default_rng(s)
        idx = np.sort(rng.choice(len(full_train), n, replace=False))
        scores.append(float(eval_fn([full_train[i] for i in idx])))
    return SubsampleResult(scores, list(seeds))


# --- candidate generation ---------------------------------------------------------------


class InvertedIndex:
    """Token -> entity ids (insertion ordered), entity -> names."""

    def __init__(self):
        self.postings: dict[str, list] = {}
        self.names: dict[str, list] = {}

    def add(self, entity: str, name: str) -> None:
        self.names.setdefault(entity, []).append(name)
        for token in name.split():
            bucket = self.postings.setdefault(token, [])
            if entity not in bucket:
                bucket.append(entity)

    def lookup(self, token: str) -> list:
        return self.postings.get(token, [])

    def __len__(self):
        return len(self.postings)


def _norm_name(name: str) -> str:
    return " ".join(normalize(t, "target") for t in name.split())


def build_inverted_index(kb: Iterable[tuple]) -> InvertedIndex:
    """Index every whitespace token of every name of every (entity, names) entry."""
    idx = InvertedIndex()
    for entity, names in kb:
        if isinstance(names, str):
            names = [names]
        for name in names:
            if name.strip():
                idx.add(entity, _norm_name(name))
    return idx


def load_kb(path) -> list[tuple]:
    """KB TSV: entity id, canonical name, aliases..."""
    kb = []
    for lineno, line in _read_lines(path):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) < 2:
            raise DataError(f"{path}:{lineno}: expected entity id and at least one name")
        kb.append((cols[0], [c for c in cols[1:] if c.strip()]))
    return kb


@dataclass
class CGQuery:
    mention: str
    gold: str


def load_queries(path) -> list[CGQuery]:
    out = []
    for lineno, line in _read_lines(path):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise DataError(f"{path}:{lineno}: expected mention and gold entity id")
        out.append(CGQuery(cols[0].strip(), cols[1].strip()))
    return out


Transliterator = Callable[[str, int], Sequence[str]]


def beam_transliterator(m: ModelParams) -> Transliterator:
    return lambda word, width: [h.text for h in beam_search(m, word, width)]


@dataclass
class CandidateResult:
    candidates: list
    stage: str  # "exact", "transliteration" or "none"
    hypotheses: list = field(default_factory=list)


def generate_candidates(
    q: Union[CGQuery, str],
    idx: InvertedIndex,
    model: Union[ModelParams, Transliterator, None],
    width: int = 10,
    cap: int = 20,
) -> CandidateResult:
    """Exact name match first; back-transliterate the mention only if that finds nothing."""
    mention = q.mention if isinstance(q, CGQuery) else q
    tokens = [normalize(t, "target") for t in mention.split()]
    found: list = []

    def collect(entities):
        for e in entities:
            if len(found) >= cap:
                return
            if e not in found:
                found.append(e)

    for t in tokens:
        collect(idx.lookup(t))
    if found:
        return CandidateResult(found, "exact")
    if model is None:
        return CandidateResult([], "none")
    translit = beam_transliterator(model) if isinstance(model, ModelParams) else model
    src_tokens = [normalize(t, "source") for t in mention.split()]
    hyps = [list(translit(t, width)) for t in src_tokens]
    depth = max((len(h) for h in hyps), default=0)
    for rank in range(depth):
        for h in hyps:
            if rank < len(h):
                collect(idx.lookup(h[rank]))
    return CandidateResult(found, "transliteration" if found else "none", hyps)


@dataclass
class RecallReport:
    recall: float
    rows: list  # (mention, gold, stage, hit, candidates)


def recall_at_k(
    queries: Sequence[CGQuery],
    idx: InvertedIndex,
    model: Union[ModelParams, Transliterator, None],
    k: int = 20,
    width: int = 10,
) -> RecallReport:
    """Fraction of queries whose gold entity is among at most ``k`` candidates."""
    if not queries:
        raise ValueError("recall_at_k needs at least one query")
    rows = []
    for q in queries:
        res = generate_candidates(q, idx, model, width, cap=k)
        rows.append((q.mention, q.gold, res.stage, q.gold in res.candidates, res.candidates))
    return RecallReport(sum(r[3] for r in rows) / len(rows), rows)
