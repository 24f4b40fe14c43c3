"""Hard-monotonic-attention transducer: encoder, action decoder, training, scoring."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .align import STEP, CharCostModel, align, oracle_actions
from .nn import Adam, NonFiniteError, ParamSet, gru_shapes, load_params, save_params
from .text import Alphabet, NamePair, build_alphabet

log = logging.getLogger(__name__)

_PARAM_ORDER = (
    "src_emb", "act_emb",
    "enc_fwd.Wx", "enc_fwd.Wh", "enc_fwd.b",
    "enc_bwd.Wx", "enc_bwd.Wh", "enc_bwd.b",
    "dec.Wx", "dec.Wh", "dec.b",
    "out.W", "out.b",
)


@dataclass
class TrainConfig:
    d: int = 50
    k: int = 20
    lr: float = 0.001
    epochs: int = 20
    beam_width: int = 10
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    init_scale: float = 0.1
    aligner: str = "cooc"

    def __post_init__(self):
        if self.aligner not in ("cooc", "identity"):
            raise ValueError(f"aligner must be 'cooc' or 'identity', got {self.aligner!r}")
        for name in ("d", "k", "epochs", "beam_width"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.lr > 0:
            raise ValueError("lr must be positive")


class ModelParams:
    """All trainable arrays plus the alphabets they are indexed by.

    Action ids are the target symbol ids followed by the step action, which
    always takes the last id. The decoder hidden size is twice the encoder's.
    """

    def __init__(self, source: Alphabet, target: Alphabet, d: int, k: int,
                 params: Optional[ParamSet] = None):
        self.source = source
        self.target = target
        self.d = d
        self.k = k
        shapes = {
            "src_emb": (source.size, d),
            "act_emb": (self.n_actions, d),
            **gru_shapes("enc_fwd", d, k),
            **gru_shapes("enc_bwd", d, k),
            **gru_shapes("dec", d + 2 * k, self.hidden_size),
            "out.W": (self.n_actions, self.hidden_size),
            "out.b": (self.n_actions,),
        }
        if params is None:
            params = ParamSet(shapes)
        elif params.shapes != shapes:
            raise ValueError("parameter shapes do not match the model header")
        self.params = params
        self.history: list[dict] = []

    @property
    def hidden_size(self) -> int:
        return 2 * self.k

    @property
    def n_actions(self) -> int:
        return len(self.target) + 1

    @property
    def step_id(self) -> int:
        return len(self.target)

    def arrays(self) -> tuple:
        return tuple(self.params[name] for name in _PARAM_ORDER)

    def grads(self) -> tuple:
        return tuple(self.params.g(name) for name in _PARAM_ORDER)

    def action_ids(self, actions: Sequence[str]) -> np.ndarray:
        ids = []
        for a in actions:
            if a == STEP:
                ids.append(self.step_id)
            elif a in self.target:
                ids.append(self.target.index[a])
            else:
                raise ValueError(f"action {a!r} is not in the target alphabet")
        return np.array(ids, dtype=np.int64)

    def action_symbol(self, action_id: int) -> str:
        return STEP if action_id == self.step_id else self.target.symbols[action_id]

    def source_ids(self, word: str) -> np.ndarray:
        return np.array(self.source.encode(word), dtype=np.int64)

    def header(self) -> dict:
        return {
            "d": self.d,
            "k": self.k,
            "decoder_hidden": self.hidden_size,
            "decoder_init": "zeros",
            "source_alphabet": list(self.source.symbols),
            "target_alphabet": list(self.target.symbols),
        }

    def save(self, path) -> None:
        save_params(path, self.header(), self.params)

    @classmethod
    def load(cls, path) -> "ModelParams":
        header, params = load_params(path)
        return cls(
            Alphabet.from_symbols(header["source_alphabet"]),
            Alphabet.from_symbols(header["target_alphabet"]),
            header["d"], header["k"], params,
        )

    def copy(self) -> "ModelParams":
        return ModelParams(self.source, self.target, self.d, self.k, self.params.copy())


def init_model(source: Alphabet, target: Alphabet, d: int, k: int,
               rng: np.random.Generator, scale: float = 0.1) -> ModelParams:
    m = ModelParams(source, target, d, k)
    m.params.init_uniform(rng, scale)
    return m


# --- encoding and stepwise decoding ------------------------------------------------


@dataclass
class EncodedSource:
    vectors: np.ndarray  # (n, 2k)

    def __len__(self):
        return self.vectors.shape[0]


def encode(m: ModelParams, x: str) -> EncodedSource:
    if not x:
        raise ValueError("cannot encode an empty word")
    p = m.params
    H, _, _ = kernels.encode_kernel(
        p["src_emb"], p["enc_fwd.Wx"], p["enc_fwd.Wh"], p["enc_fwd.b"],
        p["enc_bwd.Wx"], p["enc_bwd.Wh"], p["enc_bwd.b"], m.source_ids(x),
    )
    return EncodedSource(H)


@dataclass(frozen=True)
class DecoderState:
    position: int  # 0-based attention position
    hidden: np.ndarray = field(repr=False)
    prev_action: int
    steps: int = 0
    emitted: tuple = ()
    terminal: bool = False

    @property
    def attention_pos(self) -> int:
        return self.position + 1


def initial_state(m: ModelParams) -> DecoderState:
    return DecoderState(0, np.zeros(m.hidden_size), m.step_id)


def decode_step(m: ModelParams, state: DecoderState, enc: EncodedSource):
    """Log-probabilities of the next action and a function building the next state."""
    if state.terminal:
        raise ValueError("decode_step called on a terminal state")
    p = m.params
    logp, hidden = kernels.decoder_step_batch(
        p["act_emb"], p["dec.Wx"], p["dec.Wh"], p["dec.b"], p["out.W"], p["out.b"],
        np.array([state.prev_action], dtype=np.int64),
        enc.vectors[state.position:state.position + 1],
        state.hidden.reshape(1, -1),
    )
    n = len(enc)
    hidden = hidden[0]

    def advance(action: int) -> DecoderState:
        if action == m.step_id:
            steps = state.steps + 1
            done = steps == n
            return DecoderState(min(state.position + 1, n - 1), hidden, action, steps,
                                state.emitted, done)
        return DecoderState(state.position, hidden, action, state.steps,
                            state.emitted + (m.target.symbols[action],))

    return logp[0], advance


# --- scoring and training ------------------------------------------------------------


def _check_actions(m: ModelParams, n: int, ids: np.ndarray) -> None:
    steps = 0
    for a in ids:
        if steps >= n:
            raise ValueError("invalid action sequence: action after the final step")
        if a == m.step_id:
            steps += 1


def sequence_nll(m: ModelParams, x: str, action_ids: np.ndarray, compute_grad: bool = False) -> float:
    loss = kernels.sequence_loss(
        *m.arrays(), *m.grads(), m.source_ids(x), action_ids, m.step_id, compute_grad,
    )
    if not math.isfinite(loss):
        raise NonFiniteError(f"non-finite loss for {x!r}")
    return loss


def action_sequence_log_prob(m: ModelParams, x: str, actions: Sequence) -> float:
    """Teacher-forced log-probability of ``actions`` (symbols or action ids)."""
    if len(actions) and isinstance(actions[0], str):
        ids = m.action_ids(actions)
    else:
        ids = np.asarray(actions, dtype=np.int64)
    _check_actions(m, len(x), ids)
    return -sequence_nll(m, x, ids)


def compile_oracles(pairs: Sequence[NamePair], aligner: str = "cooc") -> list[tuple]:
    """Oracle action sequences for ``pairs`` under the chosen link-cost model."""
    costs = CharCostModel.fit(pairs) if aligner == "cooc" else None
    return [oracle_actions(p.source, p.target, align(p.source, p.target, costs)) for p in pairs]


def train(
    seed: Sequence[NamePair],
    dev: Sequence[NamePair] = (),
    cfg: Optional[TrainConfig] = None,
    evaluate: Optional[Callable[[ModelParams], float]] = None,
) -> ModelParams:
    """Fit a transducer on ``seed`` with batch size 1.

    After every epoch the model is scored on ``dev`` (acc@1, unconstrained
    beam decoding) unless a custom ``evaluate`` is given; the best epoch is
    returned, ties going to the earlier epoch. Without dev data the final epoch
    is returned.
    """
    cfg = cfg or TrainConfig()
    if not seed:
        raise ValueError("train needs at least one name pair")
    rng = np.random.default_rng(cfg.seed)
    source = build_alphabet([p.source for p in seed])
    target = build_alphabet([p.target for p in seed])
    m = init_model(source, target, cfg.d, cfg.k, rng, cfg.init_scale)
    oracles = compile_oracles(seed, cfg.aligner)
    data = [(p.source, m.action_ids(a)) for p, a in zip(seed, oracles)]

    if evaluate is None and dev:
        from .evaluation import acc_at_1

        def evaluate(model):
            return acc_at_1(model, dev, width=cfg.beam_width).acc_at_1

    opt = Adam(m.params, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps_adam)
    init_loss = sum(sequence_nll(m, x, a) for x, a in data) / len(data)
    m.history = [{"epoch": 0, "train_loss": init_loss, "dev_acc1": None}]
    best = None
    best_score = -1.0
    for epoch in range(1, cfg.epochs + 1):
        total = 0.0
        for idx in rng.permutation(len(data)):
            x, a = data[idx]
            total += sequence_nll(m, x, a, compute_grad=True)
            m.params.assert_finite(f"gradient for {x!r}")
            opt.step()
        score = evaluate(m) if evaluate is not None else None
        m.history.append({"epoch": epoch, "train_loss": total / len(data), "dev_acc1": score})
        log.debug("epoch %d loss %.4f dev %s", epoch, total / len(data), score)
        if score is not None and score > best_score:
            best_score = score
            best = m.params.theta.copy()
    if best is not None:
        m.params.theta[:] = best
    m.params.m[:] = 0.0
    m.params.v[:] = 0.0
    return m
