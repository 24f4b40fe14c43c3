import importlib

import pytest

from hmatranslit.bootstrap import (
    BootstrapConfig, MinedPair, MinedSet, check_constraints, mine, violated_constraints, write_audit,
)
from hmatranslit.model import TrainConfig
from hmatranslit.text import NameDictionary, NamePair

boot = importlib.import_module("hmatranslit.bootstrap")

# a pair that passes: ratio 6/4 = 1.5 == r, score above -5, length 6 > 5
X, Y = "abcd", "wxyzwx"
BASE = dict(x=X, y=Y, score=-1.0, dictionary=NameDictionary([Y, "wxyzww", "wxyzwxyzw"]),
            r=1.5, eps=0.3, delta_min=-5.0, L_t=5)


def violations(**changes):
    args = {**BASE, **changes}
    return violated_constraints(args["x"], args["y"], args["score"], args["dictionary"], args["r"],
                                args["eps"], args["delta_min"], args["L_t"])


def test_base_pair_passes():
    assert violations() == ()
    assert check_constraints(X, Y, -1.0, BASE["dictionary"], 1.5, 0.3, -5.0, 5)


@pytest.mark.parametrize("changes,name", [
    (dict(y="wxyzxx"), "dictionary"),
    (dict(score=-6.0), "likelihood"),
    (dict(score=-5.0), "likelihood"),  # threshold itself is not enough
    (dict(y="wxyzwxyzw"), "length_ratio"),
    (dict(L_t=6), "min_length"),  # |y| == L_t is rejected
    (dict(L_t=7), "min_length"),
])
def test_single_constraint_violations(changes, name):
    assert violations(**changes) == (name,)


def test_length_ratio_boundary_inclusive():
    # |6/4 - 1.25| = 0.25 == eps passes (exact in binary); anything beyond fails
    assert violations(r=1.25, eps=0.25) == ()
    assert violations(r=1.24, eps=0.25) == ("length_ratio",)


def test_multiple_violations_reported_in_order():
    assert violations(y="q", score=-9.0, L_t=5) == ("dictionary", "likelihood", "length_ratio", "min_length")


def test_config_validation():
    with pytest.raises(ValueError):
        BootstrapConfig(delta_min=float("nan"), epsilon=0.1)
    with pytest.raises(ValueError):
        BootstrapConfig(delta_min=-1, epsilon=-0.1)
    with pytest.raises(ValueError):
        BootstrapConfig(delta_min=-1, epsilon=0.1, top_k=11, beam_width=10)
    with pytest.raises(TypeError):
        BootstrapConfig()


# --- mining with a trained model ---------------------------------------------------------------


def mine_cfg(**kw):
    return BootstrapConfig(**{"delta_min": -6.0, "epsilon": 0.6, "L0_min": 3, **kw})


def test_mine_admits_only_valid_pairs(toy, toy_model):
    from hmatranslit.text import mean_length_ratio

    d = NameDictionary(toy.dictionary)
    r = mean_length_ratio(toy.seed)
    mined = mine(toy_model, toy.vocab[:60], d, mine_cfg(), r, 3)
    assert len(mined) > 0
    for p in mined.pairs:
        assert p.target in d
        assert p.score > -6.0 and len(p.target) > 3
        assert abs(len(p.target) / len(p.source) - r) <= 0.6
    assert mined.miner is toy_model


def test_mine_empty_dictionary_mines_nothing(toy, toy_model):
    mined = mine(toy_model, toy.vocab[:20], NameDictionary(), mine_cfg(), 1.5, 1)
    assert len(mined) == 0 and mined.rejections["dictionary"] > 0


def test_mine_zero_threshold_mines_nothing(toy, toy_model):
    mined = mine(toy_model, toy.vocab[:20], NameDictionary(toy.dictionary), mine_cfg(delta_min=0.0), 1.5, 1)
    assert len(mined) == 0


# --- the loop, with training and mining stubbed out ----------------------------------------------


class FakeModel:
    def __init__(self, acc, train_set):
        self.history = [{"epoch": 1, "dev_acc1": acc}]
        self.train_set = train_set


def run_stubbed(monkeypatch, accs, cfg, vocab=("v1", "v2")):
    accs = iter(accs)
    trained, mined_L = [], []

    def fake_train(pairs, dev, train_cfg):
        trained.append((list(pairs), train_cfg.seed))
        return FakeModel(next(accs), list(pairs))

    def fake_mine(m, vocab, dictionary, cfg, r, L_t, iteration=0):
        mined_L.append(L_t)
        pairs = [MinedPair(w, f"m{iteration}{w}", -1.0) for w in vocab]
        return MinedSet(pairs, iteration, L_t)

    monkeypatch.setattr(boot, "train", fake_train)
    monkeypatch.setattr(boot, "mine", fake_mine)
    seed = [NamePair("ab", "xy"), NamePair("ba", "yx")]
    best, audit = boot.bootstrap(seed, list(vocab), NameDictionary(), seed[:1], cfg, TrainConfig(seed=7))
    return best, audit, trained, mined_L, seed


def test_threshold_schedule_and_stop(monkeypatch):
    cfg = BootstrapConfig(delta_min=-1, epsilon=1, L0_min=3, L_floor=1, max_iterations=10, patience=2)
    best, audit, trained, mined_L, _ = run_stubbed(
        monkeypatch, [0.1, 0.2, 0.3, 0.4, 0.4, 0.35, 0.9], cfg)
    assert mined_L == [3, 2, 1, 1, 1]
    assert [a.iteration for a in audit] == [0, 1, 2, 3, 4, 5]
    assert [a.L_t_min for a in audit] == [3, 3, 2, 1, 1, 1]
    assert best.history[0]["dev_acc1"] == 0.4
    assert best is not None and audit[-1].dev_acc1 == 0.35


def test_best_model_survives_bad_final_round(monkeypatch):
    cfg = BootstrapConfig(delta_min=-1, epsilon=1, max_iterations=5)
    best, audit, *_ = run_stubbed(monkeypatch, [0.5, 0.8, 0.2], cfg)
    assert len(audit) == 3 and best.history[0]["dev_acc1"] == 0.8


def test_max_iterations(monkeypatch):
    cfg = BootstrapConfig(delta_min=-1, epsilon=1, max_iterations=2)
    _, audit, *_ = run_stubbed(monkeypatch, [0.1, 0.2, 0.3, 0.4], cfg)
    assert len(audit) == 3


def test_purge_and_seed_preservation(monkeypatch):
    cfg = BootstrapConfig(delta_min=-1, epsilon=1, max_iterations=3)
    _, _, trained, _, seed = run_stubbed(monkeypatch, [0.1, 0.2, 0.3, 0.4], cfg)
    for t, (pairs, rng_seed) in enumerate(trained):
        assert pairs[: len(seed)] == seed
        extra = {p.target for p in pairs[len(seed):]}
        # only the current round's mined pairs, nothing carried over
        assert extra == ({f"m{t}v1", f"m{t}v2"} if t else set())
        assert rng_seed == 7 + t


def test_empty_vocab_returns_initial_model(monkeypatch):
    cfg = BootstrapConfig(delta_min=-1, epsilon=1)
    best, audit, trained, mined_L, _ = run_stubbed(monkeypatch, [0.3], cfg, vocab=())
    assert len(audit) == 1 and len(trained) == 1 and mined_L == []


def test_bootstrap_needs_seed_and_dev():
    with pytest.raises(ValueError):
        boot.bootstrap([], [], NameDictionary(), [NamePair("a", "b")], BootstrapConfig(delta_min=-1, epsilon=1))


def test_write_audit(tmp_path):
    p = tmp_path / "audit.tsv"
    write_audit(p, [boot.IterationRecord(0, 0, 0.25, 10), boot.IterationRecord(1, 12, 0.5, 10)])
    assert p.read_text().splitlines() == [
        "iteration\tmined_count\tdev_acc1\tL_t_min", "0\t0\t0.25\t10", "1\t12\t0.5\t10",
    ]
