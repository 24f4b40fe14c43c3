import sys

import numpy as np
import pytest

from hmatranslit.model import TrainConfig, init_model, train
from hmatranslit.text import Alphabet
from hmatranslit.toy import make_toy_setup


def random_model(seed, src="abc", tgt="xy", d=6, k=3, scale=0.5):
    rng = np.random.default_rng(seed)
    return init_model(Alphabet.from_symbols(src), Alphabet.from_symbols(tgt), d, k, rng, scale)


@pytest.fixture
def tiny_model():
    return random_model(0)


@pytest.fixture(scope="session")
def toy():
    return make_toy_setup(0)


@pytest.fixture(scope="session")
def toy_model(toy):
    """Toy transducer trained on seed + vocabulary pairs until it is accurate."""
    pairs = toy.seed + toy.language.pairs(toy.vocab[:150])
    return train(pairs, toy.dev[:30], TrainConfig(epochs=6, seed=3))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
