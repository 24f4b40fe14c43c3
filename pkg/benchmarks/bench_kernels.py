"""Time the hot kernels with numba against the plain numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 100]

Each mode runs in its own interpreter (the fallback via
HMATRANSLIT_DISABLE_NUMBA=1) so nested kernel calls are all compiled or all
interpreted. Compilation happens, or is loaded from cache, before timing.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def run_cases(repeat):
    from hmatranslit import kernels
    from hmatranslit.align import align, monotone_align_kernel, oracle_actions
    from hmatranslit.decoding import beam_search
    from hmatranslit.model import TrainConfig, init_model, train
    from hmatranslit.text import Alphabet
    from hmatranslit.toy import make_toy_setup

    rng = np.random.default_rng(0)
    m = init_model(Alphabet.from_symbols("abcdefghijklmnopqrstuvwxyz0123"),
                   Alphabet.from_symbols("abcdefghijklmnopqrstuvwxyz"), 50, 20, rng)
    x, y = "abcdefghij", "abcdefghijkl"
    src = m.source_ids(x)
    acts = m.action_ids(oracle_actions(x, y, align(x, y)))
    grads = [np.zeros_like(a) for a in m.arrays()]
    p = m.params
    B = 10
    prev = rng.integers(0, m.n_actions, B)
    att = rng.normal(size=(B, 2 * m.k))
    hid = rng.normal(size=(B, m.hidden_size))
    cost = rng.random((12, 20))
    theta, grad, mom, vel = (rng.normal(size=p.theta.size) for _ in range(4))
    vel = np.abs(vel)
    toy = make_toy_setup(0)

    cases = [
        ("sequence_loss fwd+bwd (d=50 k=20)", lambda: kernels.sequence_loss(
            *m.arrays(), *grads, src, acts, m.step_id, True), repeat),
        ("decoder_step_batch (beam 10)", lambda: kernels.decoder_step_batch(
            p["act_emb"], p["dec.Wx"], p["dec.Wh"], p["dec.b"], p["out.W"], p["out.b"], prev, att, hid), repeat),
        ("monotone_align_kernel (12x20)", lambda: monotone_align_kernel(cost, cost, 0.1), repeat),
        (f"adam_update ({p.theta.size} params)", lambda: kernels.adam_update(
            theta, grad, mom, vel, 3.0, 1e-3, 0.9, 0.999, 1e-8), repeat),
        ("train 1 epoch, 50 toy pairs", lambda: train(toy.seed, (), TrainConfig(epochs=1)), 3),
        ("beam_search width 10, toy word", lambda: beam_search(m, x, 10), max(repeat // 10, 3)),
    ]
    return {name: best_of(fn, n) for name, fn, n in cases}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=100)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        print(json.dumps(run_cases(args.repeat)))
        return

    results = {}
    for mode, flag in (("numba", "0"), ("numpy", "1")):
        env = {**os.environ, "HMATRANSLIT_DISABLE_NUMBA": flag}
        out = subprocess.run([sys.executable, __file__, "--child", "--repeat", str(args.repeat)],
                             env=env, capture_output=True, text=True, check=True)
        results[mode] = json.loads(out.stdout.strip().splitlines()[-1])
    print(f"{'case':38s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, fast in results["numba"].items():
        slow = results["numpy"][name]
        print(f"{name:38s} {fast * 1e3:10.3f} {slow * 1e3:10.3f} {slow / fast:8.1f}x")


if __name__ == "__main__":
    main()
