"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, RunConfig
from .nn import NonFiniteError
from .text import (
    CharSubstitution, DataError, ETHIOPIC_SIZE, cv_split, load_dictionary, load_name_pairs,
    load_vocab, render_cv, write_name_pairs,
)

log = logging.getLogger("hmatranslit")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _source_transform(cfg):
    if not cfg["char_map"]:
        return None
    return CharSubstitution.load(cfg["char_map"])


def _config(args, require=()):
    return RunConfig.resolve(args.config, args.set or (), require)


def _echo_config(cfg, out):
    cfg.write(str(out) + ".config")


def cmd_train(args) -> int:
    from .model import train

    cfg = _config(args)
    tf = _source_transform(cfg)
    seed = load_name_pairs(args.seed_pairs, tf)
    dev = load_name_pairs(args.dev, tf) if args.dev else []
    if not seed:
        raise DataError(f"{args.seed_pairs}: no name pairs")
    model = train(seed, dev, cfg.train_config())
    model.save(args.out)
    _echo_config(cfg, args.out)
    best = max((h["dev_acc1"] for h in model.history if h["dev_acc1"] is not None), default=None)
    print(f"trained on {len(seed)} pairs; best dev acc@1 = {best}" if best is not None
          else f"trained on {len(seed)} pairs")
    return EXIT_OK


def cmd_bootstrap(args) -> int:
    from .bootstrap import bootstrap, write_audit

    cfg = _config(args, require=("delta_min_log", "epsilon"))
    tf = _source_transform(cfg)
    seed = load_name_pairs(args.seed_pairs, tf)
    dev = load_name_pairs(args.dev, tf)
    vocab = load_vocab(args.vocab, tf)
    dictionary = load_dictionary(args.dictionary)
    model, audit = bootstrap(seed, vocab, dictionary, dev, cfg.bootstrap_config(), cfg.train_config())
    model.save(args.out)
    write_audit(args.audit or str(args.out) + ".audit.tsv", audit)
    _echo_config(cfg, args.out)
    best = max(audit, key=lambda r: r.dev_acc1)
    print(f"best dev acc@1 = {best.dev_acc1:.4f} (iteration {best.iteration} of {len(audit) - 1})")
    return EXIT_OK


def _read_words(path):
    stream = sys.stdin if path in (None, "-") else open(path, encoding="utf-8")
    with stream:
        for line in stream:
            for token in line.split():
                yield token


def cmd_transliterate(args) -> int:
    from .decoding import beam_search, select_dict_constrained
    from .model import ModelParams
    from .text import normalize

    cfg = _config(args)
    tf = _source_transform(cfg)
    model = ModelParams.load(args.model)
    dictionary = load_dictionary(args.dictionary) if args.dictionary else None
    if args.strategy == "dc" and dictionary is None:
        raise ConfigError("--strategy dc needs --dictionary")
    width = args.width or cfg["beam_width"]
    out = sys.stdout
    for raw in _read_words(args.input):
        word = normalize(raw, "source")
        if tf is not None:
            word = tf(word)
        beam = beam_search(model, word, width)
        if args.strategy == "dc":
            text, used = select_dict_constrained(beam, dictionary)
            score = next((h.score for h in beam if h.text == text), float("nan"))
            out.write(f"{raw}\t1\t{text}\t{score:.6f}\t{'dict' if used else 'top'}\n")
        else:
            for rank, hyp in enumerate(beam, 1):
                out.write(f"{raw}\t{rank}\t{hyp.text}\t{hyp.score:.6f}\n")
    return EXIT_OK


def cmd_eval(args) -> int:
    from .evaluation import acc_at_1, native_foreign_breakdown
    from .model import ModelParams

    cfg = _config(args)
    tf = _source_transform(cfg)
    model = ModelParams.load(args.model)
    test = load_name_pairs(args.test, tf)
    if not test:
        raise DataError(f"{args.test}: no name pairs")
    strategy = args.strategy.upper()
    dictionary = load_dictionary(args.dictionary) if args.dictionary else None
    if strategy == "DC" and dictionary is None:
        raise ConfigError("--strategy dc needs --dictionary")
    report = acc_at_1(model, test, strategy, args.width or cfg["beam_width"], dictionary)
    if args.report:
        report.write_tsv(args.report)
    print(f"acc@1 ({strategy}) = {report.acc_at_1:.4f} over {len(report.rows)} words")
    if all(r.origin_tag in ("native", "foreign") for r in report.rows):
        b = native_foreign_breakdown(report)
        fmt = lambda v: "undefined" if v is None else f"{v:.4f}"
        print(f"native = {fmt(b.acc_native)} (n={b.n_native}), foreign = {fmt(b.acc_foreign)} "
              f"(n={b.n_foreign}), ratio = {fmt(b.ratio)}")
    return EXIT_OK


def cmd_cg_eval(args) -> int:
    from .evaluation import build_inverted_index, load_kb, load_queries, recall_at_k
    from .model import ModelParams

    cfg = _config(args)
    idx = build_inverted_index(load_kb(args.kb))
    queries = load_queries(args.queries)
    if not queries:
        raise DataError(f"{args.queries}: no queries")
    model = ModelParams.load(args.model) if args.model else None
    width = args.width or cfg["beam_width"]
    baseline = recall_at_k(queries, idx, None, args.k, width)
    full = recall_at_k(queries, idx, model, args.k, width) if model is not None else baseline
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write("mention\tgold\tstage\thit\tcandidates\n")
            for mention, gold, stage, hit, cands in full.rows:
                fh.write(f"{mention}\t{gold}\t{stage}\t{int(hit)}\t{','.join(cands)}\n")
    print(f"recall@{args.k}: name match = {baseline.recall:.4f}, with transliteration = {full.recall:.4f}")
    return EXIT_OK


def cmd_cvsplit(args) -> int:
    cfg = _config(args)
    start = cfg["cv_block"] if args.block_start is None else int(args.block_start, 16)
    src = sys.stdin if args.input in (None, "-") else open(args.input, encoding="utf-8")
    dst = sys.stdout if args.output in (None, "-") else open(args.output, "w", encoding="utf-8")
    with src:
        for line in src:
            line = line.rstrip("\n")
            cols = line.split("\t")
            columns = range(len(cols)) if args.all_columns else [0]
            for c in columns:
                cols[c] = " ".join(cv_split(t, start, args.block_size) for t in cols[c].split(" "))
                if args.render:
                    cols[c] = " | ".join(render_cv(t) for t in cols[c].split(" "))
            dst.write("\t".join(cols) + "\n")
    if dst is not sys.stdout:
        dst.close()
    return EXIT_OK


def cmd_annotate(args) -> int:
    from .annotate import run_annotation

    letters_path = Path(args.letters)
    if letters_path.is_file():
        letters = [l.strip() for l in letters_path.read_text(encoding="utf-8").splitlines() if l.strip()]
    else:
        letters = list(args.letters)
    names = []
    if args.names:
        names = [l.strip() for l in Path(args.names).read_text(encoding="utf-8").splitlines() if l.strip()]
    n = run_annotation(letters, names, args.out, warn=lambda msg: print("warning: " + msg, file=sys.stderr))
    print(f"wrote {n} pairs to {args.out}")
    return EXIT_OK


def cmd_toy(args) -> int:
    from .toy import make_toy_kb, make_toy_setup

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    s = make_toy_setup(args.seed)
    write_name_pairs(out / "seed.tsv", s.seed)
    write_name_pairs(out / "dev.tsv", s.dev)
    write_name_pairs(out / "test.tsv", s.test)
    (out / "vocab.txt").write_text("\n".join(s.vocab) + "\n", encoding="utf-8")
    (out / "dict.txt").write_text("\n".join(s.dictionary) + "\n", encoding="utf-8")
    kb, queries = make_toy_kb(s.language, seed=args.seed)
    with open(out / "kb.tsv", "w", encoding="utf-8") as fh:
        for eid, names in kb:
            fh.write("\t".join([eid] + names) + "\n")
    with open(out / "queries.tsv", "w", encoding="utf-8") as fh:
        for mention, gold in queries:
            fh.write(f"{mention}\t{gold}\n")
    print(f"toy data written to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hmatranslit", description="Low-resource name transliteration.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_config(p):
        p.add_argument("-c", "--config", help="key = value config file")
        p.add_argument("-s", "--set", action="append", metavar="KEY=VALUE", help="override a config key")
        return p

    p = with_config(sub.add_parser("train", help="train a model on name pairs"))
    p.add_argument("--seed-pairs", required=True)
    p.add_argument("--dev")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = with_config(sub.add_parser("bootstrap", help="train with constrained discovery"))
    p.add_argument("--seed-pairs", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--dictionary", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--audit")
    p.set_defaults(func=cmd_bootstrap)

    p = with_config(sub.add_parser("transliterate", help="decode words, one per line"))
    p.add_argument("--model", required=True)
    p.add_argument("--input", default="-")
    p.add_argument("--width", type=int)
    p.add_argument("--strategy", choices=("u", "dc"), default="u")
    p.add_argument("--dictionary")
    p.set_defaults(func=cmd_transliterate)

    p = with_config(sub.add_parser("eval", help="acc@1 on a test TSV"))
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--strategy", choices=("u", "dc"), default="u")
    p.add_argument("--dictionary")
    p.add_argument("--width", type=int)
    p.add_argument("--report")
    p.set_defaults(func=cmd_eval)

    p = with_config(sub.add_parser("cg-eval", help="candidate generation recall@k"))
    p.add_argument("--model")
    p.add_argument("--kb", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--width", type=int)
    p.add_argument("--report")
    p.set_defaults(func=cmd_cg_eval)

    p = with_config(sub.add_parser("cvsplit", help="consonant/vowel split an alphasyllabary"))
    p.add_argument("--input", default="-")
    p.add_argument("--output", default="-")
    p.add_argument("--block-start", help="hex codepoint of the block origin (default 1200)")
    p.add_argument("--block-size", type=lambda s: int(s, 0), default=ETHIOPIC_SIZE)
    p.add_argument("--all-columns", action="store_true", help="split every TSV column, not just the first")
    p.add_argument("--render", action="store_true", help="write readable C<row> V<col> tokens")
    p.set_defaults(func=cmd_cvsplit)

    p = sub.add_parser("annotate", help="collect a seed list interactively")
    p.add_argument("--letters", required=True, help="file with one source letter per line, or the letters themselves")
    p.add_argument("--names", help="file of English names for the second phase")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("toy", help="write the synthetic toy dataset")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_toy)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError, UnicodeDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NonFiniteError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
