"""Interactive seed-list collection.

Phase 1 asks, for every source letter, for one name that begins with the
letter and one that contains it elsewhere, each with its English spelling.
Phase 2 shows English names and records one or more source-script spellings.
Progress is kept in ``<out>.state`` so an interrupted session resumes at the
next unanswered prompt.
"""

from __future__ import annotations

import json
import logging
import unicodedata
from pathlib import Path
from typing import Callable, Sequence

log = logging.getLogger(__name__)


def _prompts(letters: Sequence[str], names: Sequence[str]) -> list[tuple]:
    out = [(kind, letter) for letter in letters for kind in ("initial", "medial")]
    out += [("name", name) for name in names]
    return out


def _nfc(s: str) -> str:
    return unicodedata.normalize("NFC", s).strip()


def position_ok(kind: str, letter: str, word: str) -> bool:
    if kind == "initial":
        return word.startswith(letter)
    return letter in word[1:]


def run_annotation(
    letters: Sequence[str],
    english_names: Sequence[str],
    out_path,
    ask: Callable[[str], str] = input,
    warn: Callable[[str], None] = log.warning,
) -> int:
    """Run (or resume) a session; returns the number of pairs written this run.

    ``ask`` raising EOFError or KeyboardInterrupt ends the session early; the
    answers given so far are kept.
    """
    out_path = Path(out_path)
    state_path = out_path.with_name(out_path.name + ".state")
    done = 0
    if state_path.exists() and out_path.exists():
        done = json.loads(state_path.read_text())["done"]
    prompts = _prompts([_nfc(l) for l in letters], list(english_names))
    written = 0
    with out_path.open("a", encoding="utf-8") as fh:
        for number, (kind, item) in enumerate(prompts):
            if number < done:
                continue
            try:
                rows = _ask_one(kind, item, ask, warn)
            except (EOFError, KeyboardInterrupt):
                return written
            for src, tgt in rows:
                fh.write(f"{src}\t{tgt}\n")
                written += 1
            fh.flush()
            state_path.write_text(json.dumps({"done": number + 1}))
    return written


def _ask_one(kind, item, ask, warn) -> list[tuple]:
    if kind == "name":
        raw = _nfc(ask(f"Spelling(s) of '{item}' in the source script (comma-separated): "))
        spellings = [s.strip() for s in raw.split(",") if s.strip()]
        if not spellings:
            warn(f"no spelling given for {item!r}; skipped")
        return [(s, item.strip().lower()) for s in spellings]

    where = "beginning with" if kind == "initial" else "containing (not at the start)"
    while True:
        src = _nfc(ask(f"Name {where} '{item}': "))
        if not src:
            warn(f"blank entry for letter {item!r} ({kind}); skipped")
            return []
        if position_ok(kind, item, src):
            break
        warn(f"{src!r} is not a name {where} {item!r}; try again")
    tgt = _nfc(ask(f"English spelling of '{src}': ")).lower()
    if not tgt:
        warn(f"no English spelling for {src!r}; skipped")
        return []
    return [(src, tgt)]
