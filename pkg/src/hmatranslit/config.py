"""Flat ``key = value`` run configuration with CLI overrides."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Optional

from .bootstrap import BootstrapConfig
from .model import TrainConfig

REQUIRED = object()


def _hex_or_int(value: str) -> int:
    return int(value, 0) if value.lower().startswith("0x") else int(value, 16)


# key -> (parser, default)
FIELDS = {
    "rng_seed": (int, 0),
    "d": (int, 50),
    "k": (int, 20),
    "lr": (float, 0.001),
    "batch_size": (int, 1),
    "epochs": (int, 20),
    "beam_width": (int, 10),
    "beta1": (float, 0.9),
    "beta2": (float, 0.999),
    "eps_adam": (float, 1e-8),
    "init_scale": (float, 0.1),
    "aligner": (str, "cooc"),
    "L0_min": (int, 10),
    "delta_min_log": (float, REQUIRED),
    "epsilon": (float, REQUIRED),
    "top_k": (int, 10),
    "max_iterations": (int, 10),
    "patience": (int, 1),
    "L_floor": (int, 1),
    "char_map": (str, ""),
    "cv_block": (_hex_or_int, 0x1200),
}

BOOTSTRAP_KEYS = ("delta_min_log", "epsilon")


class ConfigError(ValueError):
    pass


def parse_lines(lines: Iterable[str], origin: str) -> dict:
    out = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def _convert(key: str, raw) -> object:
    if key not in FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    parser, _ = FIELDS[key]
    if not isinstance(raw, str):
        return raw
    try:
        return parser(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {parser.__name__.lstrip('_')}") from None


class RunConfig(dict):
    """Resolved configuration: defaults < config file < command-line overrides."""

    @classmethod
    def resolve(cls, path: Optional[str] = None, overrides: Iterable[str] = (),
                require: Iterable[str] = ()) -> "RunConfig":
        values = {k: v for k, (_, v) in FIELDS.items()}
        if path:
            p = Path(path)
            if not p.is_file():
                raise ConfigError(f"config file not found: {path}")
            for key, raw in parse_lines(p.read_text(encoding="utf-8").splitlines(), str(p)).items():
                values[key] = _convert(key, raw)
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not key=value")
            key, raw = (s.strip() for s in item.split("=", 1))
            values[key] = _convert(key, raw)
        missing = [k for k in require if values[k] is REQUIRED]
        if missing:
            raise ConfigError("missing required config: " + ", ".join(missing))
        cfg = cls(values)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self["batch_size"] != 1:
            raise ConfigError("batch_size: only 1 is supported")
        try:
            self.train_config()
            if all(self[k] is not REQUIRED for k in BOOTSTRAP_KEYS):
                self.bootstrap_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            d=self["d"], k=self["k"], lr=self["lr"], epochs=self["epochs"],
            beam_width=self["beam_width"], seed=self["rng_seed"], beta1=self["beta1"],
            beta2=self["beta2"], eps_adam=self["eps_adam"], init_scale=self["init_scale"],
            aligner=self["aligner"],
        )

    def bootstrap_config(self) -> BootstrapConfig:
        return BootstrapConfig(
            delta_min=self["delta_min_log"], epsilon=self["epsilon"], L0_min=self["L0_min"],
            top_k=self["top_k"], beam_width=self["beam_width"],
            max_iterations=self["max_iterations"], patience=self["patience"],
            L_floor=self["L_floor"],
        )

    def dumps(self) -> str:
        lines = []
        for key in FIELDS:
            value = self[key]
            if value is REQUIRED:
                continue
            if key == "cv_block":
                value = hex(value)
            lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")
