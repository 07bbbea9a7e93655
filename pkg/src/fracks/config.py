"""Experiment configuration: JSON or TOML, round-trips losslessly."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import tomli
import tomli_w

from .report import digest
from .solver import SimParams

_PARAM_FIELDS = {f.name for f in dataclasses.fields(SimParams)}
_OUTPUT_KEYS = {"dir", "snapshot_every", "plots", "csv_slices"}
_CONSTANT_KEYS = {"eps", "c", "M_gamma"}


@dataclass(frozen=True)
class ExperimentConfig:
    params: SimParams
    initial_condition: dict
    seed: int = 0
    outputs: dict = field(default_factory=lambda: {"dir": "out", "snapshot_every": 0, "plots": True})
    criteria_constants: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        p = {k: v for k, v in dataclasses.asdict(self.params).items() if v is not None}
        p["lp"] = list(p["lp"])
        return {"seed": self.seed, "params": p, "initial_condition": dict(self.initial_condition),
                "outputs": dict(self.outputs), "criteria_constants": dict(self.criteria_constants)}

    @property
    def digest(self) -> str:
        return digest(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        unknown = set(data) - {"seed", "params", "initial_condition", "outputs", "criteria_constants"}
        if unknown:
            raise ValueError(f"unknown configuration sections: {sorted(unknown)}")
        p = dict(data.get("params", {}))
        bad = set(p) - _PARAM_FIELDS
        if bad:
            raise ValueError(f"unknown params: {sorted(bad)}")
        missing = {"d", "alpha", "beta", "gamma", "n", "half_width", "dt", "T"} - set(p)
        if missing:
            raise ValueError(f"missing params: {sorted(missing)}")
        if "lp" in p:
            p["lp"] = tuple(p["lp"])
        params = SimParams(**p)
        ic = dict(data.get("initial_condition", {}))
        if "kind" not in ic:
            raise ValueError("initial_condition needs a 'kind'")
        out = {"dir": "out", "snapshot_every": 0, "plots": True}
        given = dict(data.get("outputs", {}))
        if set(given) - _OUTPUT_KEYS:
            raise ValueError(f"unknown outputs keys: {sorted(set(given) - _OUTPUT_KEYS)}")
        out.update(given)
        consts = dict(data.get("criteria_constants", {}))
        if set(consts) - _CONSTANT_KEYS:
            raise ValueError(f"unknown criteria constants: {sorted(set(consts) - _CONSTANT_KEYS)}")
        return cls(params, ic, int(data.get("seed", 0)), out, consts)


def loads(text: str, fmt: str | None = None) -> ExperimentConfig:
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "toml"
    if fmt == "json":
        data = json.loads(text)
    elif fmt == "toml":
        try:
            data = tomli.loads(text)
        except tomli.TOMLDecodeError as exc:
            raise ValueError(f"malformed configuration: {exc}") from exc
    else:
        raise ValueError(f"unknown configuration format {fmt!r}")
    return ExperimentConfig.from_dict(data)


def load(path) -> ExperimentConfig:
    p = Path(path)
    fmt = {".json": "json", ".toml": "toml"}.get(p.suffix.lower())
    return loads(p.read_text(), fmt)


def dumps(cfg: ExperimentConfig, fmt: str = "toml") -> str:
    d = cfg.to_dict()
    if fmt == "json":
        from .report import dumps as jdumps

        return jdumps(d) + "\n"
    return tomli_w.dumps(d)
