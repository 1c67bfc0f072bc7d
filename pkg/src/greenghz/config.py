"""Experiment configuration documents.

A config is flat TOML with dotted keys::

    experiment = "ghz3"
    source.visibility = 0.95
    transducer.background_rate = 0.1
    sampling.seed = 7

Table headers (``[source]``) are accepted too. Every key is validated; unknown
keys and out-of-range values raise :class:`ConfigError` naming the key and its
line.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Any, Callable, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .optics import SourceSpec, TransducerSpec

EXPERIMENTS = ("bell_before_conversion", "bell_after_conversion", "ghz3")


class ConfigError(ValueError):
    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key, self.line = key, line
        where = ""
        if key is not None:
            where = f"{key}"
            if line is not None:
                where += f" (line {line})"
            where += ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class SamplingSpec:
    events_per_setting: float = 1e4
    seed: Optional[int] = None


@dataclass(frozen=True)
class AnalysisSpec:
    tomography: bool
    ghz_suite: bool
    bootstrap_resamples: int = 200


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    source: SourceSpec
    transducer: TransducerSpec
    pbs_visibility: float
    sampling: SamplingSpec
    analysis: AnalysisSpec

    @property
    def n_qubits(self) -> int:
        return 3 if self.experiment == "ghz3" else 2

    def flat(self) -> dict[str, Any]:
        return {
            "experiment": self.experiment,
            "source.kind": self.source.kind,
            "source.phase_phi": self.source.phase_phi,
            "source.visibility": self.source.visibility,
            "transducer.efficiency_eta": self.transducer.efficiency_eta,
            "transducer.background_rate": self.transducer.background_rate,
            "pbs_visibility": self.pbs_visibility,
            "sampling.events_per_setting": self.sampling.events_per_setting,
            "sampling.seed": self.sampling.seed,
            "analysis.tomography": self.analysis.tomography,
            "analysis.ghz_suite": self.analysis.ghz_suite,
            "analysis.bootstrap_resamples": self.analysis.bootstrap_resamples,
        }

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return ExperimentConfig(
            self.experiment,
            self.source,
            self.transducer,
            self.pbs_visibility,
            SamplingSpec(self.sampling.events_per_setting, seed),
            self.analysis,
        )


def _real(lo=-math.inf, hi=math.inf, lo_open=False, hi_open=False) -> Callable:
    def check(v):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise TypeError("expected a number")
        v = float(v)
        if not math.isfinite(v):
            raise ValueError("must be finite")
        if v < lo or (lo_open and v == lo) or v > hi or (hi_open and v == hi):
            lb = "(" if lo_open else "["
            rb = ")" if hi_open else "]"
            raise ValueError(f"value {v!r} outside {lb}{lo:g}, {hi:g}{rb}")
        return v

    return check


def _int(lo=None) -> Callable:
    def check(v):
        if isinstance(v, bool) or not isinstance(v, int):
            raise TypeError("expected an integer")
        if lo is not None and v < lo:
            raise ValueError(f"value {v} below {lo}")
        return v

    return check


def _bool(v):
    if not isinstance(v, bool):
        raise TypeError("expected true or false")
    return v


def _choice(*options) -> Callable:
    def check(v):
        if v not in options:
            raise ValueError(f"{v!r} not one of {', '.join(options)}")
        return v

    return check


def _resamples(v):
    v = _int(0)(v)
    if 0 < v < 100:
        raise ValueError("bootstrap_resamples must be 0 (disabled) or at least 100")
    return v


# key -> (validator, default); a default of None means "required" or
# "derived from the experiment" as handled in parse_config
_SCHEMA: dict[str, tuple[Callable, Any]] = {
    "experiment": (_choice(*EXPERIMENTS), None),
    "source.kind": (_choice("sandwich_bell"), "sandwich_bell"),
    "source.phase_phi": (_real(), 0.0),
    "source.visibility": (_real(0.0, 1.0), 1.0),
    "transducer.efficiency_eta": (_real(0.0, 1.0, lo_open=True), 1.0),
    "transducer.background_rate": (_real(0.0), 0.0),
    "pbs_visibility": (_real(0.0, 1.0), 1.0),
    "sampling.events_per_setting": (_real(0.0, lo_open=True), 1e4),
    "sampling.seed": (_int(0), None),
    "analysis.tomography": (_bool, None),
    "analysis.ghz_suite": (_bool, None),
    "analysis.bootstrap_resamples": (_resamples, 200),
}

KEYS = tuple(_SCHEMA)


def _flatten(doc: dict, prefix: str = "") -> dict[str, Any]:
    out = {}
    for k, v in doc.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


_HEADER = re.compile(r"^\s*\[\s*([A-Za-z0-9_.\-\s\"]+?)\s*\]\s*(#.*)?$")
_ASSIGN = re.compile(r"^\s*([A-Za-z0-9_.\-\s\"]+?)\s*=")


def _norm_key(raw: str) -> str:
    return ".".join(part.strip().strip('"') for part in raw.split("."))


def key_line(text: str, key: str) -> Optional[int]:
    """1-based line where dotted ``key`` is assigned, if it can be located."""
    table = ""
    for i, line in enumerate(text.splitlines(), 1):
        m = _HEADER.match(line)
        if m:
            table = _norm_key(m.group(1))
            continue
        m = _ASSIGN.match(line)
        if m:
            full = _norm_key(m.group(1))
            if table:
                full = f"{table}.{full}"
            if full == key:
                return i
    return None


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a config document, applying defaults."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"malformed document: {exc}", line=int(m.group(1)) if m else None) from None
    flat = _flatten(doc)
    vals: dict[str, Any] = {}
    for key, raw in flat.items():
        if key not in _SCHEMA:
            raise ConfigError("unknown key", key, key_line(text, key))
        check, _ = _SCHEMA[key]
        try:
            vals[key] = check(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), key, key_line(text, key)) from None
    if "experiment" not in vals:
        raise ConfigError("required key missing", "experiment")
    for key, (_, default) in _SCHEMA.items():
        if key not in vals and default is not None:
            vals[key] = default
    exp = vals["experiment"]
    vals.setdefault("sampling.seed", None)
    vals.setdefault("analysis.tomography", exp != "ghz3")
    vals.setdefault("analysis.ghz_suite", exp == "ghz3")
    if vals["analysis.ghz_suite"] and exp != "ghz3":
        raise ConfigError("GHZ suite only applies to experiment ghz3", "analysis.ghz_suite",
                          key_line(text, "analysis.ghz_suite"))
    return ExperimentConfig(
        experiment=exp,
        source=SourceSpec(vals["source.kind"], vals["source.phase_phi"], vals["source.visibility"]),
        transducer=TransducerSpec(vals["transducer.efficiency_eta"], vals["transducer.background_rate"]),
        pbs_visibility=vals["pbs_visibility"],
        sampling=SamplingSpec(vals["sampling.events_per_setting"], vals["sampling.seed"]),
        analysis=AnalysisSpec(
            vals["analysis.tomography"], vals["analysis.ghz_suite"], vals["analysis.bootstrap_resamples"]
        ),
    )


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return json.dumps(v)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Flat dotted-key document; ``parse_config`` of the result equals ``cfg``."""
    lines = [f"{k} = {_toml_value(v)}" for k, v in cfg.flat().items() if v is not None]
    return "\n".join(lines) + "\n"


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
