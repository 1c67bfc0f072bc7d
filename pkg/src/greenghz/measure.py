"""Projective measurement settings, GHZ observables and Poisson count sampling.

Basis tokens name the ``+`` eigenvector of a single-photon basis:

====== =================================
token  ``+`` outcome
====== =================================
H, V   |H>, |V>
D, A   (|H> + |V>)/sqrt2, (|H> - |V>)/sqrt2
R, L   (|H> + i|V>)/sqrt2, (|H> - i|V>)/sqrt2
E<t>   (|H> + exp(i t)|V>)/sqrt2
====== =================================

The ``-`` outcome is the orthogonal partner (H<->V, D<->A, R<->L,
E<t> <-> E<t+pi>).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .qcore import (
    SIGMA_X,
    SIGMA_Y,
    ModeOperator,
    State,
    as_density,
    expectation,
    fidelity_pure,
    ghz_state,
    kron,
    observable,
)

TWO_PI = 2 * math.pi
FIXED_TOKENS = "HVDARL"

_S = 1 / math.sqrt(2)
_KETS = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([_S, _S], dtype=complex),
    "A": np.array([_S, -_S], dtype=complex),
    "R": np.array([_S, 1j * _S], dtype=complex),
    "L": np.array([_S, -1j * _S], dtype=complex),
}
_PARTNER = {"H": "V", "V": "H", "D": "A", "A": "D", "R": "L", "L": "R"}
_BASIS_KEY = {"H": "Z", "V": "Z", "D": "X", "A": "X", "R": "Y", "L": "Y"}


def equatorial(theta: float) -> str:
    """Token for the basis ``(|H> +- exp(i theta)|V>)/sqrt2``."""
    if not math.isfinite(theta):
        raise ValueError("equatorial angle must be finite")
    return f"E{float(theta) % TWO_PI!r}"


def parse_token(token: str) -> tuple[str, Optional[float]]:
    if token in _KETS:
        return token, None
    if token.startswith("E"):
        try:
            theta = float(token[1:])
        except ValueError:
            raise ValueError(f"malformed equatorial token {token!r}") from None
        if not math.isfinite(theta):
            raise ValueError(f"malformed equatorial token {token!r}")
        return "E", theta % TWO_PI
    raise ValueError(f"unknown basis token {token!r}")


def token_ket(token: str, sign: int = 1) -> np.ndarray:
    kind, theta = parse_token(token)
    if sign not in (1, -1):
        raise ValueError(f"outcome sign must be +1 or -1, got {sign!r}")
    if kind == "E":
        ph = np.exp(1j * theta)
        return np.array([_S, sign * _S * ph], dtype=complex)
    return _KETS[kind if sign == 1 else _PARTNER[kind]]


def basis_key(token: str) -> str:
    """Identifier shared by a token and its partner."""
    kind, theta = parse_token(token)
    if kind == "E":
        # round so that E(t) and E(t + pi) agree despite float wrap-around
        t = round(theta % math.pi, 10)
        return f"E{0.0 if t == round(math.pi, 10) else t!r}"
    return _BASIS_KEY[kind]


def sign_in_basis(token: str, sign: int) -> int:
    """Sign relative to the canonical member of the basis (H, D, R, or E mod pi)."""
    kind, theta = parse_token(token)
    if kind == "E":
        return sign if theta < math.pi else -sign
    return sign if kind in "HDR" else -sign


@dataclass(frozen=True)
class MeasurementSetting:
    """Per-photon bases plus the outcome tuples that are recorded.

    ``outcomes=None`` records every one of the ``2**n`` sign tuples.
    """

    per_photon: tuple[str, ...]
    outcomes: Optional[tuple[tuple[int, ...], ...]] = None

    def __post_init__(self):
        toks = tuple(self.per_photon)
        for t in toks:
            parse_token(t)
        object.__setattr__(self, "per_photon", toks)
        if self.outcomes is not None:
            outs = tuple(tuple(int(s) for s in o) for o in self.outcomes)
            for o in outs:
                if len(o) != len(toks) or any(s not in (1, -1) for s in o):
                    raise ValueError(f"bad outcome tuple {o} for {len(toks)} photons")
            object.__setattr__(self, "outcomes", outs)

    @property
    def n_photons(self) -> int:
        return len(self.per_photon)

    def recorded(self) -> tuple[tuple[int, ...], ...]:
        if self.outcomes is not None:
            return self.outcomes
        return tuple(itertools.product((1, -1), repeat=self.n_photons))

    def projector_ket(self, outcome: Sequence[int]) -> np.ndarray:
        return kron(*[token_ket(t, s).reshape(-1, 1) for t, s in zip(self.per_photon, outcome)]).reshape(-1)

    def descriptor(self) -> str:
        return ";".join(self.per_photon)


@dataclass(frozen=True)
class CountRecord:
    """Counts per outcome tuple for one setting.

    Sampled records hold integers. ``expected=True`` marks records holding
    noiseless expected counts (non-negative reals).
    """

    setting: MeasurementSetting
    counts: Mapping[tuple[int, ...], float]
    duration: float = 1.0
    expected: bool = False

    def __post_init__(self):
        clean = {}
        for k, v in dict(self.counts).items():
            key = tuple(int(s) for s in k)
            if len(key) != self.setting.n_photons:
                raise ValueError(f"outcome {key} does not match {self.setting.n_photons} photons")
            if v < 0 or not math.isfinite(v):
                raise ValueError(f"count for {key} must be finite and non-negative, got {v}")
            if not self.expected:
                if float(v) != int(v):
                    raise ValueError(f"count for {key} is not an integer: {v}")
                v = int(v)
            clean[key] = v
        object.__setattr__(self, "counts", clean)

    @property
    def total(self) -> float:
        return sum(self.counts.values())


def born_probabilities(rho: State, setting: MeasurementSetting) -> dict[tuple[int, ...], float]:
    rho = as_density(rho)
    if rho.n_qubits != setting.n_photons:
        raise ValueError(f"setting covers {setting.n_photons} photons, state has {rho.n_qubits}")
    out = {}
    for o in setting.recorded():
        v = setting.projector_ket(o)
        out[o] = max(float(np.vdot(v, rho.matrix @ v).real), 0.0)
    return out


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_counts(rho: State, setting: MeasurementSetting, expected_total: float, seed) -> CountRecord:
    """Independent Poisson counts with mean ``expected_total * p(outcome)``."""
    if not expected_total >= 0:
        raise ValueError(f"expected_total must be non-negative, got {expected_total}")
    probs = born_probabilities(rho, setting)
    rng = _rng(seed)
    keys = list(probs)
    lam = expected_total * np.array([probs[k] for k in keys])
    draws = rng.poisson(lam)
    return CountRecord(setting, {k: int(c) for k, c in zip(keys, draws)})


def expected_counts(rho: State, setting: MeasurementSetting, expected_total: float) -> CountRecord:
    probs = born_probabilities(rho, setting)
    return CountRecord(setting, {k: expected_total * p for k, p in probs.items()}, expected=True)


# GHZ analysis


def observable_M(theta: float) -> ModeOperator:
    """``cos(theta) sigma_x + sin(theta) sigma_y``."""
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    return observable(math.cos(theta) * np.asarray(SIGMA_X) + math.sin(theta) * np.asarray(SIGMA_Y))


def M_tensor3(theta: float) -> np.ndarray:
    m = observable_M(theta).matrix
    return kron(m, m, m)


GHZ_THETAS = (0.0, math.pi / 3, 2 * math.pi / 3)


def coherence_operator() -> np.ndarray:
    return sum((-1) ** k * M_tensor3(t) for k, t in enumerate(GHZ_THETAS)) / 3


def population_operator() -> np.ndarray:
    p = np.zeros((8, 8), dtype=complex)
    p[0, 0] = p[7, 7] = 1.0
    return p


def _need3(rho):
    rho = as_density(rho)
    if rho.n_qubits != 3:
        raise ValueError(f"expected a 3-qubit state, got {rho.n_qubits} qubits")
    return rho


def coherence_C(rho: State) -> float:
    rho = _need3(rho)
    return sum((-1) ** k * expectation(rho, M_tensor3(t)) for k, t in enumerate(GHZ_THETAS)) / 3


def population_P(rho: State) -> float:
    return expectation(_need3(rho), population_operator())


def ghz_fidelity(rho: State) -> float:
    """``(P + C)/2``, which equals ``<GHZ|rho|GHZ>`` for every 3-qubit state."""
    return 0.5 * (population_P(rho) + coherence_C(rho))


class WitnessReport(NamedTuple):
    witness_value: float
    significance_sigmas: float
    entangled: bool


GHZ_WITNESS_ALPHA = 0.5


def witness_report(fidelity: float, sigma: float) -> WitnessReport:
    """Witness ``alpha - F`` (negative certifies genuine 3-photon entanglement)."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return WitnessReport(
        GHZ_WITNESS_ALPHA - fidelity,
        (fidelity - GHZ_WITNESS_ALPHA) / sigma,
        fidelity > GHZ_WITNESS_ALPHA,
    )


def ghz_suite_settings() -> list[MeasurementSetting]:
    """Three equatorial settings at k*pi/3 followed by the H/V setting."""
    out = [MeasurementSetting((equatorial(t),) * 3) for t in GHZ_THETAS]
    out.append(MeasurementSetting(("H", "H", "H")))
    return out


def correlation_from_counts(rec: CountRecord) -> float:
    """Mean product of outcome signs (relative to each basis' canonical member)."""
    tot = rec.total
    if tot <= 0:
        raise ValueError("cannot estimate a correlation from zero counts")
    acc = 0.0
    for outcome, c in rec.counts.items():
        sgn = 1
        for tok, s in zip(rec.setting.per_photon, outcome):
            sgn *= sign_in_basis(tok, s)
        acc += sgn * c
    return acc / tot


def population_from_counts(rec: CountRecord) -> float:
    """Fraction of HHH and VVV events in an H/V record."""
    if any(basis_key(t) != "Z" for t in rec.setting.per_photon):
        raise ValueError("population needs an H/V setting on every photon")
    tot = rec.total
    if tot <= 0:
        raise ValueError("cannot estimate a population from zero counts")
    hits = 0.0
    for outcome, c in rec.counts.items():
        bits = {int(sign_in_basis(t, s) == -1) for t, s in zip(rec.setting.per_photon, outcome)}
        if len(bits) == 1:
            hits += c
    return hits / tot


@dataclass
class GhzSuiteResult:
    M_expectations: list[float]
    P: float
    C: float
    F: float
    sigma: float = 0.0
    M_sigmas: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    P_sigma: float = 0.0
    witness: float = 0.0
    significance: Optional[float] = None

    def summary(self) -> dict:
        return {
            "M_expectations": list(self.M_expectations),
            "P": self.P,
            "C": self.C,
            "F": self.F,
            "sigma": self.sigma,
            "witness": self.witness,
            "significance": self.significance,
        }


def ghz_suite_from_counts(records: Sequence[CountRecord]) -> GhzSuiteResult:
    """C, P and F from the three equatorial records and the H/V record."""
    if len(records) != 4:
        raise ValueError(f"GHZ suite needs 4 records, got {len(records)}")
    m = [correlation_from_counts(r) for r in records[:3]]
    p = population_from_counts(records[3])
    c = (m[0] - m[1] + m[2]) / 3
    f = 0.5 * (p + c)
    return GhzSuiteResult(m, p, c, f, witness=GHZ_WITNESS_ALPHA - f)


def ghz_suite_exact(rho: State) -> GhzSuiteResult:
    rho = _need3(rho)
    m = [expectation(rho, M_tensor3(t)) for t in GHZ_THETAS]
    p = population_P(rho)
    c = (m[0] - m[1] + m[2]) / 3
    f = 0.5 * (p + c)
    return GhzSuiteResult(m, p, c, f, witness=GHZ_WITNESS_ALPHA - f)


def ghz_suite_bootstrap(records: Sequence[CountRecord], n_resamples: int, seed) -> GhzSuiteResult:
    """Point estimate plus Poisson-resampled standard deviations."""
    if n_resamples < 2:
        raise ValueError("need at least two resamples")
    base = ghz_suite_from_counts(records)
    seq = np.random.SeedSequence(seed) if not isinstance(seed, np.random.SeedSequence) else seed
    rng = np.random.default_rng(seq)
    rows = []
    for _ in range(n_resamples):
        res = [
            CountRecord(r.setting, {k: int(x) for k, x in zip(r.counts, rng.poisson(list(r.counts.values())))})
            for r in records
        ]
        b = ghz_suite_from_counts(res)
        rows.append(b.M_expectations + [b.P, b.F])
    arr = np.array(rows)
    sd = arr.std(axis=0, ddof=1)
    base.M_sigmas = [float(x) for x in sd[:3]]
    base.P_sigma = float(sd[3])
    base.sigma = float(sd[4])
    if base.sigma > 0:
        base.significance = witness_report(base.F, base.sigma).significance_sigmas
    return base


def ghz_target_fidelity(rho: State) -> float:
    return fidelity_pure(rho, ghz_state(3))
