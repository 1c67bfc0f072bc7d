"""Optical elements and photon sources of the green-GHZ setup.

Jones matrices use the package basis ``|H> = (1, 0)``, ``|V> = (0, 1)``.
Sign convention: ``HWP(0)|V> = -|V>``; maps are otherwise meaningful up to a
global phase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .qcore import (
    DensityMatrix,
    Label,
    ModeOperator,
    SIGMA_X,
    State,
    StateVector,
    apply,
    as_density,
    ket,
    partial_trace,
)

IR_NM = 1560.0
GREEN_NM = 520.0

# Path identifiers used by the pipeline. The entangled source emits into A
# (520 nm) and B (1560 nm, upconverted later); the product source into C
# (520 nm) and the herald path D (1560 nm).
PATH_A, PATH_B, PATH_C, PATH_HERALD = "A", "B", "C", "D"


@dataclass(frozen=True)
class WaveplateSetting:
    retardance: Literal["half", "quarter"]
    axis_angle: float

    def __post_init__(self):
        if self.retardance not in ("half", "quarter"):
            raise ValueError(f"unknown retardance {self.retardance!r}")
        if not math.isfinite(self.axis_angle):
            raise ValueError("axis angle must be finite")
        object.__setattr__(self, "axis_angle", float(self.axis_angle) % math.pi)


def hwp_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    return np.array([[c, s], [s, -c]], dtype=complex)


def qwp_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array(
        [[c * c + 1j * s * s, (1 - 1j) * s * c], [(1 - 1j) * s * c, s * s + 1j * c * c]],
        dtype=complex,
    )


def waveplate(w: WaveplateSetting) -> ModeOperator:
    if w.retardance == "half":
        return ModeOperator(hwp_matrix(w.axis_angle))
    return ModeOperator(qwp_matrix(w.axis_angle))


def hwp(theta: float) -> ModeOperator:
    return waveplate(WaveplateSetting("half", theta))


def qwp(theta: float) -> ModeOperator:
    return waveplate(WaveplateSetting("quarter", theta))


def babinet(phi: float) -> ModeOperator:
    """Relative phase ``exp(i phi)`` on the V component."""
    if not math.isfinite(phi):
        raise ValueError("Babinet phase must be finite")
    return ModeOperator(np.diag([1.0, np.exp(1j * phi)]))


def ppln_stage() -> ModeOperator:
    """Type-0 upconversion: polarization untouched, wavelength 1560 -> 520 nm."""
    return ModeOperator(np.eye(2), rewrite=(Label(GREEN_NM, None),))


def sagnac_arms() -> dict[str, np.ndarray]:
    """Net Jones matrices of the two counter-propagating loop directions.

    Clockwise the photon meets the HWP first and then the crystal; anticlockwise
    the order is reversed. Both reduce to a polarization flip.
    """
    flip = hwp_matrix(math.pi / 4)
    conv = ppln_stage().matrix
    return {"clockwise": conv @ flip, "anticlockwise": flip @ conv}


@dataclass(frozen=True)
class SourceSpec:
    kind: Literal["sandwich_bell", "product_pair"] = "sandwich_bell"
    phase_phi: float = 0.0
    visibility: float = 1.0

    def __post_init__(self):
        if self.kind not in ("sandwich_bell", "product_pair"):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if not math.isfinite(self.phase_phi):
            raise ValueError("source phase must be finite")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility {self.visibility} outside [0, 1]")


def sandwich_ket(phi: float) -> StateVector:
    """``(|HV> + exp(i phi)|VH>)/sqrt(2)`` on (520 nm A, 1560 nm B)."""
    amps = np.zeros(4, dtype=complex)
    amps[0b01] = 1 / math.sqrt(2)
    amps[0b10] = np.exp(1j * phi) / math.sqrt(2)
    return StateVector(amps, ((GREEN_NM, PATH_A), (IR_NM, PATH_B)))


def sandwich_source(spec: SourceSpec) -> DensityMatrix:
    """Two-crystal source with imperfect walk-off compensation.

    Compensation errors are modeled as H/V dephasing: the coherence between
    ``|HV>`` and ``|VH>`` is scaled by ``spec.visibility``.
    """
    if spec.kind != "sandwich_bell":
        raise ValueError(f"sandwich_source needs kind 'sandwich_bell', got {spec.kind!r}")
    pure = sandwich_ket(spec.phase_phi).to_density()
    mat = np.array(pure.matrix)
    diag = np.diag(np.diag(mat))
    mixed = spec.visibility * mat + (1 - spec.visibility) * diag
    return DensityMatrix(mixed, pure.labels)


def product_source() -> StateVector:
    """``|V>_520 |H>_1560`` on paths C and D."""
    return ket("VH", ((GREEN_NM, PATH_C), (IR_NM, PATH_HERALD)))


# HWP angle taking |V> to (|H> + |V>)/sqrt(2).
DIAGONAL_PREP_ANGLE = 3 * math.pi / 8


@dataclass(frozen=True)
class TransducerSpec:
    efficiency_eta: float = 1.0
    background_rate: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.efficiency_eta <= 1.0:
            raise ValueError(f"efficiency_eta {self.efficiency_eta} outside (0, 1]")
        if not (self.background_rate >= 0.0 and math.isfinite(self.background_rate)):
            raise ValueError(f"background_rate {self.background_rate} must be finite and >= 0")

    @property
    def background_weight(self) -> float:
        """Fraction of heralded 520 nm events that are accidental."""
        return self.background_rate / (self.efficiency_eta + self.background_rate)


@dataclass(frozen=True)
class HeraldedState:
    state: DensityMatrix
    success_probability: float


@dataclass(frozen=True)
class Transducer:
    """Polarization-flipping frequency converter for one 1560 nm qubit.

    The coherent branch is the isometry ``sqrt(eta) * sigma_x`` with a
    1560 -> 520 nm label rewrite. Background photons replace the converted
    qubit by white noise with weight ``background_rate / (eta + background_rate)``.
    """

    spec: TransducerSpec

    @property
    def operator(self) -> ModeOperator:
        eta = self.spec.efficiency_eta
        return ModeOperator(
            math.sqrt(eta) * np.asarray(SIGMA_X),
            unitary=eta == 1.0,
            rewrite=(Label(GREEN_NM, None),),
        )

    def __call__(self, state: State, target: int) -> HeraldedState:
        lab = state.labels[target]
        if lab.wavelength != IR_NM:
            raise ValueError(
                f"transducer input on path {lab.path!r} is at {lab.wavelength} nm, not {IR_NM:g} nm"
            )
        out = apply(self.operator, as_density(state), [target])
        p = out.trace
        out = out.normalized()
        w = self.spec.background_weight
        if w > 0:
            out = DensityMatrix((1 - w) * out.matrix + w * _white_on(out, target), out.labels)
        return HeraldedState(out, p)


def transducer(spec: TransducerSpec) -> Transducer:
    return Transducer(spec)


def _white_on(rho: DensityMatrix, target: int) -> np.ndarray:
    """``Tr_target(rho)`` with ``I/2`` reinserted at ``target``."""
    n = rho.n_qubits
    others = [q for q in range(n) if q != target]
    if not others:
        return np.eye(2) / 2
    red = partial_trace(rho, others).matrix
    full = np.kron(red, np.eye(2) / 2)
    # move the appended qubit back to position `target`
    order = others + [target]
    perm = np.argsort(order)
    t = full.reshape((2,) * (2 * n))
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(2**n, 2**n)
