"""Post-selected interference on a polarizing beam splitter and the
generation pipelines built on it.

PBS model: H is transmitted, V reflected, reflection phase 1. Photon B
transmits to B' and reflects to C'; photon C transmits to C' and reflects to
B'. Only the HH and VV components of the (B, C) pair leave one photon in each
output port, so the coincidence Kraus operator is ``|HH><HH| + |VV><VV|``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .optics import (
    DIAGONAL_PREP_ANGLE,
    HeraldedState,
    SourceSpec,
    TransducerSpec,
    babinet,
    hwp,
    product_source,
    sandwich_source,
    transducer,
)
from .qcore import (
    SIGMA_X,
    DensityMatrix,
    Label,
    ModeOperator,
    State,
    apply,
    as_density,
    tensor,
)

_COINCIDENCE = np.diag([1.0, 0.0, 0.0, 1.0])


@dataclass(frozen=True)
class PostSelectionOutcome:
    state: DensityMatrix
    success_probability: float
    herald_paths: tuple[str, ...]


def _primed(path: str) -> str:
    return path if path.endswith("'") else path + "'"


def pbs_interfere(state: State, mode_b: int, mode_c: int, visibility: float = 1.0) -> PostSelectionOutcome:
    """Interfere qubits ``mode_b`` and ``mode_c`` on a PBS and keep coincidences.

    ``visibility`` < 1 models residual distinguishability of the two photons:
    it scales the coherence between the HH and VV branches of the output pair.
    """
    if mode_b == mode_c:
        raise ValueError("PBS inputs must be two distinct qubits")
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"PBS visibility {visibility} outside [0, 1]")
    lb, lc = state.labels[mode_b], state.labels[mode_c]
    if lb.wavelength != lc.wavelength:
        raise ValueError(
            f"PBS inputs {lb.path!r} ({lb.wavelength} nm) and {lc.path!r} "
            f"({lc.wavelength} nm) are distinguishable by wavelength"
        )
    kraus = ModeOperator(
        _COINCIDENCE,
        unitary=False,
        rewrite=(Label(None, _primed(lb.path)), Label(None, _primed(lc.path))),
    )
    out = apply(kraus, as_density(state), [mode_b, mode_c])
    p = out.trace
    if p <= 1e-15:
        return PostSelectionOutcome(out, 0.0, tuple(lab.path for lab in out.labels))
    mat = np.array(out.matrix) / p
    if visibility < 1.0:
        mat *= _pair_coherence_mask(out.n_qubits, mode_b, mode_c, visibility)
    rho = DensityMatrix(mat, out.labels)
    return PostSelectionOutcome(rho, min(p, 1.0), tuple(lab.path for lab in rho.labels))


def _pair_coherence_mask(n: int, b: int, c: int, vis: float) -> np.ndarray:
    idx = np.arange(2**n)
    bb = (idx >> (n - 1 - b)) & 1
    cc = (idx >> (n - 1 - c)) & 1
    # after projection only bb == cc survives; branch label is bb
    branch = bb
    differs = branch[:, None] != branch[None, :]
    return np.where(differs, vis, 1.0)


def compensated_source(source: SourceSpec, compensator_phase: float | None = None) -> DensityMatrix:
    """Entangled pair after the Babinet compensator on the 520 nm photon.

    By default the compensator cancels ``source.phase_phi`` exactly.
    """
    rho = sandwich_source(source)
    c = -source.phase_phi if compensator_phase is None else compensator_phase
    return apply(babinet(c), rho, [0])


def bell_before_conversion(source: SourceSpec, compensator_phase: float | None = None) -> HeraldedState:
    """Pair at (520, 1560) nm with the IR photon flipped, targeting (HH+VV)/sqrt(2)."""
    rho = compensated_source(source, compensator_phase)
    return HeraldedState(apply(ModeOperator(SIGMA_X), rho, [1]), 1.0)


def bell_after_conversion(
    source: SourceSpec, conv: TransducerSpec, compensator_phase: float | None = None
) -> HeraldedState:
    """Pair at (520, 520) nm after the transducer acts on the IR photon."""
    rho = compensated_source(source, compensator_phase)
    return transducer(conv)(rho, 1)


def ghz_pipeline(
    source: SourceSpec,
    conv: TransducerSpec,
    pbs_visibility: float = 1.0,
    compensator_phase: float | None = None,
) -> PostSelectionOutcome:
    """Heralded three-photon state over (A, B', C', D).

    Register order: entangled 520 nm photon A, upconverted photon B', the
    product-source 520 nm photon C', and the 1560 nm herald D.
    """
    pair = bell_after_conversion(source, conv, compensator_phase)
    extra = product_source()
    extra = apply(hwp(DIAGONAL_PREP_ANGLE), extra, [0])
    joint = tensor(pair.state, extra)
    out = pbs_interfere(joint, 1, 2, pbs_visibility)
    return PostSelectionOutcome(
        out.state, pair.success_probability * out.success_probability, out.herald_paths
    )


def build_ghz_pipeline(config) -> PostSelectionOutcome:
    """Run :func:`ghz_pipeline` with the parameters of an experiment config."""
    return ghz_pipeline(config.source, config.transducer, config.pbs_visibility)


def ghz_fidelity_after(source: SourceSpec, conv: TransducerSpec, pbs_visibility: float = 1.0) -> float:
    from .qcore import fidelity_pure, ghz_state, partial_trace

    out = ghz_pipeline(source, conv, pbs_visibility)
    return fidelity_pure(partial_trace(out.state, [0, 1, 2]), ghz_state(3))


def background_for_bell_fidelity(target: float, source: SourceSpec | None = None, eta: float = 1.0) -> float:
    """Background rate that brings the post-conversion Bell fidelity to ``target``.

    With background weight ``w`` the fidelity is ``(1 - w) F0 + w / 4``.
    """
    from .qcore import bell_state, fidelity_pure

    source = source or SourceSpec()
    f0 = fidelity_pure(bell_after_conversion(source, TransducerSpec(eta)).state, bell_state())
    if not 0.25 < target <= f0:
        raise ValueError(f"target fidelity {target} not reachable (must lie in (0.25, {f0:.6g}])")
    w = (f0 - target) / (f0 - 0.25)
    if math.isclose(w, 1.0):
        raise ValueError("target fidelity requires pure background")
    return eta * w / (1 - w)
