"""State reconstruction from coincidence counts.

``linear_inversion`` solves the Born-rule system in the Pauli basis by least
squares. ``mle_reconstruct`` maximizes the Poisson likelihood over
``rho = T^dag T / Tr(T^dag T)`` with ``T`` lower triangular, which keeps every
iterate positive semidefinite.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

from ..measure import CountRecord
from ..qcore import SIGMA_X, SIGMA_Y, SIGMA_Z, DensityMatrix, StateVector, fidelity_pure, ghz_state, kron
from . import kernels
from .design import MeasurementData, TomographyDesign, measurement_data

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 5000


@lru_cache(maxsize=8)
def _paulis(n: int) -> np.ndarray:
    singles = [np.eye(2), SIGMA_X, SIGMA_Y, SIGMA_Z]
    return np.array([kron(*c) for c in itertools.product(singles, repeat=n)])


def _as_data(counts, des) -> MeasurementData:
    if isinstance(counts, MeasurementData):
        return counts
    return measurement_data(counts, des)


def linear_inversion(counts: Sequence[CountRecord] | MeasurementData, des: TomographyDesign | None = None) -> np.ndarray:
    """Least-squares Hermitian, unit-trace estimate (may have negative eigenvalues)."""
    data = _as_data(counts, des)
    n, d = data.n_qubits, data.dim
    f = data.frequencies()
    paulis = _paulis(n)[1:]
    # Tr(P |v><v|) for every projector and non-identity Pauli
    A = np.einsum("ja,pab,jb->jp", data.kets.conj(), paulis, data.kets).real
    r, _, rank, _ = np.linalg.lstsq(A, d * f - 1.0, rcond=None)
    if rank < d * d - 1:
        raise ValueError(f"measurement set is not informationally complete (rank {rank} < {d * d - 1})")
    rho = (np.eye(d) + np.einsum("p,pab->ab", r, paulis)) / d
    return 0.5 * (rho + rho.conj().T)


def psd_project(rho: np.ndarray, floor: float = 0.0) -> np.ndarray:
    """Closest unit-trace PSD matrix with eigenvalues clipped at ``floor``."""
    w, U = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    w = np.clip(w, floor, None)
    out = (U * w) @ U.conj().T
    return out / np.trace(out).real


def factor_from_density(rho: np.ndarray) -> np.ndarray:
    """Lower-triangular ``T`` with real diagonal and ``T^dag T = rho``.

    Works for singular ``rho``: take any square root ``B`` (``B^dag B = rho``),
    QR-factor the reversed ``J B J`` and reverse back.
    """
    w, U = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    B = np.sqrt(np.clip(w, 0.0, None))[:, None] * U.conj().T
    J = np.eye(rho.shape[0])[::-1]
    _, R = np.linalg.qr(J @ B @ J)
    T = J @ R @ J
    d = np.diagonal(T)
    ph = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1), 1)
    return ph.conj()[:, None] * T


def density_from_factor(T: np.ndarray) -> np.ndarray:
    rho = T.conj().T @ T
    return rho / np.trace(rho).real


class _Param:
    """Real coordinates of a lower-triangular factor with real diagonal."""

    def __init__(self, d: int):
        self.d = d
        self.il = np.tril_indices(d, -1)
        self.k = len(self.il[0])

    def to_T(self, x):
        d, k = self.d, self.k
        T = np.zeros((d, d), dtype=complex)
        T[np.diag_indices(d)] = x[:d]
        T[self.il] = x[d : d + k] + 1j * x[d + k :]
        return T

    def from_T(self, T):
        T = np.asarray(T)
        return np.concatenate([T.diagonal().real, T[self.il].real, T[self.il].imag])

    def grad(self, G):
        return 2.0 * np.concatenate([G.diagonal().real, G[self.il].real, G[self.il].imag])


@dataclass
class ReconstructionResult:
    rho_hat: DensityMatrix
    fidelity: float
    fidelity_sigma: float
    log_likelihood: float
    iterations: int
    converged: bool = True
    history: list[float] = field(default_factory=list, repr=False)
    factor: Optional[np.ndarray] = field(default=None, repr=False)


def poisson_log_likelihood(data: MeasurementData, rho: np.ndarray) -> float:
    """Full Poisson log-likelihood with each basis' rate at its ML value."""
    p = np.clip(kernels.projector_probs(rho, data.kets), 0.0, None)
    totals = np.bincount(data.group, weights=data.counts, minlength=len(data.multiplicity))
    lam = (totals / data.multiplicity)[data.group] * p
    n = data.counts
    live = n > 0
    with np.errstate(divide="ignore"):
        ll = np.where(live, n * np.log(np.where(live, lam, 1.0)), 0.0)
    return float(ll.sum() - lam.sum() - gammaln(n + 1).sum())


def _start_factor(data: MeasurementData) -> np.ndarray:
    d = data.dim
    try:
        rho0 = psd_project(linear_inversion(data))
    except ValueError:
        rho0 = np.eye(d) / d
    rho0 = 0.99 * rho0 + 0.01 * np.eye(d) / d
    return factor_from_density(rho0)


def _lbfgs_maximize(objective, x0, tol, max_iter, memory=10):
    """Maximize with L-BFGS and Armijo backtracking.

    Every accepted step strictly increases the objective. Stops when the
    relative gain of a step drops below ``tol`` or no ascent step is found.
    """
    x = np.array(x0, dtype=float)
    val, g = objective(x)
    if not math.isfinite(val):
        raise ValueError("starting point has zero probability for an observed outcome")
    history = [val]
    S, Y = [], []
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        # two-loop recursion on the negated problem
        q = -g
        alphas = []
        for s, y in zip(reversed(S), reversed(Y)):
            rho_ = 1.0 / (y @ s)
            a = rho_ * (s @ q)
            alphas.append((a, rho_, s, y))
            q = q - a * y
        if S:
            q = q * ((S[-1] @ Y[-1]) / (Y[-1] @ Y[-1]))
        for a, rho_, s, y in reversed(alphas):
            b = rho_ * (y @ q)
            q = q + (a - b) * s
        direction = -q
        slope = g @ direction
        if not slope > 0:
            S.clear()
            Y.clear()
            direction = g.copy()
            slope = g @ g
        step = 1.0 if S else min(1.0, 1.0 / max(np.linalg.norm(g), 1e-300))
        accepted = False
        for _ in range(60):
            x_new = x + step * direction
            v_new, g_new = objective(x_new)
            if math.isfinite(v_new) and v_new >= val + 1e-4 * step * slope and v_new > val:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True
            it -= 1
            break
        s, y = x_new - x, g - g_new  # y for the negated objective
        if s @ y > 1e-12 * (s @ s):
            S.append(s)
            Y.append(y)
            if len(S) > memory:
                S.pop(0)
                Y.pop(0)
        gain = v_new - val
        x, val, g = x_new, v_new, g_new
        history.append(val)
        if gain <= tol * max(abs(val), 1.0):
            converged = True
            break
    return x, history, it, converged


def _mle_arrays(data: MeasurementData, T0, tol, max_iter):
    param = _Param(data.dim)
    N = data.counts.sum()
    if N <= 0:
        raise ValueError("no counts to reconstruct from")
    V, n = data.kets, data.counts

    def objective(x):
        L, G = kernels.loglik_grad(param.to_T(x), V, n)
        return L / N, param.grad(G) / N

    x, hist, it, conv = _lbfgs_maximize(objective, param.from_T(T0), tol, max_iter)
    return param.to_T(x), [h * N for h in hist], it, conv


def _default_target(n: int) -> StateVector:
    if n == 1:
        return StateVector(np.array([1, 1]) / math.sqrt(2))
    return ghz_state(n)


def mle_reconstruct(
    counts: Sequence[CountRecord] | MeasurementData,
    des: TomographyDesign | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    target=None,
    start: Optional[np.ndarray] = None,
) -> ReconstructionResult:
    """Maximum-likelihood density matrix.

    ``target`` is the ket the reported fidelity refers to (default: the
    n-qubit GHZ state, which is the (HH+VV)/sqrt2 Bell state for n = 2).
    ``start`` optionally supplies an initial lower-triangular factor.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    data = _as_data(counts, des)
    target = _default_target(data.n_qubits) if target is None else target
    T0 = _start_factor(data) if start is None else np.asarray(start, dtype=complex)
    T, hist, it, conv = _mle_arrays(data, T0, tol, max_iter)
    rho = DensityMatrix(density_from_factor(T))
    return ReconstructionResult(
        rho_hat=rho,
        fidelity=fidelity_pure(rho, target),
        fidelity_sigma=0.0,
        log_likelihood=poisson_log_likelihood(data, rho.matrix),
        iterations=it,
        converged=conv,
        history=hist,
        factor=T,
    )


def bootstrap_fidelities(
    counts: Sequence[CountRecord] | MeasurementData,
    des: TomographyDesign | None = None,
    n_resamples: int = 200,
    seed=None,
    target=None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    start: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Fidelities of MLE fits to Poisson resamples of the observed counts.

    Resample ``i`` draws from ``SeedSequence(seed).spawn(n)[i]`` so resamples
    are independent of evaluation order.
    """
    if n_resamples < 100:
        raise ValueError(f"n_resamples must be at least 100, got {n_resamples}")
    data = _as_data(counts, des)
    target = _default_target(data.n_qubits) if target is None else target
    if start is None:
        start, *_ = _mle_arrays(data, _start_factor(data), tol, max_iter)
    streams = np.random.SeedSequence(seed).spawn(n_resamples)
    out = np.empty(n_resamples)
    for i, ss in enumerate(streams):
        rng = np.random.default_rng(ss)
        resampled = data.with_counts(rng.poisson(data.counts))
        T, *_ = _mle_arrays(resampled, _warm(start), tol, max_iter)
        out[i] = fidelity_pure(density_from_factor(T), target)
    return out


def _warm(T):
    # keep the warm start full rank so no observed outcome has zero probability
    rho = density_from_factor(T)
    d = rho.shape[0]
    return factor_from_density(psd_project(0.995 * rho + 0.005 * np.eye(d) / d))


def bootstrap_sigma(counts, des=None, n_resamples: int = 200, seed=None, target=None, **kw) -> float:
    """Standard deviation of the MLE fidelity across Poisson resamples."""
    return float(np.std(bootstrap_fidelities(counts, des, n_resamples, seed, target, **kw), ddof=1))


def reconstruct(counts, des=None, target=None, n_resamples: int = 0, seed=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """MLE fit with an optional bootstrap error bar on the fidelity."""
    data = _as_data(counts, des)
    res = mle_reconstruct(data, tol=tol, max_iter=max_iter, target=target)
    if n_resamples:
        res.fidelity_sigma = bootstrap_sigma(
            data, n_resamples=n_resamples, seed=seed, target=target, tol=tol, max_iter=max_iter, start=res.factor
        )
    return res
