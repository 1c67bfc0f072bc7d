"""Dense linear algebra over small registers of polarization qubits.

Ordering convention: qubit 0 is the most significant bit of a basis index and
each qubit maps ``|H> -> 0``, ``|V> -> 1``. Every matrix in the package is
written in this basis.

Each qubit carries a :class:`Label` (wavelength in nm, path identifier). Labels
are bookkeeping only and never enter the amplitudes.
"""
from __future__ import annotations

import string
from dataclasses import InitVar, dataclass, field
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

EXACT_TOL = 1e-12
ACCUM_TOL = 1e-10
PSD_TOL = 1e-8


class Label(NamedTuple):
    wavelength: Optional[float]
    path: str


def default_labels(n: int) -> tuple[Label, ...]:
    return tuple(Label(None, f"q{i}") for i in range(n))


def _n_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


def _coerce_labels(labels, n) -> tuple[Label, ...]:
    if labels is None:
        return default_labels(n)
    labels = tuple(Label(*lab) for lab in labels)
    if len(labels) != n:
        raise ValueError(f"expected {n} labels, got {len(labels)}")
    return labels


@dataclass(frozen=True)
class StateVector:
    """Ket over ``n`` labelled qubits, length ``2**n``."""

    amplitudes: np.ndarray
    labels: tuple[Label, ...] = None

    def __post_init__(self):
        amps = _frozen(self.amplitudes).reshape(-1)
        n = _n_qubits(amps.size)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "labels", _coerce_labels(self.labels, n))

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        nrm = self.norm
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / nrm, self.labels)

    def to_density(self) -> "DensityMatrix":
        a = self.amplitudes
        return DensityMatrix(np.outer(a, a.conj()), self.labels)

    def relabel(self, labels) -> "StateVector":
        return StateVector(self.amplitudes, labels)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian ``2**n x 2**n`` matrix over labelled qubits.

    Construction only checks shape and hermiticity. Unnormalized intermediates
    (after lossy elements) are allowed; use :meth:`check_physical` where a unit
    trace, positive state is required.
    """

    matrix: np.ndarray
    labels: tuple[Label, ...] = None

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {mat.shape}")
        n = _n_qubits(mat.shape[0])
        if not np.allclose(mat, mat.conj().T, atol=ACCUM_TOL, rtol=0):
            raise ValueError("density matrix is not Hermitian")
        mat = 0.5 * (mat + mat.conj().T)
        object.__setattr__(self, "matrix", _frozen(mat))
        object.__setattr__(self, "labels", _coerce_labels(self.labels, n))

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def normalized(self) -> "DensityMatrix":
        tr = self.trace
        if tr <= 0:
            raise ValueError("cannot normalize a state with non-positive trace")
        return DensityMatrix(self.matrix / tr, self.labels)

    def is_physical(self, tol: float = ACCUM_TOL) -> bool:
        if abs(self.trace - 1.0) > tol:
            return False
        return float(np.linalg.eigvalsh(self.matrix).min()) >= -PSD_TOL

    def check_physical(self, tol: float = ACCUM_TOL) -> "DensityMatrix":
        if abs(self.trace - 1.0) > tol:
            raise ValueError(f"trace {self.trace!r} differs from 1")
        lam = float(np.linalg.eigvalsh(self.matrix).min())
        if lam < -PSD_TOL:
            raise ValueError(f"minimum eigenvalue {lam!r} is negative")
        return self

    def relabel(self, labels) -> "DensityMatrix":
        return DensityMatrix(self.matrix, labels)


@dataclass(frozen=True)
class ModeOperator:
    """Matrix acting on ``arity`` qubits.

    ``rewrite`` optionally replaces the labels of the target qubits, one entry
    per target; ``None`` keeps the incoming label. ``check=False`` skips the
    contraction test, which observables (e.g. Pauli sums) would fail.
    """

    matrix: np.ndarray
    unitary: bool = True
    rewrite: Optional[tuple[Optional[Label], ...]] = None
    check: InitVar[bool] = True
    arity: int = field(init=False)

    def __post_init__(self, check):
        mat = np.array(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator must be square, got shape {mat.shape}")
        object.__setattr__(self, "matrix", _frozen(mat))
        object.__setattr__(self, "arity", _n_qubits(mat.shape[0]))
        eye = np.eye(mat.shape[0])
        if self.unitary:
            if not np.allclose(mat.conj().T @ mat, eye, atol=EXACT_TOL, rtol=0):
                raise ValueError("operator flagged unitary but U^dag U != I")
        elif check and np.linalg.norm(mat, 2) > 1 + EXACT_TOL:
            raise ValueError("operator has a singular value above 1")
        if self.rewrite is not None:
            rw = tuple(None if r is None else Label(*r) for r in self.rewrite)
            if len(rw) != self.arity:
                raise ValueError("rewrite needs one entry per target qubit")
            object.__setattr__(self, "rewrite", rw)

    @property
    def is_hermitian(self) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, atol=ACCUM_TOL, rtol=0))

    def dagger(self) -> "ModeOperator":
        return ModeOperator(self.matrix.conj().T, unitary=self.unitary)


def observable(matrix) -> ModeOperator:
    """Wrap a Hermitian matrix (not necessarily a contraction) as an operator."""
    op = ModeOperator(matrix, unitary=False, check=False)
    if not op.is_hermitian:
        raise ValueError("observable is not Hermitian")
    return op


State = Union[StateVector, DensityMatrix]

# Single-qubit constants
H = _frozen([1, 0])
V = _frozen([0, 1])
I2 = _frozen(np.eye(2))
SIGMA_X = _frozen([[0, 1], [1, 0]])
SIGMA_Y = _frozen([[0, -1j], [1j, 0]])
SIGMA_Z = _frozen([[1, 0], [0, -1]])


def ket(bits: str, labels=None) -> StateVector:
    """Computational basis ket from a string like ``"HVH"``."""
    idx = 0
    for ch in bits:
        if ch not in "HV":
            raise ValueError(f"basis symbol {ch!r} not in 'HV'")
        idx = 2 * idx + (ch == "V")
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[idx] = 1.0
    return StateVector(amps, labels)


def ghz_state(n: int = 3, labels=None) -> StateVector:
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return StateVector(amps, labels)


def bell_state(labels=None) -> StateVector:
    """``(|HH> + |VV>)/sqrt(2)``."""
    return ghz_state(2, labels)


def maximally_mixed(n: int, labels=None) -> DensityMatrix:
    d = 2**n
    return DensityMatrix(np.eye(d) / d, labels)


def as_density(state: State) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, StateVector):
        return state.to_density()
    return DensityMatrix(np.asarray(state))


def kron(*mats) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


def _check_disjoint(la, lb):
    clash = {lab.path for lab in la} & {lab.path for lab in lb}
    if clash:
        raise ValueError(f"duplicate path identifiers: {sorted(clash)}")


def tensor(a: State, b: State) -> State:
    """Kronecker product; labels concatenated. Mixed inputs give a density matrix."""
    _check_disjoint(a.labels, b.labels)
    labels = a.labels + b.labels
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(np.kron(a.amplitudes, b.amplitudes), labels)
    ra, rb = as_density(a), as_density(b)
    return DensityMatrix(np.kron(ra.matrix, rb.matrix), labels)


def _check_targets(op: ModeOperator, n: int, targets) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(targets) != op.arity:
        raise ValueError(f"operator arity {op.arity} does not match {len(targets)} targets")
    if len(set(targets)) != len(targets):
        raise ValueError(f"targets must be distinct, got {targets}")
    if any(t < 0 or t >= n for t in targets):
        raise ValueError(f"targets {targets} out of range for {n} qubits")
    return targets


def _rewrite_labels(labels, op, targets):
    if op.rewrite is None:
        return labels
    out = list(labels)
    for t, new in zip(targets, op.rewrite):
        if new is not None:
            out[t] = Label(
                out[t].wavelength if new.wavelength is None else new.wavelength,
                out[t].path if new.path is None else new.path,
            )
    paths = [lab.path for lab in out]
    if len(set(paths)) != len(paths):
        raise ValueError(f"label rewrite produces duplicate paths: {paths}")
    return tuple(out)


def _apply_axes(tensor_, mat, axes, k):
    """Contract ``mat`` (reshaped ``(2,)*2k``) into ``tensor_`` along ``axes``."""
    op = mat.reshape((2,) * (2 * k))
    out = np.tensordot(op, tensor_, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def apply_matrix(mat: np.ndarray, amps_or_rho: np.ndarray, n: int, targets, density: bool):
    """Array-level version of :func:`apply` without label handling."""
    k = len(targets)
    if not density:
        t = amps_or_rho.reshape((2,) * n)
        return _apply_axes(t, mat, targets, k).reshape(-1)
    t = amps_or_rho.reshape((2,) * (2 * n))
    t = _apply_axes(t, mat, targets, k)
    t = _apply_axes(t, mat.conj(), [n + q for q in targets], k)
    return t.reshape(2**n, 2**n)


def apply(op: ModeOperator, s: State, targets: Sequence[int]) -> State:
    """Act with ``op`` on ``targets`` (identity elsewhere). No renormalization."""
    targets = _check_targets(op, s.n_qubits, targets)
    labels = _rewrite_labels(s.labels, op, targets)
    if isinstance(s, StateVector):
        return StateVector(apply_matrix(op.matrix, s.amplitudes, s.n_qubits, targets, False), labels)
    return DensityMatrix(apply_matrix(op.matrix, s.matrix, s.n_qubits, targets, True), labels)


def partial_trace(rho: State, keep: Sequence[int]) -> DensityMatrix:
    """Reduced state on ``keep`` (in the given order)."""
    rho = as_density(rho)
    keep = [int(k) for k in keep]
    n = rho.n_qubits
    if not keep:
        raise ValueError("keep must name at least one qubit")
    if len(set(keep)) != len(keep) or any(k < 0 or k >= n for k in keep):
        raise ValueError(f"invalid keep indices {keep} for {n} qubits")
    letters = string.ascii_letters
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for q in range(n):
        if q not in keep:
            col[q] = row[q]
    out = "".join(row[q] for q in keep) + "".join(col[q] for q in keep)
    sub = "".join(row) + "".join(col) + "->" + out
    t = np.einsum(sub, rho.matrix.reshape((2,) * (2 * n)))
    d = 2 ** len(keep)
    return DensityMatrix(t.reshape(d, d), tuple(rho.labels[q] for q in keep))


def _vector(psi) -> np.ndarray:
    if isinstance(psi, StateVector):
        return psi.amplitudes
    return np.asarray(psi, dtype=complex).reshape(-1)


def fidelity_pure(rho: State, psi) -> float:
    """``<psi|rho|psi>`` for a normalized target ket."""
    rho = as_density(rho)
    v = _vector(psi)
    if v.size != rho.dim:
        raise ValueError(f"dimension mismatch: state {rho.dim}, target {v.size}")
    if abs(np.linalg.norm(v) - 1) > ACCUM_TOL:
        raise ValueError("target ket is not normalized")
    val = np.vdot(v, rho.matrix @ v)
    return float(val.real)


def expectation(rho: State, obs) -> float:
    """``Tr(rho obs)`` for a Hermitian observable on the whole register."""
    rho = as_density(rho)
    mat = obs.matrix if isinstance(obs, ModeOperator) else np.asarray(obs, dtype=complex)
    if mat.shape != rho.matrix.shape:
        raise ValueError(f"observable shape {mat.shape} does not match state {rho.matrix.shape}")
    if not np.allclose(mat, mat.conj().T, atol=ACCUM_TOL, rtol=0):
        raise ValueError("observable is not Hermitian")
    return float(np.einsum("ij,ji->", rho.matrix, mat).real)


def trace_distance(a, b) -> float:
    ma = as_density(a).matrix if not isinstance(a, np.ndarray) else a
    mb = as_density(b).matrix if not isinstance(b, np.ndarray) else b
    return 0.5 * float(np.abs(np.linalg.eigvalsh(ma - mb)).sum())


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(n: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityMatrix:
    """Random full- or fixed-rank state (Ginibre ensemble)."""
    d = 2**n
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def random_ket(n: int, rng: np.random.Generator) -> StateVector:
    z = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return StateVector(z / np.linalg.norm(z))
