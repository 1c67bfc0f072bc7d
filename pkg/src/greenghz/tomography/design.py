"""Six-projector tomography design and conversion of count records to arrays."""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..measure import FIXED_TOKENS, CountRecord, MeasurementSetting, basis_key, sign_in_basis


@dataclass(frozen=True)
class TomographyDesign:
    """All ``6**n`` single-projector settings.

    Order is lexicographic in the token alphabet ``H, V, D, A, R, L`` with
    qubit 0 varying slowest. Each setting records only the all-``+`` outcome,
    i.e. the coincidence behind the named projector.
    """

    settings: tuple[MeasurementSetting, ...]
    n_qubits: int


def design(n_qubits: int) -> TomographyDesign:
    if not 1 <= n_qubits <= 4:
        raise ValueError(f"n_qubits must be between 1 and 4, got {n_qubits}")
    plus = ((1,) * n_qubits,)
    settings = tuple(
        MeasurementSetting(toks, plus) for toks in itertools.product(FIXED_TOKENS, repeat=n_qubits)
    )
    return TomographyDesign(settings, n_qubits)


@dataclass(frozen=True)
class MeasurementData:
    """Flattened counts: one row per (setting, outcome) entry.

    ``group`` indexes the basis combination an entry belongs to and
    ``multiplicity`` how often each projector of that basis appears, so that
    ``sum_{j in g} p_j == multiplicity[g]`` for every unit-trace state.
    """

    kets: np.ndarray
    counts: np.ndarray
    group: np.ndarray
    multiplicity: np.ndarray
    n_qubits: int

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def frequencies(self) -> np.ndarray:
        totals = np.bincount(self.group, weights=self.counts, minlength=len(self.multiplicity))
        if np.any(totals <= 0):
            bad = int(np.flatnonzero(totals <= 0)[0])
            raise ValueError(f"basis group {bad} has zero total counts")
        return self.counts * self.multiplicity[self.group] / totals[self.group]

    def with_counts(self, counts) -> "MeasurementData":
        return MeasurementData(self.kets, np.asarray(counts, dtype=float), self.group, self.multiplicity, self.n_qubits)


def measurement_data(records: Sequence[CountRecord], des: TomographyDesign | None = None) -> MeasurementData:
    """Stack records into arrays after checking each basis group is complete."""
    if not records:
        raise ValueError("no count records supplied")
    n = records[0].setting.n_photons
    if des is not None:
        if des.n_qubits != n:
            raise ValueError(f"design is for {des.n_qubits} qubits, records have {n}")
        seen = {r.setting.per_photon for r in records}
        missing = [s.per_photon for s in des.settings if s.per_photon not in seen]
        if missing:
            raise ValueError(f"{len(missing)} design settings missing, e.g. {';'.join(missing[0])}")
    kets, counts, keys = [], [], []
    members = defaultdict(list)
    for rec in records:
        if rec.setting.n_photons != n:
            raise ValueError("records mix different photon numbers")
        gkey = tuple(basis_key(t) for t in rec.setting.per_photon)
        for outcome, c in rec.counts.items():
            kets.append(rec.setting.projector_ket(outcome))
            counts.append(float(c))
            keys.append(gkey)
            members[gkey].append(tuple(sign_in_basis(t, s) for t, s in zip(rec.setting.per_photon, outcome)))
    order = {k: i for i, k in enumerate(members)}
    mult = np.empty(len(order))
    for k, i in order.items():
        tally = defaultdict(int)
        for m in members[k]:
            tally[m] += 1
        vals = set(tally.values())
        if len(tally) != 2**n or len(vals) != 1:
            raise ValueError(f"basis group {'/'.join(k)} does not cover all {2**n} outcomes evenly")
        mult[i] = vals.pop()
    return MeasurementData(
        np.array(kets, dtype=complex),
        np.array(counts, dtype=float),
        np.array([order[k] for k in keys], dtype=np.intp),
        mult,
        n,
    )
