"""Independent reference computations shared by the test modules."""
import itertools

import numpy as np
from scipy.linalg import sqrtm

from greenghz.measure import expected_counts, sample_counts


def uhlmann_fidelity(a, b):
    a, b = np.asarray(a), np.asarray(b)
    ra = sqrtm(a)
    return float(np.real(np.trace(sqrtm(ra @ b @ ra))) ** 2)


def trace_distance(a, b):
    return 0.5 * np.abs(np.linalg.eigvalsh(np.asarray(a) - np.asarray(b))).sum()


def depolarized_ghz(p, n=3):
    d = 2**n
    g = np.zeros(d)
    g[0] = g[-1] = 1 / np.sqrt(2)
    return p * np.outer(g, g) + (1 - p) * np.eye(d) / d


def werner_bell(v):
    """v |Phi+><Phi+| + (1 - v) dephased; fidelity (1 + v)/2 to Phi+."""
    b = np.zeros(4)
    b[0] = b[3] = 1 / np.sqrt(2)
    pure = np.outer(b, b)
    return v * pure + (1 - v) * np.diag(np.diag(pure))


def tomo_records(rho, des, events, seed=None, exact=False):
    if exact:
        return [expected_counts(rho, s, events) for s in des.settings]
    rng = np.random.default_rng(seed)
    return [sample_counts(rho, s, events, rng) for s in des.settings]


def route_oracle(amps3):
    """Explicit photon routing of qubits 1, 2 of a 3-qubit ket.

    Photon on B: H -> port B', V -> port C'. Photon on C: H -> C', V -> B'.
    Returns the unnormalized coincidence ket over (A, B', C').
    """
    out = np.zeros(8, dtype=complex)
    for a, pb, pc in itertools.product((0, 1), repeat=3):
        amp = amps3[4 * a + 2 * pb + pc]
        port_b = "B'" if pb == 0 else "C'"
        port_c = "C'" if pc == 0 else "B'"
        if port_b == port_c:
            continue
        occupant = {port_b: pb, port_c: pc}
        out[4 * a + 2 * occupant["B'"] + occupant["C'"]] += amp
    return out
