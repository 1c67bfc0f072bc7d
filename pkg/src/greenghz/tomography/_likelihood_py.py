"""NumPy implementation of the likelihood kernels.

For projector kets ``v_j`` (rows of ``V``), counts ``n_j`` and a factor ``T``
with ``rho = T^dag T / ||T||_F^2``:

* ``loglik_grad`` returns ``sum_j n_j log(<v_j|rho|v_j>)`` and its Wirtinger
  derivative with respect to ``conj(T)``.
* ``projector_probs`` returns ``<v_j|rho|v_j>`` for an arbitrary ``rho``.
"""
import numpy as np


def loglik_grad(T, V, n):
    t = float(np.vdot(T, T).real)
    if t <= 0.0:
        return -np.inf, np.zeros_like(T)
    live = n > 0
    Vl, nl = V[live], n[live]
    W = Vl @ T.T
    q = np.einsum("ij,ij->i", W.conj(), W).real
    if np.any(q <= 0.0):
        return -np.inf, np.zeros_like(T)
    N = nl.sum()
    L = float(nl @ np.log(q) - N * np.log(t))
    G = (W * (nl / q)[:, None]).T @ Vl.conj() - (N / t) * T
    return L, G


def projector_probs(rho, V):
    return np.einsum("ja,ab,jb->j", V.conj(), rho, V).real
