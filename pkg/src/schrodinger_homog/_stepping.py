"""Finite-difference operators on the Dirichlet grid of (0,1)^d and Crank-Nicolson stepping.

Unknowns are the interior nodes ``x_i = i h``, ``i = 1..n``, flattened in C
order; boundary nodes are held at zero and never enter the linear systems.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import LinearSolveFailed


def interior_axis(n: int) -> np.ndarray:
    h = 1.0 / (n + 1)
    return h * np.arange(1, n + 1)


def full_axis(n: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, n + 2)


def interior_mesh(n: int, d: int) -> list[np.ndarray]:
    return np.meshgrid(*([interior_axis(n)] * d), indexing="ij")


def _kron_axis(mat: sp.spmatrix, n: int, d: int, axis: int) -> sp.csr_matrix:
    ops = [sp.identity(n, format="csr")] * d
    ops[axis] = mat
    out = ops[0]
    for op in ops[1:]:
        out = sp.kron(out, op, format="csr")
    return sp.csr_matrix(out)


def forward_difference(n: int) -> sp.csr_matrix:
    """(n+1) x n map from interior values to face differences (boundary values zero)."""
    return sp.diags([-np.ones(n), np.ones(n)], [0, -1], shape=(n + 1, n), format="csr")


def centered_difference(n: int, d: int, axis: int) -> sp.csr_matrix:
    """``(u_{i+1} - u_{i-1}) / (2h)`` along ``axis``; exactly antisymmetric."""
    h = 1.0 / (n + 1)
    c = sp.diags([np.ones(n - 1), -np.ones(n - 1)], [1, -1], shape=(n, n)) / (2 * h)
    return _kron_axis(c, n, d, axis)


def divergence_form(face_coeffs: list[np.ndarray], n: int) -> sp.csr_matrix:
    """``-div(a grad)`` as ``sum_j D_j^T diag(a_j) D_j / h^2``; symmetric by construction.

    ``face_coeffs[j]`` has ``n + 1`` entries along axis ``j`` and ``n`` along
    the others, sampled at the face midpoints.
    """
    d = len(face_coeffs)
    h = 1.0 / (n + 1)
    total = None
    for j, coeff in enumerate(face_coeffs):
        D = _kron_axis(forward_difference(n), n, d, j)
        term = D.T @ sp.diags(coeff.ravel()) @ D
        total = term if total is None else total + term
    return sp.csr_matrix(total / h**2)


def face_points(n: int, d: int, axis: int) -> list[np.ndarray]:
    """Coordinates of the faces normal to ``axis`` (midpoints between neighbours)."""
    h = 1.0 / (n + 1)
    axes = [interior_axis(n)] * d
    axes[axis] = h * (np.arange(n + 1) + 0.5)
    return np.meshgrid(*axes, indexing="ij")


def crank_nicolson(hamiltonian: Callable[[float], sp.spmatrix], u0: np.ndarray, times: np.ndarray,
                   source: Callable[[float], np.ndarray] | None = None,
                   constant: bool = False) -> np.ndarray:
    """Integrate ``i u_t + H(t) u = f`` with the Hamiltonian frozen at midpoints.

    Each step solves
    ``(I - i dt/2 H_m) u^{m+1} = (I + i dt/2 H_m) u^m - i dt f_m``,
    with ``H_m = H(t_{m+1/2})``.  This is the Cayley transform of
    ``i dt H_m``, hence exactly norm preserving when ``H_m`` is Hermitian.
    Returns the interior solution at every time level, shape
    ``(len(times),) + u0.shape``.
    """
    shape = u0.shape
    N = u0.size
    eye = sp.identity(N, dtype=complex, format="csc")
    out = np.empty((len(times),) + shape, dtype=complex)
    out[0] = u0
    u = u0.ravel().astype(complex)
    lu = None
    for m in range(len(times) - 1):
        dt = times[m + 1] - times[m]
        tmid = 0.5 * (times[m] + times[m + 1])
        if lu is None or not constant:
            H = sp.csc_matrix(hamiltonian(tmid), dtype=complex)
            lhs = sp.csc_matrix(eye - 0.5j * dt * H)
            rhs_op = sp.csr_matrix(eye + 0.5j * dt * H)
            try:
                lu = splu(lhs)
            except RuntimeError as exc:  # singular factor
                raise LinearSolveFailed(f"step {m}: {exc}") from exc
        rhs = rhs_op @ u
        if source is not None:
            rhs = rhs - 1j * dt * np.asarray(source(tmid), dtype=complex).ravel()
        u = lu.solve(rhs)
        if not np.all(np.isfinite(u)):
            raise LinearSolveFailed(f"non-finite solution at step {m}")
        out[m + 1] = u.reshape(shape)
    return out
