"""Constant-coefficient homogenized problem ``i u_t + Q u + b . grad u + mu u = f``.

``Q u = -sum_ij q_ij d_i d_j u``.  Dirichlet data on ``(0,1)^d``; centered
second differences, the symmetric 4-point cross stencil for mixed
derivatives, centered first differences for the drift (exactly
antisymmetric), Crank-Nicolson in time.  The constant shift ``mu`` is
integrated exactly: ``u = exp(i mu t) v`` with ``v`` solving the shift-free
problem for the source ``exp(-i mu t) f``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _stepping as st
from .descriptors import SourceDescriptor, StateDescriptor
from .effective import EffectiveModel
from .errors import NotPositiveDefinite
from .fine import FineProblem, WaveField, pad_boundary


@dataclass(frozen=True)
class MacroProblem:
    """Homogenized problem; ``q``, ``b``, ``mu`` are the PDE coefficients as written above."""

    q: np.ndarray
    b: np.ndarray
    mu: float
    T: float
    n: int
    dt: float
    u0: StateDescriptor
    f: SourceDescriptor = field(default_factory=SourceDescriptor)

    def __post_init__(self):
        object.__setattr__(self, "q", np.atleast_2d(np.asarray(self.q, dtype=float)))
        object.__setattr__(self, "b", np.atleast_1d(np.asarray(self.b, dtype=float)))

    @classmethod
    def from_model(cls, model: EffectiveModel, T: float, n: int, dt: float, u0: StateDescriptor,
                   f: SourceDescriptor | None = None, form: str = "consistent") -> "MacroProblem":
        q, b, mu = model.limit_coefficients(form)
        return cls(q, b, mu, T, n, dt, u0, f or SourceDescriptor())

    @classmethod
    def matching(cls, model: EffectiveModel, fine: FineProblem, form: str = "consistent") -> "MacroProblem":
        """Same space-time grid, data and horizon as a fine problem."""
        return cls.from_model(model, fine.T, fine.n, fine.dt, fine.u0, fine.f, form)

    @property
    def d(self) -> int:
        return self.q.shape[0]

    @property
    def steps(self) -> int:
        return max(1, round(self.T / self.dt))

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.steps + 1)

    def check(self) -> None:
        if not np.allclose(self.q, self.q.T, rtol=0, atol=1e-12):
            raise NotPositiveDefinite("q is not symmetric")
        if np.linalg.eigvalsh(self.q).min() <= 0:
            raise NotPositiveDefinite(f"q has eigenvalues {np.linalg.eigvalsh(self.q)}")
        if self.b.shape != (self.d,):
            raise ValueError("drift has wrong dimension")


def diffusion_operator(q: np.ndarray, n: int) -> sp.csr_matrix:
    d = q.shape[0]
    ones = [np.ones(st.face_points(n, d, j)[0].shape) for j in range(d)]
    total = sp.csr_matrix((n**d, n**d))
    for j in range(d):
        faces = [o * (q[j, j] if k == j else 0.0) for k, o in enumerate(ones)]
        total = total + st.divergence_form(faces, n)
    for i in range(d):
        for j in range(d):
            if i != j and q[i, j] != 0.0:
                total = total - q[i, j] * (st.centered_difference(n, d, i) @ st.centered_difference(n, d, j))
    return sp.csr_matrix(total)


def drift_operator(b: np.ndarray, n: int) -> sp.csr_matrix:
    d = len(b)
    total = sp.csr_matrix((n**d, n**d))
    for j in range(d):
        if b[j] != 0.0:
            total = total + b[j] * st.centered_difference(n, d, j)
    return sp.csr_matrix(total)


def macro_hamiltonian(p: MacroProblem, include_shift: bool = True) -> sp.csr_matrix:
    N = p.n**p.d
    H = diffusion_operator(p.q, p.n) + drift_operator(p.b, p.n)
    if include_shift:
        H = H + p.mu * sp.identity(N, format="csr")
    return sp.csr_matrix(H)


def solve_homogenized(p: MacroProblem) -> WaveField:
    p.check()
    H = macro_hamiltonian(p, include_shift=False)
    xs = st.interior_mesh(p.n, p.d)
    mu = float(p.mu)
    source = None if p.f.is_zero else (lambda t: np.exp(-1j * mu * t) * p.f(xs, t))
    times = p.times()
    interior = st.crank_nicolson(lambda t: H, np.asarray(p.u0(*xs), dtype=complex), times,
                                 source, constant=True)
    if mu != 0.0:
        interior = interior * np.exp(1j * mu * times).reshape((-1,) + (1,) * p.d)
    meta = {"kind": "homogenized", "T": p.T, "dt": p.dt, "mu": p.mu}
    return WaveField(pad_boundary(interior, p.d), times, p.d, p.n, None, meta)


@dataclass(frozen=True)
class SpectrumReport:
    q_eigen_range: tuple[float, float]
    hermitian_norm: float
    skew_norm: float


def operator_spectrum_check(model: EffectiveModel | MacroProblem, n: int = 15) -> SpectrumReport:
    """Eigen-range of q and Frobenius norms of the Hermitian / skew parts of the discrete operator."""
    q, b, mu = model.q, model.b, model.mu
    ev = np.linalg.eigvalsh(q)
    H = MacroProblem(q, b, mu, 1.0, n, 1.0, StateDescriptor())
    Hm = macro_hamiltonian(H).toarray()
    herm = 0.5 * (Hm + Hm.conj().T)
    skew = 0.5 * (Hm - Hm.conj().T)
    return SpectrumReport((float(ev.min()), float(ev.max())),
                          float(np.linalg.norm(herm)), float(np.linalg.norm(skew)))
