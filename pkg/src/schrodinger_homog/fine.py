"""Fine-scale solver for ``i u_t - div(a(x/eps) grad u) + V(x/eps, t/eps) u / eps = f``.

Homogeneous Dirichlet data on ``(0,1)^d``, conservative second-order finite
differences with face-sampled coefficients, Crank-Nicolson in time.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import _stepping as st
from .descriptors import CoefficientDescriptor, PotentialDescriptor, SourceDescriptor, StateDescriptor
from .errors import GridMismatch, MeshTooCoarse

DEFAULT_RESOLUTION = 16


@dataclass(frozen=True)
class WaveField:
    """Complex samples on the full space-time grid, boundary nodes included.

    ``values`` has shape ``(steps + 1,) + (n + 2,) * d``; boundary entries are
    exactly zero for solver output.
    """

    values: np.ndarray
    times: np.ndarray
    d: int
    n: int
    eps: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        expected = (len(self.times),) + (self.n + 2,) * self.d
        if self.values.shape != expected:
            raise GridMismatch(f"wave field shape {self.values.shape} != {expected}")

    @property
    def h(self) -> float:
        return 1.0 / (self.n + 1)

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def steps(self) -> int:
        return len(self.times) - 1

    @property
    def x(self) -> np.ndarray:
        return st.full_axis(self.n)

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*([self.x] * self.d), indexing="ij")

    def same_grid(self, other: "WaveField") -> bool:
        return (self.d == other.d and self.n == other.n and len(self.times) == len(other.times)
                and np.array_equal(self.times, other.times))

    def replace(self, values: np.ndarray, **meta) -> "WaveField":
        return WaveField(values, self.times, self.d, self.n, self.eps, {**self.meta, **meta})


@dataclass(frozen=True)
class FineProblem:
    d: int
    eps: float
    T: float
    n: int
    dt: float
    a: CoefficientDescriptor
    V: PotentialDescriptor
    u0: StateDescriptor
    f: SourceDescriptor = field(default_factory=SourceDescriptor)
    resolution: float = DEFAULT_RESOLUTION

    @classmethod
    def resolved(cls, d: int, eps: float, T: float, a, V, u0, f=None,
                 resolution: float = DEFAULT_RESOLUTION) -> "FineProblem":
        """Coarsest grid with ``h <= eps/resolution`` and ``dt <= eps/resolution``."""
        n = math.ceil(resolution / eps - 1e-9) - 1
        steps = math.ceil(T * resolution / eps - 1e-9)
        return cls(d, eps, T, n, T / steps, a, V, u0, f or SourceDescriptor(), resolution)

    @property
    def h(self) -> float:
        return 1.0 / (self.n + 1)

    @property
    def steps(self) -> int:
        return max(1, round(self.T / self.dt))

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.steps + 1)

    def check(self) -> None:
        if not 0 < self.eps < 1:
            raise ValueError(f"eps={self.eps} must lie in (0, 1)")
        if self.h > self.eps / self.resolution * (1 + 1e-12):
            raise MeshTooCoarse(f"h={self.h:.4g} > eps/{self.resolution:g}={self.eps / self.resolution:.4g}")
        if not abs(self.steps * self.dt - self.T) <= 1e-9 * self.T:
            raise ValueError(f"dt={self.dt} does not divide T={self.T}")


def pad_boundary(interior: np.ndarray, d: int) -> np.ndarray:
    """Embed interior samples (leading time axis) into the full grid with zero boundary."""
    pad = [(0, 0)] + [(1, 1)] * d
    return np.pad(interior, pad)


def fine_hamiltonian_parts(p: FineProblem) -> tuple[sp.csr_matrix, list[np.ndarray]]:
    """Diffusion matrix and interior coordinates for problem ``p``."""
    faces = [p.a(*[c / p.eps for c in st.face_points(p.n, p.d, j)]) for j in range(p.d)]
    faces = [np.broadcast_to(fc, st.face_points(p.n, p.d, j)[0].shape) for j, fc in enumerate(faces)]
    return st.divergence_form(faces, p.n), st.interior_mesh(p.n, p.d)


def solve_fine(p: FineProblem) -> WaveField:
    p.check()
    A, xs = fine_hamiltonian_parts(p)
    ys = [x / p.eps for x in xs]

    def hamiltonian(t: float) -> sp.spmatrix:
        if p.V.is_zero:
            return A
        pot = np.broadcast_to(p.V(ys, t / p.eps), xs[0].shape) / p.eps
        return A + sp.diags(pot.ravel())

    source = None if p.f.is_zero else (lambda t: p.f(xs, t))
    u_init = np.asarray(p.u0(*xs), dtype=complex)
    times = p.times()
    interior = st.crank_nicolson(hamiltonian, u_init, times, source, constant=p.V.time_independent)
    meta = {"kind": "fine", "T": p.T, "eps": p.eps, "dt": p.dt, "resolution": p.resolution}
    return WaveField(pad_boundary(interior, p.d), times, p.d, p.n, p.eps, meta)


# ---------------------------------------------------------------------------
# norms


def _time_weights(times: np.ndarray) -> np.ndarray:
    w = np.zeros_like(times)
    dt = np.diff(times)
    w[:-1] += dt / 2
    w[1:] += dt / 2
    return w


def spatial_l2_squared(u: WaveField) -> np.ndarray:
    """``||u(., t_m)||^2`` per time level; trapezoid rule, boundary nodes weighted 1/2."""
    w1 = np.full(u.n + 2, u.h)
    w1[[0, -1]] *= 0.5
    w = w1
    for _ in range(u.d - 1):
        w = np.multiply.outer(w, w1)
    axes = tuple(range(1, u.d + 1))
    return (np.abs(u.values) ** 2 * w).sum(axis=axes)


def mass_history(u: WaveField) -> list[float]:
    return [float(m) for m in spatial_l2_squared(u)]


def gradient_l2_squared(u: WaveField) -> np.ndarray:
    """``||grad u(., t_m)||^2`` from forward differences over every cell face."""
    total = np.zeros(len(u.times))
    for j in range(u.d):
        diff = np.diff(u.values, axis=j + 1) / u.h
        # faces along axis j, nodes along the others (trapezoid in the transverse direction)
        w_t = np.full(u.n + 2, u.h)
        w_t[[0, -1]] *= 0.5
        weight = np.array(u.h)
        for k in range(u.d):
            weight = np.multiply.outer(weight, np.full(u.n + 1, 1.0) if k == j else w_t)
        total += (np.abs(diff) ** 2 * weight).reshape(len(u.times), -1).sum(axis=1)
    return total


def space_time_norm(per_level_squared: np.ndarray, times: np.ndarray) -> float:
    return float(np.sqrt(max(0.0, float(_time_weights(times) @ per_level_squared))))


def energy_norms(u: WaveField) -> dict[str, float]:
    """Discrete ``||u||_{L2(Q)}`` and ``||u||_{L2(0,T;H1_0)}``."""
    return {
        "l2Q": space_time_norm(spatial_l2_squared(u), u.times),
        "l2H1": space_time_norm(gradient_l2_squared(u), u.times),
    }


# ---------------------------------------------------------------------------
# persistence


def save_wavefield(u: WaveField, path: str | Path) -> Path:
    """Binary ``.npz`` with header ``{d, n, steps, T, eps}``."""
    path = Path(path)
    np.savez(path, values=u.values, times=u.times, d=u.d, n=u.n, steps=u.steps, T=u.T,
             eps=np.nan if u.eps is None else u.eps, kind=str(u.meta.get("kind", "")))
    return path if path.suffix == ".npz" else path.with_suffix(path.suffix + ".npz")


def load_wavefield(path: str | Path) -> WaveField:
    with np.load(path, allow_pickle=False) as data:
        eps = float(data["eps"])
        return WaveField(np.array(data["values"]), np.array(data["times"]), int(data["d"]),
                         int(data["n"]), None if math.isnan(eps) else eps, {"kind": str(data["kind"])})


def export_csv(u: WaveField, path: str | Path, stride_x: int = 1, stride_t: int = 1) -> None:
    """Down-sampled ``t, x..., re, im`` rows for plotting."""
    mesh = [m[(slice(None, None, stride_x),) * u.d] for m in u.mesh()]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t"] + [f"x{j + 1}" for j in range(u.d)] + ["re", "im"])
        for m in range(0, len(u.times), stride_t):
            vals = u.values[m][(slice(None, None, stride_x),) * u.d]
            for idx in np.ndindex(vals.shape):
                z = vals[idx]
                writer.writerow([repr(float(u.times[m]))] + [repr(float(c[idx])) for c in mesh]
                                + [repr(float(z.real)), repr(float(z.imag))])
