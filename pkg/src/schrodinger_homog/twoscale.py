"""Two-scale diagnostics: pairings against oscillating test functions, the first-order
corrector, space-time error norms and the residual of the two-scale limit system.

Test functions are separable, ``psi(x, t, y, tau) = phi(x, t) w(y) c(tau)``,
and are sampled analytically, so ``psi(x, t, x/eps, t/eps)`` carries no
interpolation error.  Fields that depend on the fast variables (the corrector
``u1``) are stored as finite sums ``sum_k s_k(x, t) F_k(y, tau)`` of a slow
grid field times a cell field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cell import (CoefficientField, CorrectorSet, EtaField, PeriodicGrid, PotentialField,
                   _check_same, interpolate_cell_field, spectral_gradient)
from .descriptors import SourceDescriptor
from .errors import GridMismatch, MeanZeroRequired
from .fine import (WaveField, _time_weights, gradient_l2_squared, space_time_norm,
                   spatial_l2_squared)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TrigPolynomial:
    """``sum amplitude * trig(2 pi k . z)`` with ``trig`` in {cos, sin}.

    ``terms`` is a tuple of ``(amplitude, "cos" | "sin", wavevector)``.
    """

    terms: tuple = ((1.0, "cos", (0,)),)

    @classmethod
    def constant(cls, value: float = 1.0) -> "TrigPolynomial":
        return cls(((float(value), "cos", (0,)),))

    @classmethod
    def cos(cls, k: int | Sequence[int] = 1, amplitude: float = 1.0) -> "TrigPolynomial":
        return cls(((float(amplitude), "cos", tuple(np.atleast_1d(k).tolist())),))

    @classmethod
    def sin(cls, k: int | Sequence[int] = 1, amplitude: float = 1.0) -> "TrigPolynomial":
        return cls(((float(amplitude), "sin", tuple(np.atleast_1d(k).tolist())),))

    def __call__(self, *z: np.ndarray) -> np.ndarray:
        shape = np.broadcast_shapes(*(np.shape(c) for c in z))
        out = np.zeros(shape)
        for amp, kind, k in self.terms:
            if not any(k):
                if kind == "cos":
                    out = out + amp
                continue
            arg = sum(TWO_PI * kj * np.asarray(zj, dtype=float) for kj, zj in zip(k, z))
            out = out + amp * (np.cos(arg) if kind == "cos" else np.sin(arg))
        return out

    @property
    def mean(self) -> float:
        return float(sum(amp for amp, kind, k in self.terms if kind == "cos" and not any(k)))

    @property
    def is_constant(self) -> bool:
        return all(not any(k) for _, kind, k in self.terms)


@dataclass(frozen=True)
class SlowFactor:
    """``phi(x, t) = amplitude * prod_j sin(pi k_j x_j) * sin(pi l t / T)^2``.

    Vanishes with its time derivative at ``t = 0, T`` and on the spatial boundary.
    """

    T: float
    modes: tuple[int, ...] = (1,)
    time_mode: int = 1
    amplitude: float = 1.0

    def _space(self, xs):
        out = self.amplitude
        for j, x in enumerate(xs):
            out = out * np.sin(np.pi * self.modes[min(j, len(self.modes) - 1)] * x)
        return out

    def _time(self, t):
        return np.sin(np.pi * self.time_mode * t / self.T) ** 2

    def __call__(self, xs: Sequence[np.ndarray], t: np.ndarray) -> np.ndarray:
        return self._space(xs) * self._time(t)

    def dt(self, xs, t):
        w = np.pi * self.time_mode / self.T
        return self._space(xs) * w * np.sin(2 * w * t)

    def grad(self, xs, t) -> list[np.ndarray]:
        out = []
        for j in range(len(xs)):
            g = self.amplitude * self._time(t)
            for i, x in enumerate(xs):
                k = np.pi * self.modes[min(i, len(self.modes) - 1)]
                g = g * (k * np.cos(k * x) if i == j else np.sin(k * x))
            out.append(g)
        return out


@dataclass(frozen=True)
class TestFunction:
    __test__ = False  # not a pytest class

    slow: SlowFactor
    w: TrigPolynomial = field(default_factory=TrigPolynomial.constant)
    c: TrigPolynomial = field(default_factory=TrigPolynomial.constant)
    mean_zero: bool = False

    def __post_init__(self):
        if self.mean_zero and abs(self.w.mean) > 0:
            raise MeanZeroRequired("test function flagged mean-zero but w has nonzero mean")

    @property
    def w_mean_zero(self) -> bool:
        return self.w.mean == 0.0

    def sample(self, u: WaveField, eps: float) -> np.ndarray:
        """``psi(x, t, x/eps, t/eps)`` on the grid of ``u``, time axis first."""
        xs = [m[None] for m in u.mesh()]
        t = u.times.reshape((-1,) + (1,) * u.d)
        return self.slow(xs, t) * self.w(*[x / eps for x in xs]) * self.c(t / eps)

    def cell_samples(self, grid: PeriodicGrid) -> np.ndarray:
        ys, tau = grid.mesh()
        return np.broadcast_to(self.w(*ys) * self.c(tau), grid.shape)


# ---------------------------------------------------------------------------
# quadrature on the space-time grid


def _space_weights(u: WaveField) -> np.ndarray:
    w1 = np.full(u.n + 2, u.h)
    w1[[0, -1]] *= 0.5
    w = w1
    for _ in range(u.d - 1):
        w = np.multiply.outer(w, w1)
    return w


def integrate_q(u: WaveField, values: np.ndarray) -> complex:
    """Trapezoid-consistent ``int_Q values dx dt`` on the grid of ``u``."""
    per_level = (values * _space_weights(u)).reshape(len(u.times), -1).sum(axis=1)
    return complex(_time_weights(u.times) @ per_level)


def slow_gradient(u: WaveField) -> list[np.ndarray]:
    """Centered differences, one-sided second order at the boundary."""
    return [np.gradient(u.values, u.h, axis=j + 1, edge_order=2) for j in range(u.d)]


# ---------------------------------------------------------------------------
# two-scale fields


@dataclass(frozen=True)
class SeparableField:
    """``g(x, t, y, tau) = sum_k slow_k(x, t) * fast_k(y, tau)`` on a wave grid and a cell grid."""

    wave: WaveField
    grid: PeriodicGrid
    slow: tuple
    fast: tuple

    def terms(self):
        return list(zip(self.slow, self.fast))

    def scaled(self, alpha: complex) -> "SeparableField":
        return SeparableField(self.wave, self.grid, tuple(alpha * s for s in self.slow), self.fast)

    def evaluate(self, x_idx: tuple, m: int, y: Sequence[float], tau: float) -> complex:
        """Value at the wave-grid node ``x_idx`` and time level ``m`` for arbitrary fast coordinates."""
        total = 0.0
        for s, F in self.terms():
            fv = interpolate_cell_field(F, self.grid, [np.array([yj]) for yj in y], np.array([tau]))
            total = total + s[(m,) + tuple(x_idx)] * complex(fv.ravel()[0])
        return complex(total)

    def oscillating(self, eps: float) -> np.ndarray:
        """Samples ``g(x, t, x/eps, t/eps)`` on the wave grid, time axis first."""
        x = self.wave.x
        out = np.zeros(self.wave.values.shape, dtype=complex)
        for s, F in self.terms():
            fv = interpolate_cell_field(F, self.grid, [x / eps] * self.wave.d, self.wave.times / eps)
            out = out + s * np.moveaxis(fv, -1, 0)
        return out


@dataclass(frozen=True)
class CorrectorReconstruction(SeparableField):
    """``u1 = -sum_j d u0/d x_j chi^j  -/+ eta u0``; see :func:`reconstruct_u1`."""

    form: str = "consistent"


def reconstruct_u1(u0: WaveField, chi: CorrectorSet, eta: EtaField | None = None,
                   form: str = "consistent") -> CorrectorReconstruction:
    """Corrector ``u1(x, t, y, tau)`` built from the homogenized solution.

    ``form="consistent"`` gives ``-grad u0 . chi - eta u0``, the unique solution
    of the cell part of the limit system; ``form="literal"`` flips the sign
    of the eta term.
    """
    if chi.grid.d != u0.d:
        raise GridMismatch(f"corrector dimension {chi.grid.d} != wave dimension {u0.d}")
    if eta is not None:
        _check_same(chi.grid, eta.grid, "reconstruct_u1")
        if eta.grid.K != chi.grid.K:
            raise GridMismatch("corrector and eta tau grids differ")
    if form not in ("consistent", "literal"):
        raise ValueError(f"unknown form {form!r}")
    grads = slow_gradient(u0)
    slow = [-g for g in grads]
    fast = [chi.fields[j] for j in range(u0.d)]
    if eta is not None:
        sign = -1.0 if form == "consistent" else 1.0
        slow.append(sign * u0.values)
        fast.append(eta.samples)
    return CorrectorReconstruction(u0, chi.grid, tuple(slow), tuple(fast), form)


def first_order_field(u0: WaveField, chi: CorrectorSet, eta: EtaField | None, eps: float,
                      form: str = "consistent") -> WaveField:
    """``u0 + eps * u1(x, t, x/eps, t/eps)``; boundary nodes are reset to zero."""
    if eps == 0:
        return u0
    u1 = reconstruct_u1(u0, chi, eta, form)
    values = u0.values + eps * u1.oscillating(eps)
    interior = (slice(None),) + (slice(1, -1),) * u0.d
    out = np.zeros_like(values)
    out[interior] = values[interior]
    return u0.replace(out, kind="first_order", eps=eps)


# ---------------------------------------------------------------------------
# pairings


def two_scale_pairing(u: WaveField, psi: TestFunction, eps: float) -> complex:
    """``int_Q u(x, t) psi(x, t, x/eps, t/eps) dx dt``."""
    return integrate_q(u, u.values * psi.sample(u, eps))


def corrector_pairing(u: WaveField, psi: TestFunction, eps: float) -> complex:
    """``(1/eps) int_Q u psi^eps``; ``psi`` must have a mean-zero y-factor."""
    if not psi.w_mean_zero:
        raise MeanZeroRequired("corrector pairing needs a test function with mean-zero y-factor")
    return two_scale_pairing(u, psi, eps) / eps


def limit_pairing(u0: WaveField, psi: TestFunction, u1: SeparableField | None = None) -> complex:
    """``int_Q int_Y int_Z g psi`` with ``g = u0`` (no fast dependence) or ``g = u1``."""
    xs = [m[None] for m in u0.mesh()]
    t = u0.times.reshape((-1,) + (1,) * u0.d)
    phi = psi.slow(xs, t)
    if u1 is None:
        return integrate_q(u0, u0.values * phi) * psi.w.mean * psi.c.mean
    if not u1.wave.same_grid(u0):
        raise GridMismatch("u1 was reconstructed on a different wave grid")
    fast_test = psi.cell_samples(u1.grid)
    total = 0j
    for s, F in u1.terms():
        total += integrate_q(u0, s * phi) * float(np.mean(F * fast_test))
    return complex(total)


def space_time_l2_error(u: WaveField, v: WaveField) -> float:
    if not u.same_grid(v):
        raise GridMismatch("fields live on different space-time grids")
    return space_time_norm(spatial_l2_squared(u.replace(u.values - v.values)), u.times)


def space_time_h1_seminorm(u: WaveField) -> float:
    return space_time_norm(gradient_l2_squared(u), u.times)


# ---------------------------------------------------------------------------
# limit-system residual


def limit_system_residual(u0: WaveField, u1: SeparableField,
                          basis: Sequence[tuple[TestFunction, TestFunction | None]],
                          a: CoefficientField, V: PotentialField | None,
                          f: SourceDescriptor | None = None, *, per_element: bool = False):
    """Max modulus over ``basis`` of the two-scale limit-system residual.

    For each pair ``(psi0, psi1)`` evaluates

        i <u0', conj psi0> + int a (grad u0 + grad_y u1) . conj(grad psi0 + grad_y psi1)
        + int (u1 conj psi0 + u0 conj psi1) V - int f conj psi0

    with ``psi0`` slow-only and ``psi1 = phi1(x, t) w(y) c(tau)``; the time
    derivative is moved onto ``psi0``.
    """
    grid = a.grid
    if u1.grid.d != grid.d or u1.grid.M != grid.M:
        raise GridMismatch("u1 and the coefficient use different cell grids")
    if V is not None and (V.grid.M != grid.M or V.grid.K != u1.grid.K):
        raise GridMismatch("potential grid does not match the corrector grid")
    if not u1.wave.same_grid(u0):
        raise GridMismatch("u1 was reconstructed on a different wave grid")
    d = u0.d
    xs = [m[None] for m in u0.mesh()]
    t = u0.times.reshape((-1,) + (1,) * d)
    cgrid = u1.grid
    a_cell = np.broadcast_to(a.samples[..., None], cgrid.shape)
    V_cell = np.zeros(cgrid.shape) if V is None else V.samples
    abar = float(a_cell.mean())
    grad_u0 = slow_gradient(u0)
    terms = u1.terms()
    fast_grads = [spectral_gradient(F, cgrid) for _, F in terms]
    a_dF = [[float(np.mean(a_cell * g[j])) for j in range(d)] for g in fast_grads]
    F_V = [float(np.mean(F * V_cell)) for _, F in terms]
    fsrc = None
    if f is not None and not f.is_zero:
        fsrc = np.stack([f([m for m in u0.mesh()], tm) for tm in u0.times])

    residuals = []
    for psi0, psi1 in basis:
        if not (psi0.w.is_constant and psi0.c.is_constant):
            raise ValueError("psi0 must not depend on the fast variables")
        scale0 = psi0.w.mean * psi0.c.mean
        phi0 = np.conj(psi0.slow(xs, t) * scale0)
        dphi0 = np.conj(psi0.slow.dt(xs, t) * scale0)
        gphi0 = [np.conj(g * scale0) for g in psi0.slow.grad(xs, t)]
        r = -1j * integrate_q(u0, u0.values * dphi0)
        r += sum(abar * integrate_q(u0, grad_u0[j] * gphi0[j]) for j in range(d))
        for k, (s, _) in enumerate(terms):
            r += sum(a_dF[k][j] * integrate_q(u0, s * gphi0[j]) for j in range(d))
            r += F_V[k] * integrate_q(u0, s * phi0)
        if fsrc is not None:
            r -= integrate_q(u0, fsrc * phi0)
        if psi1 is not None:
            phi1 = np.conj(psi1.slow(xs, t))
            fast1 = np.conj(psi1.cell_samples(cgrid))
            g1 = spectral_gradient(np.ascontiguousarray(fast1.real), cgrid)
            for j in range(d):
                r += float(np.mean(a_cell * g1[j])) * integrate_q(u0, grad_u0[j] * phi1)
            for k, (s, _) in enumerate(terms):
                coupling = sum(float(np.mean(a_cell * fast_grads[k][j] * g1[j])) for j in range(d))
                r += coupling * integrate_q(u0, s * phi1)
            r += float(np.mean(fast1.real * V_cell)) * integrate_q(u0, u0.values * phi1)
        residuals.append(abs(r))
    return residuals if per_element else max(residuals)
