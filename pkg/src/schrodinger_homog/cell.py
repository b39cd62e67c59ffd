"""Periodic cell data on Y x Z and Fourier-collocation solvers for the cell problems.

Fields are stored with the y-axes first and tau last: a coefficient has shape
``(M,)*d``, a potential or eta field ``(M,)*d + (K,)``, a corrector set
``(d,) + (M,)*d + (K,)``.  Integrals over Y x Z are grid means (trapezoidal
rule on a periodic grid, spectrally accurate for smooth periodic integrands).

The elliptic operator ``L v = -div_y(a grad_y v)`` is applied spectrally:
derivative by FFT, product with ``a`` pointwise on the grid (no dealiasing, so
grids should resolve twice the band limit of ``a`` and ``V``).  The variational
problems are solved slice-by-slice in tau with preconditioned conjugate
gradients restricted to mean-zero fields.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .descriptors import CoefficientDescriptor, PotentialDescriptor
from .errors import GridMismatch, NonElliptic, NonFinite, SolverDiverged, ZeroMeanViolated

logger = logging.getLogger(__name__)

MEAN_TOL = 1e-12
CG_RTOL = 1e-12


@dataclass(frozen=True)
class PeriodicGrid:
    d: int
    M: int
    K: int = 1

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"dimension d={self.d} not supported (1 or 2)")
        if self.M < 4 or self.M & (self.M - 1):
            raise ValueError(f"M={self.M} must be a power of two >= 4")
        if self.K < 1:
            raise ValueError(f"K={self.K} must be >= 1")

    @property
    def y(self) -> np.ndarray:
        return -0.5 + np.arange(self.M) / self.M

    @property
    def tau(self) -> np.ndarray:
        return -0.5 + np.arange(self.K) / self.K

    @property
    def y_shape(self) -> tuple[int, ...]:
        return (self.M,) * self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return self.y_shape + (self.K,)

    def y_mesh(self) -> list[np.ndarray]:
        """Cell coordinates, each broadcastable to ``y_shape``."""
        return list(np.meshgrid(*([self.y] * self.d), indexing="ij", sparse=True))

    def mesh(self) -> tuple[list[np.ndarray], np.ndarray]:
        """Cell coordinates and tau, broadcastable to ``shape``."""
        ys = [c[..., None] for c in self.y_mesh()]
        tau = self.tau.reshape((1,) * self.d + (self.K,))
        return ys, tau

    def wavenumbers(self) -> list[np.ndarray]:
        """Integer wavenumbers per y-axis, broadcastable to ``y_shape``; Nyquist zeroed."""
        k = np.fft.fftfreq(self.M, 1.0 / self.M)
        k[self.M // 2] = 0.0
        out = []
        for j in range(self.d):
            shape = [1] * self.d
            shape[j] = self.M
            out.append(k.reshape(shape))
        return out

    def null_mask(self) -> np.ndarray:
        """True on Fourier modes annihilated by the discrete gradient."""
        k = np.fft.fftfreq(self.M, 1.0 / self.M)
        axis = (k == 0) | (np.abs(k) == self.M // 2)
        mask = axis
        for _ in range(self.d - 1):
            mask = np.logical_and.outer(mask, axis)
        return mask


def _check_same(a: PeriodicGrid, b: PeriodicGrid, what: str = "fields") -> None:
    if a.d != b.d or a.M != b.M:
        raise GridMismatch(f"{what}: cell grids differ ({a} vs {b})")


@dataclass(frozen=True)
class CoefficientField:
    grid: PeriodicGrid
    samples: np.ndarray
    descriptor: CoefficientDescriptor | None = None

    @classmethod
    def from_descriptor(cls, desc: CoefficientDescriptor, grid: PeriodicGrid) -> "CoefficientField":
        samples = np.asarray(desc(*grid.y_mesh()), dtype=float)
        return cls(grid, np.broadcast_to(samples, grid.y_shape).copy(), desc)

    def __post_init__(self):
        if np.iscomplexobj(self.samples):
            raise TypeError("coefficient samples must be real")
        if self.samples.shape != self.grid.y_shape:
            raise GridMismatch(f"coefficient shape {self.samples.shape} != {self.grid.y_shape}")

    def __call__(self, *y: np.ndarray) -> np.ndarray:
        if self.descriptor is None:
            raise ValueError("no analytic descriptor attached; cannot resample")
        return self.descriptor(*y)

    @property
    def mean(self) -> float:
        return float(self.samples.mean())


@dataclass(frozen=True)
class PotentialField:
    grid: PeriodicGrid
    samples: np.ndarray
    descriptor: PotentialDescriptor | None = None
    dtau_samples: np.ndarray | None = None

    @classmethod
    def from_descriptor(cls, desc: PotentialDescriptor, grid: PeriodicGrid) -> "PotentialField":
        ys, tau = grid.mesh()
        samples = np.broadcast_to(desc(ys, tau), grid.shape).astype(float)
        dtau = np.broadcast_to(desc.dtau(ys, tau), grid.shape).astype(float)
        return cls(grid, samples, desc, dtau)

    def __post_init__(self):
        if np.iscomplexobj(self.samples):
            raise TypeError("potential samples must be real")
        if self.samples.shape != self.grid.shape:
            raise GridMismatch(f"potential shape {self.samples.shape} != {self.grid.shape}")

    def y_means(self) -> np.ndarray:
        return self.samples.mean(axis=tuple(range(self.grid.d)))


@dataclass(frozen=True)
class CorrectorSet:
    """Correctors chi^l, l = 1..d, stacked along the leading axis."""

    grid: PeriodicGrid
    fields: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.fields.shape != (self.grid.d,) + self.grid.shape:
            raise GridMismatch(f"corrector shape {self.fields.shape} mismatches {self.grid}")

    def __getitem__(self, l: int) -> np.ndarray:
        return self.fields[l]


@dataclass(frozen=True)
class EtaField:
    grid: PeriodicGrid
    samples: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.samples.shape != self.grid.shape:
            raise GridMismatch(f"eta shape {self.samples.shape} mismatches {self.grid}")


@dataclass(frozen=True)
class CoefficientDiagnostics:
    alpha_eff: float
    c1: float


@dataclass(frozen=True)
class PotentialDiagnostics:
    sup_norm: float
    dtau_sup_norm: float | None
    beta_eff: dict[float, float]
    c0_eff: dict[float, float | None]
    beta_T_ok: dict[float, bool | None]


# ---------------------------------------------------------------------------
# spectral operators


def _yaxes(grid: PeriodicGrid) -> tuple[int, ...]:
    return tuple(range(grid.d))


def spectral_gradient(v: np.ndarray, grid: PeriodicGrid) -> list[np.ndarray]:
    """Derivatives of the trigonometric interpolant along each y-axis."""
    axes = _yaxes(grid)
    vh = np.fft.fftn(v, axes=axes)
    out = []
    for kj in grid.wavenumbers():
        kj = kj.reshape(kj.shape + (1,) * (v.ndim - grid.d))
        out.append(np.fft.ifftn(2j * np.pi * kj * vh, axes=axes).real)
    return out


def spectral_divergence(fluxes: list[np.ndarray], grid: PeriodicGrid) -> np.ndarray:
    axes = _yaxes(grid)
    acc = 0
    for kj, flux in zip(grid.wavenumbers(), fluxes):
        kj = kj.reshape(kj.shape + (1,) * (flux.ndim - grid.d))
        acc = acc + 2j * np.pi * kj * np.fft.fftn(flux, axes=axes)
    return np.fft.ifftn(acc, axes=axes).real


def _a_broadcast(a: CoefficientField, v: np.ndarray) -> np.ndarray:
    return a.samples.reshape(a.samples.shape + (1,) * (v.ndim - a.grid.d))


def apply_operator(a: CoefficientField, v: np.ndarray) -> np.ndarray:
    """``-div_y(a grad_y v)`` for ``v`` of shape ``(M,)*d`` or ``(M,)*d + (K,)``."""
    ab = _a_broadcast(a, v)
    return -spectral_divergence([ab * g for g in spectral_gradient(v, a.grid)], a.grid)


def project_mean_zero(v: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    """Remove the modes in the kernel of the discrete gradient (the mean, and Nyquist)."""
    axes = _yaxes(grid)
    vh = np.fft.fftn(v, axes=axes)
    mask = grid.null_mask().reshape(grid.y_shape + (1,) * (v.ndim - grid.d))
    vh = np.where(mask, 0.0, vh)
    return np.fft.ifftn(vh, axes=axes).real


def _inverse_laplacian(r: np.ndarray, grid: PeriodicGrid, scale: float) -> np.ndarray:
    axes = _yaxes(grid)
    k2 = sum(kj**2 for kj in grid.wavenumbers())
    k2 = np.asarray(k2, dtype=float) * np.ones(grid.y_shape)
    mask = grid.null_mask()
    with np.errstate(divide="ignore"):
        inv = np.where(mask, 0.0, 1.0 / (scale * 4.0 * np.pi**2 * np.where(mask, 1.0, k2)))
    inv = inv.reshape(grid.y_shape + (1,) * (r.ndim - grid.d))
    return np.fft.ifftn(inv * np.fft.fftn(r, axes=axes), axes=axes).real


def energy_form(a: CoefficientField, v: np.ndarray, w: np.ndarray) -> complex:
    """Discrete ``int int a grad v . conj(grad w) dy dtau`` (grid mean)."""
    ab = _a_broadcast(a, v)
    gv = _complex_gradient(v, a.grid)
    gw = _complex_gradient(w, a.grid)
    total = sum((ab * x * np.conj(z)).mean() for x, z in zip(gv, gw))
    return complex(total)


def _complex_gradient(v: np.ndarray, grid: PeriodicGrid) -> list[np.ndarray]:
    if np.iscomplexobj(v):
        re = spectral_gradient(v.real, grid)
        im = spectral_gradient(v.imag, grid)
        return [r + 1j * i for r, i in zip(re, im)]
    return spectral_gradient(v, grid)


def _pcg(a: CoefficientField, rhs: np.ndarray, max_iter: int, rtol: float = CG_RTOL) -> tuple[np.ndarray, int]:
    """Batched preconditioned CG; every trailing index of ``rhs`` is its own system.

    Each tau slice uses its own step lengths, so slices are solved
    independently and the result does not depend on how many are batched.
    """
    grid = a.grid
    axes = _yaxes(grid)
    b = project_mean_zero(rhs, grid)
    bnorm = np.sqrt((b**2).sum(axis=axes))
    x = np.zeros_like(b)
    r = b.copy()
    z = _inverse_laplacian(r, grid, a.mean)
    p = z.copy()
    rz = (r * z).sum(axis=axes)
    active = bnorm > 0
    it = 0
    while np.any(active):
        rnorm = np.sqrt((r**2).sum(axis=axes))
        active = rnorm > rtol * bnorm
        if not np.any(active):
            break
        if it >= max_iter:
            worst = float(np.max(np.where(bnorm > 0, rnorm / np.where(bnorm > 0, bnorm, 1), 0)))
            raise SolverDiverged(f"CG did not reach rtol={rtol:g} in {max_iter} iterations "
                                 f"(relative residual {worst:.3e})")
        Ap = project_mean_zero(apply_operator(a, p), grid)
        pAp = (p * Ap).sum(axis=axes)
        alpha = np.where(active, rz / np.where(active, pAp, 1.0), 0.0)
        x = x + alpha * p
        r = r - alpha * Ap
        z = _inverse_laplacian(r, grid, a.mean)
        rz_new = (r * z).sum(axis=axes)
        beta = np.where(active, rz_new / np.where(rz != 0, rz, 1.0), 0.0)
        p = np.where(active, z + beta * p, p)
        rz = rz_new
        it += 1
    return project_mean_zero(x, grid), it


# ---------------------------------------------------------------------------
# validation


def validate_coefficient(a: CoefficientField) -> CoefficientDiagnostics:
    s = a.samples
    if not np.all(np.isfinite(s)):
        raise NonFinite("coefficient has non-finite samples")
    alpha = float(s.min())
    if alpha <= 0:
        raise NonElliptic(f"coefficient not elliptic: min sample {alpha:g} <= 0")
    return CoefficientDiagnostics(alpha_eff=alpha, c1=float(s.max()))


def check_zero_mean(V: PotentialField, tol: float = MEAN_TOL) -> None:
    worst = float(np.max(np.abs(V.y_means())))
    if worst > tol:
        raise ZeroMeanViolated(f"potential y-mean {worst:.3e} exceeds {tol:g}")


def validate_potential(V: PotentialField, eps_list=(), T: float | None = None) -> PotentialDiagnostics:
    """Advisory bounds of the potential; only the zero-mean hypothesis is enforced.

    ``beta_eff(eps) = |V|_inf / eps`` and ``c0_eff(eps) = |dV/dtau|_inf / eps^2``
    are reported, together with whether ``beta_eff * T < 1``.
    """
    if not np.all(np.isfinite(V.samples)):
        raise NonFinite("potential has non-finite samples")
    check_zero_mean(V)
    sup = float(np.max(np.abs(V.samples)))
    dsup = None if V.dtau_samples is None else float(np.max(np.abs(V.dtau_samples)))
    beta, c0, flags = {}, {}, {}
    for eps in eps_list:
        eps = float(eps)
        beta[eps] = sup / eps
        c0[eps] = None if dsup is None else dsup / eps**2
        flags[eps] = None if T is None else bool(beta[eps] * T < 1)
    return PotentialDiagnostics(sup, dsup, beta, c0, flags)


# ---------------------------------------------------------------------------
# cell problems


def _max_iter(grid: PeriodicGrid) -> int:
    return 10 * grid.M


def solve_corrector(a: CoefficientField, grid: PeriodicGrid | None = None) -> CorrectorSet:
    """Correctors ``chi^l``: ``-div(a grad chi^l) = -d a / d y_l``, zero mean.

    ``a`` does not depend on tau, so each corrector is solved once and copied
    to every tau slice.
    """
    grid = a.grid if grid is None else grid
    _check_same(a.grid, grid, "corrector")
    validate_coefficient(a)
    rhs = np.stack([-g for g in spectral_gradient(a.samples, a.grid)], axis=-1)
    chi, iters = _pcg(a, rhs, _max_iter(grid))
    fields = np.stack([np.repeat(chi[..., l][..., None], grid.K, axis=-1) for l in range(grid.d)])
    logger.debug("corrector solve: %d CG iterations", iters)
    prov = {"M": grid.M, "K": grid.K, "cg_rtol": CG_RTOL, "cg_iterations": iters}
    return CorrectorSet(grid, fields, prov)


def solve_eta(a: CoefficientField, V: PotentialField, grid: PeriodicGrid | None = None) -> EtaField:
    """``-div(a grad eta(., tau)) = V(., tau)`` on each tau slice, zero mean."""
    grid = V.grid if grid is None else grid
    _check_same(a.grid, grid, "eta")
    _check_same(V.grid, grid, "eta")
    validate_coefficient(a)
    check_zero_mean(V)
    eta, iters = _pcg(a, V.samples, _max_iter(grid))
    prov = {"M": grid.M, "K": grid.K, "cg_rtol": CG_RTOL, "cg_iterations": iters}
    return EtaField(grid, eta, prov)


def _dual_norm(r: np.ndarray, grid: PeriodicGrid) -> float:
    axes = _yaxes(grid)
    rh = np.fft.fftn(r, axes=axes) / grid.M**grid.d
    k2 = np.asarray(sum(kj**2 for kj in grid.wavenumbers()), dtype=float) * np.ones(grid.y_shape)
    weight = np.where(k2 > 0, 1.0 / (4 * np.pi**2 * np.where(k2 > 0, k2, 1.0)), 1.0)
    weight = weight.reshape(grid.y_shape + (1,) * (r.ndim - grid.d))
    per_slice = (weight * np.abs(rh) ** 2).sum(axis=axes)
    return float(np.sqrt(np.mean(per_slice)))


def cell_residual(a: CoefficientField, V: PotentialField | None,
                  solution: CorrectorSet | EtaField) -> float:
    """H^{-1}-type residual of the cell equation that ``solution`` should satisfy.

    For a corrector set the maximum over the ``d`` equations is returned.
    """
    _check_same(a.grid, solution.grid, "residual")
    if isinstance(solution, CorrectorSet):
        grads = spectral_gradient(a.samples, a.grid)
        worst = 0.0
        for l in range(a.grid.d):
            field_l = solution.fields[l]
            rhs = -grads[l][..., None] * np.ones(field_l.shape)
            worst = max(worst, _dual_norm(apply_operator(a, field_l) - rhs, a.grid))
        return worst
    if V is None:
        raise ValueError("eta residual needs the potential")
    _check_same(V.grid, solution.grid, "residual")
    if V.samples.shape != solution.samples.shape:
        raise GridMismatch("potential and eta have different tau resolution")
    return _dual_norm(apply_operator(a, solution.samples) - V.samples, a.grid)


# ---------------------------------------------------------------------------
# trigonometric interpolation of cell fields at arbitrary fast coordinates


def _dft_matrix(points: np.ndarray, n: int) -> np.ndarray:
    """Rows evaluate the trigonometric interpolant of ``n`` samples at ``points``.

    Samples sit at ``-1/2 + m/n``; the Nyquist mode is split symmetrically
    (cosine) so the interpolant is real for real data.
    """
    k = np.fft.fftfreq(n, 1.0 / n)
    phase = np.exp(2j * np.pi * np.outer(np.asarray(points, dtype=float) + 0.5, k))
    if n % 2 == 0:
        phase[:, n // 2] = np.cos(np.pi * n * (np.asarray(points, dtype=float) + 0.5))
    return phase / n


def interpolate_cell_field(values: np.ndarray, grid: PeriodicGrid,
                           y_points: list[np.ndarray], tau_points: np.ndarray) -> np.ndarray:
    """Evaluate a ``grid.shape`` field on the tensor product ``y_points[0] x ... x tau_points``.

    Returns an array of shape ``(len(y0), [len(y1),] len(tau))``.
    """
    coeffs = np.fft.fftn(values, axes=tuple(range(values.ndim)))
    # remove the sample-position phase so the basis is exp(2 pi i k (y + 1/2))
    out = coeffs
    mats = [_dft_matrix(p, grid.M) for p in y_points] + [_dft_matrix(tau_points, grid.K)]
    for axis, mat in enumerate(mats):
        out = np.moveaxis(np.tensordot(mat, out, axes=([1], [axis])), 0, axis)
    return out.real if not np.iscomplexobj(values) else out


# ---------------------------------------------------------------------------
# persistence


def save_cell_array(path: str | Path, name: str, grid: PeriodicGrid, samples: np.ndarray,
                    **extra) -> Path:
    """Write a cell field as ``.npz`` with header ``{d, M, K, field}``."""
    path = Path(path)
    np.savez(path, d=grid.d, M=grid.M, K=grid.K, field=name, samples=samples, **extra)
    return path if path.suffix == ".npz" else path.with_suffix(path.suffix + ".npz")


def load_cell_array(path: str | Path) -> tuple[str, PeriodicGrid, np.ndarray]:
    with np.load(path, allow_pickle=False) as data:
        grid = PeriodicGrid(int(data["d"]), int(data["M"]), int(data["K"]))
        return str(data["field"]), grid, np.array(data["samples"])
