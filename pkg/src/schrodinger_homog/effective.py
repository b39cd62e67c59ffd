"""Homogenized coefficients assembled from the cell correctors by periodic quadrature."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cell import (CoefficientField, CorrectorSet, EtaField, PotentialField, _check_same,
                   spectral_gradient)
from .errors import AsymmetryExceeded, NegativeMu

ASYMMETRY_TOL = 1e-10
MU_FLOOR = -1e-12


@dataclass(frozen=True)
class EffectiveModel:
    """Effective diffusion tensor ``q``, drift ``b`` and potential shift ``mu``.

    ``b`` and ``mu`` follow the closed-form cell-average definitions.  The
    constant-coefficient problem that the oscillating solutions actually
    approach uses ``limit_drift`` (identically zero up to quadrature, by
    symmetry of the cell energy) and the potential ``-mu``; see
    :meth:`limit_coefficients`.
    """

    q: np.ndarray
    b: np.ndarray
    mu: float
    limit_drift: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "q", np.atleast_2d(np.asarray(self.q, dtype=float)))
        object.__setattr__(self, "b", np.atleast_1d(np.asarray(self.b, dtype=float)))
        if self.limit_drift is None:
            object.__setattr__(self, "limit_drift", np.zeros_like(self.b))
        else:
            object.__setattr__(self, "limit_drift", np.atleast_1d(np.asarray(self.limit_drift, dtype=float)))
        d = self.q.shape[0]
        if self.q.shape != (d, d) or self.b.shape != (d,):
            raise ValueError(f"inconsistent shapes q{self.q.shape}, b{self.b.shape}")

    @property
    def d(self) -> int:
        return self.q.shape[0]

    def limit_coefficients(self, form: str = "consistent") -> tuple[np.ndarray, np.ndarray, float]:
        """Coefficients ``(q, drift, potential)`` of ``i u_t + Q u + drift . grad u + potential u = f``.

        ``form="consistent"`` returns ``(q, limit_drift, -mu)``, the problem
        obtained by substituting ``u1 = -chi . grad u0 - eta u0`` into the
        two-scale limit system.  ``form="literal"`` returns ``(q, b, mu)``.
        """
        if form == "consistent":
            return self.q.copy(), self.limit_drift.copy(), -float(self.mu)
        if form == "literal":
            return self.q.copy(), self.b.copy(), float(self.mu)
        raise ValueError(f"unknown form {form!r}")

    def to_dict(self) -> dict:
        return {
            "q": self.q.tolist(),
            "b": self.b.tolist(),
            "mu": float(self.mu),
            "limit_drift": self.limit_drift.tolist(),
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EffectiveModel":
        return cls(np.array(data["q"]), np.array(data["b"]), float(data["mu"]),
                   np.array(data.get("limit_drift", np.zeros(len(data["b"])))),
                   dict(data.get("provenance", {})))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "EffectiveModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _cell_mean(x: np.ndarray) -> float:
    return float(np.mean(x))


def effective_tensor(a: CoefficientField, chi: CorrectorSet, symmetry_tol: float = ASYMMETRY_TOL) -> np.ndarray:
    """``q_ij = delta_ij <a> - << a d chi^j / d y_i >>``, symmetrized."""
    _check_same(a.grid, chi.grid, "effective_tensor")
    d = a.grid.d
    abar = a.mean
    ab = a.samples[..., None]
    q = np.empty((d, d))
    for j in range(d):
        grads = spectral_gradient(chi.fields[j], a.grid)
        for i in range(d):
            q[i, j] = (abar if i == j else 0.0) - _cell_mean(ab * grads[i])
    defect = float(np.max(np.abs(q - q.T)))
    if defect > symmetry_tol:
        raise AsymmetryExceeded(f"effective tensor asymmetry {defect:.3e} > {symmetry_tol:g}")
    return 0.5 * (q + q.T)


def effective_drift(a: CoefficientField, V: PotentialField, chi: CorrectorSet, eta: EtaField) -> np.ndarray:
    """``b_i = -<< chi^i V >> - << a d eta / d y_i >>``."""
    for other in (V.grid, chi.grid, eta.grid):
        _check_same(a.grid, other, "effective_drift")
    ab = a.samples[..., None]
    grads = spectral_gradient(eta.samples, a.grid)
    return np.array([-_cell_mean(chi.fields[i] * V.samples) - _cell_mean(ab * grads[i])
                     for i in range(a.grid.d)])


def limit_drift(a: CoefficientField, V: PotentialField, chi: CorrectorSet, eta: EtaField) -> np.ndarray:
    """Drift of the consistent limit problem: ``<< a d eta / d y_i >> - << chi^i V >>``.

    Testing the eta equation with ``chi^i`` and the corrector equation with
    ``eta`` shows both averages equal the same cell energy, so this vanishes
    up to solver tolerance.
    """
    for other in (V.grid, chi.grid, eta.grid):
        _check_same(a.grid, other, "limit_drift")
    ab = a.samples[..., None]
    grads = spectral_gradient(eta.samples, a.grid)
    return np.array([_cell_mean(ab * grads[i]) - _cell_mean(chi.fields[i] * V.samples)
                     for i in range(a.grid.d)])


def effective_potential_shift(V: PotentialField, eta: EtaField) -> float:
    """``mu = << eta V >>``; equals the cell energy of eta, hence nonnegative."""
    _check_same(V.grid, eta.grid, "effective_potential_shift")
    mu = _cell_mean(eta.samples * V.samples)
    if mu < MU_FLOOR:
        raise NegativeMu(f"mu = {mu:.3e} < 0: eta does not solve the cell problem for this V")
    return mu


def effective_model(a: CoefficientField, V: PotentialField, chi: CorrectorSet, eta: EtaField,
                    **provenance) -> EffectiveModel:
    prov = {"M": a.grid.M, "K": V.grid.K, "asymmetry_tol": ASYMMETRY_TOL}
    prov.update({f"chi_{k}": v for k, v in chi.provenance.items() if k not in ("M", "K")})
    prov.update({f"eta_{k}": v for k, v in eta.provenance.items() if k not in ("M", "K")})
    prov.update(provenance)
    return EffectiveModel(
        q=effective_tensor(a, chi),
        b=effective_drift(a, V, chi, eta),
        mu=effective_potential_shift(V, eta),
        limit_drift=limit_drift(a, V, chi, eta),
        provenance=prov,
    )
