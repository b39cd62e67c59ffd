"""Estimator-style front end: fit the cell problems once, then predict homogenized solutions."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .cell import (CoefficientField, PeriodicGrid, PotentialField, solve_corrector, solve_eta,
                   validate_coefficient, validate_potential)
from .descriptors import CoefficientDescriptor, PotentialDescriptor
from .effective import effective_model
from .errors import GridMismatch
from .fine import FineProblem, WaveField
from .macro import MacroProblem, solve_homogenized
from .twoscale import first_order_field, reconstruct_u1


def check_coefficient(a, grid: PeriodicGrid) -> CoefficientField:
    """Accept a descriptor, a sample array or a field; return a validated field on ``grid``."""
    if isinstance(a, CoefficientDescriptor):
        a = CoefficientField.from_descriptor(a, grid)
    elif isinstance(a, np.ndarray):
        a = CoefficientField(grid, np.asarray(a, dtype=float))
    elif not isinstance(a, CoefficientField):
        raise TypeError(f"cannot interpret {type(a).__name__} as a coefficient")
    if a.grid.d != grid.d or a.grid.M != grid.M:
        raise GridMismatch(f"coefficient grid {a.grid} does not match {grid}")
    validate_coefficient(a)
    return a


def check_potential(V, grid: PeriodicGrid) -> PotentialField:
    if V is None:
        V = PotentialDescriptor("zero")
    if isinstance(V, PotentialDescriptor):
        V = PotentialField.from_descriptor(V, grid)
    elif isinstance(V, np.ndarray):
        V = PotentialField(grid, np.asarray(V, dtype=float))
    elif not isinstance(V, PotentialField):
        raise TypeError(f"cannot interpret {type(V).__name__} as a potential")
    if V.grid != grid:
        raise GridMismatch(f"potential grid {V.grid} does not match {grid}")
    validate_potential(V)
    return V


class Homogenizer(BaseEstimator):
    """Periodic homogenization of ``i u_t - div(a(x/eps) grad u) + V(x/eps, t/eps) u / eps = f``.

    Parameters
    ----------
    d : int
        Spatial dimension (1 or 2).
    M, K : int
        Cell samples per y-axis and in tau.
    form : {"consistent", "literal"}
        Which homogenized operator ``predict`` solves (see ``EffectiveModel.limit_coefficients``).

    Attributes
    ----------
    correctors_, eta_ : cell solutions
    q_, b_, mu_ : effective coefficients
    model_ : EffectiveModel
    """

    def __init__(self, d: int = 1, M: int = 256, K: int = 64, form: str = "consistent"):
        self.d = d
        self.M = M
        self.K = K
        self.form = form

    def fit(self, coefficient, potential=None):
        grid = PeriodicGrid(self.d, self.M, self.K)
        a = check_coefficient(coefficient, grid)
        V = check_potential(potential, grid)
        self.coefficient_ = a
        self.potential_ = V
        self.correctors_ = solve_corrector(a, grid)
        self.eta_ = solve_eta(a, V, grid)
        self.model_ = effective_model(a, V, self.correctors_, self.eta_)
        self.q_ = self.model_.q
        self.b_ = self.model_.b
        self.mu_ = self.model_.mu
        return self

    def predict(self, problem: FineProblem | MacroProblem) -> WaveField:
        """Homogenized solution on the grid (and with the data) of ``problem``."""
        check_is_fitted(self, "model_")
        if isinstance(problem, FineProblem):
            problem = MacroProblem.matching(self.model_, problem, self.form)
        return solve_homogenized(problem)

    def transform(self, u0: WaveField, eps: float) -> WaveField:
        """First-order approximation ``u0 + eps u1(x, t, x/eps, t/eps)``."""
        check_is_fitted(self, "model_")
        return first_order_field(u0, self.correctors_, self.eta_, eps, self.form)

    def corrector(self, u0: WaveField):
        check_is_fitted(self, "model_")
        return reconstruct_u1(u0, self.correctors_, self.eta_, self.form)
