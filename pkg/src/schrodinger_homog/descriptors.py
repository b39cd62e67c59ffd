"""Named closed-form builtins for coefficients, potentials, sources and initial states.

Every descriptor is a frozen dataclass that round-trips through ``to_dict`` /
``from_dict`` so it can live in a config file.  Fast-variable descriptors
(coefficient, potential) are evaluated at cell coordinates ``y`` (and ``tau``)
and are 1-periodic in each of them.  Slow-variable descriptors (initial state,
source) are evaluated on the physical domain ``(0, 1)^d``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi

COEFFICIENT_KINDS = ("constant", "cosine", "lamination", "product_cosine")
POTENTIAL_KINDS = ("zero", "cosine", "sine")
STATE_KINDS = ("zero", "sine_mode", "gaussian")


def _as_axes(y: Sequence[np.ndarray] | np.ndarray) -> list[np.ndarray]:
    if isinstance(y, np.ndarray):
        return [y]
    return [np.asarray(c, dtype=float) for c in y]


@dataclass(frozen=True)
class CoefficientDescriptor:
    """Scalar Y-periodic diffusion coefficient ``a(y)``.

    kinds
        ``constant``        a = value
        ``cosine``          a = mean + amplitude * sum_j cos(2 pi k y_j)
        ``lamination``      a = mean + amplitude * cos(2 pi k y_axis)
        ``product_cosine``  a = mean + amplitude * prod_j cos(2 pi k y_j)
    """

    kind: str = "constant"
    value: float = 1.0
    mean: float = 1.0
    amplitude: float = 0.5
    wavenumber: int = 1
    axis: int = 0

    def __post_init__(self):
        if self.kind not in COEFFICIENT_KINDS:
            raise ValueError(f"unknown coefficient kind {self.kind!r}")

    def __call__(self, *y: np.ndarray) -> np.ndarray:
        axes = _as_axes(list(y))
        shape = np.broadcast_shapes(*(c.shape for c in axes))
        k = TWO_PI * self.wavenumber
        if self.kind == "constant":
            return np.full(shape, float(self.value))
        if self.kind == "cosine":
            return self.mean + self.amplitude * sum(np.cos(k * c) for c in axes) * np.ones(shape)
        if self.kind == "lamination":
            return self.mean + self.amplitude * np.cos(k * axes[self.axis]) * np.ones(shape)
        prod = np.ones(shape)
        for c in axes:
            prod = prod * np.cos(k * c)
        return self.mean + self.amplitude * prod

    def band_limit(self) -> int:
        return 0 if self.kind == "constant" else abs(int(self.wavenumber))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CoefficientDescriptor":
        return cls(**data)


@dataclass(frozen=True)
class PotentialDescriptor:
    """Y x Z periodic real potential ``V(y, tau)``.

    ``amplitude * prod_j trig(2 pi k y_j) * cos(2 pi m tau) + offset`` with
    ``trig`` = cos or sin.  ``m = 0`` gives a tau-independent potential.  A
    nonzero ``offset`` breaks the zero-mean hypothesis and exists so that the
    validators can be exercised.
    """

    kind: str = "zero"
    amplitude: float = 1.0
    wavenumber: int = 1
    time_wavenumber: int = 1
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")

    def _spatial(self, axes: list[np.ndarray]) -> np.ndarray:
        trig = np.cos if self.kind == "cosine" else np.sin
        out = np.ones(np.broadcast_shapes(*(c.shape for c in axes)))
        for c in axes:
            out = out * trig(TWO_PI * self.wavenumber * c)
        return out

    def __call__(self, y: Sequence[np.ndarray], tau: np.ndarray | float) -> np.ndarray:
        axes = _as_axes(y)
        tau = np.asarray(tau, dtype=float)
        shape = np.broadcast_shapes(tau.shape, *(c.shape for c in axes))
        if self.kind == "zero":
            return np.full(shape, float(self.offset))
        temporal = np.cos(TWO_PI * self.time_wavenumber * tau)
        return self.amplitude * self._spatial(axes) * temporal + self.offset

    def dtau(self, y: Sequence[np.ndarray], tau: np.ndarray | float) -> np.ndarray:
        axes = _as_axes(y)
        tau = np.asarray(tau, dtype=float)
        shape = np.broadcast_shapes(tau.shape, *(c.shape for c in axes))
        if self.kind == "zero" or self.time_wavenumber == 0:
            return np.zeros(shape)
        m = TWO_PI * self.time_wavenumber
        return -self.amplitude * m * self._spatial(axes) * np.sin(m * tau)

    @property
    def is_zero(self) -> bool:
        return (self.kind == "zero" or self.amplitude == 0.0) and self.offset == 0.0

    @property
    def time_independent(self) -> bool:
        return self.kind == "zero" or self.time_wavenumber == 0

    def band_limit(self) -> int:
        return 0 if self.kind == "zero" else abs(int(self.wavenumber))

    def scaled(self, s: float) -> "PotentialDescriptor":
        return PotentialDescriptor(self.kind, self.amplitude * s, self.wavenumber,
                                   self.time_wavenumber, self.offset * s)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PotentialDescriptor":
        return cls(**data)


@dataclass(frozen=True)
class StateDescriptor:
    """Complex function on ``(0, 1)^d`` vanishing on the boundary.

    ``sine_mode``: amplitude * prod_j sin(pi k_j x_j).
    ``gaussian``:  amplitude * exp(-|x - c|^2 / (2 width^2)) * exp(i k0 . x) * prod_j sin(pi x_j),
    the trailing sine product being the boundary cutoff.
    """

    kind: str = "zero"
    amplitude: float = 1.0
    modes: tuple[int, ...] = (1,)
    center: tuple[float, ...] = (0.5,)
    width: float = 0.1
    momentum: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        if self.kind not in STATE_KINDS:
            raise ValueError(f"unknown state kind {self.kind!r}")
        object.__setattr__(self, "modes", tuple(int(m) for m in self.modes))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "momentum", tuple(float(k) for k in self.momentum))

    @staticmethod
    def _pick(values: tuple, j: int):
        return values[j] if j < len(values) else values[-1]

    def __call__(self, *x: np.ndarray) -> np.ndarray:
        axes = _as_axes(list(x))
        shape = np.broadcast_shapes(*(c.shape for c in axes))
        if self.kind == "zero" or self.amplitude == 0.0:
            return np.zeros(shape, dtype=complex)
        out = np.full(shape, complex(self.amplitude))
        if self.kind == "sine_mode":
            for j, c in enumerate(axes):
                out = out * np.sin(np.pi * self._pick(self.modes, j) * c)
            return out
        r2 = sum((c - self._pick(self.center, j)) ** 2 for j, c in enumerate(axes))
        phase = sum(self._pick(self.momentum, j) * c for j, c in enumerate(axes))
        out = out * np.exp(-r2 / (2.0 * self.width**2)) * np.exp(1j * phase)
        for c in axes:
            out = out * np.sin(np.pi * c)
        return out

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or self.amplitude == 0.0

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        for key in ("modes", "center", "momentum"):
            d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "StateDescriptor":
        data = dict(data)
        for key in ("modes", "center", "momentum"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)


@dataclass(frozen=True)
class SourceDescriptor:
    """Source term ``f(x, t) = g(x) * cos(omega t)`` with ``g`` a state descriptor."""

    spatial: StateDescriptor = field(default_factory=StateDescriptor)
    omega: float = 0.0

    def __call__(self, x: Sequence[np.ndarray], t: float) -> np.ndarray:
        return self.spatial(*_as_axes(x)) * np.cos(self.omega * t)

    @property
    def is_zero(self) -> bool:
        return self.spatial.is_zero

    def to_dict(self) -> dict[str, Any]:
        return {"spatial": self.spatial.to_dict(), "omega": self.omega}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SourceDescriptor":
        data = dict(data)
        spatial = StateDescriptor.from_dict(data.pop("spatial", {}))
        return cls(spatial=spatial, **data)
