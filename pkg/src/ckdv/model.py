"""Coefficient bundles, grids, and wave states for coupled KdV systems.

A system of N coupled modes evolves as

    theta_n_t + c_n theta_n_x + sum_{m,k} g[m,k,n] theta_k theta_m_x
        + d_n theta_n_xxx = 0

where ``g[m, k, n]`` multiplies the undifferentiated factor theta_k and the
differentiated factor theta_m_x in the equation of mode n.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Boundary",
    "CoupledSystem",
    "Grid",
    "SchemeCoefficients",
    "WaveState",
    "effective_dispersion",
    "hs_integrable_system",
    "hs_nonintegrable_system",
    "single_kdv_system",
]


class Boundary(enum.Enum):
    """How the five-point stencil closes at the ends of the mesh."""

    PERIODIC = "periodic"
    ZERO_PADDED = "zero-padded"


def _frozen_array(values, shape, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CoupledSystem:
    """Constant coefficients of an N-mode coupled KdV system.

    ``c`` holds the linear velocities, ``d`` the physical dispersion
    constants, and ``g`` the nonlinear couplings indexed ``[m, k, n]``
    (0-based modes).  Arrays are copied and locked read-only.
    """

    c: np.ndarray
    d: np.ndarray
    g: np.ndarray
    label: str = ""

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        n = c.shape[0]
        if n < 1:
            raise ValueError("a system needs at least one mode")
        object.__setattr__(self, "c", _frozen_array(c, (n,), "c"))
        object.__setattr__(self, "d", _frozen_array(self.d, (n,), "d"))
        object.__setattr__(self, "g", _frozen_array(self.g, (n, n, n), "g"))

    @property
    def n_modes(self) -> int:
        return self.c.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoupledSystem):
            return NotImplemented
        return (
            np.array_equal(self.c, other.c)
            and np.array_equal(self.d, other.d)
            and np.array_equal(self.g, other.g)
            and self.label == other.label
        )

    def __hash__(self):
        return hash((self.c.tobytes(), self.d.tobytes(), self.g.tobytes(), self.label))


def hs_integrable_system() -> CoupledSystem:
    """The two-mode Hirota-Satsuma system (dispersion -0.25 and +0.5)."""
    g = np.zeros((2, 2, 2))
    g[0, 0, 0] = -1.5  # -1.5 theta1 theta1_x in mode 1
    g[1, 1, 0] = 3.0   # +3 theta2 theta2_x in mode 1
    g[1, 0, 1] = 1.5   # +1.5 theta1 theta2_x in mode 2
    return CoupledSystem(
        c=np.zeros(2), d=np.array([-0.25, 0.5]), g=g, label="hs-integrable"
    )


def hs_nonintegrable_system() -> CoupledSystem:
    """Hirota-Satsuma with the first dispersion constant moved to -0.2.

    The shift breaks integrability while leaving every other coefficient
    untouched.
    """
    base = hs_integrable_system()
    d = base.d.copy()
    d[0] = -0.2
    return CoupledSystem(c=base.c, d=d, g=base.g, label="hs-nonintegrable")


def single_kdv_system(
    c: float = 0.0, d: float = -0.25, g: float = -1.5, label: str = "kdv-single"
) -> CoupledSystem:
    """One-mode KdV; defaults isolate the first Hirota-Satsuma equation."""
    garr = np.zeros((1, 1, 1))
    garr[0, 0, 0] = g
    return CoupledSystem(c=np.array([c]), d=np.array([d]), g=garr, label=label)


@dataclass(frozen=True)
class Grid:
    """Uniform spatial mesh plus the time step and boundary policy."""

    x0: float
    h: float
    n_points: int
    tau: float
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("spatial step h must be positive")
        if self.tau <= 0:
            raise ValueError("time step tau must be positive")
        if self.n_points < 5:
            raise ValueError("the stencil reaches i+-2; need n_points >= 5")

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.n_points)

    @property
    def length(self) -> float:
        """Periodic wrap length of the mesh."""
        return self.n_points * self.h


@dataclass(eq=False)
class WaveState:
    """All mode amplitudes at one time level.

    ``theta`` has shape (n_modes, n_points).  A state is owned by a single
    simulation; share it read-only.  Any non-finite entry marks the state
    as diverged.
    """

    t: float
    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.atleast_2d(np.asarray(self.theta, dtype=float))

    @property
    def n_modes(self) -> int:
        return self.theta.shape[0]

    @property
    def n_points(self) -> int:
        return self.theta.shape[1]

    def copy(self) -> "WaveState":
        return WaveState(self.t, self.theta.copy())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.theta).all())


def validate_state(state: WaveState, system: CoupledSystem, grid: Grid) -> None:
    """Raise if the state shape disagrees with its system and grid."""
    expected = (system.n_modes, grid.n_points)
    if state.theta.shape != expected:
        raise ValueError(
            f"state shape {state.theta.shape} does not match {expected}"
        )


@dataclass(frozen=True)
class SchemeCoefficients:
    """Effective dispersion e_n = d_n - c_n h^2 / 6, tied to the h it used.

    The correction folds the truncation error of the centered first
    difference into the dispersion constant.  Values are only valid for the
    spatial step they were derived from; ``h`` is kept so a mismatch can be
    rejected instead of silently using stale coefficients.
    """

    e: np.ndarray
    h: float

    def __post_init__(self):
        e = np.atleast_1d(np.asarray(self.e, dtype=float))
        object.__setattr__(self, "e", _frozen_array(e, e.shape, "e"))


def effective_dispersion(system: CoupledSystem, h: float) -> SchemeCoefficients:
    """Derive the per-mode effective dispersion for spatial step h."""
    if h <= 0:
        raise ValueError("spatial step h must be positive")
    return SchemeCoefficients(e=system.d - system.c * h * h / 6.0, h=h)
