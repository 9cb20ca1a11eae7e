"""Five-point stencil operators and the two-stage midpoint integrator.

One time step advances a state through a half step to t + tau/2 followed by
a full step that re-evaluates the spatial terms at the half level:

    theta_half = theta - (tau/2) F(theta)
    theta_next = theta -  tau    F(theta_half)

where F is the per-mode spatial flux

    F_n = c_n D1(theta_n) + sum_{m,k} g[m,k,n] theta_k D1(theta_m)
          + e_n D3(theta_n)

with D1 the centered first difference over 2h and D3 the five-point third
difference over 2h^3.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable

import numpy as np

from . import stability

if TYPE_CHECKING:
    from .diagnostics import DiagnosticSample
from .model import (
    Boundary,
    CoupledSystem,
    Grid,
    SchemeCoefficients,
    WaveState,
    effective_dispersion,
    validate_state,
)

__all__ = [
    "DivergenceError",
    "IntegrationResult",
    "SequencingError",
    "Simulation",
    "Snapshot",
    "central_d1",
    "central_d3",
    "full_step",
    "half_step",
    "integrate",
    "rhs",
]


class DivergenceError(RuntimeError):
    """The discrete solution left the finite range the monitor allows."""

    def __init__(self, message, mode=None, index=None, step=None):
        super().__init__(message)
        self.mode = mode
        self.index = index
        self.step = step


class SequencingError(ValueError):
    """Half and base states passed to the full step are out of order."""


def _value_at(values: np.ndarray, i: int, boundary: Boundary) -> float:
    n = values.shape[0]
    if boundary is Boundary.PERIODIC:
        return float(values[i % n])
    if 0 <= i < n:
        return float(values[i])
    return 0.0


def central_d1(values, i: int, h: float, boundary: Boundary = Boundary.PERIODIC) -> float:
    """(v[i+1] - v[i-1]) / 2h with the boundary policy applied."""
    values = np.asarray(values, dtype=float)
    if not 0 <= i < values.shape[0]:
        raise IndexError(f"index {i} outside the mesh of {values.shape[0]} points")
    return (_value_at(values, i + 1, boundary) - _value_at(values, i - 1, boundary)) / (2.0 * h)


def central_d3(values, i: int, h: float, boundary: Boundary = Boundary.PERIODIC) -> float:
    """(v[i+2] - 2 v[i+1] + 2 v[i-1] - v[i-2]) / 2h^3 with boundary policy."""
    values = np.asarray(values, dtype=float)
    if not 0 <= i < values.shape[0]:
        raise IndexError(f"index {i} outside the mesh of {values.shape[0]} points")
    return (
        _value_at(values, i + 2, boundary)
        - 2.0 * _value_at(values, i + 1, boundary)
        + 2.0 * _value_at(values, i - 1, boundary)
        - _value_at(values, i - 2, boundary)
    ) / (2.0 * h**3)


def _pad2(theta: np.ndarray, boundary: Boundary) -> np.ndarray:
    """Attach two ghost columns on each side, (N, P) -> (N, P+4)."""
    if boundary is Boundary.PERIODIC:
        return np.concatenate([theta[:, -2:], theta, theta[:, :2]], axis=1)
    zeros = np.zeros((theta.shape[0], 2))
    return np.concatenate([zeros, theta, zeros], axis=1)


def _d1_all(theta: np.ndarray, h: float, boundary: Boundary) -> np.ndarray:
    p = _pad2(theta, boundary)
    return (p[:, 3:-1] - p[:, 1:-3]) * (0.5 / h)


def _d3_all(theta: np.ndarray, h: float, boundary: Boundary) -> np.ndarray:
    p = _pad2(theta, boundary)
    return ((p[:, 4:] - p[:, :-4]) + 2.0 * (p[:, 1:-3] - p[:, 3:-1])) * (0.5 / h**3)


def _check_coeffs(coeffs: SchemeCoefficients, grid: Grid) -> None:
    if coeffs.h != grid.h:
        raise ValueError(
            f"scheme coefficients were derived for h={coeffs.h:g} "
            f"but the grid has h={grid.h:g}; recompute them"
        )


def rhs(
    system: CoupledSystem,
    coeffs: SchemeCoefficients,
    state: WaveState,
    grid: Grid,
) -> np.ndarray:
    """Spatial flux F of every mode at every point, shape (N, n_points)."""
    _check_coeffs(coeffs, grid)
    validate_state(state, system, grid)
    theta = state.theta
    n = system.n_modes

    # a diverging state can overflow mid-computation; the finiteness check
    # below is the real detector, so silence the transient warnings
    with np.errstate(over="ignore", invalid="ignore"):
        d1 = _d1_all(theta, grid.h, grid.boundary)
        d3 = _d3_all(theta, grid.h, grid.boundary)
        # nl[n] = sum_{m,k} g[m,k,n] theta_k d1_m, contracted as a matmul
        # over the flattened (m, k) axis.
        prod = d1[:, None, :] * theta[None, :, :]
        nl = system.g.reshape(n * n, n).T @ prod.reshape(n * n, -1)
        flux = nl + coeffs.e[:, None] * d3
        if system.c.any():
            flux += system.c[:, None] * d1

    if not np.isfinite(flux).all():
        bad_mode, bad_index = np.unravel_index(
            int(np.argmin(np.isfinite(flux))), flux.shape
        )
        raise DivergenceError(
            f"non-finite flux for mode {bad_mode} at point {bad_index} (t={state.t:g})",
            mode=int(bad_mode),
            index=int(bad_index),
        )
    return flux


def half_step(
    system: CoupledSystem,
    coeffs: SchemeCoefficients,
    state: WaveState,
    grid: Grid,
    dt: float | None = None,
) -> WaveState:
    """State at t + dt/2 from the flux at the current level; input untouched."""
    dt = grid.tau if dt is None else dt
    flux = rhs(system, coeffs, state, grid)
    return WaveState(t=state.t + 0.5 * dt, theta=state.theta - (0.5 * dt) * flux)


def full_step(
    system: CoupledSystem,
    coeffs: SchemeCoefficients,
    base: WaveState,
    half: WaveState,
    grid: Grid,
    dt: float | None = None,
) -> WaveState:
    """State at t + dt from the base level and the flux at the half level."""
    dt = grid.tau if dt is None else dt
    expected = base.t + 0.5 * dt
    if abs(half.t - expected) > 1e-9 * max(1.0, abs(expected)):
        raise SequencingError(
            f"half state is at t={half.t:g}, expected t={expected:g}"
        )
    flux = rhs(system, coeffs, half, grid)
    return WaveState(t=base.t + dt, theta=base.theta - dt * flux)


@dataclass
class Simulation:
    """Owns one time-marched state and steps it one tau at a time.

    Observers are called after every completed step on the stepping thread;
    a diverged simulation refuses further stepping.
    """

    system: CoupledSystem
    grid: Grid
    state: WaveState
    coeffs: SchemeCoefficients | None = None
    observers: list[Callable[["Simulation"], None]] = field(default_factory=list)
    steps: int = 0
    diverged: bool = False

    def __post_init__(self):
        if self.coeffs is None:
            self.coeffs = effective_dispersion(self.system, self.grid.h)
        validate_state(self.state, self.system, self.grid)
        self.initial_norm = float(
            np.sqrt((self.state.theta**2).sum() * self.grid.h)
        )

    def advance(self, dt: float | None = None, t_next: float | None = None) -> WaveState:
        """One half+full cycle; returns the new state at t + dt.

        ``t_next`` optionally pins the exact time stamp of the new state so
        long runs do not accumulate rounding in t.
        """
        if self.diverged:
            raise DivergenceError(
                f"simulation diverged at step {self.steps}; refusing further steps",
                step=self.steps,
            )
        dt = self.grid.tau if dt is None else dt
        base = self.state
        try:
            half = half_step(self.system, self.coeffs, base, self.grid, dt=dt)
            nxt = full_step(self.system, self.coeffs, base, half, self.grid, dt=dt)
        except DivergenceError as err:
            self.diverged = True
            err.step = self.steps
            raise
        if t_next is not None:
            nxt.t = t_next
        if stability.monitor(nxt, self.initial_norm, grid_h=self.grid.h) is stability.MonitorStatus.DIVERGED:
            self.diverged = True
            raise DivergenceError(
                f"solution norm left the allowed range at step {self.steps + 1} (t={nxt.t:g})",
                step=self.steps,
            )
        self.state = nxt
        self.steps += 1
        for observer in self.observers:
            observer(self)
        return self.state


@dataclass
class Snapshot:
    step: int
    t: float
    state: WaveState


@dataclass
class IntegrationResult:
    """Outcome of one scenario run.

    ``error_series`` holds (t, per-mode percent error) rows and is only
    present when the scenario has an analytic oracle.  After a divergence
    the final state is the last one the monitor accepted and the recorded
    series stop where the run did.
    """

    grid: Grid
    final_state: WaveState
    tau: float
    steps_planned: int
    steps_completed: int
    diverged: bool
    stability_report: stability.StabilityReport | None
    snapshots: list[Snapshot]
    diagnostics: list[tuple[int, DiagnosticSample]]
    error_series: list[tuple[float, np.ndarray]] | None
    initial_amplitude: float

    @property
    def max_percent_error(self) -> float | None:
        if not self.error_series:
            return None
        return float(max(err.max() for _, err in self.error_series))


def _cadence_steps(interval: float | None, every_steps: int | None,
                   tau: float, n_steps: int) -> set[int]:
    """Step indices matching a time- or step-based recording cadence."""
    marks = {0, n_steps}
    if every_steps is not None:
        marks.update(range(every_steps, n_steps + 1, every_steps))
    elif interval is not None and interval > 0:
        if interval <= tau:
            marks.update(range(1, n_steps + 1))
        else:
            k = 1
            while k * interval <= n_steps * tau * (1 + 1e-9):
                marks.add(min(n_steps, int(round(k * interval / tau))))
                k += 1
    return marks


def integrate(config, *, initial_state: WaveState | None = None) -> IntegrationResult:
    """Run a scenario for a duration t0 from its initial condition.

    The step count is ceil(t0 / tau) with the final step shortened to land
    on the end time exactly; a requested tau that fails the step-size gate
    refuses to start unless the config carries force_unstable.  Divergence
    stops the run and returns the last accepted state with whatever was
    recorded up to that point.
    """
    from .analytic import decay_integral, hs_one_soliton, sample_ic
    from .config import analytic_oracle
    from .diagnostics import percent_error, sample_diagnostics

    system = config.system
    coeffs = effective_dispersion(system, config.h)

    if initial_state is not None:
        state = initial_state.copy()
    else:
        sampling_grid = config.make_grid(tau=1.0)
        state = sample_ic(config.ic, sampling_grid, n_modes=system.n_modes)
    amplitude_all = float(np.abs(state.theta).max()) if state.theta.size else 0.0
    initial_amplitude = float(np.abs(state.theta[0]).max())

    t0 = config.t0
    if t0 > 0:
        tau = config.tau if config.tau is not None else stability.suggest_timestep(
            coeffs, config.h, t0, config.alpha,
            system=system, amplitude=amplitude_all,
        )
    else:
        tau = config.tau if config.tau is not None else 1.0
    grid = config.make_grid(tau)

    report = None
    if t0 > 0:
        report = stability.stability_report(
            system, coeffs, state, grid, tau, t0, config.alpha
        )
        if report.verdict is stability.Verdict.FAIL:
            if not config.force_unstable:
                raise stability.StabilityError(
                    f"tau={tau:g} is more than twice the suggested "
                    f"{report.tau_suggested:g}; pass force_unstable to run anyway"
                )
            warnings.warn(
                f"running with tau={tau:g} despite a failed step-size gate",
                stacklevel=2,
            )
        elif report.verdict is stability.Verdict.MARGINAL:
            warnings.warn(
                f"tau={tau:g} is within twice the suggested {report.tau_suggested:g}; "
                "expect degraded accuracy",
                stacklevel=2,
            )

    # Decaying-data sanity: flag initial data with noticeable mass near the
    # boundary, where the truncated domain stops being a good stand-in for
    # the infinite one.
    decay = decay_integral(state, grid)
    if decay.sum() > 0:
        edge = max(2, grid.n_points // 20)
        weight = (1.0 + np.abs(grid.x)) * np.abs(state.theta)
        tail = weight[:, :edge].sum() + weight[:, -edge:].sum()
        if tail / weight.sum() > 1e-3:
            warnings.warn(
                "initial data carries noticeable weight near the domain "
                "boundary; consider a wider domain",
                stacklevel=2,
            )

    oracle = analytic_oracle(config)
    sim = Simulation(system=system, grid=grid, state=state, coeffs=coeffs)

    t_start = state.t
    n_steps = 0 if t0 == 0 else int(np.ceil(t0 / tau - 1e-9))
    t_end = t_start + t0

    snap_steps = _cadence_steps(
        config.snapshot_every, config.snapshot_every_steps, tau, n_steps
    )
    diag_interval = config.diagnostics_every
    if diag_interval is None and t0 > 0:
        diag_interval = t0 / 20.0
    diag_steps = _cadence_steps(diag_interval, None, tau, n_steps) if t0 > 0 else {0}

    snapshots: list[Snapshot] = []
    diag_rows: list[tuple[int, DiagnosticSample]] = []
    errors: list[tuple[float, np.ndarray]] | None = [] if oracle is not None else None

    def record(step: int, current: WaveState) -> None:
        if step in snap_steps:
            snapshots.append(Snapshot(step=step, t=current.t, state=current.copy()))
            if errors is not None:
                exact = WaveState(
                    current.t,
                    np.stack(hs_one_soliton(grid.x, current.t, oracle)),
                )
                errors.append(
                    (current.t, percent_error(current, exact, initial_amplitude))
                )
        if step in diag_steps:
            diag_rows.append((step, sample_diagnostics(current, grid)))

    record(0, state)

    def observer(s: Simulation) -> None:
        record(s.steps, s.state)

    sim.observers.append(observer)

    diverged = False
    for i in range(n_steps):
        if i < n_steps - 1:
            dt = tau
            t_next = t_start + (i + 1) * tau
        else:
            dt = t_end - (t_start + (n_steps - 1) * tau)
            if abs(dt - tau) < 1e-9 * tau:
                dt = tau
            t_next = t_end
        try:
            sim.advance(dt, t_next=t_next)
        except DivergenceError:
            diverged = True
            break

    return IntegrationResult(
        grid=grid,
        final_state=sim.state,
        tau=tau,
        steps_planned=n_steps,
        steps_completed=sim.steps,
        diverged=diverged,
        stability_report=report,
        snapshots=snapshots,
        diagnostics=diag_rows,
        error_series=errors,
        initial_amplitude=initial_amplitude,
    )
