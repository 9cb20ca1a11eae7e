"""Time-step selection and runtime growth monitoring.

The explicit scheme is only conditionally stable: the step must shrink like
tau <= const * h^6.  The practical single-mode rule bounds the product
tau * (3 e / h^3)^2 * t0 by a tunable constant alpha, and the coupled-case
rule bounds max|e_n| * 81 tau^3 / (4 h^12) * t0 the same way.  Both products
are reported; the suggested step is the smaller of the two caps.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .model import Boundary, CoupledSystem, Grid, SchemeCoefficients, WaveState

__all__ = [
    "MonitorStatus",
    "StabilityError",
    "StabilityReport",
    "Verdict",
    "check_relation",
    "growth_exponent",
    "monitor",
    "stability_report",
    "suggest_timestep",
    "vector_norm",
]

DIVERGENCE_RATIO = 1e6
MARGINAL_BAND = 2.0


class Verdict(enum.Enum):
    PASS = "pass"
    MARGINAL = "marginal"
    FAIL = "fail"


class MonitorStatus(enum.Enum):
    OK = "ok"
    DIVERGED = "diverged"


class StabilityError(RuntimeError):
    """A failed step-size gate without an explicit override."""


@dataclass(frozen=True)
class StabilityReport:
    """Step-size audit for one run."""

    tau_suggested: float
    tau_requested: float
    growth_exponent_a: float
    growth_exponent_a_full: float
    rule_single: float
    rule_coupled: float
    verdict: Verdict

    def to_dict(self) -> dict:
        return {
            "tau_suggested": self.tau_suggested,
            "tau_requested": self.tau_requested,
            "growth_exponent_a": self.growth_exponent_a,
            "growth_exponent_a_full": self.growth_exponent_a_full,
            "rule_single": self.rule_single,
            "rule_coupled": self.rule_coupled,
            "verdict": self.verdict.value,
        }


def vector_norm(state: WaveState, grid_h: float) -> float:
    """Discrete L2 norm over all modes and points, sqrt(sum theta^2 h)."""
    with np.errstate(over="ignore"):
        return float(np.sqrt((state.theta**2).sum() * grid_h))


def _slope_bound(theta: np.ndarray, h: float, boundary: Boundary) -> np.ndarray:
    """Per-mode max of the centered slope |theta_{i+1} - theta_{i-1}| / 2h."""
    if boundary is Boundary.PERIODIC:
        diff = np.roll(theta, -1, axis=1) - np.roll(theta, 1, axis=1)
    else:
        padded = np.concatenate(
            [np.zeros((theta.shape[0], 1)), theta, np.zeros((theta.shape[0], 1))], axis=1
        )
        diff = padded[:, 2:] - padded[:, :-2]
    return np.abs(diff).max(axis=1) / (2.0 * h)


def growth_exponent(
    system: CoupledSystem,
    coeffs: SchemeCoefficients,
    state: WaveState,
    grid: Grid,
    tau: float,
    simplified: bool = True,
) -> float:
    """Per-step growth-rate bound, maximized over modes.

    The simplified form is a_n = 2 G_n S_n + tau (3 |e_n| / h^3)^2 where
    G_n = max|g[:, :, n]| and S_n is the largest centered slope over the
    modes entering mode n's nonlinear terms.  The full form keeps the
    amplitude and advection contributions inside the squared bracket.
    """
    h = grid.h
    slopes = _slope_bound(state.theta, h, grid.boundary)
    amps = np.abs(state.theta).max(axis=1)
    worst = 0.0
    for n in range(system.n_modes):
        gn = system.g[:, :, n]
        g_max = float(np.abs(gn).max())
        coupled_modes = sorted(
            set(np.nonzero(gn)[0]) | set(np.nonzero(gn)[1])
        )
        slope = float(slopes[coupled_modes].max()) if coupled_modes else 0.0
        amp = float(amps[coupled_modes].max()) if coupled_modes else 0.0
        dispersion = 3.0 * abs(float(coeffs.e[n])) / h**3
        if simplified:
            a_n = 2.0 * g_max * slope + tau * dispersion**2
        else:
            bracket = (
                2.0 * g_max * slope
                + g_max * amp / h
                + abs(float(system.c[n])) / h
                + dispersion
            )
            a_n = 2.0 * g_max * slope + tau * bracket**2
        worst = max(worst, a_n)
    return worst


def suggest_timestep(
    coeffs: SchemeCoefficients,
    h: float,
    t0: float,
    alpha: float = 1.0,
    *,
    system: CoupledSystem | None = None,
    amplitude: float = 0.0,
) -> float:
    """Largest tau keeping both step-size rule products at or below alpha.

    With every e_n zero the dispersion rules are vacuous and an advection
    bound tau = alpha h / max(|c_n| + G_n A) is used instead, with A the
    initial amplitude; that fallback needs ``system``.
    """
    if h <= 0 or t0 <= 0 or alpha <= 0:
        raise ValueError("h, t0 and alpha must all be positive")
    e_max = float(np.abs(coeffs.e).max())
    if e_max == 0.0:
        if system is None:
            raise ValueError(
                "all effective dispersions vanish; the advection fallback "
                "needs the system coefficients"
            )
        g_per_mode = np.abs(system.g).max(axis=(0, 1))
        speed = float((np.abs(system.c) + g_per_mode * abs(amplitude)).max())
        if speed == 0.0:
            raise ValueError("no dispersion and no advection; any tau works")
        return alpha * h / speed
    tau_single = alpha * h**6 / (9.0 * e_max**2 * t0)
    tau_coupled = (4.0 * alpha * h**12 / (81.0 * e_max * t0)) ** (1.0 / 3.0)
    return min(tau_single, tau_coupled)


def check_relation(
    tau: float,
    coeffs: SchemeCoefficients,
    h: float,
    t0: float,
    alpha: float = 1.0,
    *,
    system: CoupledSystem | None = None,
    amplitude: float = 0.0,
) -> Verdict:
    """Grade a requested tau against the suggested cap.

    At or below the cap passes; within twice the cap is marginal; beyond
    that fails and should block a run unless explicitly overridden.
    """
    cap = suggest_timestep(coeffs, h, t0, alpha, system=system, amplitude=amplitude)
    if tau <= cap * (1.0 + 1e-12):
        return Verdict.PASS
    if tau <= MARGINAL_BAND * cap:
        return Verdict.MARGINAL
    return Verdict.FAIL


def monitor(
    state: WaveState,
    initial_norm: float,
    *,
    grid_h: float = 1.0,
    ratio: float = DIVERGENCE_RATIO,
) -> MonitorStatus:
    """Flag a state whose norm exploded or that contains non-finite values.

    Runs started from a zero state fall back to an absolute norm threshold.
    """
    if not state.is_finite():
        return MonitorStatus.DIVERGED
    norm = vector_norm(state, grid_h)
    limit = ratio * initial_norm if initial_norm > 0 else ratio
    if norm > limit:
        return MonitorStatus.DIVERGED
    return MonitorStatus.OK


def rule_products(
    coeffs: SchemeCoefficients, tau: float, h: float, t0: float
) -> tuple[float, float]:
    """Dimensionless products of the single-mode and coupled step rules."""
    e_max = float(np.abs(coeffs.e).max())
    single = tau * (3.0 * e_max / h**3) ** 2 * t0
    coupled = e_max * 81.0 * tau**3 / (4.0 * h**12) * t0
    return single, coupled


def stability_report(
    system: CoupledSystem,
    coeffs: SchemeCoefficients,
    state: WaveState,
    grid: Grid,
    tau: float,
    t0: float,
    alpha: float = 1.0,
) -> StabilityReport:
    """Assemble the audit record for a run about to start."""
    amplitude = float(np.abs(state.theta).max()) if state.theta.size else 0.0
    suggested = suggest_timestep(
        coeffs, grid.h, t0, alpha, system=system, amplitude=amplitude
    )
    verdict = check_relation(
        tau, coeffs, grid.h, t0, alpha, system=system, amplitude=amplitude
    )
    single, coupled = rule_products(coeffs, tau, grid.h, t0)
    return StabilityReport(
        tau_suggested=suggested,
        tau_requested=tau,
        growth_exponent_a=growth_exponent(system, coeffs, state, grid, tau),
        growth_exponent_a_full=growth_exponent(
            system, coeffs, state, grid, tau, simplified=False
        ),
        rule_single=single,
        rule_coupled=coupled,
        verdict=verdict,
    )
