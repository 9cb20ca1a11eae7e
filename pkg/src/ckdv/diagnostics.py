"""Norms, error metrics, conserved quantities, and refinement studies.

All integrals are the rectangle sums implied by the discrete norms,
sum(...) * h, so they agree exactly with the solver's own bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Grid, WaveState

__all__ = [
    "ConvergenceRow",
    "DiagnosticSample",
    "convergence_study",
    "count_solitons",
    "find_peaks",
    "hs_conserved",
    "l2_norm",
    "percent_error",
    "sample_diagnostics",
]


@dataclass(frozen=True)
class DiagnosticSample:
    """One row of the run log.

    ``conserved_hs`` is only filled in for two-mode runs, where the
    integral of 0.5 theta1^2 - theta2^2 is the quantity the integrable
    system preserves.
    """

    t: float
    l2_per_mode: tuple[float, ...]
    vector_norm: float
    conserved_hs: float | None
    max_amp_per_mode: tuple[float, ...]
    peak_count_mode1: int

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "l2_per_mode": list(self.l2_per_mode),
            "vector_norm": self.vector_norm,
            "conserved_hs": self.conserved_hs,
            "max_amp_per_mode": list(self.max_amp_per_mode),
            "peak_count_mode1": self.peak_count_mode1,
        }


@dataclass(frozen=True)
class ConvergenceRow:
    """One mesh of a refinement study; order estimates compare neighbours."""

    h: float
    tau: float
    error: float
    order_estimate: float | None = None
    diverged: bool = False


def l2_norm(state: WaveState, grid: Grid) -> tuple[np.ndarray, float]:
    """Per-mode discrete L2 norms and the combined vector norm."""
    per_mode = np.sqrt((state.theta**2).sum(axis=1) * grid.h)
    return per_mode, float(np.sqrt((per_mode**2).sum()))


def percent_error(
    numeric: WaveState, exact: WaveState, initial_amplitude: float
) -> np.ndarray:
    """Per-mode max pointwise gap as a percentage of the initial amplitude."""
    if initial_amplitude <= 0:
        raise ValueError("initial amplitude must be positive")
    if numeric.theta.shape != exact.theta.shape:
        raise ValueError("states live on different meshes")
    if abs(numeric.t - exact.t) > 1e-9 * max(1.0, abs(exact.t)):
        raise ValueError(f"states are at different times {numeric.t} and {exact.t}")
    gap = np.abs(exact.theta - numeric.theta).max(axis=1)
    return 100.0 * gap / initial_amplitude


def hs_conserved(state: WaveState, grid: Grid) -> float:
    """Rectangle sum of 0.5 theta1^2 - theta2^2 over the mesh."""
    if state.n_modes != 2:
        raise ValueError(f"conserved integral needs 2 modes, state has {state.n_modes}")
    return float((0.5 * state.theta[0] ** 2 - state.theta[1] ** 2).sum() * grid.h)


def find_peaks(
    state: WaveState,
    mode: int = 0,
    min_height_fraction: float = 0.1,
    min_separation: int = 5,
) -> np.ndarray:
    """Indices of well-separated local maxima of one mode.

    A candidate must rise strictly above its left neighbour and at least
    match its right neighbour (periodic wrap), and clear the height
    threshold relative to the global maximum.  Candidates closer than
    ``min_separation`` points to a taller accepted peak are dropped.
    """
    v = state.theta[mode]
    n = v.shape[0]
    gmax = float(v.max())
    if gmax <= 0.0:
        return np.array([], dtype=int)
    left = np.roll(v, 1)
    right = np.roll(v, -1)
    candidates = np.nonzero((v > left) & (v >= right) & (v >= min_height_fraction * gmax))[0]
    if candidates.size == 0:
        return candidates
    order = candidates[np.argsort(v[candidates])[::-1]]
    accepted: list[int] = []
    for idx in order:
        dist_ok = True
        for other in accepted:
            straight = abs(int(idx) - other)
            if min(straight, n - straight) < min_separation:
                dist_ok = False
                break
        if dist_ok:
            accepted.append(int(idx))
    return np.array(sorted(accepted), dtype=int)


def count_solitons(
    state: WaveState,
    mode: int = 0,
    min_height_fraction: float = 0.1,
    min_separation: int = 5,
) -> int:
    """Number of separated peaks of the selected mode."""
    return int(
        find_peaks(state, mode, min_height_fraction, min_separation).size
    )


def sample_diagnostics(state: WaveState, grid: Grid) -> DiagnosticSample:
    """Snapshot the standard per-step observables."""
    per_mode, vec = l2_norm(state, grid)
    conserved = hs_conserved(state, grid) if state.n_modes == 2 else None
    return DiagnosticSample(
        t=state.t,
        l2_per_mode=tuple(float(v) for v in per_mode),
        vector_norm=vec,
        conserved_hs=conserved,
        max_amp_per_mode=tuple(float(v) for v in np.abs(state.theta).max(axis=1)),
        peak_count_mode1=count_solitons(state, mode=0),
    )


def convergence_study(config, h_list, t0: float | None = None, keep_results: bool = False):
    """Re-run a scenario on successively finer meshes against its oracle.

    Each mesh gets the rule-chosen step for its h (tau proportional to h^6,
    so the time-stepping contribution to the error is negligible), and the
    reported error is the largest percent error over the recorded times.
    Diverged meshes are kept in the table but excluded from order
    estimates.  With ``keep_results`` the per-mesh integration results are
    returned alongside the table, keyed by h.
    """
    from .config import analytic_oracle
    from .scheme import integrate

    h_list = list(h_list)
    if any(b <= a for a, b in zip(h_list[1:], h_list)):
        raise ValueError("h_list must be strictly decreasing")
    if analytic_oracle(config) is None:
        raise ValueError("the scenario has no analytic oracle to compare against")

    rows: list[ConvergenceRow] = []
    results: dict[float, object] = {}
    prev: ConvergenceRow | None = None
    for h in h_list:
        run_cfg = config.replace(h=h, tau=None, t0=t0 if t0 is not None else config.t0)
        result = integrate(run_cfg)
        results[h] = result
        if result.diverged or not result.error_series:
            row = ConvergenceRow(h=h, tau=result.tau, error=float("nan"), diverged=True)
        else:
            error = max(err.max() for _, err in result.error_series)
            order = None
            if prev is not None and not prev.diverged and error > 0:
                order = float(np.log(prev.error / error) / np.log(prev.h / h))
            row = ConvergenceRow(h=h, tau=result.tau, error=float(error), order_estimate=order)
            prev = row
        rows.append(row)
    if keep_results:
        return rows, results
    return rows
