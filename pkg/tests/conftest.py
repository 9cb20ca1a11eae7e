from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ckdv import scenario_presets
from ckdv.diagnostics import convergence_study

settings.register_profile(
    "ckdv",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ckdv")


@pytest.fixture(scope="session")
def a2_refinement():
    """Shared refinement study of the amplitude-2 scenario.

    This is the expensive fixture (the h=0.1 row alone integrates a couple
    of million steps); the accuracy, order, and conservation criteria all
    read from it.
    """
    config = scenario_presets()["hs-soliton-A2"].replace(diagnostics_every=0.05)
    rows, results = convergence_study(config, [0.4, 0.2, 0.1], keep_results=True)
    return rows, results


@pytest.fixture(scope="session")
def a34_run():
    """Amplitude-3.4 scenario on the default mesh."""
    from ckdv import integrate

    config = scenario_presets()["hs-soliton-A34"].replace(diagnostics_every=0.05)
    return integrate(config)


@pytest.fixture(scope="session")
def multisoliton_run():
    from ckdv import integrate

    return integrate(scenario_presets()["hs-multisoliton"])


@pytest.fixture(scope="session")
def nonintegrable_run():
    from ckdv import integrate

    config = scenario_presets()["hs-nonintegrable"].replace(snapshot_every=0.05)
    return integrate(config)


def drift_series(result) -> np.ndarray:
    """Relative drift of the conserved integral over the recorded samples."""
    values = [s.conserved_hs for _, s in result.diagnostics]
    base = values[0]
    return np.array([abs(v - base) / abs(base) for v in values])
