import cmath
import math

import numpy as np
import pytest

from qeraser.model import EraserParams, default_geometry

S2 = 1 / math.sqrt(2)


def random_params(rng, gamma=None, **fixed) -> EraserParams:
    """Uniformly random amplitudes/phases on the valid parameter manifold."""
    ta, th = rng.uniform(0, math.pi / 2, 2)
    pa, pb, ph, pv = rng.uniform(0, 2 * math.pi, 4)
    kw = dict(
        a=math.cos(ta) * cmath.exp(1j * pa),
        b=math.sin(ta) * cmath.exp(1j * pb),
        h=math.cos(th) * cmath.exp(1j * ph),
        v=math.sin(th) * cmath.exp(1j * pv),
        gamma=rng.uniform() if gamma is None else gamma,
    )
    kw.update(fixed)
    return EraserParams(**kw)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def bell():
    return EraserParams(S2, S2, 0.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def geometry():
    return default_geometry()


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(mod.VERDICTS):
        terminalreporter.write_line(line)
