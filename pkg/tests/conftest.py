"""Shared test helpers: scripted generators and discrete-space adapters."""

import numpy as np
import pytest

from downup.targets import LogTarget


class ScriptedRng:
    """Generator double that replays queued uniforms and normal vectors.

    Kernels consume randomness through ``random()`` and
    ``standard_normal(n)`` only, so scripting those two methods is enough
    to force any path.
    """

    def __init__(self, uniforms=(), normals=()):
        self.uniforms = list(uniforms)
        self.normals = [np.asarray(v, dtype=float) for v in normals]

    def random(self):
        if not self.uniforms:
            raise AssertionError("scripted rng ran out of uniforms")
        return self.uniforms.pop(0)

    def standard_normal(self, n=None):
        if not self.normals:
            raise AssertionError("scripted rng ran out of normal vectors")
        out = self.normals.pop(0)
        if n is not None and len(out) != n:
            raise AssertionError(f"scripted normal has length {len(out)}, wanted {n}")
        return out


class DiscreteProposal:
    """Symmetric proposal over integer-labeled states embedded in R^1.

    Rows of ``q`` give the proposal distribution from each state.  Points
    are cached single-element arrays, so draws allocate nothing.
    """

    def __init__(self, q):
        self.q = np.asarray(q, dtype=float)
        if not np.allclose(self.q, self.q.T):
            raise ValueError("q must be symmetric")
        self._cum = np.cumsum(self.q, axis=1)
        self.points = [np.array([float(i)]) for i in range(len(self.q))]
        self.dim = 1

    def draw(self, center, rng):
        row = self._cum[int(center[0])]
        u = rng.random()
        return self.points[int(np.searchsorted(row, u, side="right"))]


def discrete_target(pi) -> LogTarget:
    """LogTarget over states 0..n-1 embedded as 1-d points."""
    pi = np.asarray(pi, dtype=float)
    with np.errstate(divide="ignore"):
        log_pi = np.log(pi)
    table = log_pi.tolist()

    def log_density(x):
        return table[int(x[0])]

    return LogTarget(1, log_density)


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
