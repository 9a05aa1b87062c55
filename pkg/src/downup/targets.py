"""Target distributions and evaluation accounting.

Every sampler in this package works against an unnormalized log-density
wrapped in a :class:`LogTarget`.  All density arithmetic is done in log
space; a density of exactly zero is represented as ``-inf``, never NaN.
Evaluations are counted through :func:`eval_log_density` so that the
per-iteration evaluation budget of each kernel can be reported exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

import numpy as np

# Phase tags for evaluation accounting.  Forced-transition kernels charge
# their proposals to the first three; everything else goes to "other".
PHASES = ("downhill", "uphill", "aux_downhill", "other")


@dataclass
class EvalCounter:
    """Exact count of target-density evaluations, split by phase."""

    total: int = 0
    per_phase: dict = field(default_factory=lambda: {p: 0 for p in PHASES})

    def add(self, phase: str) -> None:
        self.total += 1
        self.per_phase[phase] += 1

    @classmethod
    def merged(cls, counters) -> "EvalCounter":
        """Sum several counters into a fresh one."""
        out = cls()
        for c in counters:
            out.total += c.total
            for p, n in c.per_phase.items():
                out.per_phase[p] += n
        return out


@dataclass(frozen=True)
class LogTarget:
    """An evaluable unnormalized log-density on R^dim.

    Attributes:
        dim: State dimension.
        log_density: Maps a length-``dim`` vector to log density
            (``-inf`` allowed, NaN never).
    """

    dim: int
    log_density: Callable[[np.ndarray], float]


def eval_log_density(target: LogTarget, x, counter: EvalCounter,
                     phase: str = "other") -> float:
    """Evaluate ``target`` at ``x`` and charge one evaluation to ``phase``.

    Raises:
        ValueError: On dimension mismatch or if the target returns NaN.
    """
    if len(x) != target.dim:
        raise ValueError(f"point has dimension {len(x)}, target expects {target.dim}")
    value = float(target.log_density(x))
    if math.isnan(value):
        raise ValueError("target returned NaN; zero density must be -inf")
    counter.add(phase)
    return value


# ---------------------------------------------------------------------------
# Gaussian mixtures
# ---------------------------------------------------------------------------

class GaussianMixtureTarget:
    """Mixture of isotropic Gaussians, log-density up to a constant.

    The unnormalized density is

        sum_j (w_j / var_j) * exp(-||x - mu_j||^2 / (2 var_j)),

    i.e. component j has probability mass proportional to ``w_j`` and
    isotropic variance ``var_j``.

    Attributes:
        means: Component centers, shape ``(m, d)``.
        variances: Per-component isotropic variances, shape ``(m,)``.
        weights: Positive mixture weights, shape ``(m,)``.
    """

    def __init__(self, means, variances, weights):
        self.means = np.atleast_2d(np.asarray(means, dtype=float))
        self.variances = np.asarray(variances, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        if not (len(self.means) == len(self.variances) == len(self.weights)):
            raise ValueError("means, variances, weights must have equal length")
        if np.any(self.variances <= 0.0):
            raise ValueError("all variances must be positive")
        if np.any(self.weights <= 0.0):
            raise ValueError("all weights must be positive")
        self.dim = self.means.shape[1]
        self._log_prefactor = np.log(self.weights) - np.log(self.variances)
        self._inv_two_var = 0.5 / self.variances

    def log_density(self, x) -> float:
        diff = self.means - np.asarray(x, dtype=float)
        ssq = np.einsum("ij,ij->i", diff, diff)
        c = self._log_prefactor - ssq * self._inv_two_var
        high = c.max()
        if high == -np.inf:
            return -np.inf
        return float(high + np.log(np.exp(c - high).sum()))

    def as_log_target(self) -> LogTarget:
        return LogTarget(self.dim, self.log_density)

    def axis_moments(self):
        """Exact first and raw second moments per coordinate.

        Component masses are proportional to the weights; each component
        contributes ``mu^2 + var`` to the raw second moment.

        Returns:
            Tuple ``(mean, raw_second_moment)`` of shape-``(d,)`` arrays.
        """
        mass = self.weights / self.weights.sum()
        mean = mass @ self.means
        second = mass @ (self.means ** 2 + self.variances[:, None])
        return mean, second


# --- the 20-mode bivariate benchmark ---------------------------------------

# Reference axis moments used to validate the shipped mode file.  Case (a)
# checks all four of (E[x1], E[x2], E[x1^2], E[x2^2]); case (b) checks the
# first moments only, because the published second-moment references assume
# a different component-scale convention than the case-(b) density actually
# sampled (see twenty_mode_mixture).
MIXTURE20_REFERENCE_MOMENTS = {
    "a": (4.478, 4.905, 25.605, 33.920),
    "b": (4.688, 5.030),
}
MIXTURE20_MOMENT_TOL = 5e-3


def load_mode_table(path=None) -> np.ndarray:
    """Read the 20 bivariate mode locations, one "x1 x2" pair per line."""
    if path is None:
        text = resources.files("downup").joinpath("data/mixture20_modes.txt").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    rows = [line.split() for line in text.strip().splitlines()]
    table = np.array(rows, dtype=float)
    if table.shape != (20, 2):
        raise ValueError(f"mode table must be 20 x 2, got {table.shape}")
    return table


def twenty_mode_mixture(case: str, path=None) -> GaussianMixtureTarget:
    """Build the 20-mode bivariate benchmark, validated against reference moments.

    Case "a" uses equal weights 1/20 and equal variances 1/100.  Case "b"
    weights mode j by 1/||mu_j - (5,5)|| with component variance
    ||mu_j - (5,5)|| / 20, so modes near (5, 5) are heavier and tighter.

    Raises:
        ValueError: If the mode table fails the moment validation, which
            would indicate a transcribed-data error.
    """
    modes = load_mode_table(path)
    if case == "a":
        target = GaussianMixtureTarget(modes, np.full(20, 0.01), np.full(20, 0.05))
    elif case == "b":
        dist = np.linalg.norm(modes - np.array([5.0, 5.0]), axis=1)
        target = GaussianMixtureTarget(modes, dist / 20.0, 1.0 / dist)
    else:
        raise ValueError(f"case must be 'a' or 'b', got {case!r}")

    mean, second = target.axis_moments()
    got = (mean[0], mean[1], second[0], second[1])
    ref = MIXTURE20_REFERENCE_MOMENTS[case]
    for g, r in zip(got, ref):
        if abs(g - r) > MIXTURE20_MOMENT_TOL:
            raise ValueError(
                f"mode table failed case-{case} moment validation: "
                f"got {tuple(round(v, 4) for v in got)}, expected {ref}"
            )
    return target


# --- the 8-mode cube benchmark ----------------------------------------------

def cube_mode_locations(d: int) -> np.ndarray:
    """Mode centers for the 8-mode benchmark in dimension ``d >= 3``.

    The first three coordinates run over the vertices of a cube of edge 10
    with one corner at the origin; any remaining coordinates alternate
    10, 0, 10, ... continuing from the third coordinate.
    """
    if d < 3:
        raise ValueError("cube mixture requires d >= 3")
    vertices = np.array([
        [10, 10, 10],
        [0, 0, 0],
        [10, 0, 10],
        [0, 10, 10],
        [0, 0, 10],
        [0, 10, 0],
        [10, 0, 0],
        [10, 10, 0],
    ], dtype=float)
    modes = np.zeros((8, d))
    modes[:, :3] = vertices
    for k in range(3, d):
        modes[:, k] = 10.0 - modes[:, k - 1]
    return modes


def cube_mixture(d: int) -> GaussianMixtureTarget:
    """Equal mixture of eight unit-variance d-dimensional Gaussians."""
    modes = cube_mode_locations(d)
    return GaussianMixtureTarget(modes, np.ones(8), np.ones(8))


# Indices of the two modes treated as known a priori in the cube benchmark.
CUBE_KNOWN_MODES = (0, 1)


# ---------------------------------------------------------------------------
# Sensor network localization
# ---------------------------------------------------------------------------

OBS_SD = 0.02
DETECT_SCALE = 0.3
PRIOR_SD = 10.0

# Six stationary sensor locations; the first four are the unknowns.
TRUE_SENSOR_LOCATIONS = np.array([
    [0.57, 0.91],
    [0.10, 0.37],
    [0.26, 0.14],
    [0.85, 0.04],
    [0.50, 0.30],
    [0.30, 0.70],
])

_PAIR_I, _PAIR_J = np.triu_indices(6, k=1)


def detection_probability(distance: float) -> float:
    """Probability that the distance between two sensors is observed."""
    return math.exp(-distance ** 2 / (2.0 * DETECT_SCALE ** 2))


@dataclass
class SensorNetworkTarget:
    """Posterior over four unknown 2-d sensor locations.

    Pairwise distances between six sensors are observed at random, with
    detection probability decaying in distance and Gaussian measurement
    error when detected.  The last two sensor locations are known.

    Attributes:
        known_locations: Locations of sensors 5 and 6, shape ``(2, 2)``.
        observed: Symmetric 0/1 detection indicators, shape ``(6, 6)``.
        distances: Observed distances where ``observed`` is 1, shape ``(6, 6)``.
    """

    known_locations: np.ndarray
    observed: np.ndarray
    distances: np.ndarray
    obs_sd: float = OBS_SD
    detect_scale: float = DETECT_SCALE
    prior_sd: float = PRIOR_SD

    def __post_init__(self):
        self.known_locations = np.asarray(self.known_locations, dtype=float)
        self.observed = np.asarray(self.observed)
        self.distances = np.asarray(self.distances, dtype=float)
        if not np.array_equal(self.observed, self.observed.T):
            raise ValueError("detection indicators must be symmetric")
        if not np.allclose(self.distances, self.distances.T):
            raise ValueError("observed distances must be symmetric")
        self._w_pairs = self.observed[_PAIR_I, _PAIR_J].astype(bool)
        self._y_pairs = self.distances[_PAIR_I, _PAIR_J]
        self.dim = 8

    def log_density(self, x) -> float:
        """Log-posterior of the four unknown locations, flattened to length 8.

        Never returns NaN: coincident sensors on an unobserved pair give
        ``-inf`` (a zero-probability configuration).
        """
        locs = np.vstack([np.asarray(x, dtype=float).reshape(4, 2),
                          self.known_locations])
        diff = locs[_PAIR_I] - locs[_PAIR_J]
        dsq = np.einsum("ij,ij->i", diff, diff)
        half_scaled = dsq / (2.0 * self.detect_scale ** 2)

        w = self._w_pairs
        total = 0.0
        if w.any():
            resid = self._y_pairs[w] - np.sqrt(dsq[w])
            total += float(-(resid ** 2).sum() / (2.0 * self.obs_sd ** 2)
                           - half_scaled[w].sum())
        miss = ~w
        if miss.any():
            t = half_scaled[miss]
            if np.any(t == 0.0):
                return -np.inf
            total += float(np.log(-np.expm1(-t)).sum())

        prior = -float(np.dot(x, x)) / (2.0 * self.prior_sd ** 2)
        return total + prior

    def log_posterior(self, x1, x2, x3, x4) -> float:
        """Convenience wrapper taking the four unknown locations separately."""
        return self.log_density(np.concatenate([x1, x2, x3, x4]))

    def as_log_target(self) -> LogTarget:
        return LogTarget(self.dim, self.log_density)


def simulate_sensor_data(true_locations, seed) -> SensorNetworkTarget:
    """Draw a synthetic detection/distance dataset at fixed sensor locations.

    For each pair (in a fixed row-major order, so the draw is reproducible
    under a fixed seed) the detection indicator is Bernoulli with probability
    ``exp(-dist^2 / (2 * 0.3^2))`` and, when detected, the recorded distance
    is the true distance plus N(0, 0.02^2) noise.
    """
    locs = np.asarray(true_locations, dtype=float)
    if locs.shape != (6, 2):
        raise ValueError("expected six 2-d sensor locations")
    rng = np.random.default_rng(seed)
    w = np.zeros((6, 6), dtype=int)
    y = np.zeros((6, 6))
    for i, j in zip(_PAIR_I, _PAIR_J):
        dist = float(np.linalg.norm(locs[i] - locs[j]))
        if rng.random() < detection_probability(dist):
            w[i, j] = w[j, i] = 1
            obs = dist + OBS_SD * rng.standard_normal()
            y[i, j] = y[j, i] = obs
    return SensorNetworkTarget(locs[4:], w, y)
