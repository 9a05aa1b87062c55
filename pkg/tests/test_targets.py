"""Targets: mixture densities, the sensor posterior, and eval accounting."""

import math

import numpy as np
import pytest

from downup.targets import (
    EvalCounter,
    GaussianMixtureTarget,
    LogTarget,
    SensorNetworkTarget,
    TRUE_SENSOR_LOCATIONS,
    cube_mixture,
    cube_mode_locations,
    detection_probability,
    eval_log_density,
    load_mode_table,
    simulate_sensor_data,
    twenty_mode_mixture,
)


def naive_mixture_log_density(target, x):
    """Direct linear-space summation; underflows where log-sum-exp does not."""
    total = 0.0
    for mu, var, w in zip(target.means, target.variances, target.weights):
        total += w / var * math.exp(-((x - mu) ** 2).sum() / (2 * var))
    return math.log(total)


class TestEvalCounter:
    def test_one_call_one_increment(self):
        target = LogTarget(2, lambda x: -0.5 * float(x @ x))
        counter = EvalCounter()
        value = eval_log_density(target, np.zeros(2), counter, "downhill")
        assert value == 0.0
        assert counter.total == 1
        assert counter.per_phase["downhill"] == 1

    def test_total_matches_instrumented_double(self, rng):
        calls = []

        def instrumented(x):
            calls.append(1)
            return -0.5 * float(x @ x)

        target = LogTarget(3, instrumented)
        counter = EvalCounter()
        for _ in range(257):
            eval_log_density(target, rng.standard_normal(3), counter, "other")
        assert counter.total == len(calls) == 257
        assert counter.total == sum(counter.per_phase.values())

    def test_dimension_mismatch_is_hard_error(self):
        target = LogTarget(2, lambda x: 0.0)
        with pytest.raises(ValueError):
            eval_log_density(target, np.zeros(3), EvalCounter())

    def test_nan_is_rejected(self):
        target = LogTarget(1, lambda x: float("nan"))
        with pytest.raises(ValueError):
            eval_log_density(target, np.zeros(1), EvalCounter())

    def test_merged(self):
        a, b = EvalCounter(), EvalCounter()
        a.add("downhill")
        b.add("uphill")
        b.add("other")
        merged = EvalCounter.merged([a, b])
        assert merged.total == 3
        assert merged.per_phase["uphill"] == 1


class TestGaussianMixture:
    def test_single_component_standard_normal(self):
        t = GaussianMixtureTarget([[0.0, 0.0]], [1.0], [1.0])
        assert t.log_density(np.array([3.0, 4.0])) == pytest.approx(-12.5, abs=1e-12)

    def test_two_component_exhaustive(self):
        t = GaussianMixtureTarget([[0, 0], [10, 10]], [1.0, 1.0], [0.5, 0.5])
        expected = math.log(0.5 * (1 + math.exp(-100))) + math.log(1.0)
        assert t.log_density(np.zeros(2)) == pytest.approx(expected, abs=1e-12)

    def test_logsumexp_matches_naive_sum(self, rng):
        for _ in range(50):
            m = rng.integers(1, 6)
            t = GaussianMixtureTarget(
                rng.normal(size=(m, 2)),
                rng.uniform(0.5, 2.0, size=m),
                rng.uniform(0.2, 1.0, size=m),
            )
            x = rng.normal(size=2)
            assert t.log_density(x) == pytest.approx(
                naive_mixture_log_density(t, x), rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            GaussianMixtureTarget([[0, 0]], [1.0, 2.0], [1.0])
        with pytest.raises(ValueError):
            GaussianMixtureTarget([[0, 0]], [-1.0], [1.0])
        with pytest.raises(ValueError):
            GaussianMixtureTarget([[0, 0]], [1.0], [0.0])


class TestTwentyModeBenchmark:
    def test_mode_table_shape(self):
        assert load_mode_table().shape == (20, 2)

    def test_case_a_value_at_first_mode_beats_midpoint(self):
        t = twenty_mode_mixture("a")
        modes = load_mode_table()
        midpoint = (modes[0] + modes[1]) / 2.0
        assert t.log_density(modes[0]) > t.log_density(midpoint)

    def test_case_a_mean_by_quadrature(self):
        # Independent check of the shipped mode data: quadrature over a
        # fine grid must recover the reference first moment 4.478.
        t = twenty_mode_mixture("a")
        xs = np.arange(-1.0, 11.0, 0.02)
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        pts = np.column_stack([X.ravel(), Y.ravel()])
        logp = np.array([t.log_density(p) for p in pts])
        w = np.exp(logp - logp.max())
        mean_x1 = float((w * pts[:, 0]).sum() / w.sum())
        assert mean_x1 == pytest.approx(4.478, abs=2e-3)

    def test_case_b_first_moments_validate(self):
        t = twenty_mode_mixture("b")
        mean, _ = t.axis_moments()
        assert mean[0] == pytest.approx(4.688, abs=5e-3)
        assert mean[1] == pytest.approx(5.030, abs=5e-3)

    def test_case_b_weights_favor_center(self):
        t = twenty_mode_mixture("b")
        modes = load_mode_table()
        dist = np.linalg.norm(modes - np.array([5.0, 5.0]), axis=1)
        nearest = int(np.argmin(dist))
        assert t.weights[nearest] == t.weights.max()
        assert t.variances[nearest] == t.variances.min()
        np.testing.assert_allclose(t.variances, dist / 20.0)

    def test_corrupted_table_fails_validation(self, tmp_path):
        table = load_mode_table()
        table[3, 0] += 0.5
        bad = tmp_path / "modes.txt"
        bad.write_text("\n".join(f"{a} {b}" for a, b in table) + "\n")
        with pytest.raises(ValueError, match="moment validation"):
            twenty_mode_mixture("a", path=bad)


class TestCubeMixture:
    def test_first_three_coordinates_are_cube_vertices(self):
        modes = cube_mode_locations(3)
        expected = {(10, 10, 10), (0, 0, 0), (10, 0, 10), (0, 10, 10),
                    (0, 0, 10), (0, 10, 0), (10, 0, 0), (10, 10, 0)}
        assert {tuple(m) for m in modes} == expected

    def test_extension_alternates(self):
        modes = cube_mode_locations(7)
        for row in modes:
            for k in range(3, 7):
                assert row[k] == 10.0 - row[k - 1]

    def test_log_density_identical_at_every_mode(self):
        for d in (3, 5, 11):
            t = cube_mixture(d)
            values = [t.log_density(m) for m in t.means]
            assert max(values) - min(values) < 1e-12

    def test_rejects_low_dimension(self):
        with pytest.raises(ValueError):
            cube_mode_locations(2)


class TestSensorNetwork:
    def make_target(self, seed=3):
        return simulate_sensor_data(TRUE_SENSOR_LOCATIONS, seed)

    def test_detection_probability_values(self):
        assert detection_probability(0.0) == 1.0
        assert detection_probability(0.3) == pytest.approx(math.exp(-0.5), abs=1e-15)

    def test_simulation_deterministic_under_seed(self):
        a = self.make_target(11)
        b = self.make_target(11)
        assert np.array_equal(a.observed, b.observed)
        assert np.array_equal(a.distances, b.distances)

    def test_coincident_unobserved_pair_gives_neg_inf(self):
        w = np.zeros((6, 6), dtype=int)
        t = SensorNetworkTarget(TRUE_SENSOR_LOCATIONS[4:], w, np.zeros((6, 6)))
        x = np.zeros(8)  # all four unknowns coincide at the prior mean
        assert t.log_density(x) == -np.inf

    def test_exact_distance_contributes_zero_residual(self):
        w = np.zeros((6, 6), dtype=int)
        w[0, 1] = w[1, 0] = 1
        x = np.array([0.0, 0.0, 1.0, 0.3, 0.2, 0.9, 0.8, 0.1])
        dist = float(np.linalg.norm(x[0:2] - x[2:4]))
        y = np.zeros((6, 6))
        y[0, 1] = y[1, 0] = dist
        t = SensorNetworkTarget(TRUE_SENSOR_LOCATIONS[4:], w, y)
        base = t.log_density(x)
        y2 = y.copy()
        delta = 0.02
        y2[0, 1] = y2[1, 0] = dist + delta
        t2 = SensorNetworkTarget(TRUE_SENSOR_LOCATIONS[4:], w, y2)
        # Moving y off the exact distance by one noise SD costs exactly 1/2.
        assert base - t2.log_density(x) == pytest.approx(0.5, abs=1e-12)

    def test_posterior_peaks_near_truth(self):
        t = self.make_target()
        truth = TRUE_SENSOR_LOCATIONS[:4].ravel()
        at_truth = t.log_density(truth)
        assert np.isfinite(at_truth)
        assert at_truth > t.log_density(truth + 5.0)

    def test_never_nan(self, rng):
        t = self.make_target()
        for _ in range(200):
            x = rng.uniform(-3, 3, size=8)
            assert not math.isnan(t.log_density(x))
        # coincident points on purpose
        x = np.tile(rng.uniform(size=2), 4)
        assert not math.isnan(t.log_density(x))

    def test_symmetry_validation(self):
        w = np.zeros((6, 6), dtype=int)
        w[0, 1] = 1  # not symmetric
        with pytest.raises(ValueError):
            SensorNetworkTarget(TRUE_SENSOR_LOCATIONS[4:], w, np.zeros((6, 6)))
