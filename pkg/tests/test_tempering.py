"""Parallel tempering and tempered transitions kernels."""

import numpy as np
import pytest

from downup.proposals import GaussianProposal
from downup.targets import EvalCounter, LogTarget
from downup.tempering import (
    PtEnsemble,
    TemperatureLadder,
    pt_step,
    tempered_transition_step,
)

from conftest import ScriptedRng

STD_NORMAL = LogTarget(1, lambda x: -0.5 * float(x @ x))


def make_ladder(temps, sigma=1.0, dim=1):
    prop = GaussianProposal.isotropic(dim, sigma)
    return TemperatureLadder(tuple(temps), tuple(prop for _ in temps))


class TestTemperatureLadder:
    def test_must_start_at_one(self):
        with pytest.raises(ValueError, match="start at 1"):
            make_ladder([2.0, 4.0])

    def test_must_increase(self):
        with pytest.raises(ValueError, match="increasing"):
            make_ladder([1.0, 4.0, 2.0])

    def test_proposal_count(self):
        prop = GaussianProposal.isotropic(1, 1.0)
        with pytest.raises(ValueError, match="one proposal per rung"):
            TemperatureLadder((1.0, 2.0), (prop,))


class TestPtStep:
    def test_swap_between_identical_states_always_accepted(self):
        ladder = make_ladder([1.0, 2.0])
        target = STD_NORMAL
        ens = PtEnsemble.initialize(np.array([0.7]), ladder, target)
        rng = ScriptedRng(
            uniforms=[0.999, 0.999,       # reject both rung moves
                      0.0,                # pick pair (0, 1)
                      1.0 - 1e-16],       # swap must still be accepted
            normals=[[8.0], [8.0]],       # far proposals, surely rejected
        )
        ens, _ = pt_step(ens, ladder, target, rng)
        np.testing.assert_array_equal(ens.states[0], [0.7])
        np.testing.assert_array_equal(ens.states[1], [0.7])

    def test_seven_evals_per_iteration_for_five_rungs(self, rng):
        ladder = make_ladder([1.0, 2.0, 4.0, 8.0, 16.0], sigma=2.0)
        ens = PtEnsemble.initialize(np.zeros(1), ladder, STD_NORMAL)
        init_total = sum(c.total for c in ens.counters)
        assert init_total == 5
        n = 200
        for _ in range(n):
            ens, _ = pt_step(ens, ladder, STD_NORMAL, rng)
        assert sum(c.total for c in ens.counters) - init_total == 7 * n

    def test_cached_tempered_values_stay_consistent(self, rng):
        ladder = make_ladder([1.0, 4.0], sigma=2.0)
        ens = PtEnsemble.initialize(np.array([0.5]), ladder, STD_NORMAL)
        for _ in range(100):
            ens, _ = pt_step(ens, ladder, STD_NORMAL, rng)
        for j, t in enumerate(ladder.temps):
            expected = STD_NORMAL.log_density(ens.states[j]) / t
            assert ens.tempered_logp[j] == pytest.approx(expected, rel=1e-12)

    def test_product_measure_sampled(self, rng):
        # Cold and hot marginal variances on a Gaussian target: T and 4T.
        ladder = make_ladder([1.0, 4.0], sigma=2.5)
        ens = PtEnsemble.initialize(np.zeros(1), ladder, STD_NORMAL)
        cold, hot = [], []
        for _ in range(20000):
            ens, _ = pt_step(ens, ladder, STD_NORMAL, rng)
            cold.append(ens.states[0][0])
            hot.append(ens.states[1][0])
        assert np.var(cold) == pytest.approx(1.0, abs=0.15)
        assert np.var(hot) == pytest.approx(4.0, abs=0.6)


class TestTemperedTransitionStep:
    def test_identity_path_acceptance_is_exactly_one(self):
        ladder = make_ladder([1.0, 2.0, 4.0], sigma=1.0)
        counter = EvalCounter()
        # 2J = 4 intra-rung proposals, all far out and rejected; the final
        # acceptance must then be exactly one no matter the final uniform.
        rng = ScriptedRng(
            uniforms=[0.999999] * 4 + [1.0 - 1e-16],
            normals=[[50.0], [60.0], [55.0], [45.0]],
        )
        report = tempered_transition_step(np.array([0.3]), STD_NORMAL, ladder,
                                          rng, counter, logp_x=-0.045)
        assert report.final_log_accept == 0.0
        assert report.accepted
        np.testing.assert_array_equal(report.x, [0.3])

    def test_flat_target_always_accepts(self, rng):
        flat = LogTarget(1, lambda x: 0.0)
        ladder = make_ladder([1.0, 2.0], sigma=1.0)
        counter = EvalCounter()
        for _ in range(50):
            report = tempered_transition_step(np.zeros(1), flat, ladder, rng,
                                              counter, logp_x=0.0)
            assert report.final_log_accept == 0.0
            assert report.accepted

    def test_two_j_evals_with_cached_start(self, rng):
        ladder = make_ladder([1.0, 2.0, 4.0], sigma=1.0)
        counter = EvalCounter()
        report = tempered_transition_step(np.zeros(1), STD_NORMAL, ladder, rng,
                                          counter, logp_x=0.0)
        assert report.evals == 4
        assert counter.total == 4

    def test_uncached_start_costs_one_more(self, rng):
        ladder = make_ladder([1.0, 2.0, 4.0], sigma=1.0)
        counter = EvalCounter()
        tempered_transition_step(np.zeros(1), STD_NORMAL, ladder, rng, counter)
        assert counter.total == 5

    def test_samples_target_variance(self, rng):
        ladder = make_ladder([1.0, 2.0, 4.0], sigma=1.5)
        counter = EvalCounter()
        x, logp = np.zeros(1), 0.0
        draws = []
        for _ in range(20000):
            report = tempered_transition_step(x, STD_NORMAL, ladder, rng,
                                              counter, logp_x=logp)
            x, logp = report.x, report.logp
            draws.append(x[0])
        assert np.mean(draws) == pytest.approx(0.0, abs=0.05)
        assert np.var(draws) == pytest.approx(1.0, abs=0.1)

    def test_requires_positive_density_start(self):
        ladder = make_ladder([1.0, 2.0])
        with pytest.raises(ValueError, match="positive-density"):
            tempered_transition_step(np.zeros(1), STD_NORMAL, ladder,
                                     ScriptedRng(), EvalCounter(),
                                     logp_x=float("-inf"))
