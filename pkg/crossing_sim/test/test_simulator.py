#!/usr/bin/env python
# -*- coding: utf-8 -*-

from crossing_sim import util
from crossing_sim import evaluate
from crossing_sim import scenario
from crossing_sim import simulator
from crossing_sim.params import ModelParams, BUILTIN_PARAMS
from crossing_sim.decision import DecisionParams
from crossing_sim.initiation_models import InitiationParams
from crossing_sim.initiation_models.shifted_wald import SWParams
from crossing_sim.initiation_models.shifted_wald import sw_pdf, sample_sw

from scipy import stats

import csv
import pytest
import numpy as np


DATASET_TWO = BUILTIN_PARAMS['dataset-two-sw']


def setup_function():
    output_file_prefix = 'data/.test'


def teardown_function():
    util.cleanup(['data/.test.trajectories.csv'])


def _assert_same(a, b):
    assert np.array_equal(a.accepted_gap, b.accepted_gap)
    assert np.array_equal(a.t_int, b.t_int, equal_nan=True)
    assert np.array_equal(a.crossing_start, b.crossing_start, equal_nan=True)
    assert np.array_equal(a.crossing_duration, b.crossing_duration,
                          equal_nan=True)
    assert np.array_equal(a.accept_counts, b.accept_counts)


def test_conservation_and_determinism():
    cfg = scenario.builtin_scenario('scenario_one', pedestrian_count=2000,
                                    rng_seed=3)
    result = simulator.run_simulation(cfg)
    assert result.accept_counts.sum() + result.never_crossed == 2000
    assert simulator.check_conservation(result)
    _assert_same(result, simulator.run_simulation(cfg))
    other = simulator.run_simulation(cfg._replace(rng_seed=4))
    assert not np.array_equal(result.accepted_gap, other.accepted_gap)


def test_conservation_violation():
    cfg = scenario.builtin_scenario('scenario_one', pedestrian_count=50)
    result = simulator.run_simulation(cfg)
    with pytest.raises(simulator.ConservationError):
        simulator.check_conservation(
            result._replace(never_crossed=result.never_crossed + 1))


def test_nobody_crosses():
    params = ModelParams(DecisionParams(-2.92, 0.0, 0.0, -1e6, False),
                         DATASET_TWO.initiation)
    cfg = scenario.builtin_scenario('scenario_one', pedestrian_count=500)
    result = simulator.run_simulation(cfg, params)
    assert result.never_crossed == 500
    assert np.all(result.accepted_gap == 0)
    assert np.all(np.isnan(result.t_int))


def test_everybody_crosses_first_gap():
    params = ModelParams(DecisionParams(0.0, 0.0, 0.0, 1e6, False),
                         DATASET_TWO.initiation)
    cfg = scenario.ScenarioConfig((3.0,), 13.4112, pedestrian_count=300)
    result = simulator.run_simulation(cfg, params)
    assert np.all(result.accepted_gap == 1)
    assert result.never_crossed == 0
    assert np.all(np.isfinite(result.t_int))
    assert np.all(result.crossing_start ==
                  result.schedule.t_pass[0] + result.t_int)


def test_empirical_matches_analytic():
    cfg = scenario.builtin_scenario('scenario_one', pedestrian_count=100000,
                                    rng_seed=11)
    result = simulator.run_simulation(cfg)
    assert np.allclose(simulator.empirical_frequencies(result),
                       result.analytic_probs, atol=0.01)


def test_literal_mode_double_discounts():
    cfg = scenario.builtin_scenario('scenario_one', pedestrian_count=20000,
                                    rng_seed=5, literal_algorithm=True)
    result = simulator.run_simulation(cfg)
    unconditional = result.analytic_probs
    expected = unconditional * np.concatenate(
        ([1.0], np.cumprod(1 - unconditional)[:-1]))
    assert np.allclose(simulator.empirical_frequencies(result), expected,
                       atol=0.02)


def test_rejection_memory_lowers_acceptance():
    cfg = scenario.ScenarioConfig((3.0, 3.0, 3.0, 3.0, 3.0), 13.4112,
                                  pedestrian_count=20000, rng_seed=2)
    result = simulator.run_simulation(cfg, DATASET_TWO)
    assert np.all(np.diff(result.analytic_probs[:-1]) < 0)
    assert result.conditional_probs[1] < result.conditional_probs[0]
    assert result.accept_counts[0] > result.accept_counts[1]


def test_crossing_start_after_onset():
    params = ModelParams(
        DATASET_TWO.decision,
        InitiationParams(0.47, 7.36, 0.0, 0.5, 7.76, 'shifted_wald'))
    cfg = scenario.builtin_scenario('scenario_three', pedestrian_count=2000)
    result = simulator.run_simulation(cfg, params)
    crossed = result.accepted_gap > 0
    t_pass = result.schedule.t_pass[result.accepted_gap[crossed] - 1]
    assert np.all(result.t_int[crossed] > 0.5)
    assert np.all(result.crossing_start[crossed] > t_pass + 0.5)


def test_crossing_durations():
    cfg = scenario.builtin_scenario('scenario_one', pedestrian_count=500)
    result = simulator.run_simulation(cfg)
    crossed = result.accepted_gap > 0
    durations = result.crossing_duration[crossed]
    # from rest at the kerb across a 3.5 m lane
    assert np.all((durations >= 2.0) & (durations <= 3.5))


def test_approach_to_kerb():
    cfg = scenario.builtin_scenario('scenario_one', pedestrian_count=500)
    result = simulator.run_simulation(cfg)
    approach = result.approach_duration
    assert np.all(np.isfinite(approach))
    assert np.all((approach >= 0) & (approach <= 2.5))
    assert np.all(approach < result.schedule.t_pass[0])
    assert simulator.result_to_dict(result)['mean_approach_duration_s'] > 0


def test_agent_outcome_independent_of_population():
    small = scenario.builtin_scenario('scenario_one', pedestrian_count=100,
                                      rng_seed=17)
    a = simulator.run_simulation(small)
    b = simulator.run_simulation(small._replace(pedestrian_count=300))
    assert np.array_equal(a.accepted_gap, b.accepted_gap[:100])
    assert np.array_equal(a.t_int, b.t_int[:100], equal_nan=True)
    assert np.array_equal(a.approach_duration, b.approach_duration[:100])


def test_mh_outcome_independent_of_population():
    small = scenario.builtin_scenario('scenario_one', pedestrian_count=40,
                                      rng_seed=8, initiation_sampler='mh',
                                      mh_iterations=50)
    a = simulator.run_simulation(small)
    b = simulator.run_simulation(small._replace(pedestrian_count=120))
    assert np.array_equal(a.accepted_gap, b.accepted_gap[:40])
    assert np.array_equal(a.t_int, b.t_int[:40], equal_nan=True)


def test_trajectories():
    cfg = scenario.builtin_scenario('scenario_one', pedestrian_count=500,
                                    trajectory_agents=4)
    result = simulator.run_simulation(cfg)
    agents = sorted(set(row[0] for row in result.trajectories))
    assert len(agents) == 4
    half = cfg.crosswalk_width_m / 2 + 0.5
    assert all(abs(row[3]) <= half for row in result.trajectories)
    for agent_id in agents:
        rows = [row for row in result.trajectories if row[0] == agent_id]
        phases = [row[4] for row in rows]
        assert rows[0][4] == 'waiting'
        assert rows[0][1] == 0.0
        assert all(row[2] <= 0.0 for row in rows if row[4] == 'waiting')
        assert phases.count('initiating') == 1
        assert rows[-1][4] == 'done'
        first_crossing = rows[phases.index('crossing')]
        assert first_crossing[1] == pytest.approx(
            result.crossing_start[agent_id])
        assert first_crossing[2] == 0.0
        times = [row[1] for row in rows]
        assert all(t1 <= t2 for t1, t2 in zip(times, times[1:]))
    simulator.write_trajectories(result, 'data/.test.trajectories.csv')
    with open('data/.test.trajectories.csv', 'r') as f:
        rows = list(csv.reader(f))
    assert rows[0] == ['agent', 't', 'x', 'y', 'phase']
    assert len(rows) == len(result.trajectories) + 1


def test_mh_sampler_option():
    cfg = scenario.builtin_scenario('scenario_one', pedestrian_count=300,
                                    initiation_sampler='mh',
                                    mh_iterations=200)
    result = simulator.run_simulation(cfg)
    crossed = result.accepted_gap > 0
    assert simulator.check_conservation(result)
    assert np.all(np.isfinite(result.t_int[crossed]))


def test_mh_symmetric_target():
    rng = np.random.default_rng(21)
    result = simulator.mh_sample(stats.norm.pdf, 1.0, 200, rng,
                                 n_chains=20000, start=0.0)
    assert np.mean(result.samples) == pytest.approx(0.0, abs=0.05)
    assert np.std(result.samples) == pytest.approx(1.0, abs=0.05)
    assert 0 < result.acceptance_rate < 1


def test_mh_small_proposal():
    rng = np.random.default_rng(1)
    result = simulator.mh_sample(stats.norm.pdf, 1e-6, 100, rng,
                                 n_chains=100)
    assert result.acceptance_rate > 0.99


def test_mh_zero_density():
    with pytest.raises(simulator.ZeroDensityStartError):
        simulator.mh_sample(lambda x: np.zeros_like(x), 1.0, 10,
                            np.random.default_rng(0), n_chains=5,
                            init_attempts=10)


def test_mh_chain_streams():
    def streams():
        return [np.random.default_rng(i) for i in range(3)]

    all_three = simulator.mh_sample(stats.norm.pdf, 1.0, 50, streams())
    assert len(all_three.samples) == 3
    first_two = simulator.mh_sample(stats.norm.pdf, 1.0, 50, streams()[:2])
    assert np.array_equal(all_three.samples[:2], first_two.samples)


def test_mh_moves_into_support():
    p = SWParams(1.0, 1.0, 0.0)
    result = simulator.mh_sample(lambda x: sw_pdf(x, p), 0.5, 50,
                                 np.random.default_rng(3), n_chains=100,
                                 start=-1.0)
    assert np.all(result.samples > 0)


@pytest.mark.slow
def test_mh_matches_exact_sampler():
    p = SWParams(1.0, 1.0, 0.0)
    mh = simulator.mh_sample(lambda x: sw_pdf(x, p), 1.0, 500,
                             np.random.default_rng(101), n_chains=100000,
                             start=1.0)
    exact = sample_sw(p, np.random.default_rng(202), 100000)
    d, pvalue = evaluate.ks_two_sample(mh.samples, exact)
    assert pvalue > 0.01


def test_replications():
    cfg = scenario.builtin_scenario('scenario_two', pedestrian_count=300,
                                    rng_seed=9)
    results = simulator.run_replications(cfg, 3, n_jobs=1)
    assert len(results) == 3
    assert len(set(r.rng_seed for r in results)) == 3
    for r in results:
        assert simulator.check_conservation(r)
    again = simulator.run_replications(cfg, 3, n_jobs=2)
    for a, b in zip(results, again):
        _assert_same(a, b)


def test_result_to_dict():
    cfg = scenario.builtin_scenario('scenario_one', pedestrian_count=100)
    result = simulator.run_simulation(cfg)
    dic = simulator.result_to_dict(result, include_agents=True)
    assert dic['pedestrian_count'] == 100
    assert len(dic['gaps']) == 10
    assert sum(g['accepted'] for g in dic['gaps']) + \
        dic['never_crossed'] == 100
    assert len(dic['agents']) == 100
    assert 'agents' not in simulator.result_to_dict(result)
