#!/usr/bin/env python
# -*- coding: utf-8 -*-

from crossing_sim import util
from crossing_sim import synth
from crossing_sim import trials
from crossing_sim import scenario
from crossing_sim.params import BUILTIN_PARAMS, params_from_dict
from crossing_sim.initiation_models import from_params

from collections import Counter

import pytest
import numpy as np


DATASET_ONE = BUILTIN_PARAMS['dataset-one-sw']
DATASET_TWO = BUILTIN_PARAMS['dataset-two-sw']


def setup_function():
    output_file_prefix = 'data/.test'


def teardown_function():
    util.cleanup(['data/.test.synth.csv', 'data/.test.synth.manifest.json',
                  'data/.test.synth2.csv', 'data/.test.synth2.manifest.json',
                  'data/.test.design.cfg'])


def _write_design(text):
    with open('data/.test.design.cfg', 'w') as f:
        f.write(text)
    return 'data/.test.design.cfg'


def _by_condition(records):
    groups = {}
    for r in records:
        groups.setdefault(trials.condition_key(r), []).append(r)
    return groups


def test_zero_trials():
    records = synth.synth_dataset(DATASET_ONE, synth.dataset_one_design(), 0,
                                  1, 'data/.test.synth.csv')
    assert records == []
    with open('data/.test.synth.csv', 'r') as f:
        lines = f.read().splitlines()
    assert lines == [','.join(trials.COLUMNS)]


def test_negative_trials():
    with pytest.raises(synth.DesignError):
        synth.synth_dataset(DATASET_ONE, synth.dataset_one_design(), -1, 1)


def test_dataset_one_roundtrip():
    records = synth.synth_dataset(DATASET_ONE, synth.dataset_one_design(),
                                  20, 3, 'data/.test.synth.csv')
    reread = trials.ingest_trials('data/.test.synth.csv')
    assert len(reread) == 240
    counts = Counter(trials.condition_key(r) for r in reread)
    assert len(counts) == 12
    assert set(counts.values()) == {20}
    for before, after in zip(records, reread):
        assert after.accepted == before.accepted
        assert after.theta_dot == pytest.approx(before.theta_dot)
        assert (after.t_int_s is None) == (before.t_int_s is None)
    manifest = util.read_json(synth.manifest_path('data/.test.synth.csv'))
    assert manifest['seed'] == 3
    assert manifest['n_per_cell'] == 20
    assert params_from_dict(manifest['params']) == DATASET_ONE


def test_acceptance_rises_with_gap_and_speed():
    records = synth.synth_dataset(DATASET_ONE, synth.dataset_one_design(),
                                  1000, 4)
    rate = {}
    for key, group in _by_condition(records).items():
        rate[key] = np.mean([r.accepted for r in group])
    speeds = sorted(set(s for s, _ in rate))
    gaps = sorted(set(g for _, g in rate))
    for speed in speeds:
        assert rate[(speed, gaps[0])] < rate[(speed, gaps[-1])]
    for gap in gaps:
        assert rate[(speeds[0], gap)] < rate[(speeds[-1], gap)]


def test_model_mean_rises_with_gap_and_speed():
    model = from_params(DATASET_ONE.initiation)
    cells = synth.design_conditions(synth.dataset_one_design())
    means = {(speed, gap): float(model.mean(td)) for speed, gap, td in cells}
    speeds = sorted(set(s for s, _ in means))
    gaps = sorted(set(g for _, g in means))
    for speed in speeds:
        assert all(np.diff([means[(speed, g)] for g in gaps]) > 0)
    for gap in gaps:
        assert all(np.diff([means[(s, gap)] for s in speeds]) > 0)


def test_reruns_are_identical():
    synth.synth_dataset(DATASET_TWO, synth.dataset_two_design(), 15, 8,
                        'data/.test.synth.csv')
    synth.synth_dataset(DATASET_TWO, synth.dataset_two_design(), 15, 8,
                        'data/.test.synth2.csv')
    with open('data/.test.synth.csv', 'rb') as f, \
            open('data/.test.synth2.csv', 'rb') as g:
        assert f.read() == g.read()


def test_scenario_traversals():
    records = synth.synth_dataset(DATASET_TWO, synth.dataset_two_design(), 50,
                                  9)
    traversals = {}
    for r in records:
        traversals.setdefault((r.scenario_id, r.participant_id), []).append(r)
    assert len(traversals) == 4 * 50
    for (scenario_id, _), group in traversals.items():
        n_gaps = len(scenario.BUILTIN_SEQUENCES[scenario_id])
        assert [r.gap_index for r in group] == list(range(1, len(group) + 1))
        assert sum(r.accepted for r in group) <= 1
        assert all(r.accepted == 0 for r in group[:-1])
        if not group[-1].accepted:
            assert len(group) == n_gaps
        assert all(r.t_int_s is not None for r in group if r.accepted)
        theta_dots = [r.theta_dot for r in group]
        for i, r in enumerate(group):
            expected = int(i > 0 and theta_dots[i] >= max(theta_dots[:i]))
            assert r.x1 == expected


def test_scenario_records_match_ingest():
    synth.synth_dataset(DATASET_TWO, synth.dataset_two_design(), 10, 10,
                        'data/.test.synth.csv')
    reread = trials.ingest_trials('data/.test.synth.csv')
    records = synth.synth_dataset(DATASET_TWO, synth.dataset_two_design(), 10,
                                  10)
    for before, after in zip(records, reread):
        assert (after.x1, after.x2) == (before.x1, before.x2)


def test_load_design_grid():
    design = synth.load_design('data/grid_design.cfg')
    assert design.kind == 'grid'
    assert design.speeds_mps == pytest.approx(
        synth.dataset_one_design().speeds_mps)
    assert design.gaps_s == (2.0, 3.0, 4.0, 5.0)
    assert len(synth.design_conditions(design)) == 12


def test_load_design_scenarios():
    design = synth.load_design('data/scenario_design.cfg')
    assert design.kind == 'scenarios'
    assert list(design.sequences) == ['scenario_one', 'custom']
    assert design.sequences['custom'] == (3.0, 3.0, 4.0, 2.0, 5.0, 4.0, 6.0)
    records = synth.synth_dataset(DATASET_TWO, design, 5, 1)
    assert set(r.scenario_id for r in records) == {'scenario_one', 'custom'}


def test_load_design_errors():
    with pytest.raises(synth.DesignError):
        synth.load_design(_write_design('kind = lattice\nspeeds_mph = 30\n'))
    with pytest.raises(synth.DesignError):
        synth.load_design(_write_design('kind = grid\ngaps_s = 2 3\n'))
    with pytest.raises(synth.DesignError):
        synth.load_design(_write_design('kind = grid\nspeeds_mph = 30\n'))
    with pytest.raises(synth.DesignError):
        synth.load_design(_write_design(
            'kind = scenarios\nspeeds_mph = 30\nscenarios = scenario_nine\n'))
    with pytest.raises(synth.DesignError):
        synth.load_design(_write_design(
            'kind = grid\nspeeds_mph = 30\ngaps_s = 2\ncolour = red\n'))
    with pytest.raises(OSError):
        synth.load_design('data/does_not_exist.cfg')


def test_holdout_split():
    records = synth.synth_dataset(DATASET_ONE, synth.dataset_one_design(), 10,
                                  11)
    train, validation = trials.split_trials(
        records, holdout_conditions=trials.DATASET_ONE_HOLDOUT)
    assert len(train) + len(validation) == 120
    held = set(trials.condition_key(r) for r in validation)
    assert len(held) == len(trials.DATASET_ONE_HOLDOUT)
    assert not held & set(trials.condition_key(r) for r in train)
