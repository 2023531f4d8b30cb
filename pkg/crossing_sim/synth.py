#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Synthetic trial data drawn from the model itself"""

from crossing_sim import cue
from crossing_sim import util
from crossing_sim import trials
from crossing_sim import decision
from crossing_sim import scenario
from crossing_sim.params import params_to_dict
from crossing_sim.initiation_models import from_params
from crossing_sim.version import __version__

from collections import namedtuple, OrderedDict

import os
import logging
import numpy as np


Design = namedtuple(
    'Design',
    ['kind', 'speeds_mps', 'gaps_s', 'sequences', 'width_m',
     'vehicle_length_m', 'speed_units'],
    defaults=(1.95, 4.5, 'mph'))

KINDS = ('grid', 'scenarios')


class DesignError(ValueError):
    pass


def dataset_one_design():
    """The 3 speeds x 4 gaps single-gap design"""
    return Design(
        'grid',
        tuple(util.to_mps(s, 'mph') for s in scenario.DATASET_ONE_SPEEDS_MPH),
        tuple(float(g) for g in scenario.DATASET_ONE_GAPS_S), None)


def dataset_two_design():
    """The four traffic sequences at 30 mph"""
    sequences = OrderedDict(
        (name, tuple(float(g) for g in seq))
        for name, seq in scenario.BUILTIN_SEQUENCES.items())
    return Design(
        'scenarios', (util.to_mps(scenario.DATASET_TWO_SPEED_MPH, 'mph'),),
        None, sequences)


def load_design(path):
    """Read a design file

    Keys: kind (grid or scenarios), speeds_mph or speeds_mps, gaps_s (grid),
    scenarios (built-in sequence names) and/or sequence_<name> = gaps,
    width_m, vehicle_length_m.

    Args:
        path (string): the key = value file

    Returns:
        Design: the design
    """
    logger = logging.getLogger(__name__)
    values = OrderedDict(
        (key, raw) for _, key, raw in scenario.parse_config_file(path))
    kind = values.pop('kind', 'grid').strip().lower()
    if kind not in KINDS:
        raise DesignError('design kind must be one of %s' % (KINDS,))
    speed_units = 'mph'
    try:
        if 'speeds_mph' in values:
            speeds = tuple(util.to_mps(s, 'mph') for s in
                           util.parse_float_list(values.pop('speeds_mph')))
        elif 'speeds_mps' in values:
            speeds = tuple(util.parse_float_list(values.pop('speeds_mps')))
            speed_units = 'mps'
        else:
            raise DesignError('design needs speeds_mph or speeds_mps')
        gaps = None
        if 'gaps_s' in values:
            gaps = tuple(util.parse_float_list(values.pop('gaps_s')))
        sequences = OrderedDict()
        for name in values.pop('scenarios', '').replace(',', ' ').split():
            if name.lower() not in scenario.BUILTIN_SEQUENCES:
                raise DesignError('Unknown built-in scenario: %s' % name)
            sequences[name.lower()] = tuple(
                float(g) for g in scenario.BUILTIN_SEQUENCES[name.lower()])
        for key in [k for k in values if k.startswith('sequence_')]:
            sequences[key[len('sequence_'):]] = tuple(
                util.parse_float_list(values.pop(key)))
        width = float(values.pop('width_m', 1.95))
        length = float(values.pop('vehicle_length_m', 4.5))
    except ValueError as e:
        raise DesignError('Invalid design %s: %s' % (path, e))
    if values:
        raise DesignError('Unknown design keys: %s' % ', '.join(values))
    if kind == 'grid' and not gaps:
        raise DesignError('grid designs need gaps_s')
    if kind == 'scenarios' and not sequences:
        raise DesignError('scenario designs need at least one sequence')
    logger.debug('Loaded design: %s' % path)
    return Design(kind, speeds, gaps, sequences or None, width, length,
                  speed_units)


def design_conditions(design):
    """(speed, gap, theta_dot) of every cell of a grid design"""
    cells = []
    for speed in design.speeds_mps:
        for gap in design.gaps_s:
            cells.append((speed, gap, float(cue.gap_theta_dot(
                design.width_m, speed, gap, design.vehicle_length_m))))
    return cells


def _grid_trials(params, design, n_per_cell, rng):
    model = from_params(params.initiation)
    records = []
    trial = 0
    for speed, gap, theta_dot in design_conditions(design):
        p = float(decision.acceptance_probs(
            theta_dot, 0, 0, params.decision))
        u = rng.random(n_per_cell) < p
        t_int = model.sample(np.full(n_per_cell, theta_dot), rng)
        for i in range(n_per_cell):
            trial += 1
            records.append(trials.TrialRecord(
                'P%05d' % trial, 'grid', 1, design.width_m, speed, gap,
                theta_dot, 0, 0, int(u[i]),
                float(t_int[i]) if u[i] else None))
    return records


def _scenario_trials(params, design, n_per_cell, rng):
    model = from_params(params.initiation)
    records = []
    for speed in design.speeds_mps:
        for name, gaps in design.sequences.items():
            schedule = scenario.build_schedule(scenario.ScenarioConfig(
                gaps, speed, (design.width_m,),
                vehicle_length_m=design.vehicle_length_m))
            theta_dots = schedule.theta_dot
            n_gaps = len(gaps)
            draws = rng.random((n_per_cell, n_gaps))
            t_draws = model.sample(
                np.broadcast_to(theta_dots, (n_per_cell, n_gaps)), rng)
            for i in range(n_per_cell):
                max_rejected = None
                for n in range(n_gaps):
                    ctx = decision.GapContext(
                        n + 1, float(theta_dots[n]), max_rejected,
                        float(theta_dots[n + 1]) if n + 1 < n_gaps else None)
                    x1, x2 = decision.rule_x1(ctx), decision.rule_x2(ctx)
                    p = decision.gap_acceptance_prob(ctx, params.decision)
                    accepted = draws[i, n] < p
                    records.append(trials.TrialRecord(
                        'P%05d' % (i + 1), name, n + 1, design.width_m, speed,
                        gaps[n], float(theta_dots[n]), x1, x2, int(accepted),
                        float(t_draws[i, n]) if accepted else None))
                    if accepted:
                        break
                    if max_rejected is None or theta_dots[n] > max_rejected:
                        max_rejected = float(theta_dots[n])
    return records


def synth_dataset(params, design, n_per_cell, seed, output=None):
    """Draw trials from the model

    Grid designs give one single-gap trial per pedestrian and cell.
    Scenario designs give one traversal per pedestrian and sequence, with a
    record for every gap faced up to the accepted one. All random draws
    come from one stream seeded with seed, so reruns are identical.

    Args:
        params (ModelParams): generating parameters
        design (Design): conditions or sequences
        n_per_cell (int): pedestrians per cell or sequence
        seed (int): random seed
        output (string): csv path; a sidecar manifest with the generating
            parameters is written next to it

    Returns:
        list: TrialRecord
    """
    logger = logging.getLogger(__name__)
    if n_per_cell < 0:
        raise DesignError('n_per_cell must be >= 0')
    rng = np.random.default_rng(seed)
    if design.kind == 'grid':
        records = _grid_trials(params, design, n_per_cell, rng)
    else:
        records = _scenario_trials(params, design, n_per_cell, rng)
    logger.info('Generated %i synthetic trials' % len(records))
    if output is not None:
        trials.write_trials(records, output, design.speed_units)
        util.write_json({
            'generator': 'crossing-sim synth',
            'version': __version__,
            'seed': seed,
            'n_per_cell': n_per_cell,
            'design': design_to_dict(design),
            'params': params_to_dict(params),
        }, manifest_path(output))
    return records


def manifest_path(output):
    return os.path.splitext(output)[0] + '.manifest.json'


def design_to_dict(design):
    dic = design._asdict()
    if design.sequences is not None:
        dic['sequences'] = OrderedDict(
            (k, list(v)) for k, v in design.sequences.items())
    return dic
