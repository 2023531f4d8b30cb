#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Traffic scenes and their per-gap cue schedules"""

from crossing_sim import cue
from crossing_sim import util
from crossing_sim import decision
from crossing_sim.params import load_params

from collections import namedtuple

import os
import logging
import numpy as np


SCENARIO_FIELDS = [
    ('gap_sequence_s', None),
    ('vehicle_speed_mps', None),
    ('vehicle_widths_m', (1.95,)),
    ('lane_width_m', 3.5),
    ('spawn_distance_m', 96.0),
    ('pedestrian_count', 1000),
    ('rng_seed', 0),
    ('model', 'dataset-two-sw'),
    ('timestep_s', 0.02),
    ('vehicle_length_m', 4.5),
    ('crosswalk_width_m', 3.0),
    ('pavement_width_m', 1.85),
    ('desired_speed_mps', 1.4),
    ('relaxation_time_s', 0.5),
    ('boundary_strength', 2.0),
    ('boundary_range_m', 0.3),
    ('initiation_sampler', 'exact'),
    ('literal_algorithm', False),
    ('trajectory_agents', 0),
    ('mh_proposal_width', 0.5),
    ('mh_iterations', 500),
]

ScenarioConfig = namedtuple(
    'ScenarioConfig', [name for name, _ in SCENARIO_FIELDS],
    defaults=[default for _, default in SCENARIO_FIELDS[2:]])

GapSchedule = namedtuple(
    'GapSchedule',
    ['gap_size_s', 't_pass', 'theta_dot', 'distance_m', 'width_m',
     'speed_mps'])

# traffic used with dataset two, all at 30 mph
BUILTIN_SEQUENCES = {
    'scenario_one': (1, 1, 1, 3, 3, 3, 6, 1, 1, 6),
    'scenario_two': (1, 1, 1, 1, 3, 3, 7, 1, 1, 3, 8),
    'scenario_three': (1, 1, 1, 3, 1, 3, 1, 3, 5, 4, 8),
    'scenario_four': (2, 3, 1, 1, 3, 1, 1, 1, 5, 4, 7),
}
DATASET_TWO_SPEED_MPH = 30

# single gap conditions used with dataset one
DATASET_ONE_SPEEDS_MPH = (25, 30, 35)
DATASET_ONE_GAPS_S = (2, 3, 4, 5)

SAMPLERS = ('exact', 'mh')


class ConfigError(ValueError):
    pass


def _int(value):
    return int(float(value))


def _sequence(value):
    key = value.strip().lower()
    if key in BUILTIN_SEQUENCES:
        return tuple(float(g) for g in BUILTIN_SEQUENCES[key])
    return tuple(util.parse_float_list(value))


def _sampler(value):
    value = value.strip().lower()
    if value not in SAMPLERS:
        raise ValueError('initiation_sampler must be one of %s' % (SAMPLERS,))
    return value


CONVERTERS = {
    'gap_sequence_s': _sequence,
    'vehicle_speed_mps': float,
    'vehicle_widths_m': lambda v: tuple(util.parse_float_list(v)),
    'lane_width_m': float,
    'spawn_distance_m': float,
    'pedestrian_count': _int,
    'rng_seed': _int,
    'model': lambda v: v.strip(),
    'timestep_s': float,
    'vehicle_length_m': float,
    'crosswalk_width_m': float,
    'pavement_width_m': float,
    'desired_speed_mps': float,
    'relaxation_time_s': float,
    'boundary_strength': float,
    'boundary_range_m': float,
    'initiation_sampler': _sampler,
    'literal_algorithm': util.parse_bool,
    'trajectory_agents': _int,
    'mh_proposal_width': float,
    'mh_iterations': _int,
}


def parse_config_file(path):
    """Parse a flat key = value file

    Blank lines and # comments are ignored.

    Args:
        path (string): the config file

    Returns:
        list: (line number, key, raw value) in file order
    """
    logger = logging.getLogger(__name__)
    try:
        f = open(path, 'r')
    except (IOError, OSError) as e:
        logger.error('Failed to open config file: %s' % e)
        raise
    entries = []
    with f:
        for number, line in enumerate(f, 1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigError(
                    '%s line %i: expected key = value' % (path, number))
            key, value = line.split('=', 1)
            entries.append((number, key.strip(), value.strip()))
    return entries


def config_from_dict(values, base_dir=None):
    """Convert raw string values into a validated ScenarioConfig

    Args:
        values (dict): field name to raw string value
        base_dir (string): directory that relative model paths resolve to

    Returns:
        ScenarioConfig: the validated config
    """
    fields = {}
    for key, raw in values.items():
        if key == 'vehicle_speed_mph':
            fields['vehicle_speed_mps'] = util.to_mps(float(raw), 'mph')
            continue
        if key not in CONVERTERS:
            raise ConfigError('Unknown scenario key: %s' % key)
        try:
            fields[key] = CONVERTERS[key](raw) if isinstance(raw, str) \
                else raw
        except ValueError as e:
            raise ConfigError('Invalid value for %s: %s' % (key, e))
    for required in ('gap_sequence_s', 'vehicle_speed_mps'):
        if required not in fields:
            raise ConfigError('Missing scenario key: %s' % required)
    model = fields.get('model')
    if isinstance(model, str) and base_dir and \
            os.path.exists(os.path.join(base_dir, model)):
        fields['model'] = os.path.join(base_dir, model)
    cfg = ScenarioConfig(**fields)
    validate_config(cfg)
    return cfg


def load_scenario(path, overrides=None):
    """Read a scenario config file

    Args:
        path (string): the key = value file
        overrides (dict): values that replace the file's (already typed or
            raw strings)

    Returns:
        ScenarioConfig: the validated config
    """
    logger = logging.getLogger(__name__)
    values = {}
    for number, key, raw in parse_config_file(path):
        values[key] = raw
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    cfg = config_from_dict(values, base_dir=os.path.dirname(path))
    logger.debug('Loaded scenario config: %s' % path)
    return cfg


def validate_config(cfg):
    if len(cfg.gap_sequence_s) == 0:
        raise ConfigError('gap_sequence_s is empty')
    if any(not g > 0 for g in cfg.gap_sequence_s):
        raise ConfigError('all gaps must be > 0 s')
    if not cfg.vehicle_speed_mps > 0:
        raise ConfigError('vehicle_speed_mps must be > 0')
    if cfg.pedestrian_count < 1:
        raise ConfigError('pedestrian_count must be >= 1')
    if len(cfg.vehicle_widths_m) not in (1, len(cfg.gap_sequence_s)):
        raise ConfigError(
            'vehicle_widths_m needs 1 or %i values, got %i' % (
                len(cfg.gap_sequence_s), len(cfg.vehicle_widths_m)))
    for name in ('lane_width_m', 'timestep_s', 'crosswalk_width_m',
                 'desired_speed_mps', 'relaxation_time_s', 'boundary_range_m',
                 'mh_proposal_width'):
        if not getattr(cfg, name) > 0:
            raise ConfigError('%s must be > 0' % name)
    if cfg.pavement_width_m < 0 or cfg.vehicle_length_m < 0:
        raise ConfigError('lengths must be >= 0')
    if cfg.initiation_sampler not in SAMPLERS:
        raise ConfigError('initiation_sampler must be one of %s' % (SAMPLERS,))
    return cfg


def scenario_model(cfg):
    """ModelParams of a scenario, resolved from a built-in name or a file"""
    return load_params(cfg.model)


def build_schedule(cfg):
    """Pass times and collision cues of every gap of a scenario

    The front of vehicle 1 starts spawn_distance_m from the crossing line at
    t = 0, vehicle n + 1 trails vehicle n by gap_n seconds front-to-front.
    Gap n opens at t_pass_n, when the rear of vehicle n clears the crossing
    line, and its cue is the one of vehicle n + 1 at that instant.

    Args:
        cfg (ScenarioConfig): the scene

    Returns:
        GapSchedule: per gap arrays
    """
    logger = logging.getLogger(__name__)
    gaps = np.asarray(cfg.gap_sequence_s, dtype=float)
    speed = float(cfg.vehicle_speed_mps)
    widths = np.broadcast_to(
        np.asarray(cfg.vehicle_widths_m, dtype=float), gaps.shape).copy()
    distance = cue.gap_distance(speed, gaps, cfg.vehicle_length_m)
    t_pass = ((cfg.spawn_distance_m + cfg.vehicle_length_m) / speed +
              np.concatenate(([0.0], np.cumsum(gaps)[:-1])))
    theta_dot = cue.theta_dot(widths, distance, speed)
    logger.debug('Schedule of %i gaps, theta_dot %s' % (len(gaps), theta_dot))
    return GapSchedule(gaps, t_pass, theta_dot, distance, widths, speed)


def annotate_flow_rules(schedule):
    """Gap contexts with the following-gap cue filled in

    The max rejected cue depends on each pedestrian's own history and is
    left unset.

    Args:
        schedule (GapSchedule): the gap schedule

    Returns:
        list: a GapContext per gap
    """
    n_gaps = len(schedule.theta_dot)
    contexts = []
    for i in range(n_gaps):
        following = None
        if i + 1 < n_gaps:
            following = float(schedule.theta_dot[i + 1])
        contexts.append(decision.GapContext(
            i + 1, float(schedule.theta_dot[i]), None, following))
    return contexts


def population_contexts(schedule):
    """Contexts seen by pedestrians who rejected every earlier gap"""
    return decision.sequence_contexts(list(schedule.theta_dot))


def analytic_probs(schedule, params):
    """Conditional and unconditional acceptance of every gap

    Args:
        schedule (GapSchedule): the gap schedule
        params (ModelParams): model parameters

    Returns:
        tuple: (p_n list, P_n list)
    """
    contexts = population_contexts(schedule)
    conditional = decision.conditional_gap_probs(contexts, params.decision)
    unconditional = decision.unconditional_gap_probs(
        contexts, params.decision)
    return conditional, unconditional


def builtin_scenario(name, **overrides):
    """ScenarioConfig for one of the published traffic sequences"""
    fields = {
        'gap_sequence_s': tuple(float(g) for g in BUILTIN_SEQUENCES[name]),
        'vehicle_speed_mps': util.to_mps(DATASET_TWO_SPEED_MPH, 'mph')}
    fields.update(overrides)
    return validate_config(ScenarioConfig(**fields))
