#!/usr/bin/env python
# -*- coding: utf-8 -*-

import os
import json
import logging
import numpy as np


MPH_TO_MPS = 0.44704
KMH_TO_MPS = 1 / 3.6

SPEED_UNITS = {
    'mps': 1.0, 'm/s': 1.0,
    'mph': MPH_TO_MPS,
    'kmh': KMH_TO_MPS, 'km/h': KMH_TO_MPS, 'kph': KMH_TO_MPS
}


class UnitError(ValueError):
    pass


def to_mps(value, units='mps'):
    """Convert a speed to meters per second

    Args:
        value (float): a speed, or an array of speeds
        units (string): one of mps, m/s, mph, kmh, km/h or kph

    Returns:
        float: the speed in m/s
    """
    try:
        factor = SPEED_UNITS[units.strip().lower()]
    except (KeyError, AttributeError) as e:
        raise UnitError('Unknown speed unit: %s' % units)
    return value * factor


def from_mps(value, units='mps'):
    """Convert a speed in meters per second to the given units"""
    try:
        factor = SPEED_UNITS[units.strip().lower()]
    except (KeyError, AttributeError) as e:
        raise UnitError('Unknown speed unit: %s' % units)
    return value / factor


def nplog(type, flag):
    logger = logging.getLogger(__name__)
    logger.debug("FloatingPointError (%s), with flag %s" % (type, flag))


def thread_count(default=1):
    """Number of parallel workers allowed by CROSSING_SIM_THREADS

    Args:
        default (int): value used when the variable is unset

    Returns:
        int: a worker count >= 1
    """
    logger = logging.getLogger(__name__)
    value = os.environ.get('CROSSING_SIM_THREADS')
    if value is None or value.strip() == '':
        return default
    try:
        n = int(value)
        assert n >= 1
    except (ValueError, AssertionError) as e:
        logger.warning(
            'Ignoring invalid CROSSING_SIM_THREADS=%s' % value)
        return default
    return n


def cap_jobs(n_jobs):
    """Cap a requested worker count to the CROSSING_SIM_THREADS limit"""
    limit = thread_count(default=None)
    if n_jobs is None or n_jobs < 1:
        n_jobs = 1
    if limit is not None:
        n_jobs = min(n_jobs, limit)
    return n_jobs


def resolve_seed(seed=None):
    """Return the seed unchanged, or draw a fresh 32 bit seed from OS
    entropy when none was given

    Args:
        seed (int): a seed or None

    Returns:
        int: a seed usable by numpy.random.default_rng
    """
    logger = logging.getLogger(__name__)
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % 2**32)
        logger.info('No seed given, using generated seed %i' % seed)
    return int(seed)


def parse_bool(value):
    """Parse on/off style strings into a boolean"""
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError('Not a boolean value: %s' % value)


def parse_float_list(value):
    """Parse a comma or whitespace separated list of numbers

    Args:
        value (string): e.g. "1, 1, 3" or "1 1 3"

    Returns:
        list: a list of floats
    """
    items = value.replace(',', ' ').split()
    return [float(i) for i in items]


def _to_builtin(obj):
    if isinstance(obj, dict):
        return {str(k): _to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_to_builtin(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        # json has no literal for nan or inf
        if not np.isfinite(obj):
            return None
        return obj
    return obj


def write_json(obj, output):
    """Write a (possibly numpy-laden) object as indented json

    Args:
        obj (object): dicts, lists, numbers, numpy arrays
        output (string): path of the json file
    """
    logger = logging.getLogger(__name__)
    try:
        out_file = open(output, 'w')
    except (IOError, OSError) as e:
        logger.error('Failed to open output file: %s' % e)
        raise
    with out_file:
        json.dump(_to_builtin(obj), out_file, indent=2, sort_keys=True)
        out_file.write('\n')
    logger.debug('Wrote %s' % output)


def read_json(path):
    """Read a json file

    Args:
        path (string): path of the json file

    Returns:
        object: the decoded json
    """
    logger = logging.getLogger(__name__)
    try:
        f = open(path, 'r')
    except (IOError, OSError) as e:
        logger.error('Failed to open file: %s' % e)
        raise
    with f:
        return json.load(f)


def ensure_dir(path):
    """Create an output directory if it does not exist yet"""
    if path and not os.path.isdir(path):
        os.makedirs(path)
    return path


def cleanup(file_list):
    """remove temporary files

    Args:
        file_list (list): a list of files to be removed
    """
    logger = logging.getLogger(__name__)
    logger.debug('Cleaning up')
    for temp_file in file_list:
        if temp_file is not None and os.path.exists(temp_file):
            try:
                os.remove(temp_file)
            except (IOError, OSError) as e:
                logger.error('Could not remove temporary file: %s' % temp_file)
