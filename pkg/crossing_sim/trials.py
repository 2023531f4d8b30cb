#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Observed crossing opportunities: csv ingestion, writing and splitting"""

from crossing_sim import cue
from crossing_sim import util

from collections import namedtuple, defaultdict

import os
import csv
import logging
import numpy as np


TrialRecord = namedtuple(
    'TrialRecord',
    ['participant_id', 'scenario_id', 'gap_index', 'vehicle_width_m',
     'vehicle_speed_mps', 'gap_size_s', 'theta_dot', 'x1', 'x2', 'accepted',
     't_int_s'],
    defaults=(None,))

REQUIRED_COLUMNS = [
    'participant_id', 'scenario_id', 'gap_index', 'gap_size_s',
    'vehicle_speed', 'speed_units', 'vehicle_width_m', 'u']
OPTIONAL_COLUMNS = ['theta_dot_radps', 'x1', 'x2', 't_int_s']
COLUMNS = [
    'participant_id', 'scenario_id', 'gap_index', 'gap_size_s',
    'vehicle_speed', 'speed_units', 'vehicle_width_m', 'theta_dot_radps',
    'x1', 'x2', 'u', 't_int_s']

WIDTH_MODES = ('trial', 'scenario')


class SchemaMismatchError(ValueError):
    pass


class TrialValidationError(ValueError):
    pass


def _blank(value):
    return value is None or value.strip() == ''


def _parse_row(row):
    """Parse and validate one csv row

    Returns:
        dict: typed values, with None for absent optional columns
    """
    gap_index = int(row['gap_index'])
    if gap_index < 1:
        raise ValueError('gap_index must be >= 1, got %s' % gap_index)
    u = int(row['u'])
    if u not in (0, 1):
        raise ValueError('u must be 0 or 1, got %s' % row['u'])
    t_int = None if _blank(row.get('t_int_s')) else float(row['t_int_s'])
    if u == 1 and t_int is None:
        raise ValueError('accepted gap (u=1) without t_int_s')
    if u == 0 and t_int is not None:
        raise ValueError('t_int_s given for a rejected gap (u=0)')
    if t_int is not None and not np.isfinite(t_int):
        raise ValueError('t_int_s is not finite: %s' % t_int)
    gap_size = float(row['gap_size_s'])
    if not gap_size > 0:
        raise ValueError('gap_size_s must be > 0, got %s' % gap_size)
    speed = util.to_mps(float(row['vehicle_speed']), row['speed_units'])
    if not speed > 0:
        raise ValueError('vehicle speed must be > 0, got %s' % speed)
    width = float(row['vehicle_width_m'])
    if not width > 0:
        raise ValueError('vehicle_width_m must be > 0, got %s' % width)
    parsed = {
        'participant_id': row['participant_id'].strip(),
        'scenario_id': row['scenario_id'].strip(),
        'gap_index': gap_index,
        'gap_size_s': gap_size,
        'vehicle_speed_mps': speed,
        'vehicle_width_m': width,
        'accepted': u,
        't_int_s': t_int,
        'theta_dot': None, 'x1': None, 'x2': None}
    if not _blank(row.get('theta_dot_radps')):
        parsed['theta_dot'] = float(row['theta_dot_radps'])
        if not parsed['theta_dot'] > 0:
            raise ValueError('theta_dot_radps must be > 0')
    for rule in ('x1', 'x2'):
        if not _blank(row.get(rule)):
            value = int(row[rule])
            if value not in (0, 1):
                raise ValueError('%s must be 0 or 1, got %s' % (rule, value))
            parsed[rule] = value
    return parsed


def validate_rows(path):
    """Read a trial csv and validate it row by row

    Args:
        path (string): the csv file

    Returns:
        tuple: (list of parsed rows, list of (line number, message))
    """
    logger = logging.getLogger(__name__)
    try:
        assert os.stat(path).st_size != 0
        f = open(path, 'r', newline='')
    except (IOError, OSError) as e:
        logger.error('Failed to open trials file: %s' % e)
        raise
    except AssertionError as e:
        logger.error('Trials file seems empty: %s' % path)
        raise SchemaMismatchError(
            'empty trials file %s, expected columns: %s' % (
                path, ', '.join(COLUMNS)))
    rows = []
    errors = []
    with f:
        reader = csv.DictReader(f)
        header = [h.strip() for h in (reader.fieldnames or [])]
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        unknown = [c for c in header if c not in COLUMNS]
        if missing or unknown:
            raise SchemaMismatchError(
                'trials header mismatch in %s (missing: %s; unknown: %s); '
                'expected columns: %s' % (
                    path, ', '.join(missing) or '-', ', '.join(unknown) or '-',
                    ', '.join(COLUMNS)))
        reader.fieldnames = header
        for row in reader:
            line = reader.line_num
            try:
                rows.append(_parse_row(row))
            except (ValueError, TypeError, AttributeError) as e:
                errors.append((line, str(e)))
                logger.warning('%s line %i rejected: %s' % (path, line, e))
    return rows, errors


def _traversals(rows):
    """Split rows into independent passes through a gap sequence

    Rows of one participant and scenario are taken in file order. A pass
    ends after an accepted gap, and a gap index that does not increase
    starts a new one, so repeated single gap trials never share their
    rejection memory.

    Returns:
        list: lists of rows, one per traversal
    """
    groups = defaultdict(list)
    for r in rows:
        groups[(r['participant_id'], r['scenario_id'])].append(r)
    traversals = []
    for group in groups.values():
        current = []
        for r in group:
            if current and (r['gap_index'] <= current[-1]['gap_index'] or
                            current[-1]['accepted'] == 1):
                traversals.append(current)
                current = []
            current.append(r)
        traversals.append(current)
    return traversals


def _fill_cues(rows, width_mode, vehicle_length_m):
    """Compute theta_dot, x1 and x2 where the file did not supply them"""
    if width_mode == 'scenario':
        widths = defaultdict(list)
        for r in rows:
            widths[(r['scenario_id'], r['gap_index'])].append(
                r['vehicle_width_m'])
        mean_width = {k: float(np.mean(v)) for k, v in widths.items()}
        for r in rows:
            r['vehicle_width_m'] = mean_width[(r['scenario_id'],
                                               r['gap_index'])]
            r['theta_dot'] = None
    for r in rows:
        if r['theta_dot'] is None:
            r['theta_dot'] = float(cue.gap_theta_dot(
                r['vehicle_width_m'], r['vehicle_speed_mps'], r['gap_size_s'],
                vehicle_length_m))

    # cue of every (scenario, gap) for the lookahead rule
    gap_cue = defaultdict(list)
    for r in rows:
        gap_cue[(r['scenario_id'], r['gap_index'])].append(r['theta_dot'])
    gap_cue = {k: float(np.mean(v)) for k, v in gap_cue.items()}

    for traversal in _traversals(rows):
        max_rejected = None
        for r in traversal:
            if r['x1'] is None:
                r['x1'] = int(max_rejected is not None and
                              r['theta_dot'] >= max_rejected)
            if r['x2'] is None:
                following = gap_cue.get((r['scenario_id'], r['gap_index'] + 1))
                r['x2'] = int(following is not None and
                              r['theta_dot'] >= following)
            if r['accepted'] == 0:
                if max_rejected is None or r['theta_dot'] > max_rejected:
                    max_rejected = r['theta_dot']
    return rows


def ingest_trials(path, width_mode='trial', vehicle_length_m=4.5,
                  strict=False):
    """Load a trial csv into TrialRecord

    Speeds are converted to m/s using the speed_units column. Missing cue
    and rule columns are recomputed: theta_dot from the gap kinematics, x1
    from the earlier rejections of the same traversal (a participant's pass
    through a scenario, ended by an accepted gap or a gap index that does
    not increase), x2 from the cue of the following gap of the scenario.

    Args:
        path (string): the csv file
        width_mode (string): 'trial' uses each row's width, 'scenario'
            averages widths per scenario and gap index
        vehicle_length_m (float): vehicle length for the clear distance
        strict (bool): raise instead of skipping invalid rows

    Returns:
        list: TrialRecord in file order
    """
    logger = logging.getLogger(__name__)
    if width_mode not in WIDTH_MODES:
        raise ValueError('width_mode must be one of %s' % (WIDTH_MODES,))
    rows, errors = validate_rows(path)
    if errors:
        logger.warning('%i row(s) of %s rejected' % (len(errors), path))
        if strict:
            raise TrialValidationError('; '.join(
                'line %i: %s' % (line, msg) for line, msg in errors))
    _fill_cues(rows, width_mode, vehicle_length_m)
    records = [TrialRecord(
        r['participant_id'], r['scenario_id'], r['gap_index'],
        r['vehicle_width_m'], r['vehicle_speed_mps'], r['gap_size_s'],
        r['theta_dot'], r['x1'], r['x2'], r['accepted'], r['t_int_s'])
        for r in rows]
    logger.info('Loaded %i trials from %s' % (len(records), path))
    return records


def write_trials(records, output, speed_units='mps'):
    """Write TrialRecord to a csv with the full trial header

    Args:
        records (list): TrialRecord
        output (string): path of the csv
        speed_units (string): unit of the vehicle_speed column
    """
    logger = logging.getLogger(__name__)
    try:
        f = open(output, 'w', newline='')
    except (IOError, OSError) as e:
        logger.error('Failed to open output file: %s' % e)
        raise
    with f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(COLUMNS)
        for r in records:
            writer.writerow([
                r.participant_id, r.scenario_id, r.gap_index,
                repr(float(r.gap_size_s)),
                repr(float(util.from_mps(r.vehicle_speed_mps, speed_units))),
                speed_units, repr(float(r.vehicle_width_m)),
                repr(float(r.theta_dot)), r.x1, r.x2, r.accepted,
                '' if r.t_int_s is None else repr(float(r.t_int_s))])
    logger.debug('Wrote %i trials to %s' % (len(records), output))


def accepted_only(records):
    return [r for r in records if r.accepted == 1]


def condition_key(record, ndigits=6):
    """(speed in m/s, gap in s) rounded, identifying a design condition"""
    return (round(record.vehicle_speed_mps, ndigits),
            round(record.gap_size_s, ndigits))


def split_trials(records, holdout_conditions=None, holdout_scenarios=None):
    """Split trials into a training and a validation set

    Args:
        records (list): TrialRecord
        holdout_conditions (list): (speed m/s, gap s) pairs for validation
        holdout_scenarios (list): scenario ids for validation

    Returns:
        tuple: (training records, validation records)
    """
    logger = logging.getLogger(__name__)
    held = set()
    for speed, gap in (holdout_conditions or []):
        held.add((round(speed, 6), round(gap, 6)))
    scenarios = set(str(s) for s in (holdout_scenarios or []))
    train, validation = [], []
    for r in records:
        if condition_key(r) in held or str(r.scenario_id) in scenarios:
            validation.append(r)
        else:
            train.append(r)
    logger.info('Split %i trials into %i training and %i validation' % (
        len(records), len(train), len(validation)))
    return train, validation


DATASET_ONE_HOLDOUT = (
    (util.to_mps(25, 'mph'), 4.0),
    (util.to_mps(35, 'mph'), 5.0))
DATASET_TWO_HOLDOUT = ('scenario_four',)
