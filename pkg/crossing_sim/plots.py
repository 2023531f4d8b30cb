#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Tidy tables behind gap acceptance, initiation time and density plots"""

from crossing_sim import trials
from crossing_sim import decision
from crossing_sim import scenario
from crossing_sim import calibrate
from crossing_sim.initiation_models import from_params, mixture_density

from collections import OrderedDict
from scipy import stats

import csv
import logging
import numpy as np


BAND = (2.5, 97.5)
KINDS = ('gap-acceptance-grid', 'initiation-means', 'density-timeline',
         'scenario-acceptance')


class ShapeMismatchError(ValueError):
    pass


def _require(value, what, kind):
    if value is None or (hasattr(value, '__len__') and len(value) == 0):
        raise ShapeMismatchError('%s requires %s' % (kind, what))


def _group(records, key):
    groups = OrderedDict()
    for r in records:
        groups.setdefault(key(r), []).append(r)
    return groups


def gap_acceptance_grid(params, records):
    """Observed and predicted acceptance per (speed, gap) condition

    The band is the 2.5-97.5% range of the acceptance rate a sample of the
    condition's size would show under the model.

    Args:
        params (ModelParams): model parameters
        records (list): TrialRecord

    Returns:
        list: one OrderedDict per condition
    """
    _require(records, 'trial records', 'gap-acceptance-grid')
    rows = []
    groups = _group(records, trials.condition_key)
    for (speed, gap), group in sorted(groups.items()):
        n = len(group)
        predicted = float(np.mean(
            calibrate.acceptance_of(group, params.decision)))
        low, high = stats.binom.ppf(np.array(BAND) / 100, n, predicted) / n
        rows.append(OrderedDict([
            ('speed_mps', speed), ('gap_s', gap), ('n', n),
            ('observed', sum(r.accepted for r in group) / float(n)),
            ('predicted', predicted),
            ('predicted_p2_5', float(low)), ('predicted_p97_5', float(high))]))
    return rows


def initiation_means(params, records):
    """Observed and predicted initiation time summaries per condition

    Args:
        params (ModelParams): model parameters
        records (list): TrialRecord; only accepted ones are used

    Returns:
        list: one OrderedDict per condition with accepted trials
    """
    accepted = trials.accepted_only(records or [])
    _require(accepted, 'accepted trial records', 'initiation-means')
    model = from_params(params.initiation)
    rows = []
    for (speed, gap), group in sorted(
            _group(accepted, trials.condition_key).items()):
        t_int = np.array([r.t_int_s for r in group])
        theta_dot = float(np.mean([r.theta_dot for r in group]))
        low, high = np.percentile(t_int, BAND)
        q_low, q_high = model.quantile(np.array(BAND) / 100, theta_dot)
        rows.append(OrderedDict([
            ('speed_mps', speed), ('gap_s', gap), ('n', len(group)),
            ('theta_dot_radps', theta_dot),
            ('observed_mean', float(np.mean(t_int))),
            ('observed_p2_5', float(low)), ('observed_p97_5', float(high)),
            ('predicted_mean', float(model.mean(theta_dot))),
            ('predicted_p2_5', float(q_low)),
            ('predicted_p97_5', float(q_high))]))
    return rows


def density_timeline(params, cfg, dt=0.02, t_end=None):
    """Mixture density of crossing initiation on the scenario clock

    Args:
        params (ModelParams): model parameters
        cfg (ScenarioConfig): the scene
        dt (float): sampling step in seconds
        t_end (float): end of the timeline, default 10 s after the last gap

    Returns:
        list: rows with t, density and the index of a gap whose t_pass
            falls in [t, t + dt), else 0
    """
    _require(cfg, 'a scenario', 'density-timeline')
    schedule = scenario.build_schedule(cfg)
    _, probs = scenario.analytic_probs(schedule, params)
    if t_end is None:
        t_end = schedule.t_pass[-1] + schedule.gap_size_s[-1] + 10.0
    t = np.arange(int(np.floor(t_end / dt)) + 1) * dt
    density = mixture_density(t, schedule, probs, params.initiation)
    marker = np.zeros(len(t), dtype=int)
    for i, t_pass in enumerate(schedule.t_pass):
        bin_index = int(np.floor(t_pass / dt + 1e-9))
        if bin_index < len(t):
            marker[bin_index] = i + 1
    return [OrderedDict([('t', float(t[i])), ('density', float(density[i])),
                         ('t_pass_marker', int(marker[i]))])
            for i in range(len(t))]


def scenario_acceptance(params, records):
    """Observed and predicted share of traversals crossing in each gap

    Args:
        params (ModelParams): model parameters
        records (list): TrialRecord from sequence traversals

    Returns:
        list: one OrderedDict per scenario and gap
    """
    _require(records, 'trial records', 'scenario-acceptance')
    rows = []
    for scenario_id, group in _group(records, lambda r: r.scenario_id).items():
        by_gap = _group(sorted(group, key=lambda r: r.gap_index),
                        lambda r: r.gap_index)
        indices = list(by_gap)
        if indices != list(range(1, len(indices) + 1)):
            raise ShapeMismatchError(
                'scenario %s has gap indices %s, expected 1..%i' % (
                    scenario_id, indices, len(indices)))
        theta_dots = [float(np.mean([r.theta_dot for r in by_gap[i]]))
                      for i in indices]
        contexts = decision.sequence_contexts(theta_dots)
        predicted = decision.unconditional_gap_probs(
            contexts, params.decision)
        n_traversals = len(by_gap[1])
        for i, index in enumerate(indices):
            accepted = sum(r.accepted for r in by_gap[index])
            rows.append(OrderedDict([
                ('scenario_id', scenario_id), ('gap_index', index),
                ('gap_s', by_gap[index][0].gap_size_s),
                ('n_traversals', n_traversals),
                ('observed', accepted / float(n_traversals)),
                ('predicted', float(predicted[i]))]))
    return rows


def export_plot_data(kind, params, records=None, cfg=None, output=None):
    """Build the table of a plot kind and optionally write it as csv

    Args:
        kind (string): gap-acceptance-grid, initiation-means,
            density-timeline or scenario-acceptance
        params (ModelParams): model parameters
        records (list): TrialRecord, for the data based kinds
        cfg (ScenarioConfig): scene, for density-timeline
        output (string): csv path

    Returns:
        list: the rows
    """
    logger = logging.getLogger(__name__)
    dispatch = {
        'gap-acceptance-grid': lambda: gap_acceptance_grid(params, records),
        'initiation-means': lambda: initiation_means(params, records),
        'density-timeline': lambda: density_timeline(
            params, cfg, cfg.timestep_s if cfg is not None else 0.02),
        'scenario-acceptance': lambda: scenario_acceptance(params, records),
    }
    if kind not in dispatch:
        raise ValueError('plot kind must be one of %s' % (KINDS,))
    rows = dispatch[kind]()
    logger.info('Exported %i %s rows' % (len(rows), kind))
    if output is not None:
        write_rows(rows, output)
    return rows


def write_rows(rows, output):
    """Write a list of OrderedDict rows as csv"""
    logger = logging.getLogger(__name__)
    try:
        f = open(output, 'w', newline='')
    except (IOError, OSError) as e:
        logger.error('Failed to open output file: %s' % e)
        raise
    with f:
        writer = csv.writer(f, lineterminator='\n')
        if rows:
            writer.writerow(list(rows[0].keys()))
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v
                             for v in row.values()])
