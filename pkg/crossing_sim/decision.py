#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Flow-aware gap acceptance

A logit model on the log collision cue, with two traffic flow dummies:
X1 flags a cue at least as strong as the largest one already rejected and X2
flags a cue at least as strong as the one of the following gap.
"""

from crossing_sim.cue import log_cue

from collections import namedtuple
from scipy.special import expit

import logging
import numpy as np


GapContext = namedtuple(
    'GapContext',
    ['index_n', 'theta_dot_current', 'theta_dot_max_rejected',
     'theta_dot_following'],
    defaults=(None, None))

DecisionParams = namedtuple(
    'DecisionParams', ['rho0', 'rho1', 'rho2', 'rho3', 'flow_rules_enabled'],
    defaults=(True,))


class InconsistentSequenceError(ValueError):
    pass


def flow_coefficients(p):
    """rho1 and rho2 as used by the model; zero when flow rules are off"""
    if not p.flow_rules_enabled:
        return 0.0, 0.0
    return p.rho1, p.rho2


def check_params(p):
    values = np.array([p.rho0, p.rho1, p.rho2, p.rho3], dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError('decision coefficients must be finite: %s' % (p,))


def rule_x1(ctx):
    """1 if the current cue is at least the maximum cue already rejected"""
    if ctx.theta_dot_max_rejected is None:
        return 0
    return int(ctx.theta_dot_current >= ctx.theta_dot_max_rejected)


def rule_x2(ctx):
    """1 if the current cue is at least the cue of the following gap"""
    if ctx.theta_dot_following is None:
        return 0
    return int(ctx.theta_dot_current >= ctx.theta_dot_following)


def utility(theta_dot, x1, x2, p):
    """Deterministic utility of accepting a gap

    Args:
        theta_dot (float): collision cue of the gap, rad/s
        x1 (int): rejection-memory dummy
        x2 (int): lookahead dummy
        p (DecisionParams): the coefficients

    Returns:
        float: rho0 * ln(theta_dot) + rho1 * x1 + rho2 * x2 + rho3
    """
    rho1, rho2 = flow_coefficients(p)
    return float(p.rho0 * log_cue(theta_dot) + rho1 * x1 + rho2 * x2 + p.rho3)


def gap_acceptance_prob(ctx, p):
    """Probability that a pedestrian facing this gap accepts it

    Args:
        ctx (GapContext): the gap
        p (DecisionParams): the coefficients

    Returns:
        float: logistic of the utility
    """
    v = utility(ctx.theta_dot_current, rule_x1(ctx), rule_x2(ctx), p)
    return float(expit(v))


def utilities(theta_dot, x1, x2, p):
    """Vectorized utility over arrays of cues and dummies"""
    rho1, rho2 = flow_coefficients(p)
    return (p.rho0 * log_cue(theta_dot) + rho1 * np.asarray(x1) +
            rho2 * np.asarray(x2) + p.rho3)


def acceptance_probs(theta_dot, x1, x2, p):
    """Vectorized gap_acceptance_prob"""
    return expit(utilities(theta_dot, x1, x2, p))


def sequence_contexts(theta_dots, flow_rules=True):
    """Gap contexts along a sequence for a pedestrian who rejected every
    earlier gap

    Args:
        theta_dots (list): cue of each gap, in traffic order
        flow_rules (bool): fill in the max rejected and following cues

    Returns:
        list: a GapContext per gap
    """
    contexts = []
    max_rejected = None
    n_gaps = len(theta_dots)
    for i, current in enumerate(theta_dots):
        current = float(current)
        following = None
        if flow_rules and i + 1 < n_gaps:
            following = float(theta_dots[i + 1])
        contexts.append(GapContext(
            i + 1, current, max_rejected if flow_rules else None, following))
        if max_rejected is None or current > max_rejected:
            max_rejected = current
    return contexts


def _check_sequence(gaps):
    indices = [g.index_n for g in gaps]
    if indices != list(range(1, len(gaps) + 1)):
        raise InconsistentSequenceError(
            'gap indices must run 1..N without holes, got %s' % indices)


def conditional_gap_probs(gaps, p):
    """Acceptance probability of each gap given that it is reached

    Args:
        gaps (list): ordered GapContext
        p (DecisionParams): the coefficients

    Returns:
        list: p_n for every gap
    """
    _check_sequence(gaps)
    return [gap_acceptance_prob(g, p) for g in gaps]


def unconditional_from_conditional(conditional):
    """Unroll the acceptance recursion

    P_n = p_n * (1 - P_1 - ... - P_{n-1}), evaluated as
    p_n * prod_{k<n} (1 - p_k).

    Args:
        conditional (list): p_n for every gap

    Returns:
        ndarray: P_n for every gap
    """
    conditional = np.asarray(conditional, dtype=float)
    waiting = 1.0
    out = np.empty_like(conditional)
    for i, p_n in enumerate(conditional):
        out[i] = p_n * waiting
        waiting *= (1.0 - p_n)
    return out


def unconditional_gap_probs(gaps, p):
    """Unconditional probability that a pedestrian crosses in each gap

    The residual 1 - sum(P_n) is the probability of never crossing.

    Args:
        gaps (list): ordered GapContext with the sequence cues filled in
        p (DecisionParams): the coefficients

    Returns:
        list: P_n for every gap
    """
    logger = logging.getLogger(__name__)
    probs = unconditional_from_conditional(conditional_gap_probs(gaps, p))
    logger.debug('Unconditional acceptance over %i gaps, never crossing: %f'
                 % (len(gaps), 1 - probs.sum()))
    return probs.tolist()
