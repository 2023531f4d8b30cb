#!/usr/bin/env python
# -*- coding: utf-8 -*-

from crossing_sim.cue import log_cue

from collections import namedtuple

import logging
import numpy as np


SHIFTED_WALD = 'shifted_wald'
GAUSSIAN = 'gaussian'

FAMILY_ALIASES = {
    'sw': SHIFTED_WALD, 'shifted_wald': SHIFTED_WALD,
    'shiftedwald': SHIFTED_WALD, 'shifted-wald': SHIFTED_WALD,
    'gauss': GAUSSIAN, 'gaussian': GAUSSIAN, 'g': GAUSSIAN
}

InitiationParams = namedtuple(
    'InitiationParams', ['beta1', 'beta2', 'beta3', 'beta4', 'b', 'family'],
    defaults=(None, SHIFTED_WALD))


class InvalidParamsError(ValueError):
    pass


class DegenerateLinkError(ArithmeticError):
    pass


def family_name(family):
    """Canonical family name from user input (sw, gauss, ...)"""
    try:
        return FAMILY_ALIASES[str(family).strip().lower()]
    except KeyError as e:
        raise InvalidParamsError('Unknown initiation family: %s' % family)


def check_params(ip):
    """Validate InitiationParams

    Raises:
        InvalidParamsError: b missing for the Shifted Wald family, b given
            for the Gaussian family, b <= 0, or non-finite coefficients
    """
    family = family_name(ip.family)
    betas = np.array([ip.beta1, ip.beta2, ip.beta3, ip.beta4], dtype=float)
    if not np.all(np.isfinite(betas)):
        raise InvalidParamsError('link coefficients must be finite')
    if family == SHIFTED_WALD:
        if ip.b is None:
            raise InvalidParamsError('b is required for the Shifted Wald')
        if not ip.b > 0:
            raise InvalidParamsError('b must be > 0, got %s' % ip.b)
    elif ip.b is not None:
        raise InvalidParamsError('b is only defined for the Shifted Wald')
    return family


class InitiationModel(object):
    """Main InitiationModel Class

    Crossing initiation time, measured from t_pass of the accepted gap, with
    distribution parameters linked to the log collision cue of that gap.
    Inheriting classes implement the family specific parts.
    """
    family = None

    def __init__(self, params):
        check_params(params)
        self.params = params

    @property
    def logger(self):
        component = "{}.{}".format(type(self).__module__, type(self).__name__)
        return logging.getLogger(component)

    def link(self, theta_dot):
        """Distribution parameters for one cue value"""
        raise NotImplementedError

    def linked(self, theta_dot):
        """Vectorized linear predictors (location-like, spread-like)

        Returns:
            tuple: two arrays, beta1 * ln + beta2 and beta3 * ln + beta4
        """
        log_td = log_cue(theta_dot)
        p = self.params
        return (p.beta1 * log_td + p.beta2, p.beta3 * log_td + p.beta4)

    def pdf(self, t, theta_dot):
        return np.exp(self.logpdf(t, theta_dot))

    def logpdf(self, t, theta_dot):
        raise NotImplementedError

    def cdf(self, t, theta_dot):
        raise NotImplementedError

    def quantile(self, q, theta_dot):
        raise NotImplementedError

    def mean(self, theta_dot):
        raise NotImplementedError

    def sample(self, theta_dot, rng, size=None):
        raise NotImplementedError

    def is_degenerate(self, theta_dot):
        raise NotImplementedError

    def nll(self, t_int, theta_dot):
        """Negative log-likelihood of observed initiation times

        Degenerate links give +inf so that an optimizer backs away.

        Args:
            t_int (array): initiation times
            theta_dot (array): cue of the accepted gap of each observation

        Returns:
            float: the negative log-likelihood
        """
        if np.any(self.is_degenerate(theta_dot)):
            return np.inf
        with np.errstate(divide='ignore', invalid='ignore'):
            total = -np.sum(self.logpdf(t_int, theta_dot))
        if np.isnan(total):
            return np.inf
        return float(total)


def from_params(ip):
    """Build the InitiationModel matching the params family

    Args:
        ip (InitiationParams): coefficients and family

    Returns:
        InitiationModel: a ShiftedWaldModel or a GaussianModel
    """
    family = check_params(ip)
    if family == SHIFTED_WALD:
        from crossing_sim.initiation_models import shifted_wald
        return shifted_wald.ShiftedWaldModel(ip)
    from crossing_sim.initiation_models import gaussian
    return gaussian.GaussianModel(ip)


def mixture_density(t, gaps, probs, ip):
    """Sub-probability density of crossing initiation on the scenario clock

    Sum over gaps of P_n times the initiation density anchored at t_pass_n.

    Args:
        t (array): times on the global scenario clock
        gaps (GapSchedule): schedule with t_pass and theta_dot arrays
        probs (list): unconditional acceptance probability of every gap
        ip (InitiationParams): initiation coefficients

    Returns:
        ndarray: the density at t
    """
    model = from_params(ip)
    t = np.asarray(t, dtype=float)
    density = np.zeros_like(t)
    for t_pass, theta_dot, weight in zip(gaps.t_pass, gaps.theta_dot, probs):
        if weight == 0:
            continue
        density = density + weight * model.pdf(t - t_pass, theta_dot)
    return density


def mixture_cdf(t, gaps, probs, ip, condition_on_crossing=False):
    """Cumulative counterpart of mixture_density

    Args:
        t (array): times on the global scenario clock
        gaps (GapSchedule): schedule with t_pass and theta_dot arrays
        probs (list): unconditional acceptance probability of every gap
        ip (InitiationParams): initiation coefficients
        condition_on_crossing (bool): divide by sum(P_n) so the cdf reaches 1

    Returns:
        ndarray: the cdf at t
    """
    model = from_params(ip)
    t = np.asarray(t, dtype=float)
    cdf = np.zeros_like(t)
    for t_pass, theta_dot, weight in zip(gaps.t_pass, gaps.theta_dot, probs):
        if weight == 0:
            continue
        cdf = cdf + weight * model.cdf(t - t_pass, theta_dot)
    if condition_on_crossing:
        total = float(np.sum(probs))
        if total <= 0:
            raise ArithmeticError('no crossing mass to condition on')
        cdf = cdf / total
    return cdf
