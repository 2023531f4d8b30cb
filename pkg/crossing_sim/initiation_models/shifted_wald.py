#!/usr/bin/env python
# -*- coding: utf-8 -*-

from crossing_sim.initiation_models import InitiationModel
from crossing_sim.initiation_models import InvalidParamsError
from crossing_sim.initiation_models import DegenerateLinkError
from crossing_sim.initiation_models import SHIFTED_WALD

from collections import namedtuple
from scipy import stats, integrate

import numpy as np


GAMMA_FLOOR = 1e-6

SWParams = namedtuple('SWParams', ['b', 'gamma', 'tau'])


def _check_b(p):
    if not p.b > 0:
        raise InvalidParamsError('b must be > 0, got %s' % p.b)


def _scalar_or_array(value, like):
    if np.ndim(like) == 0:
        return float(value)
    return value


def sw_pdf(x, p):
    """Shifted Wald density

    b / sqrt(2 pi (x - tau)**3) * exp(-(b - gamma (x - tau))**2 / 2(x - tau))
    for x > tau, and 0 elsewhere.

    Args:
        x (array): time in seconds
        p (SWParams): b, gamma, tau

    Returns:
        ndarray: the density
    """
    _check_b(p)
    s = np.asarray(x, dtype=float) - p.tau
    out = np.zeros_like(s)
    pos = s > 0
    sp = s[pos]
    out[pos] = p.b / np.sqrt(2 * np.pi * sp ** 3) * np.exp(
        -(p.b - p.gamma * sp) ** 2 / (2 * sp))
    return _scalar_or_array(out, x)


def sw_logpdf(x, b, gamma, tau):
    """Vectorized log density, -inf at or below the onset"""
    s = np.asarray(x, dtype=float) - tau
    with np.errstate(divide='ignore', invalid='ignore'):
        logpdf = (np.log(b) - 0.5 * np.log(2 * np.pi * s ** 3) -
                  (b - gamma * s) ** 2 / (2 * s))
    return np.where(s > 0, logpdf, -np.inf)


def _invgauss(p):
    # mean b / gamma and shape b**2
    return stats.invgauss(mu=1.0 / (p.b * p.gamma), scale=p.b ** 2)


def _check_proper(p):
    _check_b(p)
    if not p.gamma > 0:
        raise InvalidParamsError(
            'gamma must be > 0 for a proper distribution, got %s' % p.gamma)


def sw_cdf(x, p):
    """Shifted Wald cumulative distribution (inverse Gaussian of mean b/gamma
    and shape b**2 shifted by tau)

    Args:
        x (array): time in seconds
        p (SWParams): b, gamma > 0, tau

    Returns:
        ndarray: probabilities
    """
    _check_proper(p)
    s = np.asarray(x, dtype=float) - p.tau
    out = np.where(s > 0, _invgauss(p).cdf(np.maximum(s, 0)), 0.0)
    return _scalar_or_array(out, x)


def sw_quantile(q, p):
    _check_proper(p)
    return p.tau + _invgauss(p).ppf(q)


def sw_mean(p):
    _check_proper(p)
    return p.tau + p.b / p.gamma


def sw_variance(p):
    _check_proper(p)
    return p.b / p.gamma ** 3


def sw_total_mass(p, epsabs=1e-9):
    """Integrate the density numerically

    Adaptive quadrature on (tau, tau + b/gamma + 12 sd) plus the closed form
    tail beyond it.

    Returns:
        float: should be 1 for a proper distribution
    """
    _check_proper(p)
    upper = p.tau + p.b / p.gamma + 12 * np.sqrt(p.b / p.gamma ** 3)
    body, _ = integrate.quad(
        lambda x: sw_pdf(x, p), p.tau, upper, epsabs=epsabs, limit=200)
    tail = float(_invgauss(p).sf(upper - p.tau))
    return body + tail


def link_sw(theta_dot, ip):
    """Shifted Wald parameters linked to a collision cue

    gamma = beta1 ln(theta_dot) + beta2, tau = beta3 ln(theta_dot) + beta4

    Args:
        theta_dot (float): cue in rad/s
        ip (InitiationParams): Shifted Wald coefficients

    Returns:
        SWParams: (b, gamma, tau)
    """
    model = ShiftedWaldModel(ip)
    return model.link(theta_dot)


def sample_sw(p, rng, size=None):
    """Exact draw(s) from the Shifted Wald

    tau plus an inverse Gaussian variate of mean b/gamma and shape b**2,
    from numpy's Wald generator.

    Args:
        p (SWParams): b, gamma, tau
        rng (numpy.random.Generator): random stream owned by the caller
        size (int): number of draws, None for a scalar

    Returns:
        float or ndarray: initiation times
    """
    _check_b(p)
    if not p.gamma > GAMMA_FLOOR:
        raise DegenerateLinkError(
            'gamma=%s leaves the Shifted Wald improper' % p.gamma)
    return p.tau + rng.wald(p.b / p.gamma, p.b ** 2, size=size)


class ShiftedWaldModel(InitiationModel):
    """Shifted Wald initiation model

    The tail magnitude gamma and onset tau are linear in the log cue, the
    deviation b is shared by all cues.
    """
    family = SHIFTED_WALD

    def link(self, theta_dot):
        gamma, tau = self.linked(theta_dot)
        gamma, tau = float(gamma), float(tau)
        if gamma <= GAMMA_FLOOR:
            self.logger.debug(
                'Degenerate link at theta_dot=%s: gamma=%s' % (
                    theta_dot, gamma))
            raise DegenerateLinkError(
                'gamma(theta_dot=%s)=%s <= %s' % (
                    theta_dot, gamma, GAMMA_FLOOR))
        return SWParams(self.params.b, gamma, tau)

    def is_degenerate(self, theta_dot):
        gamma, _ = self.linked(theta_dot)
        return gamma <= GAMMA_FLOOR

    def _linked_checked(self, theta_dot):
        gamma, tau = self.linked(theta_dot)
        if np.any(gamma <= GAMMA_FLOOR):
            raise DegenerateLinkError(
                'gamma <= %s for some collision cues' % GAMMA_FLOOR)
        return gamma, tau

    def logpdf(self, t, theta_dot):
        gamma, tau = self.linked(theta_dot)
        return sw_logpdf(t, self.params.b, gamma, tau)

    def pdf(self, t, theta_dot):
        self._linked_checked(theta_dot)
        return np.exp(self.logpdf(t, theta_dot))

    def cdf(self, t, theta_dot):
        gamma, tau = self._linked_checked(theta_dot)
        b = self.params.b
        s = np.asarray(t, dtype=float) - tau
        return np.where(
            s > 0,
            stats.invgauss.cdf(np.maximum(s, 0), mu=1 / (b * gamma),
                               scale=b ** 2),
            0.0)

    def quantile(self, q, theta_dot):
        gamma, tau = self._linked_checked(theta_dot)
        b = self.params.b
        return tau + stats.invgauss.ppf(q, mu=1 / (b * gamma), scale=b ** 2)

    def mean(self, theta_dot):
        gamma, tau = self._linked_checked(theta_dot)
        return tau + self.params.b / gamma

    def sample(self, theta_dot, rng, size=None):
        gamma, tau = self._linked_checked(theta_dot)
        b = self.params.b
        return tau + rng.wald(b / gamma, b ** 2, size=size)
