#!/usr/bin/env python
# -*- coding: utf-8 -*-

from crossing_sim.initiation_models import InitiationModel
from crossing_sim.initiation_models import DegenerateLinkError
from crossing_sim.initiation_models import GAUSSIAN

from scipy import stats

import numpy as np


SIGMA_FLOOR = 1e-3


def link_gauss(theta_dot, ip):
    """Normal parameters linked to a collision cue

    mu = beta1 ln(theta_dot) + beta2, sigma = beta3 ln(theta_dot) + beta4

    Args:
        theta_dot (float): cue in rad/s
        ip (InitiationParams): Gaussian coefficients

    Returns:
        tuple: (mu, sigma) in seconds
    """
    return GaussianModel(ip).link(theta_dot)


class GaussianModel(InitiationModel):
    """Gaussian initiation model

    Not truncated at zero: negative initiation times keep their mass, which
    negative_time_mass reports.
    """
    family = GAUSSIAN

    def link(self, theta_dot):
        mu, sigma = self.linked(theta_dot)
        mu, sigma = float(mu), float(sigma)
        if sigma <= SIGMA_FLOOR:
            raise DegenerateLinkError(
                'sigma(theta_dot=%s)=%s <= %s' % (
                    theta_dot, sigma, SIGMA_FLOOR))
        return mu, sigma

    def is_degenerate(self, theta_dot):
        _, sigma = self.linked(theta_dot)
        return sigma <= SIGMA_FLOOR

    def _linked_checked(self, theta_dot):
        mu, sigma = self.linked(theta_dot)
        if np.any(sigma <= SIGMA_FLOOR):
            raise DegenerateLinkError(
                'sigma <= %s for some collision cues' % SIGMA_FLOOR)
        return mu, sigma

    def logpdf(self, t, theta_dot):
        mu, sigma = self.linked(theta_dot)
        with np.errstate(invalid='ignore'):
            return stats.norm.logpdf(t, loc=mu, scale=sigma)

    def pdf(self, t, theta_dot):
        mu, sigma = self._linked_checked(theta_dot)
        return stats.norm.pdf(t, loc=mu, scale=sigma)

    def cdf(self, t, theta_dot):
        mu, sigma = self._linked_checked(theta_dot)
        return stats.norm.cdf(t, loc=mu, scale=sigma)

    def quantile(self, q, theta_dot):
        mu, sigma = self._linked_checked(theta_dot)
        return stats.norm.ppf(q, loc=mu, scale=sigma)

    def mean(self, theta_dot):
        mu, _ = self._linked_checked(theta_dot)
        return mu

    def sample(self, theta_dot, rng, size=None):
        mu, sigma = self._linked_checked(theta_dot)
        return rng.normal(mu, sigma, size=size)

    def negative_time_mass(self, theta_dot):
        """Probability mass the model puts on initiation before t_pass"""
        mu, sigma = self._linked_checked(theta_dot)
        mass = stats.norm.cdf(0.0, loc=mu, scale=sigma)
        if np.any(mass > 0.01):
            self.logger.warning(
                'Gaussian initiation model puts up to %.3f of its mass on '
                'negative times' % np.max(mass))
        return mass
