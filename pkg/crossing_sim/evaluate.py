#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Goodness of fit and model selection statistics"""

from collections import namedtuple, OrderedDict
from scipy.special import kolmogorov

import logging
import numpy as np


GoodnessReport = namedtuple(
    'GoodnessReport',
    ['bic', 'ks_d', 'ks_p', 'r_squared', 'rmse', 'n_obs'])


class InvalidCountsError(ValueError):
    pass


class EmptySampleError(ValueError):
    pass


class LengthMismatchError(ValueError):
    pass


class ZeroVarianceError(ArithmeticError):
    pass


class NonMonotoneCdfError(ArithmeticError):
    pass


def bic(k, n, log_likelihood):
    """Bayesian information criterion, k ln(n) - 2 LL

    Args:
        k (int): number of free parameters
        n (int): sample size
        log_likelihood (float): maximized log-likelihood

    Returns:
        float: the BIC, lower is better
    """
    if k < 0 or n < 1:
        raise InvalidCountsError('need k >= 0 and n >= 1, got k=%s n=%s' % (
            k, n))
    return k * np.log(n) - 2 * log_likelihood


def implied_sample_size(k, log_likelihood, bic_value):
    """Sample size that reconciles a reported log-likelihood and BIC"""
    if k <= 0:
        raise InvalidCountsError('k must be > 0 to recover n')
    return float(np.exp((bic_value + 2 * log_likelihood) / k))


def _kolmogorov_p(d, effective_n):
    # asymptotic Kolmogorov distribution; conservative for small samples
    return float(min(1.0, max(0.0, kolmogorov(np.sqrt(effective_n) * d))))


def ks_two_sample(a, b):
    """Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value

    D is the exact supremum of |F_a - F_b| over the merged order statistics.

    Args:
        a (array): first sample
        b (array): second sample

    Returns:
        tuple: (d, p)
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise EmptySampleError('both samples must be nonempty')
    merged = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, merged, side='right') / n
    cdf_b = np.searchsorted(b, merged, side='right') / m
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    return d, _kolmogorov_p(d, n * m / float(n + m))


def ks_one_sample(a, model_cdf):
    """One-sample Kolmogorov-Smirnov test against a model cdf

    Args:
        a (array): the sample
        model_cdf (function): vectorized cdf

    Returns:
        tuple: (d, p)
    """
    logger = logging.getLogger(__name__)
    x = np.sort(np.asarray(a, dtype=float))
    n = len(x)
    if n == 0:
        raise EmptySampleError('the sample is empty')
    cdf = np.asarray(model_cdf(x), dtype=float)
    if cdf.shape != x.shape:
        cdf = np.broadcast_to(cdf, x.shape)
    if np.any(~np.isfinite(cdf)) or np.any(np.diff(cdf) < -1e-12) or \
            cdf.min() < -1e-12 or cdf.max() > 1 + 1e-9:
        logger.error('Model cdf is not a monotone probability on the sample')
        raise NonMonotoneCdfError('model cdf is not monotone in [0, 1]')
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf - (i - 1) / n)
    d = float(max(d_plus, d_minus))
    return d, _kolmogorov_p(d, n)


def _paired(observed, predicted):
    observed = np.asarray(observed, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    if observed.shape != predicted.shape:
        raise LengthMismatchError('%i observed vs %i predicted values' % (
            observed.size, predicted.size))
    if observed.size < 2:
        raise LengthMismatchError('need at least 2 values')
    return observed, predicted


def r_squared(observed, predicted):
    """1 - SS_res / SS_tot, negative when worse than the mean"""
    observed, predicted = _paired(observed, predicted)
    ss_tot = np.sum((observed - observed.mean()) ** 2)
    if ss_tot == 0:
        raise ZeroVarianceError('observed values have no variance')
    return float(1 - np.sum((observed - predicted) ** 2) / ss_tot)


def rmse(observed, predicted):
    observed, predicted = _paired(observed, predicted)
    return float(np.sqrt(np.mean((observed - predicted) ** 2)))


def goodness_report(k, n, log_likelihood, sample=None, model_cdf=None,
                    observed=None, predicted=None):
    """Collect BIC, K-S and R2/RMSE into one report

    Statistics whose inputs are missing (or degenerate) are reported as nan.
    """
    logger = logging.getLogger(__name__)
    ks_d = ks_p = r2 = error = np.nan
    if sample is not None and model_cdf is not None and len(sample) > 0:
        ks_d, ks_p = ks_one_sample(sample, model_cdf)
    if observed is not None and predicted is not None and len(observed) > 1:
        error = rmse(observed, predicted)
        try:
            r2 = r_squared(observed, predicted)
        except ZeroVarianceError as e:
            logger.warning('R2 not available: %s' % e)
    return GoodnessReport(bic(k, n, log_likelihood), ks_d, ks_p, r2, error, n)


def condition_table(records, params, key=None):
    """Per-condition validation statistics

    Conditions default to (speed, gap size). For each condition, reports the
    decision and initiation log-likelihoods, their BIC, and a K-S test of
    the observed initiation times against the model mixture over the
    condition's accepted trials.

    Args:
        records (list): TrialRecord
        params (ModelParams): model parameters
        key (function): record to condition label

    Returns:
        list: one OrderedDict per condition
    """
    from crossing_sim import calibrate, trials
    from crossing_sim.initiation_models import from_params
    logger = logging.getLogger(__name__)
    if key is None:
        key = trials.condition_key
    groups = OrderedDict()
    for r in records:
        groups.setdefault(key(r), []).append(r)
    model = from_params(params.initiation)
    k_decision = 4 if params.decision.flow_rules_enabled else 2
    k_initiation = 5 if params.initiation.b is not None else 4
    rows = []
    for condition, group in groups.items():
        accepted = trials.accepted_only(group)
        ll_d = -calibrate.nll_decision(group, params.decision)
        row = OrderedDict([
            ('condition', condition), ('n_decision', len(group)),
            ('n_initiation', len(accepted)),
            ('ll_decision', ll_d),
            ('bic_decision', bic(k_decision, len(group), ll_d))])
        row['observed_rate'] = len(accepted) / float(len(group))
        row['predicted_rate'] = float(np.mean(
            calibrate.acceptance_of(group, params.decision)))
        if accepted:
            ll_i = -calibrate.nll_initiation(accepted, params.initiation)
            t_int, theta_dot = calibrate.initiation_arrays(accepted)
            row['ll_initiation'] = ll_i
            row['bic_initiation'] = bic(k_initiation, len(accepted), ll_i) \
                if np.isfinite(ll_i) else np.nan
            try:
                row['ks_d'], row['ks_p'] = ks_one_sample(
                    t_int, lambda t: np.mean(
                        model.cdf(t[:, np.newaxis], theta_dot[np.newaxis, :]),
                        axis=1))
            except ArithmeticError as e:
                logger.warning('Condition %s: K-S not available: %s' % (
                    condition, e))
                row['ks_d'] = row['ks_p'] = np.nan
        rows.append(row)
    return rows
