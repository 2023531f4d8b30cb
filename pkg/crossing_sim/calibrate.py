#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Maximum likelihood calibration of the decision and initiation models"""

from crossing_sim import util
from crossing_sim import evaluate
from crossing_sim.cue import log_cue
from crossing_sim.params import ModelParams
from crossing_sim.decision import DecisionParams, acceptance_probs
from crossing_sim.initiation_models import InitiationParams, from_params
from crossing_sim.initiation_models import family_name, SHIFTED_WALD

from collections import namedtuple
from joblib import Parallel, delayed
from scipy import optimize

import logging
import numpy as np


Z_95 = 1.959964

OptimizerConfig = namedtuple(
    'OptimizerConfig',
    ['method', 'n_starts', 'jitter', 'max_iter', 'tol', 'seed', 'n_jobs',
     'hessian_step'],
    defaults=('BFGS', 5, 0.5, 5000, 1e-6, 0, 1, 1e-4))

GRADIENT_METHODS = ('bfgs', 'l-bfgs-b', 'cg', 'slsqp', 'tnc')

FitResult = namedtuple(
    'FitResult',
    ['estimates', 'neg_log_likelihood', 'converged', 'iterations', 'ci95',
     'covariance', 'singular', 'names', 'start_nlls', 'n_obs'],
    defaults=(None, None, 0))

CalibrationReport = namedtuple(
    'CalibrationReport',
    ['params', 'decision', 'initiation', 'family', 'flow_rules',
     'n_decision', 'n_initiation', 'll_decision', 'll_initiation', 'll_total',
     'k_decision', 'k_initiation', 'bic_decision', 'bic_initiation',
     'bic_total'])


class EmptyDataError(ValueError):
    pass


class MissingInitiationTimeError(ValueError):
    pass


class NonFiniteObjectiveError(ArithmeticError):
    pass


def decision_arrays(data):
    """theta_dot, x1, x2 and u arrays of a list of TrialRecord"""
    if len(data) == 0:
        raise EmptyDataError('no trials to fit the decision model on')
    theta_dot = np.array([r.theta_dot for r in data], dtype=float)
    x1 = np.array([r.x1 for r in data], dtype=float)
    x2 = np.array([r.x2 for r in data], dtype=float)
    u = np.array([r.accepted for r in data], dtype=float)
    return theta_dot, x1, x2, u


def initiation_arrays(data):
    """t_int and theta_dot arrays of accepted TrialRecord"""
    if len(data) == 0:
        raise EmptyDataError('no accepted trials to fit the initiation model')
    missing = [i for i, r in enumerate(data) if r.t_int_s is None]
    if missing:
        raise MissingInitiationTimeError(
            '%i record(s) without t_int, first at position %i' % (
                len(missing), missing[0]))
    t_int = np.array([r.t_int_s for r in data], dtype=float)
    theta_dot = np.array([r.theta_dot for r in data], dtype=float)
    return t_int, theta_dot


def _bernoulli_logit_nll(v, u):
    # -[u ln expit(v) + (1 - u) ln(1 - expit(v))], without overflow
    return float(np.sum(
        u * np.logaddexp(0, -v) + (1 - u) * np.logaddexp(0, v)))


def nll_decision(data, p):
    """Bernoulli negative log-likelihood of gap acceptance decisions

    Args:
        data (list): TrialRecord
        p (DecisionParams): coefficients

    Returns:
        float: the negative log-likelihood
    """
    theta_dot, x1, x2, u = decision_arrays(data)
    rho1, rho2 = (p.rho1, p.rho2) if p.flow_rules_enabled else (0.0, 0.0)
    v = p.rho0 * log_cue(theta_dot) + rho1 * x1 + rho2 * x2 + p.rho3
    return _bernoulli_logit_nll(v, u)


def acceptance_of(data, p):
    """Model acceptance probability of every record"""
    theta_dot, x1, x2, _ = decision_arrays(data)
    return acceptance_probs(theta_dot, x1, x2, p)


def nll_initiation(data, p):
    """Negative log-likelihood of crossing initiation times

    Args:
        data (list): accepted TrialRecord, all with t_int
        p (InitiationParams): coefficients and family

    Returns:
        float: the negative log-likelihood, inf on degenerate links
    """
    t_int, theta_dot = initiation_arrays(data)
    return from_params(p).nll(t_int, theta_dot)


def _coordinate_poll(objective, x, fx, step, max_rounds=200):
    """Move along single coordinates while a step of the given size helps"""
    x = np.array(x, dtype=float)
    for _ in range(max_rounds):
        improved = False
        for i in range(len(x)):
            for sign in (1.0, -1.0):
                trial = x.copy()
                trial[i] += sign * step
                ft = objective(trial)
                if ft < fx:
                    x, fx, improved = trial, ft, True
                    break
        if not improved:
            break
    return x, fx


def _minimize_from(objective, x0, config, index):
    """One local minimization, quasi-Newton first, simplex as fallback"""
    logger = logging.getLogger(__name__)
    np.seterrcall(util.nplog)
    with np.errstate(all='call'):
        if not np.isfinite(objective(x0)):
            logger.debug('start %i: objective not finite, skipped' % index)
            return index, x0, np.inf, False, 0
        jac = None
        if config.method.lower() in GRADIENT_METHODS:
            def jac(v):
                return gradient(objective, v)
        res = optimize.minimize(
            objective, x0, method=config.method, jac=jac,
            options={'maxiter': config.max_iter, 'gtol': config.tol})
        iterations = int(res.nit)
        x, fx, converged = res.x, float(res.fun), bool(res.success)
        if not converged or not np.isfinite(fx):
            logger.debug('start %i: %s, switching to Nelder-Mead' % (
                index, res.message))
            if not np.isfinite(fx):
                x = x0
            res = optimize.minimize(
                objective, x, method='Nelder-Mead',
                options={'maxiter': config.max_iter * len(x0),
                         'xatol': config.tol, 'fatol': config.tol,
                         'adaptive': True})
            iterations += int(res.nit)
            if float(res.fun) <= fx or not np.isfinite(fx):
                x, fx = res.x, float(res.fun)
            converged = bool(res.success)
    logger.debug('start %i: nll=%f converged=%s' % (index, fx, converged))
    return index, np.asarray(x, dtype=float), fx, converged, iterations


def gradient(objective, x, step=1e-6):
    """Central finite difference gradient

    Args:
        objective (function): scalar function of a vector
        x (ndarray): evaluation point
        step (float): step relative to max(1, |x_i|)

    Returns:
        ndarray: the gradient
    """
    x = np.asarray(x, dtype=float)
    g = np.empty(len(x))
    for i in range(len(x)):
        h = step * max(1.0, abs(x[i]))
        up, down = x.copy(), x.copy()
        up[i] += h
        down[i] -= h
        g[i] = (objective(up) - objective(down)) / (2 * h)
    return g


def hessian(objective, x, step=1e-4):
    """Central finite difference Hessian

    Args:
        objective (function): scalar function of a vector
        x (ndarray): evaluation point
        step (float): absolute step on every coordinate

    Returns:
        ndarray: symmetric (n, n) matrix
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    h = np.zeros((n, n))
    f0 = objective(x)
    eye = np.eye(n) * step
    for i in range(n):
        h[i, i] = (objective(x + eye[i]) - 2 * f0 +
                   objective(x - eye[i])) / step ** 2
        for j in range(i + 1, n):
            h[i, j] = h[j, i] = (
                objective(x + eye[i] + eye[j]) -
                objective(x + eye[i] - eye[j]) -
                objective(x - eye[i] + eye[j]) +
                objective(x - eye[i] - eye[j])) / (4 * step ** 2)
    return h


def confidence_intervals(fit, objective, step=1e-4, noise=100.0):
    """Wald 95% intervals from the observed information

    The information counts as singular when it is not positive definite,
    with eigenvalues below the rounding resolution of the finite
    differences, noise * eps * |nll| / step**2, taken as zero.

    Args:
        fit (FitResult): a fit on the scale of the objective's vector
        objective (function): the negative log-likelihood
        step (float): finite difference step
        noise (float): multiple of the rounding resolution under which an
            eigenvalue counts as zero

    Returns:
        tuple: (list of (lower, upper), covariance, singular flag)
    """
    logger = logging.getLogger(__name__)
    x = np.asarray(fit.estimates, dtype=float)
    nan = [(np.nan, np.nan)] * len(x)
    with np.errstate(all='ignore'):
        info = hessian(objective, x, step)
        f0 = objective(x)
    if not np.all(np.isfinite(info)) or not np.isfinite(f0):
        logger.warning('Information matrix is not finite')
        return nan, np.full((len(x), len(x)), np.nan), True
    eig = np.linalg.eigvalsh(info)
    floor = noise * np.finfo(float).eps * max(abs(f0), 1.0) / step ** 2
    try:
        np.linalg.cholesky(info)
        positive = True
    except np.linalg.LinAlgError:
        positive = False
    if not positive or eig.min() <= floor:
        logger.warning(
            'Singular information matrix (eigenvalues %s), confidence '
            'intervals are not available' % eig)
        return nan, np.full((len(x), len(x)), np.nan), True
    cov = np.linalg.inv(info)
    se = np.sqrt(np.diag(cov))
    ci = [(float(v - Z_95 * s), float(v + Z_95 * s)) for v, s in zip(x, se)]
    return ci, cov, False


def _jittered_starts(objective, init, config, max_halvings=20):
    """init followed by jittered copies where the objective is finite

    A jitter that leaves the feasible region is halved until it comes
    back; starts that never do are dropped with a warning.
    """
    logger = logging.getLogger(__name__)
    rng = np.random.default_rng(config.seed)
    starts = [init]
    for i in range(1, max(1, config.n_starts)):
        step = config.jitter * rng.standard_normal(len(init))
        for _ in range(max_halvings):
            with np.errstate(all='ignore'):
                feasible = np.isfinite(objective(init + step))
            if feasible:
                starts.append(init + step)
                break
            step = step / 2
        else:
            logger.debug('start %i: no finite jitter around init' % i)
    if len(starts) < config.n_starts:
        logger.warning('Only %i of %i starts are feasible' % (
            len(starts), config.n_starts))
    return starts


def fit_mle(objective, init, config=None, names=None, n_obs=0):
    """Multi-start minimization of a negative log-likelihood

    The first start is init, the others are jittered copies of it, shrunk
    until the objective is finite. Starts run in parallel with joblib and
    are merged by (nll, start index); the best one is polished with
    coordinate steps of size config.tol.

    Args:
        objective (function): negative log-likelihood of a parameter vector
        init (array): initial vector
        config (OptimizerConfig): optimizer settings
        names (list): parameter names, for reporting

    Returns:
        FitResult: with vector estimates and Wald intervals
    """
    logger = logging.getLogger(__name__)
    if config is None:
        config = OptimizerConfig()
    init = np.asarray(init, dtype=float)
    if not np.isfinite(objective(init)):
        raise NonFiniteObjectiveError(
            'objective is not finite at the initial point %s' % init)
    starts = _jittered_starts(objective, init, config)
    n_jobs = util.cap_jobs(config.n_jobs)
    runs = Parallel(n_jobs=n_jobs)(
        delayed(_minimize_from)(objective, x0, config, i)
        for i, x0 in enumerate(starts))
    runs.sort(key=lambda r: (r[2], r[0]))
    index, x, fx, converged, _ = runs[0]
    iterations = sum(r[4] for r in runs)
    x, fx = _coordinate_poll(objective, x, fx, config.tol)
    start_nlls = [r[2] for r in sorted(runs, key=lambda r: r[0])]
    if not converged:
        logger.warning('Best start (%i) did not report convergence' % index)
    logger.info('MLE: nll=%f from start %i of %i' % (fx, index, len(starts)))
    fit = FitResult(x, fx, converged, iterations, None, None, None,
                    names, start_nlls, n_obs)
    ci, cov, singular = confidence_intervals(
        fit, objective, config.hessian_step)
    return fit._replace(ci95=ci, covariance=cov, singular=singular)


DECISION_INIT = (-1.0, 0.0, 0.0, -5.0)
SW_INIT = (0.0, 4.0, 0.0, -1.0, 5.0)


def decision_objective(data, flow_rules=True):
    """Decision NLL as a function of the coefficient vector

    Args:
        data (list): TrialRecord, accepted and rejected
        flow_rules (bool): vector (rho0, rho1, rho2, rho3), else (rho0, rho3)

    Returns:
        tuple: (objective, parameter names)
    """
    theta_dot, x1, x2, u = decision_arrays(data)
    log_td = log_cue(theta_dot)
    if flow_rules:
        def objective(x):
            return _bernoulli_logit_nll(
                x[0] * log_td + x[1] * x1 + x[2] * x2 + x[3], u)
        return objective, ['rho0', 'rho1', 'rho2', 'rho3']

    def objective(x):
        return _bernoulli_logit_nll(x[0] * log_td + x[1], u)
    return objective, ['rho0', 'rho3']


def fit_decision(data, flow_rules=True, config=None, init=None):
    """Fit rho0..rho3 of the gap acceptance logit

    Args:
        data (list): TrialRecord, accepted and rejected
        flow_rules (bool): estimate rho1 and rho2, else fix them at 0
        config (OptimizerConfig): optimizer settings
        init (DecisionParams): starting point

    Returns:
        FitResult: estimates as DecisionParams, ci95 keyed by name
    """
    logger = logging.getLogger(__name__)
    objective, names = decision_objective(data, flow_rules)
    if init is None:
        init = DecisionParams(*DECISION_INIT, flow_rules_enabled=flow_rules)
    x0 = [getattr(init, name) for name in names]
    logger.info('Fitting decision model on %i trials (flow rules %s)' % (
        len(data), 'on' if flow_rules else 'off'))
    fit = fit_mle(objective, x0, config, names, n_obs=len(data))
    values = dict(zip(names, fit.estimates))
    estimates = DecisionParams(
        float(values['rho0']), float(values.get('rho1', 0.0)),
        float(values.get('rho2', 0.0)), float(values['rho3']), flow_rules)
    return fit._replace(estimates=estimates, ci95=dict(zip(names, fit.ci95)))


def initiation_objective(data, family='sw', log_b=True):
    """Initiation NLL as a function of the coefficient vector

    The vector is (beta1, beta2, beta3, beta4) for the Gaussian family and
    (beta1, beta2, beta3, beta4, log b) for the Shifted Wald, or b itself
    when log_b is False. Degenerate links give inf.

    Args:
        data (list): accepted TrialRecord, all with t_int
        family (string): 'sw' or 'gauss'
        log_b (bool): optimize b on the log scale

    Returns:
        tuple: (objective, parameter names)
    """
    family = family_name(family)
    t_int, theta_dot = initiation_arrays(data)
    log_td = log_cue(theta_dot)
    names = ['beta1', 'beta2', 'beta3', 'beta4']
    if family == SHIFTED_WALD:
        def objective(x):
            gamma = x[0] * log_td + x[1]
            if np.any(gamma <= 1e-6):
                return np.inf
            tau = x[2] * log_td + x[3]
            s = t_int - tau
            if np.any(s <= 0):
                return np.inf
            if log_b:
                b = np.exp(x[4])
            elif x[4] > 0:
                b = x[4]
            else:
                return np.inf
            return float(-np.sum(
                np.log(b) - 0.5 * np.log(2 * np.pi * s ** 3) -
                (b - gamma * s) ** 2 / (2 * s)))
        return objective, names + ['log_b' if log_b else 'b']

    def objective(x):
        sigma = x[2] * log_td + x[3]
        if np.any(sigma <= 1e-3):
            return np.inf
        mu = x[0] * log_td + x[1]
        return float(np.sum(
            np.log(sigma) + 0.5 * np.log(2 * np.pi) +
            (t_int - mu) ** 2 / (2 * sigma ** 2)))
    return objective, names


def fit_initiation(data, family='sw', config=None, init=None):
    """Fit the linked initiation time model on accepted trials

    b is optimized as log(b); its interval comes from the delta method.

    Args:
        data (list): TrialRecord; rejected ones are ignored
        family (string): 'sw' or 'gauss'
        config (OptimizerConfig): optimizer settings
        init (InitiationParams): starting point

    Returns:
        FitResult: estimates as InitiationParams, ci95 keyed by name
    """
    logger = logging.getLogger(__name__)
    family = family_name(family)
    accepted = [r for r in data if r.accepted == 1]
    t_int, _ = initiation_arrays(accepted)
    objective, names = initiation_objective(accepted, family)
    if family == SHIFTED_WALD:
        if init is None:
            beta4 = min(SW_INIT[3], float(np.min(t_int)) - 0.5)
            init = InitiationParams(SW_INIT[0], SW_INIT[1], SW_INIT[2], beta4,
                                    SW_INIT[4], family)
        x0 = [init.beta1, init.beta2, init.beta3, init.beta4, np.log(init.b)]
    else:
        if init is None:
            init = InitiationParams(
                0.0, float(np.mean(t_int)), 0.0,
                max(float(np.std(t_int)), 0.1), None, family)
        x0 = [init.beta1, init.beta2, init.beta3, init.beta4]

    logger.info('Fitting %s initiation model on %i accepted trials' % (
        family, len(t_int)))
    fit = fit_mle(objective, x0, config, names, n_obs=len(t_int))
    est = fit.estimates
    ci = dict(zip(names, fit.ci95))
    b = None
    if family == SHIFTED_WALD:
        b = float(np.exp(est[4]))
        lo, hi = ci.pop('log_b')
        half = (hi - lo) / 2 * b
        ci['b'] = (b - half, b + half)
    estimates = InitiationParams(
        float(est[0]), float(est[1]), float(est[2]), float(est[3]), b, family)
    return fit._replace(estimates=estimates, ci95=ci)


def fit_model(data, family='sw', flow_rules=True, config=None):
    """Calibrate both model components and report likelihoods and BIC

    The total BIC uses k = all free parameters and n = decision trials.

    Args:
        data (list): TrialRecord
        family (string): 'sw' or 'gauss'
        flow_rules (bool): estimate rho1 and rho2
        config (OptimizerConfig): optimizer settings

    Returns:
        CalibrationReport: fits, log-likelihoods and BICs
    """
    decision_fit = fit_decision(data, flow_rules, config)
    initiation_fit = fit_initiation(data, family, config)
    family = initiation_fit.estimates.family
    n_decision = decision_fit.n_obs
    n_initiation = initiation_fit.n_obs
    k_decision = len(decision_fit.names)
    k_initiation = len(initiation_fit.names)
    ll_decision = -decision_fit.neg_log_likelihood
    ll_initiation = -initiation_fit.neg_log_likelihood
    ll_total = ll_decision + ll_initiation
    return CalibrationReport(
        ModelParams(decision_fit.estimates, initiation_fit.estimates),
        decision_fit, initiation_fit, family, flow_rules,
        n_decision, n_initiation, ll_decision, ll_initiation, ll_total,
        k_decision, k_initiation,
        evaluate.bic(k_decision, n_decision, ll_decision),
        evaluate.bic(k_initiation, n_initiation, ll_initiation),
        evaluate.bic(k_decision + k_initiation, n_decision, ll_total))


def fit_to_dict(fit):
    dic = {
        'neg_log_likelihood': fit.neg_log_likelihood,
        'converged': fit.converged,
        'iterations': fit.iterations,
        'singular_information': fit.singular,
        'n_obs': fit.n_obs,
        'start_nlls': fit.start_nlls,
        'estimates': {},
        'ci95': {k: list(v) for k, v in fit.ci95.items()},
    }
    for name, value in fit.estimates._asdict().items():
        dic['estimates'][name] = value
    if fit.covariance is not None:
        dic['covariance'] = np.asarray(fit.covariance)
    return dic


def report_to_dict(report):
    """JSON view of a CalibrationReport"""
    return {
        'family': report.family,
        'flow_rules': report.flow_rules,
        'decision': fit_to_dict(report.decision),
        'initiation': fit_to_dict(report.initiation),
        'n_decision': report.n_decision,
        'n_initiation': report.n_initiation,
        'log_likelihood': {
            'decision': report.ll_decision,
            'initiation': report.ll_initiation,
            'total': report.ll_total},
        'bic': {
            'decision': report.bic_decision,
            'initiation': report.bic_initiation,
            'total': report.bic_total,
            'formula': 'k ln(n) - 2 LL; total: k_decision + k_initiation '
                       'parameters, n = decision trials'},
    }
