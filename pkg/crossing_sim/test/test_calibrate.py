#!/usr/bin/env python
# -*- coding: utf-8 -*-

from crossing_sim import synth
from crossing_sim import evaluate
from crossing_sim import calibrate
from crossing_sim.trials import TrialRecord
from crossing_sim.params import BUILTIN_PARAMS
from crossing_sim.decision import DecisionParams
from crossing_sim.initiation_models import InitiationParams
from crossing_sim.calibrate import OptimizerConfig

from collections import OrderedDict

import pytest
import numpy as np


MPH_30 = 13.4112
DATASET_TWO = BUILTIN_PARAMS['dataset-two-sw']
SEQUENCES = OrderedDict([
    ('a', (3.0, 3.0, 4.0, 2.0, 5.0, 4.0, 6.0)),
    ('b', (4.0, 4.0, 3.0, 5.0, 5.0, 2.0, 6.0)),
    ('c', (2.0, 3.0, 3.0, 4.0, 4.0, 5.0, 5.0, 6.0)),
])
QUICK = OptimizerConfig(n_starts=2)


def _record(theta_dot=0.01, accepted=1, t_int=1.0, x1=0, x2=0):
    return TrialRecord('P1', 'grid', 1, 1.95, MPH_30, 3.0, theta_dot, x1, x2,
                       accepted, t_int if accepted else None)


def _scenario_records(n_per_cell, seed, params=DATASET_TWO):
    design = synth.Design('scenarios', (MPH_30,), None, SEQUENCES)
    return synth.synth_dataset(params, design, n_per_cell, seed)


def _constant_objective(u):
    def objective(x):
        return calibrate._bernoulli_logit_nll(np.full(len(u), x[0]), u)
    return objective


def _se(ci):
    lo, hi = ci
    return (hi - lo) / (2 * calibrate.Z_95)


def test_single_trial_ln2():
    p = DecisionParams(0.0, 0.0, 0.0, 0.0)
    assert calibrate.nll_decision([_record()], p) == pytest.approx(np.log(2))
    assert calibrate.nll_decision([_record(accepted=0)], p) == \
        pytest.approx(np.log(2))


def test_logit_nll_extreme_utilities():
    u = np.array([1.0, 0.0])
    assert np.isfinite(calibrate._bernoulli_logit_nll(
        np.array([1e4, -1e4]), u))
    assert calibrate._bernoulli_logit_nll(np.array([-800.0]),
                                          np.array([1.0])) == \
        pytest.approx(800.0)


def test_constant_probability_mle():
    u = np.array([1.0] * 3 + [0.0] * 7)
    fit = calibrate.fit_mle(_constant_objective(u), [0.0])
    p = 1 / (1 + np.exp(-fit.estimates[0]))
    assert p == pytest.approx(0.3, abs=1e-4)
    assert fit.converged


def test_quadratic_minimum():
    fit = calibrate.fit_mle(lambda x: (x[0] - 3.0) ** 2 + 1.0, [0.0],
                            names=['x'])
    assert fit.estimates[0] == pytest.approx(3.0, abs=1e-4)
    assert fit.neg_log_likelihood == pytest.approx(1.0)
    lo, hi = fit.ci95[0]
    assert lo < 3.0 < hi


def test_non_finite_start():
    with pytest.raises(calibrate.NonFiniteObjectiveError):
        calibrate.fit_mle(lambda x: np.inf, [0.0])


def test_bernoulli_interval():
    u = np.array([1.0, 0.0] * 50)
    fit = calibrate.fit_mle(_constant_objective(u), [0.3])
    lo, hi = fit.ci95[0]
    assert fit.estimates[0] == pytest.approx(0.0, abs=1e-4)
    assert (hi - lo) / 2 == pytest.approx(0.392, abs=1e-3)
    assert not fit.singular


def test_interval_shrinks_with_data():
    small = calibrate.fit_mle(_constant_objective(np.array([1.0, 0.0] * 50)),
                              [0.0])
    large = calibrate.fit_mle(_constant_objective(np.array([1.0, 0.0] * 200)),
                              [0.0])
    assert _se(large.ci95[0]) == pytest.approx(_se(small.ci95[0]) / 2,
                                               rel=1e-3)


def test_singular_information(caplog):
    data = [_record(accepted=int(i < 4), t_int=1.0) for i in range(10)]
    fit = calibrate.fit_decision(data, flow_rules=False, config=QUICK)
    assert fit.singular
    assert all(np.isnan(lo) and np.isnan(hi) for lo, hi in fit.ci95.values())
    assert 'Singular' in caplog.text


def test_multi_start_agreement():
    u = np.array([1.0] * 6 + [0.0] * 14)
    fit = calibrate.fit_mle(_constant_objective(u), [2.0],
                            OptimizerConfig(n_starts=4, seed=3))
    assert len(fit.start_nlls) == 4
    assert max(fit.start_nlls) - min(fit.start_nlls) < 1e-3
    assert fit.neg_log_likelihood <= min(fit.start_nlls)


def test_parallel_starts_match_serial():
    u = np.array([1.0] * 6 + [0.0] * 14)
    serial = calibrate.fit_mle(_constant_objective(u), [2.0],
                               OptimizerConfig(n_starts=4, n_jobs=1))
    parallel = calibrate.fit_mle(_constant_objective(u), [2.0],
                                 OptimizerConfig(n_starts=4, n_jobs=2))
    assert np.array_equal(serial.estimates, parallel.estimates)


def test_decision_recovery():
    data = _scenario_records(400, seed=17)
    fit = calibrate.fit_decision(data, flow_rules=True, config=QUICK)
    assert not fit.singular
    truth = DATASET_TWO.decision
    for name in ('rho0', 'rho1', 'rho2', 'rho3'):
        estimate = getattr(fit.estimates, name)
        assert abs(estimate - getattr(truth, name)) < 4 * _se(fit.ci95[name])
    assert fit.neg_log_likelihood == pytest.approx(
        calibrate.nll_decision(data, fit.estimates), rel=1e-9)


def test_decision_fit_is_local_minimum():
    data = _scenario_records(150, seed=4)
    fit = calibrate.fit_decision(data, flow_rules=True, config=QUICK)
    best = calibrate.nll_decision(data, fit.estimates)
    for name in ('rho0', 'rho1', 'rho2', 'rho3'):
        for step in (1e-3, -1e-3):
            moved = fit.estimates._replace(
                **{name: getattr(fit.estimates, name) + step})
            assert calibrate.nll_decision(data, moved) >= best - 1e-8


def test_flow_rules_nested():
    data = _scenario_records(150, seed=8)
    with_flow = calibrate.fit_decision(data, flow_rules=True, config=QUICK)
    without = calibrate.fit_decision(data, flow_rules=False, config=QUICK)
    assert with_flow.neg_log_likelihood <= without.neg_log_likelihood + 1e-6
    assert without.estimates.rho1 == 0.0
    assert without.estimates.flow_rules_enabled is False
    assert sorted(without.ci95) == ['rho0', 'rho3']


@pytest.mark.slow
def test_model_interval_coverage():
    decision_truth = DATASET_TWO.decision
    initiation_truth = DATASET_TWO.initiation
    covered = 0
    total = 0
    for seed in range(25):
        data = _scenario_records(700, seed=100 + seed)
        decision = calibrate.fit_decision(data, flow_rules=True,
                                          config=QUICK)
        initiation = calibrate.fit_initiation(data, 'sw', QUICK,
                                              initiation_truth)
        for fit, truth in ((decision, decision_truth),
                           (initiation, initiation_truth)):
            for name, (lo, hi) in fit.ci95.items():
                covered += lo <= getattr(truth, name) <= hi
                total += 1
    assert total == 25 * 9
    assert covered / float(total) >= 0.8


def test_shifted_wald_fit():
    params = BUILTIN_PARAMS['dataset-one-sw']
    data = synth.synth_dataset(params, synth.dataset_one_design(), 100, 5)
    accepted = [r for r in data if r.accepted == 1]
    fit = calibrate.fit_initiation(data, 'sw', QUICK, params.initiation)
    assert fit.n_obs == len(accepted)
    assert fit.estimates.family == 'shifted_wald'
    assert fit.estimates.b > 0
    assert fit.neg_log_likelihood <= \
        calibrate.nll_initiation(accepted, params.initiation) + 1e-6
    assert calibrate.nll_initiation(accepted, fit.estimates) == \
        pytest.approx(fit.neg_log_likelihood, rel=1e-6)
    assert 'b' in fit.ci95 and 'log_b' not in fit.ci95


def test_gaussian_fit():
    params = BUILTIN_PARAMS['dataset-one-gauss']
    # sigma of this table is only positive for the longer gaps
    design = synth.dataset_one_design()._replace(gaps_s=(4.0, 5.0))
    data = synth.synth_dataset(params, design, 150, 6)
    accepted = [r for r in data if r.accepted == 1]
    fit = calibrate.fit_initiation(data, 'gauss', QUICK, params.initiation)
    assert fit.estimates.b is None
    assert len(fit.ci95) == 4
    assert fit.neg_log_likelihood <= \
        calibrate.nll_initiation(accepted, params.initiation) + 1e-6


def test_gaussian_single_record():
    p = InitiationParams(0.0, 1.2, 0.0, 0.3, None, 'gaussian')
    assert calibrate.nll_initiation([_record(t_int=1.2)], p) == \
        pytest.approx(np.log(0.3 * np.sqrt(2 * np.pi)))


def test_shifted_wald_single_record():
    p = InitiationParams(0.0, 1.0, 0.0, 0.0, 1.0, 'shifted_wald')
    assert calibrate.nll_initiation([_record(t_int=1.0)], p) == \
        pytest.approx(0.9189385, abs=1e-6)


def test_missing_initiation_time():
    with pytest.raises(calibrate.MissingInitiationTimeError):
        calibrate.initiation_arrays([_record()._replace(t_int_s=None)])


def test_empty_data():
    with pytest.raises(calibrate.EmptyDataError):
        calibrate.fit_decision([])
    with pytest.raises(calibrate.EmptyDataError):
        calibrate.fit_initiation([_record(accepted=0)])


def test_fit_model_report():
    data = _scenario_records(150, seed=12)
    report = calibrate.fit_model(data, 'sw', True, QUICK)
    assert report.k_decision == 4
    assert report.k_initiation == 5
    assert report.n_decision == len(data)
    assert report.n_initiation == sum(r.accepted for r in data)
    assert report.ll_total == pytest.approx(
        report.ll_decision + report.ll_initiation)
    assert report.bic_total == pytest.approx(
        evaluate.bic(9, report.n_decision, report.ll_total))
    assert report.bic_decision == pytest.approx(
        evaluate.bic(4, report.n_decision, report.ll_decision))
    dic = calibrate.report_to_dict(report)
    assert dic['family'] == 'shifted_wald'
    assert set(dic['decision']['estimates']) >= {'rho0', 'rho3'}
    assert dic['bic']['total'] == report.bic_total


def _five_point_gradient(objective, x, h=1e-3):
    x = np.asarray(x, dtype=float)
    g = np.empty(len(x))
    for i in range(len(x)):
        e = np.zeros(len(x))
        e[i] = h
        g[i] = (-objective(x + 2 * e) + 8 * objective(x + e) -
                8 * objective(x - e) + objective(x - 2 * e)) / (12 * h)
    return g


def _sw_vector(ip):
    return np.array([ip.beta1, ip.beta2, ip.beta3, ip.beta4, np.log(ip.b)])


def test_ill_conditioned_information_keeps_intervals():
    def objective(x):
        return 0.5 * (1e6 * x[0] ** 2 + 1e-3 * x[1] ** 2)

    fit = calibrate.FitResult(np.zeros(2), 0.0, True, 0, None, None, None)
    ci, cov, singular = calibrate.confidence_intervals(fit, objective)
    assert not singular
    assert ci[0][1] == pytest.approx(calibrate.Z_95 * 1e-3, rel=1e-4)
    assert ci[1][1] == pytest.approx(calibrate.Z_95 * np.sqrt(1e3), rel=1e-4)


def test_negative_curvature_is_singular():
    fit = calibrate.FitResult(np.zeros(2), 0.0, True, 0, None, None, None)
    ci, _, singular = calibrate.confidence_intervals(
        fit, lambda x: x[0] ** 2 - x[1] ** 2)
    assert singular
    assert np.isnan(ci[0][0])


def test_shifted_wald_intervals_are_finite():
    data = _scenario_records(700, seed=300)
    fit = calibrate.fit_initiation(data, 'sw',
                                   OptimizerConfig(n_starts=5, seed=0),
                                   DATASET_TWO.initiation)
    assert not fit.singular
    for name, (lo, hi) in fit.ci95.items():
        assert np.isfinite(lo) and np.isfinite(hi)
        assert lo < getattr(fit.estimates, name) < hi


def test_jittered_starts_are_feasible():
    def objective(x):
        return (x[0] - 1.0) ** 2 if x[0] < 1.2 else np.inf

    fit = calibrate.fit_mle(objective, [1.0],
                            OptimizerConfig(n_starts=5, jitter=2.0, seed=5))
    assert len(fit.start_nlls) == 5
    assert all(np.isfinite(fit.start_nlls))
    assert fit.estimates[0] == pytest.approx(1.0, abs=1e-4)


def test_infeasible_jitter_is_dropped(caplog):
    def objective(x):
        return 0.0 if x[0] == 0.0 else np.inf

    starts = calibrate._jittered_starts(
        objective, np.zeros(1), OptimizerConfig(n_starts=3, jitter=1.0))
    assert len(starts) == 1
    assert 'Only 1 of 3 starts are feasible' in caplog.text


def test_gradient_matches_higher_order_differences():
    data = _scenario_records(100, seed=7)
    accepted = [r for r in data if r.accepted == 1]
    decision, _ = calibrate.decision_objective(data)
    initiation, _ = calibrate.initiation_objective(accepted, 'sw')
    rng = np.random.default_rng(11)
    d = DATASET_TWO.decision
    centres = ((decision, np.array([d.rho0, d.rho1, d.rho2, d.rho3])),
               (initiation, _sw_vector(DATASET_TWO.initiation)))
    for objective, centre in centres:
        for _ in range(10):
            x = centre + 0.01 * rng.standard_normal(len(centre))
            assert np.isfinite(objective(x))
            expected = _five_point_gradient(objective, x)
            g = calibrate.gradient(objective, x)
            assert np.linalg.norm(g - expected) <= \
                1e-4 * np.linalg.norm(expected)


def test_log_b_fit_matches_direct_b_fit():
    data = _scenario_records(300, seed=21)
    accepted = [r for r in data if r.accepted == 1]
    truth = DATASET_TWO.initiation
    log_fit = calibrate.fit_initiation(data, 'sw', QUICK, truth)
    direct, names = calibrate.initiation_objective(accepted, 'sw',
                                                   log_b=False)
    assert names[-1] == 'b'
    x = _sw_vector(truth)
    log_objective, _ = calibrate.initiation_objective(accepted, 'sw')
    assert direct(np.append(x[:4], truth.b)) == \
        pytest.approx(log_objective(x), rel=1e-12)
    direct_fit = calibrate.fit_mle(direct, np.append(x[:4], truth.b), QUICK)
    assert direct_fit.neg_log_likelihood == pytest.approx(
        log_fit.neg_log_likelihood, abs=1e-6)
    assert direct_fit.estimates[4] == pytest.approx(log_fit.estimates.b,
                                                    rel=1e-3)


@pytest.mark.slow
def test_multi_start_refit_agrees():
    data = _scenario_records(700, seed=300)
    config = OptimizerConfig(n_starts=5, seed=5)
    decision = calibrate.fit_decision(data, True, config)
    initiation = calibrate.fit_initiation(data, 'sw', config,
                                          DATASET_TWO.initiation)
    for fit in (decision, initiation):
        assert len(fit.start_nlls) == 5
        assert all(np.isfinite(fit.start_nlls))
        assert max(fit.start_nlls) - min(fit.start_nlls) < 1e-3


@pytest.mark.slow
def test_shifted_wald_recovery():
    params = BUILTIN_PARAMS['dataset-one-sw']
    truth = params.initiation
    estimates = []
    for seed in range(20):
        data = synth.synth_dataset(params, synth.dataset_one_design(), 420,
                                   200 + seed)
        fit = calibrate.fit_initiation(data, 'sw', QUICK, truth)
        estimates.append((fit.estimates.beta2, fit.estimates.beta4,
                          fit.estimates.b))
    mean = np.mean(estimates, axis=0)
    for value, expected in zip(mean, (truth.beta2, truth.beta4, truth.b)):
        assert value == pytest.approx(expected, rel=0.15)
