#!/usr/bin/env python
# -*- coding: utf-8 -*-

from crossing_sim import util
from crossing_sim import plots
from crossing_sim import synth
from crossing_sim import trials
from crossing_sim import decision
from crossing_sim import evaluate
from crossing_sim import scenario
from crossing_sim import calibrate
from crossing_sim import simulator
from crossing_sim.params import load_params, save_params, params_to_dict
from crossing_sim.initiation_models import from_params
from crossing_sim.version import __version__

import os
import sys
import logging
import argparse
import numpy as np


EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def write_manifest(args, out_dir, seed):
    """Echo the resolved command line, seed and version beside the outputs

    Args:
        args (object): the command-line arguments from argparse
        out_dir (string): output directory
        seed (int): the seed actually used
    """
    resolved = {k: v for k, v in vars(args).items() if k != 'func'}
    resolved['seed'] = seed
    util.write_json({
        'command': args.command,
        'arguments': resolved,
        'seed': seed,
        'version': __version__,
    }, os.path.join(out_dir, 'run_manifest.json'))


def _holdout_conditions(values):
    conditions = []
    for value in values or []:
        speed, gap = value.split(':')
        conditions.append((util.to_mps(float(speed), 'mph'), float(gap)))
    return conditions


def goodness_of_fit(records, params):
    """Overall and per-condition goodness of fit of params on records

    Args:
        records (list): TrialRecord
        params (ModelParams): model parameters

    Returns:
        dict: 'overall' GoodnessReport fields and 'conditions' rows
    """
    table = evaluate.condition_table(records, params)
    accepted = trials.accepted_only(records)
    ll = -calibrate.nll_decision(records, params.decision)
    k = 4 if params.decision.flow_rules_enabled else 2
    sample = model_cdf = None
    if accepted:
        ll -= calibrate.nll_initiation(accepted, params.initiation)
        k += 5 if params.initiation.b is not None else 4
        model = from_params(params.initiation)
        sample, theta_dot = calibrate.initiation_arrays(accepted)

        def model_cdf(t):
            return np.mean(model.cdf(t[:, np.newaxis],
                                     theta_dot[np.newaxis, :]), axis=1)
    report = evaluate.goodness_report(
        k, len(records), ll, sample, model_cdf,
        [row['observed_rate'] for row in table],
        [row['predicted_rate'] for row in table])
    return {
        'overall': report._asdict(),
        'conditions': [dict(row, condition=list(row['condition']))
                       for row in table],
    }


def run_calibrate(args):
    """Main function for the `crossing-sim calibrate` submodule

    Fits the decision and initiation models to a trial csv and writes
    fit.json, params.json and the run manifest to args.output. With a
    holdout, the held out trials go to validation_trials.csv and the fitted
    model is scored on them in validation.json.

    Args:
        args (object): the command-line arguments from argparse
    """
    logger = logging.getLogger(__name__)
    logger.debug('crossing-sim version %s' % __version__)
    seed = util.resolve_seed(args.seed)
    util.ensure_dir(args.output)
    records = trials.ingest_trials(args.trials, width_mode=args.width_mode)
    validation = None
    if args.holdout_condition or args.holdout_scenario:
        records, validation = trials.split_trials(
            records, _holdout_conditions(args.holdout_condition),
            args.holdout_scenario)
    config = calibrate.OptimizerConfig(
        n_starts=args.starts, seed=seed, n_jobs=args.cpus)
    report = calibrate.fit_model(
        records, args.family, args.flow_rules == 'on', config)
    util.write_json(calibrate.report_to_dict(report),
                    os.path.join(args.output, 'fit.json'))
    save_params(report.params, os.path.join(args.output, 'params.json'))
    if validation:
        trials.write_trials(
            validation, os.path.join(args.output, 'validation_trials.csv'))
        scores = goodness_of_fit(validation, report.params)
        util.write_json(scores, os.path.join(args.output, 'validation.json'))
        logger.info('Validation on %i trials: BIC %.2f' % (
            len(validation), scores['overall']['bic']))
    elif validation is not None:
        logger.warning('Holdout matched no trials, no validation written')
    write_manifest(args, args.output, seed)
    logger.info('LL decision %.2f, LL initiation %.2f, BIC %.2f' % (
        report.ll_decision, report.ll_initiation, report.bic_total))
    if not (report.decision.converged and report.initiation.converged):
        logger.error('Calibration did not converge, see fit.json')
        sys.exit(EXIT_NUMERICAL)


def run_predict(args):
    """Main function for the `crossing-sim predict` submodule

    Args:
        args (object): the command-line arguments from argparse
    """
    logger = logging.getLogger(__name__)
    seed = util.resolve_seed(args.seed)
    util.ensure_dir(args.output)
    cfg = scenario.load_scenario(args.scenario)
    params = load_params(args.params) if args.params else \
        scenario.scenario_model(cfg)
    schedule = scenario.build_schedule(cfg)
    contexts = scenario.population_contexts(schedule)
    conditional, unconditional = scenario.analytic_probs(schedule, params)
    model = from_params(params.initiation)
    gaps = []
    for i, ctx in enumerate(contexts):
        gap = {
            'index': ctx.index_n,
            'gap_size_s': schedule.gap_size_s[i],
            't_pass_s': schedule.t_pass[i],
            'theta_dot_radps': ctx.theta_dot_current,
            'x1': decision.rule_x1(ctx),
            'x2': decision.rule_x2(ctx),
            'conditional_probability': conditional[i],
            'unconditional_probability': unconditional[i]}
        try:
            gap['initiation_mean_s'] = model.mean(ctx.theta_dot_current)
            gap['initiation_p2_5_s'], gap['initiation_p97_5_s'] = \
                model.quantile(np.array([0.025, 0.975]),
                               ctx.theta_dot_current)
        except ArithmeticError as e:
            logger.warning('Gap %i: %s' % (ctx.index_n, e))
        gaps.append(gap)
    util.write_json({
        'params': params_to_dict(params),
        'gaps': gaps,
        'never_cross_probability': 1 - float(np.sum(unconditional)),
    }, os.path.join(args.output, 'predictions.json'))
    plots.export_plot_data(
        'density-timeline', params, cfg=cfg,
        output=os.path.join(args.output, 'density_timeline.csv'))
    write_manifest(args, args.output, seed)


def run_simulate(args):
    """Main function for the `crossing-sim simulate` submodule

    Args:
        args (object): the command-line arguments from argparse
    """
    logger = logging.getLogger(__name__)
    seed = util.resolve_seed(args.seed)
    util.ensure_dir(args.output)
    overrides = {'rng_seed': seed}
    if args.agents is not None:
        overrides['pedestrian_count'] = args.agents
    if args.trajectories is not None:
        overrides['trajectory_agents'] = args.trajectories
    if args.literal:
        overrides['literal_algorithm'] = True
    if args.sampler is not None:
        overrides['initiation_sampler'] = args.sampler
    cfg = scenario.load_scenario(args.scenario, overrides)
    params = load_params(args.params) if args.params else None
    if args.replications > 1:
        results = simulator.run_replications(
            cfg, args.replications, args.cpus, params)
    else:
        results = [simulator.run_simulation(cfg, params)]
    summary = [simulator.result_to_dict(r, args.agent_records)
               for r in results]
    util.write_json(summary[0] if len(summary) == 1 else summary,
                    os.path.join(args.output, 'sim_result.json'))
    if cfg.trajectory_agents > 0:
        simulator.write_trajectories(
            results[0], os.path.join(args.output, 'trajectories.csv'))
    write_manifest(args, args.output, seed)
    logger.info('Simulation written to %s' % args.output)


def run_evaluate(args):
    """Main function for the `crossing-sim evaluate` submodule

    Args:
        args (object): the command-line arguments from argparse
    """
    logger = logging.getLogger(__name__)
    seed = util.resolve_seed(args.seed)
    util.ensure_dir(args.output)
    params = load_params(args.pred)
    records = trials.ingest_trials(args.trials, width_mode=args.width_mode)
    scores = goodness_of_fit(records, params)
    util.write_json(scores, os.path.join(args.output, 'goodness.json'))
    write_manifest(args, args.output, seed)
    logger.info('BIC %.2f, K-S D %.4f' % (
        scores['overall']['bic'], scores['overall']['ks_d']))


def run_synth(args):
    """Main function for the `crossing-sim synth` submodule

    Args:
        args (object): the command-line arguments from argparse
    """
    seed = util.resolve_seed(args.seed)
    out_dir = os.path.dirname(os.path.abspath(args.output))
    util.ensure_dir(out_dir)
    params = load_params(args.params)
    if args.design.lower() == 'dataset-one':
        design = synth.dataset_one_design()
    elif args.design.lower() == 'dataset-two':
        design = synth.dataset_two_design()
    else:
        design = synth.load_design(args.design)
    synth.synth_dataset(params, design, args.n, seed, args.output)
    write_manifest(args, out_dir, seed)


def run_export_plots(args):
    """Main function for the `crossing-sim export-plots` submodule

    Args:
        args (object): the command-line arguments from argparse
    """
    seed = util.resolve_seed(args.seed)
    out_dir = os.path.dirname(os.path.abspath(args.output))
    util.ensure_dir(out_dir)
    cfg = scenario.load_scenario(args.scenario) if args.scenario else None
    if args.params:
        params = load_params(args.params)
    elif cfg is not None:
        params = scenario.scenario_model(cfg)
    else:
        params = load_params('dataset-two-sw')
    records = trials.ingest_trials(args.trials, width_mode=args.width_mode) \
        if args.trials else None
    plots.export_plot_data(args.kind, params, records, cfg, args.output)
    write_manifest(args, out_dir, seed)


def _add_common(parser):
    param_logging = parser.add_mutually_exclusive_group()
    param_logging.add_argument(
        '--quiet',
        '-q',
        action='store_true',
        default=False,
        help='Disable info logging. (default: %(default)s).'
    )
    param_logging.add_argument(
        '--debug',
        '-d',
        action='store_true',
        default=False,
        help='Enable debug logging. (default: %(default)s).'
    )
    parser.add_argument(
        '--seed',
        type=int,
        metavar='<int>',
        help='Seed all the random number generators',
        default=None
    )


def _add_width_mode(parser):
    parser.add_argument(
        '--width-mode',
        choices=trials.WIDTH_MODES,
        default='trial',
        help='vehicle width per trial, or averaged per scenario and gap '
             '(default: %(default)s).'
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog='crossing-sim',
        usage='crossing-sim [subcommand] [options]',
        description='crossing-sim: pedestrian road crossing decisions in '
                    'continuous traffic'
    )
    parser.add_argument(
        '-v',
        '--version',
        action='store_true',
        default=False,
        help='print software version and exit'
    )
    subparsers = parser.add_subparsers(
        title='available subcommands',
        metavar='',
        dest='command'
    )

    parser_cal = subparsers.add_parser(
        'calibrate',
        prog='crossing-sim calibrate',
        description='fit the model to trial data by maximum likelihood',
        help='fit the model to trial data by maximum likelihood'
    )
    _add_common(parser_cal)
    _add_width_mode(parser_cal)
    parser_cal.add_argument(
        '--trials', '-t', metavar='<trials.csv>', required=True,
        help='trial csv (required)')
    parser_cal.add_argument(
        '--family', choices=['sw', 'gauss'], default='sw',
        help='initiation time family (default: %(default)s).')
    parser_cal.add_argument(
        '--flow-rules', choices=['on', 'off'], default='on',
        help='estimate the traffic flow rules (default: %(default)s).')
    parser_cal.add_argument(
        '--holdout-condition', metavar='<mph:gap>', nargs='*',
        help='speed (mph) and gap (s) pairs kept out of the fit')
    parser_cal.add_argument(
        '--holdout-scenario', metavar='<id>', nargs='*',
        help='scenario ids kept out of the fit')
    parser_cal.add_argument(
        '--starts', type=int, default=5, metavar='<int>',
        help='number of optimizer starts (default: %(default)s).')
    parser_cal.add_argument(
        '--cpus', '-p', type=int, default=util.thread_count(),
        metavar='<int>',
        help='number of parallel starts, capped by CROSSING_SIM_THREADS '
             '(default: %(default)s).')
    parser_cal.add_argument(
        '--out', '-o', dest='output', metavar='<dir>', required=True,
        help='output directory (required)')
    parser_cal.set_defaults(func=run_calibrate)

    parser_pred = subparsers.add_parser(
        'predict',
        prog='crossing-sim predict',
        description='analytic acceptance and initiation predictions for a '
                    'scenario',
        help='analytic predictions for a scenario'
    )
    _add_common(parser_pred)
    parser_pred.add_argument(
        '--params', metavar='<params.json>', default=None,
        help='parameter file or built-in name (default: the scenario model)')
    parser_pred.add_argument(
        '--scenario', '-s', metavar='<scenario.cfg>', required=True,
        help='scenario config (required)')
    parser_pred.add_argument(
        '--out', '-o', dest='output', metavar='<dir>', required=True,
        help='output directory (required)')
    parser_pred.set_defaults(func=run_predict)

    parser_sim = subparsers.add_parser(
        'simulate',
        prog='crossing-sim simulate',
        description='agent-based simulation of pedestrians in a scenario',
        help='agent-based simulation'
    )
    _add_common(parser_sim)
    parser_sim.add_argument(
        '--scenario', '-s', metavar='<scenario.cfg>', required=True,
        help='scenario config (required)')
    parser_sim.add_argument(
        '--params', metavar='<params.json>', default=None,
        help='parameter file or built-in name (default: the scenario model)')
    parser_sim.add_argument(
        '--agents', '-n', type=int, metavar='<int>', default=None,
        help='number of pedestrians (default: from the scenario)')
    parser_sim.add_argument(
        '--trajectories', type=int, metavar='<int>', default=None,
        help='number of crossing agents whose trajectory is written')
    parser_sim.add_argument(
        '--sampler', choices=scenario.SAMPLERS, default=None,
        help='initiation time sampler (default: from the scenario)')
    parser_sim.add_argument(
        '--literal', action='store_true', default=False,
        help='apply unconditional gap probabilities to waiting agents')
    parser_sim.add_argument(
        '--replications', type=int, default=1, metavar='<int>',
        help='independent replications (default: %(default)s).')
    parser_sim.add_argument(
        '--agent-records', action='store_true', default=False,
        help='include per agent outcomes in the json')
    parser_sim.add_argument(
        '--cpus', '-p', type=int, default=util.thread_count(),
        metavar='<int>',
        help='number of parallel replications, capped by '
             'CROSSING_SIM_THREADS (default: %(default)s).')
    parser_sim.add_argument(
        '--out', '-o', dest='output', metavar='<dir>', required=True,
        help='output directory (required)')
    parser_sim.set_defaults(func=run_simulate)

    parser_eval = subparsers.add_parser(
        'evaluate',
        prog='crossing-sim evaluate',
        description='goodness of fit of a parameter set on trial data',
        help='goodness of fit on trial data'
    )
    _add_common(parser_eval)
    _add_width_mode(parser_eval)
    parser_eval.add_argument(
        '--pred', metavar='<params.json>', required=True,
        help='parameter file or built-in name (required)')
    parser_eval.add_argument(
        '--trials', '-t', metavar='<trials.csv>', required=True,
        help='trial csv (required)')
    parser_eval.add_argument(
        '--out', '-o', dest='output', metavar='<dir>', required=True,
        help='output directory (required)')
    parser_eval.set_defaults(func=run_evaluate)

    parser_synth = subparsers.add_parser(
        'synth',
        prog='crossing-sim synth',
        description='draw a synthetic trial csv from the model',
        help='draw synthetic trials'
    )
    _add_common(parser_synth)
    parser_synth.add_argument(
        '--params', metavar='<params.json>', required=True,
        help='parameter file or built-in name (required)')
    parser_synth.add_argument(
        '--design', metavar='<design.cfg>', required=True,
        help='design file, or dataset-one / dataset-two (required)')
    parser_synth.add_argument(
        '--n', type=int, metavar='<int>', default=100,
        help='pedestrians per cell or sequence (default: %(default)s).')
    parser_synth.add_argument(
        '--out', '-o', dest='output', metavar='<trials.csv>', required=True,
        help='output csv (required)')
    parser_synth.set_defaults(func=run_synth)

    parser_plot = subparsers.add_parser(
        'export-plots',
        prog='crossing-sim export-plots',
        description='write the tables behind acceptance and initiation '
                    'plots',
        help='export plot data'
    )
    _add_common(parser_plot)
    _add_width_mode(parser_plot)
    parser_plot.add_argument(
        '--kind', '-k', choices=plots.KINDS, required=True,
        help='table to export (required)')
    parser_plot.add_argument(
        '--params', metavar='<params.json>', default=None,
        help='parameter file or built-in name')
    parser_plot.add_argument(
        '--trials', '-t', metavar='<trials.csv>', default=None,
        help='trial csv, for data based kinds')
    parser_plot.add_argument(
        '--scenario', '-s', metavar='<scenario.cfg>', default=None,
        help='scenario config, for density-timeline')
    parser_plot.add_argument(
        '--out', '-o', dest='output', metavar='<table.csv>', required=True,
        help='output csv (required)')
    parser_plot.set_defaults(func=run_export_plots)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    # set logger and display version if args.version
    if args.version:
        print('crossing-sim version %s' % __version__)
        sys.exit(0)
    if not hasattr(args, 'func'):
        parser.print_help()
        return
    if args.quiet:
        logging.basicConfig(level=logging.ERROR)
    elif args.debug:
        logging.basicConfig(level=logging.DEBUG)
    else:
        logging.basicConfig(level=logging.INFO)

    logger = logging.getLogger(__name__)
    try:
        args.func(args)
    except (ValueError, IOError, OSError) as e:
        logger.error('crossing-sim %s: %s' % (args.command, e))
        sys.exit(EXIT_VALIDATION)
    except ArithmeticError as e:
        logger.error('crossing-sim %s: numerical failure: %s' % (
            args.command, e))
        sys.exit(EXIT_NUMERICAL)
    except KeyboardInterrupt:
        logger.error('crossing-sim %s interrupted' % args.command)
        sys.exit(1)
    finally:
        logging.shutdown()
