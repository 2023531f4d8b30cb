#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Full model parameter sets and the built-in published estimates"""

from crossing_sim import util
from crossing_sim.decision import DecisionParams
from crossing_sim.initiation_models import InitiationParams
from crossing_sim.initiation_models import check_params, family_name
from crossing_sim.initiation_models import SHIFTED_WALD, GAUSSIAN

from collections import namedtuple

import os
import logging


ModelParams = namedtuple('ModelParams', ['decision', 'initiation'])


class ParamsFileError(ValueError):
    pass


# Point estimates only. Dataset one has single gaps, so no flow rules.
BUILTIN_PARAMS = {
    'dataset-one-sw': ModelParams(
        DecisionParams(-2.14, 0.0, 0.0, -9.95, False),
        InitiationParams(0.03, 4.48, -0.20, -2.11, 6.06, SHIFTED_WALD)),
    'dataset-one-gauss': ModelParams(
        DecisionParams(-2.14, 0.0, 0.0, -9.95, False),
        InitiationParams(-0.03, 0.15, -0.21, -0.76, None, GAUSSIAN)),
    'dataset-two-sw': ModelParams(
        DecisionParams(-2.92, -1.29, -0.50, -13.23, True),
        InitiationParams(0.47, 7.36, 0.04, -1.41, 7.76, SHIFTED_WALD)),
    # sigma of this table is only positive for theta_dot below ~0.0027 rad/s
    'dataset-two-gauss': ModelParams(
        DecisionParams(-3.31, 0.0, 0.0, -15.50, False),
        InitiationParams(-0.05, 0.01, -0.10, -0.59, None, GAUSSIAN)),
}


def params_to_dict(params):
    """JSON friendly view of ModelParams"""
    decision = params.decision._asdict()
    initiation = params.initiation._asdict()
    if initiation['b'] is None:
        del initiation['b']
    return {'decision': decision, 'initiation': initiation}


def params_from_dict(dic):
    """Build ModelParams from the dict produced by params_to_dict

    Raises:
        ParamsFileError: on missing or malformed entries
    """
    try:
        d = dic['decision']
        i = dic['initiation']
        decision = DecisionParams(
            float(d['rho0']), float(d.get('rho1', 0.0)),
            float(d.get('rho2', 0.0)), float(d['rho3']),
            util.parse_bool(d.get('flow_rules_enabled', True)))
        family = family_name(i.get('family', SHIFTED_WALD))
        b = i.get('b')
        initiation = InitiationParams(
            float(i['beta1']), float(i['beta2']), float(i['beta3']),
            float(i['beta4']), None if b is None else float(b), family)
        check_params(initiation)
    except (KeyError, TypeError, ValueError) as e:
        raise ParamsFileError('Malformed model parameters: %s' % e)
    return ModelParams(decision, initiation)


def load_params(source):
    """Load model parameters from a built-in table name or a json file

    Built-in names are case-insensitive: dataset-one-sw, dataset-one-gauss,
    dataset-two-sw, dataset-two-gauss.

    Args:
        source (string): a built-in name or a path

    Returns:
        ModelParams: the parameters
    """
    logger = logging.getLogger(__name__)
    if isinstance(source, ModelParams):
        return source
    key = str(source).strip().lower()
    if key in BUILTIN_PARAMS and not os.path.exists(source):
        logger.debug('Using built-in parameters %s' % key)
        return BUILTIN_PARAMS[key]
    try:
        dic = util.read_json(source)
    except (IOError, OSError) as e:
        raise ParamsFileError('Could not read parameters %s: %s' % (source, e))
    except ValueError as e:
        raise ParamsFileError('Invalid json in %s: %s' % (source, e))
    logger.debug('Loaded parameters: %s' % source)
    return params_from_dict(dic)


def save_params(params, output):
    util.write_json(params_to_dict(params), output)
