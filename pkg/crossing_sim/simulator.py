#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Agent-based Monte Carlo simulation of pedestrians facing a gap sequence"""

from crossing_sim import util
from crossing_sim import agent
from crossing_sim import scenario
from crossing_sim import decision
from crossing_sim import kinematics
from crossing_sim.initiation_models import from_params

from collections import namedtuple
from joblib import Parallel, delayed

import csv
import logging
import numpy as np


SimResult = namedtuple(
    'SimResult',
    ['pedestrian_count', 'accepted_gap', 't_int', 'crossing_start',
     'crossing_duration', 'approach_duration', 'accept_counts',
     'never_crossed', 'analytic_probs', 'conditional_probs', 'schedule',
     'trajectories', 'rng_seed'])

MHResult = namedtuple('MHResult', ['samples', 'acceptance_rate'])


class ZeroDensityStartError(ArithmeticError):
    pass


class ConservationError(AssertionError):
    pass


def mh_sample(target_density, proposal_width, iterations, rng, n_chains=1,
              start=0.0, init_attempts=1000):
    """Random walk Metropolis-Hastings

    Runs n_chains independent chains for the given number of iterations and
    returns the final state of each. The Gaussian proposal is symmetric, so
    the acceptance ratio reduces to target(y) / target(x).

    Args:
        target_density (function): vectorized unnormalized density
        proposal_width (float): standard deviation of the proposal
        iterations (int): steps per chain, all discarded as burn-in
        rng (numpy.random.Generator): random stream, or a list with one
            stream per chain (n_chains is then its length)
        n_chains (int): number of independent chains
        start (float): starting point of the chains (scalar or array)
        init_attempts (int): proposals tried to bring a chain into the
            support before giving up

    Returns:
        MHResult: final states and the overall acceptance rate
    """
    logger = logging.getLogger(__name__)
    per_chain = isinstance(rng, (list, tuple))
    if per_chain:
        n_chains = len(rng)
    x = np.broadcast_to(np.asarray(start, dtype=float), (n_chains,)).copy()
    dens_x = target_density(x)
    for _ in range(init_attempts):
        outside = ~(dens_x > 0)
        if not outside.any():
            break
        if per_chain:
            z = np.array([rng[i].standard_normal()
                          for i in np.flatnonzero(outside)])
        else:
            z = rng.standard_normal(outside.sum())
        x[outside] = x[outside] + proposal_width * z
        dens_x[outside] = target_density(x[outside])
    if np.any(~(dens_x > 0)):
        raise ZeroDensityStartError(
            'could not start %i chain(s) inside the support' % np.sum(
                ~(dens_x > 0)))
    if per_chain:
        # each chain consumes only its own stream
        steps = np.array([r.standard_normal(iterations) for r in rng])
        uniforms = np.array([r.random(iterations) for r in rng])
    accepted = 0
    for k in range(iterations):
        if per_chain:
            z, u = steps[:, k], uniforms[:, k]
        else:
            z = rng.standard_normal(n_chains)
            u = rng.random(n_chains)
        y = x + proposal_width * z
        dens_y = target_density(y)
        move = u * dens_x < dens_y
        x[move] = y[move]
        dens_x[move] = dens_y[move]
        accepted += int(move.sum())
    rate = accepted / float(max(1, iterations * n_chains))
    logger.debug('MH acceptance rate %.3f over %i chains' % (rate, n_chains))
    return MHResult(x, rate)


def _agent_rng(seed, agent_id, stream=0):
    """Stream of one agent, derived from the master seed by agent index"""
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(agent_id, stream)))


def _agent_uniforms(seed, n_agents, n_draws):
    """n_draws uniforms from the own stream of every agent"""
    u = np.empty((n_agents, n_draws))
    for i in range(n_agents):
        u[i] = _agent_rng(seed, i).random(n_draws)
    return u


def _sample_initiation(model, theta_dot, agent_ids, uniforms, cfg,
                       chunk=1000):
    """Initiation times of accepted agents

    The exact sampler inverts the model cdf at each agent's own uniform. The
    mh sampler runs one chain per agent on a second stream of that agent.
    """
    if cfg.initiation_sampler == 'exact':
        return model.quantile(uniforms, theta_dot)
    t_int = np.empty(len(theta_dot))
    for gap_td in np.unique(theta_dot):
        idx = np.flatnonzero(theta_dot == gap_td)
        td = float(gap_td)
        for lo in range(0, len(idx), chunk):
            part = idx[lo:lo + chunk]
            streams = [_agent_rng(cfg.rng_seed, int(agent_ids[i]), 1)
                       for i in part]
            result = mh_sample(
                lambda t: model.pdf(t, td), cfg.mh_proposal_width,
                cfg.mh_iterations, streams, start=float(model.mean(td)))
            t_int[part] = result.samples
    return t_int


def _spawn_positions(cfg, u):
    """Pavement positions from two uniforms per agent"""
    half = cfg.crosswalk_width_m / 2 - cfg.boundary_range_m
    x = -cfg.pavement_width_m * u[:, 0]
    y = -half + 2 * half * u[:, 1]
    return np.column_stack((x, y))


def _trajectory(agent_id, gap_index, theta_dots, t_pass, t_int,
                spawn_position, env, dt, max_time_s=60.0):
    """Replay one accepted agent through its phases and record its path

    The agent walks from its spawn point to the kerb while waiting, decides
    when its accepted gap opens and leaves the kerb t_int later.
    """
    rows = [(agent_id, t, x, y, agent.WAITING) for t, x, y in
            kinematics.walk_path(spawn_position, 0.0, env, dt, max_time_s)]
    kerb = np.array([0.0, rows[-1][3]])
    ped = agent.PedestrianAgent(kerb, agent_id=agent_id)
    for td in theta_dots[:gap_index - 1]:
        ped.reject(td)
    ped.accept(gap_index, t_int)
    start_time = t_pass + t_int
    rows.append((agent_id, min(t_pass, start_time), kerb[0], kerb[1],
                 ped.phase))
    ped.start_crossing()
    rows.append((agent_id, start_time, kerb[0], kerb[1], ped.phase))
    t = start_time
    for _ in range(int(np.ceil(max_time_s / dt))):
        ped = kinematics.social_force_step(ped, env, dt)
        t += dt
        if ped.position[0] >= env.lane_width_m:
            ped.finish()
        rows.append((agent_id, t, ped.position[0], ped.position[1],
                     ped.phase))
        if ped.phase == agent.DONE:
            break
    return rows


def run_simulation(cfg, params=None):
    """Simulate cfg.pedestrian_count pedestrians at the kerb

    Pedestrians spawn on the pavement and walk to the kerb. Every pedestrian
    still waiting when gap n opens accepts it with the conditional
    probability p_n built from their own rejection history, so that the
    population frequency of crossing in gap n matches P_n. With
    cfg.literal_algorithm the unconditional P_n is applied instead. Accepted
    pedestrians leave the kerb t_int after t_pass of their gap and walk to
    the far kerb under the social force model.

    Every agent draws from its own stream, derived from cfg.rng_seed and the
    agent index: two uniforms for the spawn position, one per gap for the
    decisions and one for the initiation time. An agent's outcome does not
    depend on the other agents.

    Args:
        cfg (ScenarioConfig): the scene
        params (ModelParams): overrides cfg.model

    Returns:
        SimResult: per agent outcomes and per gap counts
    """
    logger = logging.getLogger(__name__)
    if params is None:
        params = scenario.scenario_model(cfg)
    schedule = scenario.build_schedule(cfg)
    conditional, unconditional = scenario.analytic_probs(schedule, params)
    model = from_params(params.initiation)

    n_agents = cfg.pedestrian_count
    n_gaps = len(schedule.theta_dot)
    logger.info('Simulating %i pedestrians over %i gaps' % (n_agents, n_gaps))
    uniforms = _agent_uniforms(cfg.rng_seed, n_agents, n_gaps + 3)
    positions = _spawn_positions(cfg, uniforms[:, :2])
    draws = uniforms[:, 2:2 + n_gaps]

    env = kinematics.env_from_config(cfg)
    approach, kerb = kinematics.walk_to(positions, 0.0, env, cfg.timestep_s)
    kerb[:, 0] = 0.0
    late = approach > schedule.t_pass[0]
    if late.any():
        logger.warning('%i pedestrians reach the kerb after the first gap '
                       'opens' % late.sum())

    accepted_gap = np.zeros(n_agents, dtype=int)
    waiting = np.ones(n_agents, dtype=bool)
    max_rejected = np.full(n_agents, np.nan)
    theta_dots = schedule.theta_dot
    # first decision happens once vehicle 1 has passed, at gap 1
    for n in range(n_gaps):
        current = theta_dots[n]
        if cfg.literal_algorithm:
            prob = np.full(n_agents, unconditional[n])
        else:
            with np.errstate(invalid='ignore'):
                x1 = (~np.isnan(max_rejected)) & (current >= max_rejected)
            x2 = int(n + 1 < n_gaps and current >= theta_dots[n + 1])
            prob = decision.acceptance_probs(
                np.full(n_agents, current), x1.astype(int),
                np.full(n_agents, x2), params.decision)
        accept = waiting & (draws[:, n] < prob)
        accepted_gap[accept] = n + 1
        rejected = waiting & ~accept
        max_rejected[rejected] = np.fmax(max_rejected[rejected], current)
        waiting &= ~accept
        logger.debug('Gap %i: %i accepted, %i still waiting' % (
            n + 1, accept.sum(), waiting.sum()))

    crossed = accepted_gap > 0
    t_int = np.full(n_agents, np.nan)
    crossing_start = np.full(n_agents, np.nan)
    duration = np.full(n_agents, np.nan)
    if crossed.any():
        gap_idx = accepted_gap[crossed] - 1
        t_int[crossed] = _sample_initiation(
            model, theta_dots[gap_idx], np.flatnonzero(crossed),
            uniforms[crossed, -1], cfg)
        crossing_start[crossed] = schedule.t_pass[gap_idx] + t_int[crossed]
        duration[crossed] = kinematics.cross_lane(
            kerb[crossed], env, cfg.timestep_s)

    trajectories = []
    for agent_id in np.flatnonzero(crossed)[:cfg.trajectory_agents]:
        gap_index = int(accepted_gap[agent_id])
        trajectories.extend(_trajectory(
            int(agent_id), gap_index, theta_dots,
            float(schedule.t_pass[gap_index - 1]), t_int[agent_id],
            positions[agent_id], env, cfg.timestep_s))

    counts = np.bincount(accepted_gap, minlength=n_gaps + 1)
    result = SimResult(
        n_agents, accepted_gap, t_int, crossing_start, duration, approach,
        counts[1:], int(counts[0]), np.asarray(unconditional),
        np.asarray(conditional), schedule, trajectories, cfg.rng_seed)
    check_conservation(result)
    logger.info('%i pedestrians crossed, %i never crossed' % (
        crossed.sum(), result.never_crossed))
    return result


def check_conservation(result):
    """Accepted per gap plus never crossed must equal the agent count"""
    total = int(np.sum(result.accept_counts)) + result.never_crossed
    if total != result.pedestrian_count:
        raise ConservationError(
            '%i accepted + never crossed for %i agents' % (
                total, result.pedestrian_count))
    return True


def run_replications(cfg, n_replications, n_jobs=1, params=None):
    """Independent replications with seeds spawned from cfg.rng_seed

    Args:
        cfg (ScenarioConfig): the scene
        n_replications (int): number of runs
        n_jobs (int): parallel workers, capped by CROSSING_SIM_THREADS

    Returns:
        list: SimResult in replication order
    """
    logger = logging.getLogger(__name__)
    children = np.random.SeedSequence(cfg.rng_seed).spawn(n_replications)
    configs = [cfg._replace(rng_seed=int(c.generate_state(1)[0]))
               for c in children]
    n_jobs = util.cap_jobs(n_jobs)
    logger.info('Running %i replications on %i worker(s)' % (
        n_replications, n_jobs))
    return Parallel(n_jobs=n_jobs)(
        delayed(run_simulation)(c, params) for c in configs)


def empirical_frequencies(result):
    """Fraction of all agents that crossed in each gap"""
    return result.accept_counts / float(result.pedestrian_count)


def result_to_dict(result, include_agents=False):
    """JSON summary of a SimResult"""
    dic = {
        'rng_seed': result.rng_seed,
        'pedestrian_count': result.pedestrian_count,
        'never_crossed': result.never_crossed,
        'gaps': [{
            'index': i + 1,
            'gap_size_s': float(result.schedule.gap_size_s[i]),
            't_pass_s': float(result.schedule.t_pass[i]),
            'theta_dot_radps': float(result.schedule.theta_dot[i]),
            'accepted': int(result.accept_counts[i]),
            'empirical_frequency': float(empirical_frequencies(result)[i]),
            'analytic_probability': float(result.analytic_probs[i]),
            'conditional_probability': float(result.conditional_probs[i])}
            for i in range(len(result.accept_counts))],
    }
    crossed = result.accepted_gap > 0
    if crossed.any():
        dic['mean_t_int_s'] = float(np.mean(result.t_int[crossed]))
        dic['mean_crossing_duration_s'] = float(
            np.nanmean(result.crossing_duration[crossed]))
    dic['mean_approach_duration_s'] = float(
        np.nanmean(result.approach_duration))
    if include_agents:
        dic['agents'] = [{
            'agent': i, 'accepted_gap': int(result.accepted_gap[i]),
            't_int_s': result.t_int[i],
            'crossing_start_s': result.crossing_start[i],
            'crossing_duration_s': result.crossing_duration[i],
            'approach_duration_s': result.approach_duration[i]}
            for i in range(result.pedestrian_count)]
    return dic


def write_trajectories(result, output):
    """Per agent trajectory samples as csv (agent, t, x, y, phase)"""
    logger = logging.getLogger(__name__)
    try:
        f = open(output, 'w', newline='')
    except (IOError, OSError) as e:
        logger.error('Failed to open output file: %s' % e)
        raise
    with f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['agent', 't', 'x', 'y', 'phase'])
        for agent_id, t, x, y, phase in result.trajectories:
            writer.writerow([agent_id, '%.4f' % t, '%.4f' % x, '%.4f' % y,
                             phase])
    logger.debug('Wrote %i trajectory samples to %s' % (
        len(result.trajectories), output))
