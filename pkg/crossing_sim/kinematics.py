#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Social force crossing kinematics

A driving force relaxes the velocity toward the desired walking velocity,
the two crosswalk edges push the pedestrian back with exponentially decaying
forces. Pedestrians do not interact with each other.
"""

from collections import namedtuple

import logging
import numpy as np


MAX_SPEED_MULTIPLIER = 1.3

CrosswalkEnv = namedtuple(
    'CrosswalkEnv',
    ['lane_width_m', 'crosswalk_width_m', 'desired_speed_mps',
     'relaxation_time_s', 'boundary_strength', 'boundary_range_m'],
    defaults=(3.5, 3.0, 1.4, 0.5, 2.0, 0.3))


def env_from_config(cfg):
    """CrosswalkEnv from a ScenarioConfig"""
    return CrosswalkEnv(
        cfg.lane_width_m, cfg.crosswalk_width_m, cfg.desired_speed_mps,
        cfg.relaxation_time_s, cfg.boundary_strength, cfg.boundary_range_m)


def acceleration(position, velocity, env):
    """Social force acceleration of many agents

    Args:
        position (ndarray): (n, 2) positions
        velocity (ndarray): (n, 2) velocities
        env (CrosswalkEnv): geometry and force constants

    Returns:
        ndarray: (n, 2) accelerations
    """
    position = np.atleast_2d(position)
    velocity = np.atleast_2d(velocity)
    desired = np.zeros_like(velocity)
    desired[:, 0] = env.desired_speed_mps
    accel = (desired - velocity) / env.relaxation_time_s

    half = env.crosswalk_width_m / 2
    to_upper = half - position[:, 1]
    to_lower = position[:, 1] + half
    accel[:, 1] += env.boundary_strength * (
        np.exp(-to_lower / env.boundary_range_m) -
        np.exp(-to_upper / env.boundary_range_m))
    return accel


def _step(position, velocity, env, dt):
    velocity = velocity + acceleration(position, velocity, env) * dt
    speeds = np.linalg.norm(velocity, axis=-1)
    max_speed = MAX_SPEED_MULTIPLIER * env.desired_speed_mps
    factor = np.minimum(1.0, max_speed / np.maximum(speeds, 1e-12))
    velocity = velocity * factor[:, np.newaxis]
    position = position + velocity * dt
    return position, velocity


def social_force_step(agent, env, dt):
    """Advance one crossing agent by one explicit time step

    Args:
        agent (PedestrianAgent): an agent in the crossing phase
        env (CrosswalkEnv): geometry and force constants
        dt (float): time step in seconds

    Returns:
        PedestrianAgent: the agent at t + dt
    """
    position, velocity = _step(
        agent.position[np.newaxis, :], agent.velocity[np.newaxis, :], env, dt)
    return agent.moved(position[0], velocity[0])


def walk_to(start_positions, target_x, env, dt, max_time_s=60.0,
            start_velocities=None):
    """Integrate agents from their start position until x reaches target_x

    Agents stop where they arrive.

    Args:
        start_positions (ndarray): (n, 2) positions
        target_x (float): x coordinate to reach
        env (CrosswalkEnv): geometry and force constants
        dt (float): time step in seconds
        max_time_s (float): integration cap
        start_velocities (ndarray): (n, 2) velocities, at rest if None

    Returns:
        tuple: (durations, arrival positions), durations are nan for agents
            that did not arrive
    """
    logger = logging.getLogger(__name__)
    position = np.array(start_positions, dtype=float).reshape(-1, 2)
    if start_velocities is None:
        velocity = np.zeros_like(position)
    else:
        velocity = np.array(start_velocities, dtype=float).reshape(-1, 2)
    durations = np.full(len(position), np.nan)
    active = position[:, 0] < target_x
    durations[~active] = 0.0
    n_steps = int(np.ceil(max_time_s / dt))
    for step in range(1, n_steps + 1):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        position[idx], velocity[idx] = _step(
            position[idx], velocity[idx], env, dt)
        arrived = idx[position[idx, 0] >= target_x]
        durations[arrived] = step * dt
        active[arrived] = False
    if active.any():
        logger.warning('%i agents did not reach x=%s m in %s s' % (
            active.sum(), target_x, max_time_s))
    return durations, position


def walk_path(start_position, target_x, env, dt, max_time_s=60.0):
    """Samples (t, x, y) of one agent walking from rest to target_x

    The last sample is clamped to target_x.
    """
    position = np.array(start_position, dtype=float).reshape(1, 2)
    velocity = np.zeros_like(position)
    path = [(0.0, position[0, 0], position[0, 1])]
    n_steps = int(np.ceil(max_time_s / dt))
    for step in range(1, n_steps + 1):
        if position[0, 0] >= target_x:
            break
        position, velocity = _step(position, velocity, env, dt)
        path.append((step * dt, min(position[0, 0], target_x),
                     position[0, 1]))
    return path


def cross_lane(start_positions, env, dt, max_time_s=60.0,
               start_velocities=None):
    """Integrate agents from their start position to the far kerb

    Args:
        start_positions (ndarray): (n, 2) positions, x < lane width
        env (CrosswalkEnv): geometry and force constants
        dt (float): time step in seconds
        max_time_s (float): integration cap

    Returns:
        ndarray: crossing duration of each agent, nan if not arrived
    """
    durations, _ = walk_to(start_positions, env.lane_width_m, env, dt,
                           max_time_s, start_velocities)
    return durations
