#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Visual looming cues of an approaching vehicle

All quantities are SI: meters, seconds, radians. The distance Z is measured
from the pedestrian's lateral position to the front face of the vehicle.
"""

from collections import namedtuple

import logging
import numpy as np


VehicleObservation = namedtuple(
    'VehicleObservation', ['width_m', 'distance_m', 'speed_mps'])

CollisionCue = namedtuple('CollisionCue', ['theta_rad', 'theta_dot_radps'])


class InvalidObservationError(ValueError):
    pass


class DomainError(ValueError):
    """A collision cue is outside the domain of the logarithm (<= 0)"""
    pass


class GapTooSmallError(ValueError):
    pass


def _check(width, distance, speed):
    width = np.asarray(width, dtype=float)
    distance = np.asarray(distance, dtype=float)
    speed = np.asarray(speed, dtype=float)
    if np.any(~(width > 0)):
        raise InvalidObservationError(
            'vehicle width must be > 0, got %s' % width)
    if np.any(~(distance > 0)):
        raise InvalidObservationError(
            'distance to the vehicle front must be > 0, got %s' % distance)
    if np.any(~(speed >= 0)):
        raise InvalidObservationError(
            'vehicle speed must be >= 0, got %s' % speed)
    return width, distance, speed


def visual_angle(obs):
    """Visual angle subtended by the vehicle front

    Args:
        obs (VehicleObservation): the vehicle state

    Returns:
        float: theta in radians, 2 * arctan(w / 2Z)
    """
    width, distance, _ = _check(obs.width_m, obs.distance_m, obs.speed_mps)
    return float(2 * np.arctan(width / (2 * distance)))


def collision_cue(obs):
    """Visual angle and its rate of change for a constant speed approach

    Args:
        obs (VehicleObservation): the vehicle state

    Returns:
        CollisionCue: theta and theta_dot = w * v / (Z**2 + w**2 / 4)
    """
    width, distance, speed = _check(
        obs.width_m, obs.distance_m, obs.speed_mps)
    theta = 2 * np.arctan(width / (2 * distance))
    rate = width * speed / (distance ** 2 + width ** 2 / 4)
    return CollisionCue(float(theta), float(rate))


def theta_dot(width_m, distance_m, speed_mps):
    """Vectorized collision cue

    Args:
        width_m (array): vehicle widths
        distance_m (array): distances to the vehicle fronts
        speed_mps (array): approach speeds

    Returns:
        ndarray: theta_dot in rad/s, broadcast over the inputs
    """
    width, distance, speed = _check(width_m, distance_m, speed_mps)
    return width * speed / (distance ** 2 + width ** 2 / 4)


def gap_distance(speed_mps, gap_s, vehicle_length_m):
    """Clear distance to the next vehicle when the previous one has passed

    Vehicles are spaced front-to-front by the time gap, so the front of the
    following vehicle is v * gap - L away once the rear of the leading one
    clears the crossing line.

    Args:
        speed_mps (array): vehicle speed
        gap_s (array): front-to-front time gap
        vehicle_length_m (float): vehicle length

    Returns:
        ndarray: distances in meters
    """
    distance = (np.asarray(speed_mps, dtype=float) *
                np.asarray(gap_s, dtype=float) - vehicle_length_m)
    if np.any(~(distance > 0)):
        raise GapTooSmallError(
            'gap leaves no clear distance (Z <= 0): gaps %s s at %s m/s '
            'with %s m vehicles' % (gap_s, speed_mps, vehicle_length_m))
    return distance


def gap_theta_dot(width_m, speed_mps, gap_s, vehicle_length_m=4.5):
    """Collision cue of the vehicle closing a gap, evaluated at the instant
    the previous vehicle's rear passes the pedestrian

    Args:
        width_m (array): width of the approaching vehicle
        speed_mps (array): speed of the traffic
        gap_s (array): time gap, front to front
        vehicle_length_m (float): vehicle length

    Returns:
        ndarray: theta_dot in rad/s
    """
    distance = gap_distance(speed_mps, gap_s, vehicle_length_m)
    return theta_dot(width_m, distance, speed_mps)


def log_cue(value):
    """Natural log of a cue expressed in rad/s

    Raises:
        DomainError: for non-positive cues
    """
    value = np.asarray(value, dtype=float)
    if np.any(~(value > 0)):
        logger = logging.getLogger(__name__)
        logger.debug('Non positive collision cue: %s' % value)
        raise DomainError('collision cue must be > 0 rad/s, got %s' % value)
    return np.log(value)
