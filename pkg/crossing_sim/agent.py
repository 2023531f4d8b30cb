#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging
import numpy as np


WAITING = 'waiting'
INITIATING = 'initiating'
CROSSING = 'crossing'
DONE = 'done'
NEVER_CROSSED = 'never_crossed'

# allowed forward moves; never_crossed is the terminal alternative to crossing
TRANSITIONS = {
    WAITING: (INITIATING, NEVER_CROSSED),
    INITIATING: (CROSSING,),
    CROSSING: (DONE,),
    DONE: (),
    NEVER_CROSSED: (),
}


class PhaseTransitionError(ValueError):
    pass


class PedestrianAgent(object):
    """A pedestrian waiting at the kerb, then crossing

    Positions are in meters with x along the crossing direction (0 at the
    near kerb) and y across the crosswalk (0 on its centerline).
    """
    def __init__(self, position, velocity=(0.0, 0.0), agent_id=0):
        self.agent_id = agent_id
        self.position = np.array(position, dtype=float)
        self.velocity = np.array(velocity, dtype=float)
        self.phase = WAITING
        self.rejection_history_max_cue = None
        self.accepted_gap = None
        self.t_int_sampled = None

    @property
    def logger(self):
        component = "{}.{}".format(type(self).__module__, type(self).__name__)
        return logging.getLogger(component)

    def _move_to(self, phase):
        if phase not in TRANSITIONS[self.phase]:
            raise PhaseTransitionError(
                'agent %s cannot go from %s to %s' % (
                    self.agent_id, self.phase, phase))
        self.phase = phase

    def reject(self, theta_dot):
        """Record a rejected gap and its cue"""
        if self.phase != WAITING:
            raise PhaseTransitionError(
                'agent %s is %s, only waiting agents reject gaps' % (
                    self.agent_id, self.phase))
        if self.rejection_history_max_cue is None or \
                theta_dot > self.rejection_history_max_cue:
            self.rejection_history_max_cue = float(theta_dot)

    def accept(self, gap_index, t_int):
        self._move_to(INITIATING)
        self.accepted_gap = int(gap_index)
        self.t_int_sampled = float(t_int)

    def start_crossing(self):
        self._move_to(CROSSING)

    def finish(self):
        self._move_to(DONE)

    def give_up(self):
        self._move_to(NEVER_CROSSED)

    def moved(self, position, velocity):
        """Copy of the agent at a new kinematic state"""
        agent = PedestrianAgent(position, velocity, self.agent_id)
        agent.phase = self.phase
        agent.rejection_history_max_cue = self.rejection_history_max_cue
        agent.accepted_gap = self.accepted_gap
        agent.t_int_sampled = self.t_int_sampled
        return agent
