#!/usr/bin/env python
# -*- coding: utf-8 -*-

from crossing_sim import agent
from crossing_sim.agent import PedestrianAgent

import pytest
import numpy as np


def test_forward_phases():
    ped = PedestrianAgent((-1.0, 0.2), agent_id=3)
    assert ped.phase == agent.WAITING
    ped.reject(0.02)
    ped.accept(2, 0.8)
    assert ped.phase == agent.INITIATING
    assert ped.accepted_gap == 2
    assert ped.t_int_sampled == 0.8
    ped.start_crossing()
    assert ped.phase == agent.CROSSING
    ped.finish()
    assert ped.phase == agent.DONE


def test_never_crossed_is_terminal():
    ped = PedestrianAgent((0.0, 0.0))
    ped.give_up()
    assert ped.phase == agent.NEVER_CROSSED
    with pytest.raises(agent.PhaseTransitionError):
        ped.accept(1, 0.5)


def test_no_skipping_or_going_back():
    ped = PedestrianAgent((0.0, 0.0))
    with pytest.raises(agent.PhaseTransitionError):
        ped.start_crossing()
    ped.accept(1, 0.5)
    with pytest.raises(agent.PhaseTransitionError):
        ped.give_up()
    with pytest.raises(agent.PhaseTransitionError):
        ped.reject(0.01)


def test_rejection_memory_nondecreasing():
    ped = PedestrianAgent((0.0, 0.0))
    assert ped.rejection_history_max_cue is None
    history = []
    for theta_dot in (0.02, 0.01, 0.03, 0.005):
        ped.reject(theta_dot)
        history.append(ped.rejection_history_max_cue)
    assert history == [0.02, 0.02, 0.03, 0.03]


def test_moved_copies_state():
    ped = PedestrianAgent((0.0, 0.5), agent_id=9)
    ped.reject(0.01)
    ped.accept(2, 1.2)
    ped.start_crossing()
    moved = ped.moved((0.1, 0.5), (1.0, 0.0))
    assert moved is not ped
    assert moved.agent_id == 9
    assert moved.phase == agent.CROSSING
    assert moved.rejection_history_max_cue == 0.01
    assert moved.accepted_gap == 2
    assert np.array_equal(moved.position, [0.1, 0.5])
    assert np.array_equal(ped.position, [0.0, 0.5])
