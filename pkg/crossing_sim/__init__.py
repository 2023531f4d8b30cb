#!/usr/bin/env python
# -*- coding: utf-8 -*-

from crossing_sim import *
