#!/usr/bin/env python
# vim: sw=4:ts=4:sts=4:fdm=indent:fdl=0:
# -*- coding: UTF8 -*-
#
# Seed compression of local randomizers.
# Copyright (C) 2026 The ldpcompress developers
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.

"""Seed compression of local randomizers for frequency and mean estimation."""

from .utils import *
from .field import *
from .randcore import *
from .compress import *
from .freq import *
from .mean import *
from .wire import *
from .harness import *

# The star imports above bind dataclasses.field over the submodule.
from . import field
