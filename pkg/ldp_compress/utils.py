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

"""Utility functions and classes."""

import os
import re
import sys
from typing import Any

VERBOSE_LEVEL = 1

# Results go to the directory named by LDPC_OUTPUT_DIR, and if that isn't set
# (or doesn't exist) to the current working directory.
OUTPUT_PATH = os.getenv('LDPC_OUTPUT_DIR', '')
if not OUTPUT_PATH or not os.path.isdir(OUTPUT_PATH):
    OUTPUT_PATH = os.getcwd()


class LdpError(Exception):
    """Base class of the errors raised by this package."""


class ConfigError(LdpError):
    """A configuration file or option is invalid."""


class WireError(LdpError):
    """A wire file is malformed or doesn't match its header."""


class SpecViolation(LdpError):
    """A randomizer broke the contract it was described with."""


class StreamExhausted(LdpError):
    """A bounded bit stream ran out of bits."""


def info_print(data: Any, end: str = '\n', tag: int = 0):
    """Print the data to stderr as info."""
    if tag <= VERBOSE_LEVEL:
        print(data, end=end, file=sys.stderr)
        sys.stderr.flush()


def set_verbosity(level: Any) -> int:
    """Set the verbose level used by info_print, returning the new level."""
    global VERBOSE_LEVEL

    try:
        VERBOSE_LEVEL = int(level)
    except (TypeError, ValueError) as err:
        print(f"Invalid verbose level '{level}': {err}", file=sys.stderr)
        VERBOSE_LEVEL = 1

    return VERBOSE_LEVEL


# A 'key = value' line.  Values may contain anything but a comment.
_config_line_regx = re.compile(r'^\s*(?P<key>[\w.-]+)\s*[=:]\s*(?P<value>[^#]*?)\s*(?:#.*)?$')


def parse_config(text: str) -> dict[str, str]:
    """Parse flat key-value config text.

    Blank lines and lines starting with '#' are skipped.  Any other line
    that isn't 'key = value' (or 'key: value') raises ConfigError.
    """
    config = {}
    for number, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            continue

        match = _config_line_regx.match(line)
        if not match:
            raise ConfigError(f"line {number}: expected 'key = value', "
                              f"got {stripped!r}")

        key = match.group('key').lower().replace('-', '_')
        if key in config:
            raise ConfigError(f"line {number}: duplicate key {key!r}")
        config[key] = match.group('value')

    return config


def read_config(path: str) -> dict[str, str]:
    """Read and parse a flat key-value config file."""
    with open(path, 'r', encoding='utf-8') as config_file:
        return parse_config(config_file.read())


def output_file(name: str, path: str = '') -> str:
    """Return name joined to the output directory unless it is absolute."""
    if os.path.isabs(name):
        return name
    return os.path.join(path if path else OUTPUT_PATH, name)
