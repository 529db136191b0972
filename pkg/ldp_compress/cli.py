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

"""Command line interface.

    ldpcompress freq encode -k 100 -e 1.1 -i values.txt -o reports.ldpc
    ldpcompress freq aggregate -i reports.ldpc
    ldpcompress mean encode -e 4 -s privhs -i vectors.csv -o reports.ldpc
    ldpcompress mean aggregate -i reports.ldpc
    ldpcompress simulate --config experiment.conf
    ldpcompress params -k 100 -e 1.1

Exit status is 0 on success, 2 for bad configuration or arguments and 3
for unreadable or malformed files.
"""

import sys
from argparse import ArgumentParser, Namespace
from typing import Optional, Sequence

import numpy as np

from . import utils
from .freq import choose_params
from .harness import (FREQ_SCHEMES, MEAN_SCHEMES, MEAN_WIRE_SCHEMES,
                      ExperimentConfig, _floats, aggregate_freq,
                      aggregate_mean, encode_freq_values, encode_mean_vectors,
                      freq_params, mean_params, run_simulation)
from .mean import RepetitionConfig, sphere_prg
from .utils import ConfigError, WireError, info_print
from .wire import (WireFile, decode_freq, decode_mean, encode_freq,
                   encode_mean, message_bits)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def _read_values(path: str) -> list[int]:
    """Read one integer value per line, skipping blank lines."""
    stream = sys.stdin if path == '-' else open(path, 'r', encoding='utf-8')
    with stream:
        values = []
        for number, line in enumerate(stream, 1):
            if line.strip():
                try:
                    values.append(int(line))
                except ValueError:
                    raise ValueError(f"{path}:{number}: not an integer: "
                                     f"{line.strip()!r}")
    return values


def freq_encode(args: Namespace) -> int:
    """Encode a file of values into a report file."""
    values = _read_values(args.input)
    params = freq_params(args.scheme, args.k, args.eps, args.variant,
                         args.delta, args.q)
    reports = encode_freq_values(values, args.scheme, params, args.seed)
    data = encode_freq(reports, params, args.scheme, args.layout)

    path = utils.output_file(args.output)
    with WireFile(path, 'wb') as wire_file:
        wire_file.write(data)
    info_print(f"Wrote {len(reports)} reports to {path}", tag=0)
    return EXIT_OK


def freq_aggregate(args: Namespace) -> int:
    """Print the debiased counts of a report file."""
    with WireFile(args.input, 'rb') as wire_file:
        scheme, params, reports = decode_freq(wire_file.read())
    estimate = aggregate_freq(scheme, params, reports)

    print("value,estimate")
    for j, count in enumerate(estimate.estimates, 1):
        print(f"{j},{count:.6f}")
    return EXIT_OK


def mean_encode(args: Namespace) -> int:
    """Encode a CSV file of unit vectors into a report file."""
    vectors = np.atleast_2d(np.loadtxt(args.input, delimiter=',', ndmin=2))
    d = vectors.shape[1]
    repetition = RepetitionConfig(args.m_reps, args.eps)
    params = mean_params(args.scheme, d, repetition.per_eps, args.theta)
    prg = sphere_prg(d, args.seed_bits)
    wire_scheme = MEAN_WIRE_SCHEMES[args.scheme]
    reports = encode_mean_vectors(vectors, wire_scheme, params, prg,
                                  args.m_reps, args.seed, gamma=args.gamma)
    data = encode_mean(reports, params, wire_scheme, prg, args.m_reps)

    path = utils.output_file(args.output)
    with WireFile(path, 'wb') as wire_file:
        wire_file.write(data)
    info_print(f"Wrote {len(reports)} reports to {path}", tag=0)
    return EXIT_OK


def mean_aggregate(args: Namespace) -> int:
    """Print the estimated mean of a report file."""
    with WireFile(args.input, 'rb') as wire_file:
        _, params, prg, m_reps, reports = decode_mean(wire_file.read())
    estimate = aggregate_mean(params, prg, m_reps, reports)
    print(','.join(f"{value:.9g}" for value in estimate))
    return EXIT_OK


def simulate(args: Namespace) -> int:
    """Run an experiment config file."""
    config = ExperimentConfig.from_file(args.config)
    csv_path, json_path = run_simulation(config)
    print(csv_path)
    print(json_path)
    return EXIT_OK


def params(args: Namespace) -> int:
    """Print the PI-RAPPOR parameters chosen for k and eps."""
    chosen = choose_params(args.k, args.eps, args.variant, delta=args.delta,
                           prime=args.prime, exact=args.exact)
    print(f"p = {chosen.p}")
    print(f"alpha0 = {chosen.alpha0}")
    print(f"alpha1 = {chosen.alpha1}")
    print(f"realized eps = {chosen.realized_eps:.9g}")
    print(f"message bits = {message_bits('pi-rappor', chosen)}")
    return EXIT_OK


def _eps(text: str) -> float:
    """Parse eps, allowing 'ln(x)'."""
    values = _floats(text)
    if len(values) != 1:
        raise ValueError(f"expected one eps, got {text!r}")
    return values[0]


def build_parser() -> ArgumentParser:
    """Return the argument parser."""
    parser = ArgumentParser(prog='ldpcompress',
                            description="Compressed local randomizers.")
    parser.add_argument('-q', '--quiet', action='store_true', default=False,
                        help='Only print results.', dest='quiet')
    parser.add_argument('-v', '--verbose', action='store', default=1,
                        help='Print more information (0-3).',
                        dest='verbose_level')
    commands = parser.add_subparsers(dest='command', required=True)

    freq = commands.add_parser('freq', help='Frequency estimation.')
    freq_commands = freq.add_subparsers(dest='action', required=True)
    encode = freq_commands.add_parser('encode', help='Encode values.')
    encode.add_argument('-k', '--k', type=int, required=True,
                        help='Domain size.')
    encode.add_argument('-e', '--eps', type=_eps, required=True,
                        help='Privacy parameter.')
    encode.add_argument('-s', '--scheme', choices=FREQ_SCHEMES,
                        default='pi-rappor')
    encode.add_argument('--variant', choices=('deletion', 'replacement'),
                        default='deletion')
    encode.add_argument('--delta', type=float, default=0.01,
                        help='Accuracy slack of the prime choice.')
    encode.add_argument('--q', type=int, default=None,
                        help='Field size of gen-pi-rappor.')
    encode.add_argument('--layout', choices=('packed', 'words'),
                        default='packed')
    encode.add_argument('--seed', type=int, default=0,
                        help='Master seed of the client streams.')
    encode.add_argument('-i', '--input', required=True,
                        help="Values, one per line ('-' for stdin).")
    encode.add_argument('-o', '--output', required=True)
    encode.set_defaults(function=freq_encode)
    aggregate = freq_commands.add_parser('aggregate',
                                         help='Estimate counts.')
    aggregate.add_argument('-i', '--input', required=True)
    aggregate.set_defaults(function=freq_aggregate)

    mean = commands.add_parser('mean', help='Mean estimation.')
    mean_commands = mean.add_subparsers(dest='action', required=True)
    encode = mean_commands.add_parser('encode', help='Encode unit vectors.')
    encode.add_argument('-e', '--eps', type=_eps, required=True)
    encode.add_argument('-s', '--scheme', choices=MEAN_SCHEMES,
                        default='privhs')
    encode.add_argument('--theta', type=float, default=None,
                        help='Budget split of PrivUnit.')
    encode.add_argument('-m', '--m-reps', type=int, default=1,
                        dest='m_reps')
    encode.add_argument('--seed-bits', type=int, default=256,
                        dest='seed_bits')
    encode.add_argument('--gamma', type=float, default=0.01,
                        help='Failure mass of the rejection loop.')
    encode.add_argument('--seed', type=int, default=0)
    encode.add_argument('-i', '--input', required=True,
                        help='Unit vectors, one CSV row each.')
    encode.add_argument('-o', '--output', required=True)
    encode.set_defaults(function=mean_encode)
    aggregate = mean_commands.add_parser('aggregate', help='Estimate mean.')
    aggregate.add_argument('-i', '--input', required=True)
    aggregate.set_defaults(function=mean_aggregate)

    sim = commands.add_parser('simulate', help='Run an experiment.')
    sim.add_argument('-c', '--config', required=True)
    sim.set_defaults(function=simulate)

    chooser = commands.add_parser('params', help='Choose PI-RAPPOR params.')
    chooser.add_argument('-k', '--k', type=int, required=True)
    chooser.add_argument('-e', '--eps', type=_eps, required=True)
    chooser.add_argument('--variant', choices=('deletion', 'replacement'),
                         default='deletion')
    chooser.add_argument('--delta', type=float, default=0.01)
    chooser.add_argument('--prime', type=int, default=None)
    chooser.add_argument('--exact', action='store_true', default=False,
                         help='Search for a prime attaining eps.')
    chooser.set_defaults(function=params)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line and return the exit status."""
    args = build_parser().parse_args(argv)
    utils.set_verbosity(-1 if args.quiet else args.verbose_level)

    try:
        return args.function(args)
    except (ConfigError, ValueError, IndexError) as err:
        print(f"Invalid configuration: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (WireError, OSError) as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == '__main__':
    sys.exit(main())
