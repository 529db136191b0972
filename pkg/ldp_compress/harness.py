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

"""Simulated protocol runs.

Every client encodes with its own stream derived from the master seed
and its (trial, client) labels, the reports go through the wire format,
and the server aggregates what it reads back.  Runs are deterministic
given the config apart from the wall time column.
"""

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Optional, Sequence

import numpy as np

from . import utils
from .compress import CompressionConfig
from .freq import (CountEstimate, RapporParams, choose_general_params,
                   choose_params, expected_l2_error, gen_histogram_fast,
                   gen_pi_rappor_encode, histogram, noiseless_params,
                   pi_rappor_encode, rappor_encode, rappor_histogram,
                   true_counts)
from .mean import (MeanParams, MeanReport, RepetitionConfig,
                   compress_priv_unit, decompress_priv_unit, predicted_error,
                   priv_hs_decode, priv_hs_encode, priv_hs_params,
                   priv_unit_decode, priv_unit_encode, priv_unit_params,
                   priv_unit_randomizer_spec, repeat_decode, repeat_encode,
                   sphere_prg)
from .randcore import (DEFAULT_SEED_BITS, BitStream, PrgSpec, derive_stream,
                       uniform_unit_vector)
from .utils import ConfigError, info_print
from .wire import (decode_freq, decode_mean, encode_freq, encode_mean,
                   record_bytes, records_offset, LAYOUTS)

FREQ_SCHEMES = ('rappor', 'pi-rappor', 'gen-pi-rappor', 'noiseless')
MEAN_SCHEMES = ('privhs', 'privunit', 'privunit-opt', 'privunit-seed')

# The split used by 'privunit' when none is configured.
DEFAULT_THETA = 0.5

# The wire scheme each mean scheme's reports are written as.
MEAN_WIRE_SCHEMES = {'privhs': 'privhs', 'privunit': 'privunit',
                     'privunit-opt': 'privunit',
                     'privunit-seed': 'privunit-seed'}


def _floats(text: str) -> tuple[float, ...]:
    """Parse a comma separated list of floats, allowing 'ln(x)'."""
    values = []
    for item in text.split(','):
        item = item.strip()
        if item.startswith('ln(') and item.endswith(')'):
            values.append(math.log(float(item[3:-1])))
        else:
            values.append(float(item))
    return tuple(values)


def _ints(text: str) -> tuple[int, ...]:
    """Parse a comma separated list of integers."""
    return tuple(int(item) for item in text.split(','))


# key: parser
_CONFIG_KEYS = {
    'task': str,
    'scheme': str,
    'k': int,
    'd': int,
    'n': int,
    'eps': _floats,
    'trials': int,
    'zipf_s': float,
    'master_seed': int,
    'output_dir': str,
    'm_reps': _ints,
    'gamma': float,
    'seed_bits': int,
    'theta': float,
    'layout': str,
    'delta': float,
    'q': int,
    'variant': str,
}

_REQUIRED_KEYS = ('task', 'scheme', 'n', 'eps')


@dataclass(frozen=True)
class ExperimentConfig(object):
    """One simulated experiment, possibly sweeping eps and m_reps."""

    task: str
    scheme: str
    n: int
    eps: tuple
    k: int = 0
    d: int = 0
    trials: int = 20
    zipf_s: float = 1.1
    master_seed: int = 0
    output_dir: str = ''
    m_reps: tuple = (1,)
    gamma: float = 0.01
    seed_bits: int = DEFAULT_SEED_BITS
    theta: Optional[float] = None
    layout: str = 'packed'
    delta: float = 0.01
    q: Optional[int] = None
    variant: str = 'deletion'

    def __post_init__(self):
        """Validate the config, raising ConfigError naming the bad key."""
        object.__setattr__(self, 'eps', tuple(self.eps))
        object.__setattr__(self, 'm_reps', tuple(self.m_reps))

        if self.task == 'freq':
            if self.scheme not in FREQ_SCHEMES:
                raise ConfigError(f"scheme: {self.scheme!r} is not one of "
                                  f"{', '.join(FREQ_SCHEMES)}")
            if self.k < 2:
                raise ConfigError(f"k: must be at least 2, got {self.k}")
        elif self.task == 'mean':
            if self.scheme not in MEAN_SCHEMES:
                raise ConfigError(f"scheme: {self.scheme!r} is not one of "
                                  f"{', '.join(MEAN_SCHEMES)}")
            minimum = 1 if self.scheme == 'privhs' else 2
            if self.d < minimum:
                raise ConfigError(f"d: must be at least {minimum}, got "
                                  f"{self.d}")
        else:
            raise ConfigError(f"task: {self.task!r} is not 'freq' or 'mean'")

        checks = (
            ('n', self.n >= 1),
            ('eps', bool(self.eps) and all(e > 0 for e in self.eps)),
            ('trials', self.trials >= 1),
            ('zipf_s', self.zipf_s >= 0),
            ('m_reps', bool(self.m_reps) and all(m >= 1
                                                 for m in self.m_reps)),
            ('gamma', 0 < self.gamma < 1),
            ('seed_bits', 1 <= self.seed_bits < 1 << 16),
            ('theta', self.theta is None or 0 <= self.theta <= 1),
            ('layout', self.layout in LAYOUTS),
            ('delta', self.delta > 0),
            ('variant', self.variant in ('deletion', 'replacement')),
        )
        for key, valid in checks:
            if not valid:
                raise ConfigError(f"{key}: invalid value "
                                  f"{getattr(self, key)!r}")

    @classmethod
    def from_dict(cls, config: dict) -> 'ExperimentConfig':
        """Build a config from parsed 'key = value' strings."""
        kwargs = {}
        for key, value in config.items():
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{key}: unknown key")
            parser = _CONFIG_KEYS[key]
            try:
                kwargs[key] = parser(value) if isinstance(value, str) \
                    else value
            except ValueError as err:
                raise ConfigError(f"{key}: {err}") from err

        for key in _REQUIRED_KEYS:
            if key not in kwargs:
                raise ConfigError(f"{key}: missing")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str) -> 'ExperimentConfig':
        """Read a config file."""
        return cls.from_dict(utils.read_config(path))

    @property
    def size(self) -> int:
        """k for frequency experiments, d for mean experiments."""
        return self.k if self.task == 'freq' else self.d

    @property
    def out_dir(self) -> str:
        """The directory results are written to."""
        return self.output_dir if self.output_dir else utils.OUTPUT_PATH


@dataclass
class ResultRow(object):
    """One trial of one parameter setting."""

    scheme: str
    eps: float
    n: int
    size: int
    trial: int
    m_reps: int
    l2_error: float
    linf_error: float
    predicted_error: float
    bytes_per_message: int
    wall_time: float = field(default=0.0, compare=False)


def gen_zipf_dataset(k: int, n: int, s: float,
                     master_seed: Any = 0) -> list[int]:
    """Return n values in [1, k] drawn with P[j] proportional to j^-s."""
    if s < 0:
        raise(ValueError(f"Zipf exponent must be nonnegative: {s}"))
    weights = np.power(np.arange(1, k + 1, dtype=np.float64), -s)
    cdf = np.cumsum(weights / weights.sum())
    cdf[-1] = 1.0

    uniforms = derive_stream(master_seed, 'zipf', k, n).read_uniform_doubles(n)
    indices = np.searchsorted(cdf, uniforms, side='right')
    return [int(j) + 1 for j in np.minimum(indices, k - 1)]


def gen_sphere_dataset(d: int, n: int, master_seed: Any = 0) -> np.ndarray:
    """Return an (n, d) array of uniform unit vectors."""
    if d < 1:
        raise(ValueError(f"Dimension must be positive: {d}"))
    stream = derive_stream(master_seed, 'sphere', d, n)
    return np.array([uniform_unit_vector(stream, d) for _ in range(n)])


def freq_params(scheme: str, k: int, eps: float, variant: str = 'deletion',
                delta: float = 0.01, q: Optional[int] = None) -> RapporParams:
    """Return the parameters scheme uses at eps."""
    if scheme == 'noiseless':
        return noiseless_params(k)
    if scheme == 'gen-pi-rappor':
        return choose_general_params(k, eps, variant, q=q, delta=delta)
    if scheme in ('rappor', 'pi-rappor'):
        return choose_params(k, eps, variant, delta=delta)
    raise(ValueError(f"Unknown frequency scheme: {scheme}"))


def encode_freq_value(j: int, scheme: str, params: RapporParams,
                      stream: BitStream):
    """Return one client's report of value j."""
    if scheme in ('rappor', 'noiseless'):
        return rappor_encode(j, params, stream)
    if scheme == 'gen-pi-rappor':
        return gen_pi_rappor_encode(j, params, stream)
    return pi_rappor_encode(j, params, stream)


def encode_freq_values(values: Sequence[int], scheme: str,
                       params: RapporParams, master_seed: Any = 0,
                       trial: int = 0, run: str = '') -> list:
    """Return every client's report, client i using stream (run, trial, i)."""
    return [encode_freq_value(j, scheme, params,
                              derive_stream(master_seed, 'freq', scheme,
                                            run, trial, i))
            for i, j in enumerate(values)]


def aggregate_freq(scheme: str, params: RapporParams,
                   reports: Sequence) -> CountEstimate:
    """Return the debiased counts of the reports."""
    if scheme in ('rappor', 'noiseless'):
        return rappor_histogram(reports, params)
    if scheme == 'gen-pi-rappor':
        return gen_histogram_fast(reports, params)
    return histogram(reports, params)


def run_freq_experiment(config: ExperimentConfig) -> list[ResultRow]:
    """Run every eps and trial of a frequency experiment."""
    values = gen_zipf_dataset(config.k, config.n, config.zipf_s,
                              config.master_seed)
    counts = true_counts(values, config.k)
    rows = []

    for eps in config.eps:
        params = freq_params(config.scheme, config.k, eps, config.variant,
                             config.delta, config.q)
        predicted = expected_l2_error(params, config.n, counts)
        size = record_bytes(config.scheme, params,
                            layout=LAYOUTS[config.layout])
        info_print(f"{config.scheme} eps={eps:.4g}: p={params.p} "
                   f"alpha0={params.alpha0}, {size} bytes per report", tag=0)

        for trial in range(config.trials):
            start = time.perf_counter()
            reports = encode_freq_values(values, config.scheme, params,
                                         config.master_seed, trial,
                                         f"{eps!r}")
            data = encode_freq(reports, params, config.scheme, config.layout)
            scheme, wire_params, wire_reports = decode_freq(data)
            estimate = aggregate_freq(scheme, wire_params, wire_reports)
            row = ResultRow(scheme=config.scheme, eps=eps, n=config.n,
                            size=config.k, trial=trial, m_reps=1,
                            l2_error=estimate.l2_error(counts),
                            linf_error=estimate.linf_error(counts),
                            predicted_error=predicted,
                            bytes_per_message=(len(data)
                                               - records_offset(data))
                            // len(reports),
                            wall_time=time.perf_counter() - start)
            info_print(f"  trial {trial}: l2 {row.l2_error:.6g} "
                       f"(predicted {predicted:.6g})", tag=1)
            rows.append(row)
    return rows


def mean_params(scheme: str, d: int, eps: float,
                theta: Optional[float] = None) -> MeanParams:
    """Return the parameters scheme uses at eps."""
    if scheme == 'privhs':
        return priv_hs_params(d, eps)
    if scheme == 'privunit':
        return priv_unit_params(d, eps, DEFAULT_THETA if theta is None
                                else theta)
    if scheme in ('privunit-opt', 'privunit-seed'):
        return priv_unit_params(d, eps, theta)
    raise(ValueError(f"Unknown mean scheme: {scheme}"))


def encode_mean_vector(x: np.ndarray, scheme: str, params: MeanParams,
                       prg: PrgSpec, stream: BitStream,
                       gamma: float = 0.01) -> MeanReport:
    """Return one report of the unit vector x."""
    if scheme == 'privhs':
        return priv_hs_encode(x, params.eps, stream, prg)
    if scheme == 'privunit-seed':
        cfg = CompressionConfig.for_spec(priv_unit_randomizer_spec(params),
                                         gamma, prg)
        return MeanReport('privunit-seed',
                          seed=compress_priv_unit(x, params, cfg, stream))
    return MeanReport('privunit', vector=priv_unit_encode(x, params, stream))


def encode_mean_vectors(vectors: np.ndarray, scheme: str, params: MeanParams,
                        prg: PrgSpec, m_reps: int = 1, master_seed: Any = 0,
                        trial: int = 0, gamma: float = 0.01,
                        run: str = '') -> list:
    """Return m_reps reports per client, client by client."""
    reports = []
    for i, x in enumerate(vectors):
        stream = derive_stream(master_seed, 'mean', scheme, run, trial, i)
        reports += repeat_encode(
            x, lambda x, s: encode_mean_vector(x, scheme, params, prg, s,
                                               gamma),
            m_reps, stream)
    return reports


def decode_mean_report(report: MeanReport, params: MeanParams,
                       prg: PrgSpec) -> np.ndarray:
    """Return the unbiased estimate carried by one report."""
    if report.scheme == 'privhs':
        return priv_hs_decode(report, params.d, params.eps, prg)
    if report.scheme == 'privunit-seed':
        return decompress_priv_unit(report.seed, params, prg)
    return priv_unit_decode(report, params)


def aggregate_mean(params: MeanParams, prg: PrgSpec, m_reps: int,
                   reports: Sequence[MeanReport]) -> np.ndarray:
    """Return the estimated mean, averaging each client's m_reps reports."""
    if not reports or len(reports) % m_reps:
        raise(ValueError(f"{len(reports)} reports is not a whole number of "
                         f"clients with {m_reps} reports each"))
    clients = [repeat_decode(reports[i:i + m_reps],
                             lambda r: decode_mean_report(r, params, prg))
               for i in range(0, len(reports), m_reps)]
    return np.mean(clients, axis=0)


def run_mean_experiment(config: ExperimentConfig) -> list[ResultRow]:
    """Run every eps, m_reps and trial of a mean experiment."""
    vectors = gen_sphere_dataset(config.d, config.n, config.master_seed)
    true_mean = vectors.mean(axis=0)
    wire_scheme = MEAN_WIRE_SCHEMES[config.scheme]
    prg = sphere_prg(config.d, config.seed_bits)
    rows = []

    for eps in config.eps:
        for m_reps in config.m_reps:
            repetition = RepetitionConfig(m_reps, eps)
            params = mean_params(config.scheme, config.d, repetition.per_eps,
                                 config.theta)
            predicted = predicted_error(params.scheme, config.d, eps,
                                        config.n, m_reps, params.theta
                                        if params.scheme == 'privunit'
                                        else None)
            size = m_reps * record_bytes(wire_scheme, params,
                                         config.seed_bits)
            info_print(f"{config.scheme} eps={eps:.4g} m_reps={m_reps}: "
                       f"norm {params.norm:.6g}, {size} bytes per client",
                       tag=0)

            for trial in range(config.trials):
                start = time.perf_counter()
                reports = encode_mean_vectors(
                    vectors, wire_scheme, params, prg, m_reps,
                    config.master_seed, trial, config.gamma,
                    f"{eps!r}/{m_reps}")
                data = encode_mean(reports, params, wire_scheme, prg, m_reps)
                _, wire_params, wire_prg, wire_reps, wire_reports = \
                    decode_mean(data)
                estimate = aggregate_mean(wire_params, wire_prg, wire_reps,
                                          wire_reports)
                error = estimate - true_mean
                row = ResultRow(scheme=config.scheme, eps=eps, n=config.n,
                                size=config.d, trial=trial, m_reps=m_reps,
                                l2_error=float(error @ error),
                                linf_error=float(np.max(np.abs(error))),
                                predicted_error=predicted,
                                bytes_per_message=size,
                                wall_time=time.perf_counter() - start)
                info_print(f"  trial {trial}: l2 {row.l2_error:.6g} "
                           f"(predicted {predicted:.6g})", tag=1)
                rows.append(row)
    return rows


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    """Run a frequency or mean experiment."""
    if config.task == 'freq':
        return run_freq_experiment(config)
    return run_mean_experiment(config)


def write_rows_csv(rows: Sequence[ResultRow], path: str) -> str:
    """Write the rows as CSV with a header line and return the path."""
    names = [column.name for column in fields(ResultRow)]
    with open(path, 'w', newline='', encoding='utf-8') as csv_file:
        writer = csv.DictWriter(csv_file, fieldnames=names)
        writer.writeheader()
        for row in rows:
            writer.writerow(asdict(row))
    return path


def summarize(rows: Sequence[ResultRow]) -> list[dict]:
    """Return per (scheme, eps, m_reps) aggregates of the rows."""
    groups = {}
    for row in rows:
        groups.setdefault((row.scheme, row.eps, row.m_reps), []).append(row)

    summary = []
    for (scheme, eps, m_reps), group in groups.items():
        errors = np.array([row.l2_error for row in group])
        summary.append({
            'scheme': scheme,
            'eps': eps,
            'm_reps': m_reps,
            'n': group[0].n,
            'size': group[0].size,
            'trials': len(group),
            'mean_l2_error': float(errors.mean()),
            'std_l2_error': float(errors.std(ddof=1)) if len(group) > 1
            else 0.0,
            'predicted_error': group[0].predicted_error,
            'bytes_per_message': group[0].bytes_per_message,
            'mean_wall_time': float(np.mean([row.wall_time
                                             for row in group])),
        })
    return summary


def write_summary_json(rows: Sequence[ResultRow], path: str) -> str:
    """Write the per-setting summary as JSON and return the path."""
    with open(path, 'w', encoding='utf-8') as json_file:
        json.dump(summarize(rows), json_file, indent=4)
    return path


def run_simulation(config: ExperimentConfig) -> tuple[str, str]:
    """Run config and write its CSV rows and JSON summary."""
    rows = run_experiment(config)
    stem = f"{config.task}_{config.scheme}"
    csv_path = write_rows_csv(rows, utils.output_file(f"{stem}.csv",
                                                      config.out_dir))
    json_path = write_summary_json(rows, utils.output_file(
        f"{stem}_summary.json", config.out_dir))
    info_print(f"Wrote {csv_path} and {json_path}", tag=0)
    return csv_path, json_path
