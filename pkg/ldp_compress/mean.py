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

"""Mean estimation of unit vectors.

PrivHS sends a seed for a uniform unit vector v and a sign agreeing
with the hemisphere of the input with probability e^eps / (e^eps + 1);
the server decodes B(d, eps) * sign * v.

PrivUnit samples v from the cap {<x, v> >= gamma} with probability
p_cap and from its complement otherwise, and the server decodes v / m.
The budget is split as eps0 = theta * eps for the cap probability and
eps1 = eps - eps0 for the cap size, the cap having measure
1 / (1 + e^eps1).

For a uniform unit vector in d dimensions t = <x, v> has density
proportional to (1 - t^2)^((d - 3) / 2) on [-1, 1], and (1 - t) / 2 is
Beta((d - 1) / 2, (d - 1) / 2), so cap measures and the cap sampler are
regularized incomplete beta functions and their inverses.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import betainc, betaincinv, betaln, gammaln

from .compress import CompressionConfig, RandomizerSpec, compress_pure
from .randcore import (DEFAULT_SEED_BITS, BitStream, PrgSpec, Seed,
                       bernoulli, sphere_bits, standard_normals,
                       uniform_double, uniform_unit_vector)
from .utils import info_print

UNIT_TOLERANCE = 1e-9

SPLIT_GRID = tuple(i / 100 for i in range(101))

SCHEMES = ('privhs', 'privunit')


def _check_unit(x: np.ndarray) -> np.ndarray:
    """Return x as a float array, raising ValueError unless it is a unit vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or not x.size:
        raise(ValueError(f"Expected a vector, got shape {x.shape}"))
    norm = np.linalg.norm(x)
    if abs(norm - 1) > UNIT_TOLERANCE:
        raise(ValueError(f"Input norm {norm} is not 1; lift inputs inside "
                         f"the ball with lift_to_sphere"))
    return x


def lift_to_sphere(x: Sequence[float]) -> np.ndarray:
    """Map a vector in the unit ball to the unit sphere one dimension up."""
    x = np.asarray(x, dtype=np.float64)
    squared = float(x @ x)
    if squared > 1 + UNIT_TOLERANCE:
        raise(ValueError(f"Vector norm {math.sqrt(squared)} exceeds 1"))
    return np.append(x, math.sqrt(max(0.0, 1 - squared)))


def project_from_sphere(y: Sequence[float]) -> np.ndarray:
    """Drop the coordinate added by lift_to_sphere."""
    return np.asarray(y, dtype=np.float64)[:-1]


def sphere_prg(d: int, seed_bits: int = DEFAULT_SEED_BITS) -> PrgSpec:
    """Return the default generator of unit vectors in d dimensions."""
    return PrgSpec(seed_bits=seed_bits, output_bits=sphere_bits(d),
                   family='shake256', key=b'ldpc-sphere')


def priv_hs_norm(d: int, eps: float) -> float:
    """Return B(d, eps), the norm of a decoded PrivHS report.

    B = (e^eps + 1) / (e^eps - 1) * sqrt(pi) * Gamma((d + 1) / 2) / Gamma(d / 2)
    """
    if d < 1:
        raise(ValueError(f"Dimension must be positive: {d}"))
    if not eps > 0:
        raise(ValueError(f"eps must be positive: {eps}"))
    coth = 1 / math.tanh(eps / 2)
    return coth * math.sqrt(math.pi) * math.exp(gammaln((d + 1) / 2)
                                                - gammaln(d / 2))


def _keep_probability(eps: float) -> float:
    """Return e^eps / (e^eps + 1), 1 at eps = inf."""
    return 1 / (1 + math.exp(-eps))


def cap_fraction(d: int, gamma: float) -> float:
    """Return the measure of {v : <x, v> >= gamma} on the unit sphere."""
    if d < 2:
        raise(ValueError(f"Cap measure needs d >= 2, got {d}"))
    if gamma <= -1:
        return 1.0
    if gamma >= 1:
        return 0.0
    a = (d - 1) / 2
    return float(betainc(a, a, (1 - gamma) / 2))


def cap_threshold(d: int, fraction: float) -> float:
    """Return gamma with cap_fraction(d, gamma) == fraction."""
    if d < 2:
        raise(ValueError(f"Cap measure needs d >= 2, got {d}"))
    if not 0 < fraction < 1:
        raise(ValueError(f"Cap fraction outside (0, 1): {fraction}"))
    a = (d - 1) / 2
    return float(1 - 2 * betaincinv(a, a, fraction))


def cap_first_moment(d: int, gamma: float) -> float:
    """Return E[t 1{t >= gamma}] for t = <x, v> with v uniform.

    This is (1 - gamma^2)^((d - 1) / 2) / ((d - 1) B(1/2, (d - 1) / 2)).
    """
    if d < 2:
        raise(ValueError(f"Cap moment needs d >= 2, got {d}"))
    if abs(gamma) >= 1:
        return 0.0
    log_moment = ((d - 1) / 2 * math.log1p(-gamma * gamma)
                  - math.log(d - 1) - betaln(0.5, (d - 1) / 2))
    return math.exp(log_moment)


def marginal_moment(d: int, lower: float, upper: float,
                    power: int = 1) -> float:
    """Return E[t^power 1{lower <= t <= upper}] by adaptive quadrature.

    The density is evaluated in log space so large d doesn't underflow.
    """
    if d < 2:
        raise(ValueError(f"Marginal density needs d >= 2, got {d}"))
    exponent = (d - 3) / 2
    log_norm = betaln(0.5, (d - 1) / 2)

    def integrand(t: float) -> float:
        if abs(t) >= 1:
            return 0.0
        return t ** power * math.exp(exponent * math.log1p(-t * t) - log_norm)

    # Most of the mass sits within a few 1/sqrt(d) of 0.
    width = min(1.0, 10 / math.sqrt(d))
    points = [t for t in (-width, 0.0, width) if lower < t < upper]
    value, error = quad(integrand, lower, upper, points=points or None,
                        epsabs=1e-12, epsrel=1e-10, limit=200)
    info_print(f"quad d={d} [{lower}, {upper}]^{power}: {value} "
               f"(+- {error:.2g})", tag=3)
    return value


@dataclass(frozen=True)
class MeanParams(object):
    """Parameters of a mean estimation randomizer.

    For PrivUnit eps0 + eps1 == eps, q_cap is the cap measure
    1 / (1 + e^eps1) and gamma_cap its threshold; m is the debias constant
    and decoded reports have norm 1 / m.  For PrivHS norm is B(d, eps).
    """

    scheme: str
    d: int
    eps: float
    theta: float = 1.0
    eps0: float = 0.0
    eps1: float = 0.0
    p_cap: float = 0.5
    q_cap: float = 0.5
    gamma_cap: float = 0.0
    m: float = 1.0
    norm: float = 1.0

    @property
    def proxy(self) -> float:
        """The squared norm of a decoded report."""
        return self.norm ** 2


def priv_hs_params(d: int, eps: float) -> MeanParams:
    """Return the PrivHS parameters."""
    norm = priv_hs_norm(d, eps)
    return MeanParams(scheme='privhs', d=d, eps=eps, eps0=eps,
                      p_cap=_keep_probability(eps), m=1 / norm, norm=norm)


def _split_debias(d: int, eps: float, theta: float) -> tuple:
    """Return (eps0, eps1, p_cap, q_cap, gamma_cap, m) for a split."""
    eps0 = theta * eps
    eps1 = eps - eps0
    p_cap = _keep_probability(eps0)
    q_cap = 1 / (1 + math.exp(eps1))
    gamma_cap = cap_threshold(d, q_cap)
    moment = cap_first_moment(d, gamma_cap)
    m = moment * (p_cap / q_cap - (1 - p_cap) / (1 - q_cap))
    return eps0, eps1, p_cap, q_cap, gamma_cap, m


def priv_unit_params(d: int, eps: float,
                     theta: Optional[float] = None) -> MeanParams:
    """Return the PrivUnit parameters, optimizing the split if theta is None."""
    if d < 2:
        raise(ValueError(f"PrivUnit needs d >= 2, got {d}"))
    if not 0 < eps < math.inf:
        raise(ValueError(f"eps must be positive and finite: {eps}"))
    if theta is None:
        theta, _ = optimize_split(eps, d)
    if not 0 <= theta <= 1:
        raise(ValueError(f"Split outside [0, 1]: {theta}"))

    eps0, eps1, p_cap, q_cap, gamma_cap, m = _split_debias(d, eps, theta)
    if not m > 0:
        raise(ValueError(f"Inconsistent PrivUnit parameters: m = {m}"))
    info_print(f"PrivUnit d={d} eps={eps:.6g} theta={theta:.2f}: "
               f"gamma={gamma_cap:.6g} m={m:.6g}", tag=2)
    return MeanParams(scheme='privunit', d=d, eps=eps, theta=theta,
                      eps0=eps0, eps1=eps1, p_cap=p_cap, q_cap=q_cap,
                      gamma_cap=gamma_cap, m=m, norm=1 / m)


def priv_unit_debias(params: MeanParams) -> float:
    """Return m, the expected <x, v> of a PrivUnit sample."""
    return _split_debias(params.d, params.eps, params.theta)[-1]


@lru_cache(maxsize=256)
def optimize_split(eps: float, d: int) -> tuple[float, float]:
    """Return (theta, 1 / m^2) minimizing the decoded squared norm."""
    if not 0 < eps < math.inf:
        raise(ValueError(f"eps must be positive and finite: {eps}"))
    best = None
    for theta in SPLIT_GRID:
        m = _split_debias(d, eps, theta)[-1]
        if m > 0 and (best is None or 1 / m ** 2 < best[1]):
            best = (theta, 1 / m ** 2)
    info_print(f"optimize_split d={d} eps={eps:.6g}: theta={best[0]:.2f} "
               f"proxy={best[1]:.6g}", tag=2)
    return best


def norm_proxy(scheme: str, d: int, eps: float,
               theta: Optional[float] = None) -> float:
    """Return the squared norm of one decoded report."""
    if scheme == 'privhs':
        return priv_hs_norm(d, eps) ** 2
    if scheme == 'privunit':
        return priv_unit_params(d, eps, theta).proxy
    raise(ValueError(f"Unknown mean scheme: {scheme}"))


def predicted_error(scheme: str, d: int, eps: float, n: int,
                    m_reps: int = 1, theta: Optional[float] = None) -> float:
    """Return E||mean estimate - true mean||^2 for n unit vectors."""
    repetition = RepetitionConfig(m_reps, eps)
    proxy = norm_proxy(scheme, d, repetition.per_eps, theta)
    return (proxy - 1) / (repetition.m_reps * n)


class MeanReport(object):
    """One client's mean estimation report.

    Compressed PrivHS reports carry a seed and a sign, compressed PrivUnit
    reports a seed, and uncompressed reports the vector itself.
    """

    def __init__(self, scheme: str, seed: Optional[Seed] = None,
                 sign: int = 0, vector: Optional[np.ndarray] = None):
        """Initialize the report."""
        if seed is None and vector is None:
            raise(ValueError("A report needs a seed or a vector"))
        if sign not in (-1, 0, 1):
            raise(ValueError(f"Invalid sign: {sign}"))
        self.scheme = scheme
        self.seed = seed
        self.sign = sign
        self.vector = None if vector is None else np.asarray(vector,
                                                             dtype=np.float64)

    def __repr__(self) -> str:
        """Return a representation of the report."""
        if self.vector is not None:
            return f"MeanReport({self.scheme!r}, vector of {self.vector.size})"
        return f"MeanReport({self.scheme!r}, seed={self.seed}, sign={self.sign})"

    def __eq__(self, other: Any) -> bool:
        """Return True if both reports carry the same payload."""
        if not isinstance(other, MeanReport):
            return NotImplemented
        if (self.vector is None) != (other.vector is None):
            return False
        if self.vector is not None and not np.array_equal(self.vector,
                                                          other.vector):
            return False
        return ((self.scheme, self.seed, self.sign)
                == (other.scheme, other.seed, other.sign))


def priv_hs_sign_probability(x: np.ndarray, v: np.ndarray,
                             eps: float) -> float:
    """Return P[sign = +1] for input x and direction v."""
    keep = _keep_probability(eps)
    return keep if float(x @ v) >= 0 else 1 - keep


def priv_hs_encode(x: Sequence[float], eps: float, stream: BitStream,
                   prg: Optional[PrgSpec] = None) -> MeanReport:
    """Return the PrivHS report (seed, sign) of the unit vector x."""
    x = _check_unit(x)
    if prg is None:
        prg = sphere_prg(x.size)
    seed = Seed.random(stream, prg)
    v = uniform_unit_vector(BitStream.from_seed(seed, prg), x.size)
    sign = 1 if bernoulli(stream, priv_hs_sign_probability(x, v, eps)) else -1
    return MeanReport('privhs', seed=seed, sign=sign)


def priv_hs_decode(report: MeanReport, d: int, eps: float,
                   prg: Optional[PrgSpec] = None) -> np.ndarray:
    """Return B(d, eps) * sign * v."""
    if prg is None:
        prg = sphere_prg(d)
    v = uniform_unit_vector(BitStream.from_seed(report.seed, prg), d)
    return priv_hs_norm(d, eps) * report.sign * v


def _sample_cap(x: np.ndarray, params: MeanParams, in_cap: bool,
                stream: BitStream) -> np.ndarray:
    """Return v uniform on the cap around x, or on its complement."""
    d, q = params.d, params.q_cap
    a = (d - 1) / 2

    u = uniform_double(stream)
    tail = u * q if in_cap else q + u * (1 - q)
    t = float(1 - 2 * betaincinv(a, a, tail))

    normals = standard_normals(stream, d)
    normals -= (normals @ x) * x
    orthogonal = normals / np.linalg.norm(normals)
    return t * x + math.sqrt(max(0.0, 1 - t * t)) * orthogonal


def priv_unit_encode(x: Sequence[float], params: MeanParams,
                     stream: BitStream) -> np.ndarray:
    """Return the PrivUnit sample, a unit vector."""
    x = _check_unit(x)
    if x.size != params.d:
        raise(ValueError(f"Input has dimension {x.size}, params {params.d}"))
    in_cap = bool(bernoulli(stream, params.p_cap))
    return _sample_cap(x, params, in_cap, stream)


def priv_unit_decode(report: Any, params: MeanParams,
                     prg: Optional[PrgSpec] = None) -> np.ndarray:
    """Return v / m for a sample, an uncompressed report or a seed report."""
    if isinstance(report, MeanReport):
        if report.vector is not None:
            return report.vector / params.m
        return decompress_priv_unit(report.seed, params, prg)
    return np.asarray(report, dtype=np.float64) / params.m


@lru_cache(maxsize=64)
def priv_unit_randomizer_spec(params: MeanParams) -> RandomizerSpec:
    """Return PrivUnit as a randomizer over the uniform sphere.

    The density ratio is p_cap / q inside the cap and
    (1 - p_cap) / (1 - q) outside.
    """
    d = params.d
    inside = params.p_cap / params.q_cap
    outside = (1 - params.p_cap) / (1 - params.q_cap)

    def ref_sample(stream: BitStream) -> np.ndarray:
        return uniform_unit_vector(stream, d)

    def density_ratio(x: np.ndarray, v: np.ndarray) -> float:
        return inside if float(x @ v) >= params.gamma_cap else outside

    return RandomizerSpec(t=sphere_bits(d), ref_sample=ref_sample,
                          density_ratio=density_ratio, eps=params.eps,
                          name=f"privunit(d={d}, eps={params.eps:g})")


def compress_priv_unit(x: Sequence[float], params: MeanParams,
                       cfg: CompressionConfig,
                       entropy: BitStream) -> Seed:
    """Return a seed whose unit vector has (nearly) the PrivUnit law on x."""
    x = _check_unit(x)
    return compress_pure(x, priv_unit_randomizer_spec(params), cfg, entropy)


def decompress_priv_unit(seed: Seed, params: MeanParams,
                         prg: Optional[PrgSpec] = None) -> np.ndarray:
    """Return v / m for the unit vector of seed."""
    if prg is None:
        prg = sphere_prg(params.d)
    v = uniform_unit_vector(BitStream.from_seed(seed, prg), params.d)
    return v / params.m


@dataclass(frozen=True)
class RepetitionConfig(object):
    """m_reps runs at eps / m_reps each."""

    m_reps: int
    eps: float

    def __post_init__(self):
        """Check m_reps is positive."""
        if self.m_reps < 1:
            raise(ValueError(f"m_reps must be positive: {self.m_reps}"))

    @property
    def per_eps(self) -> float:
        """The budget of each run."""
        return self.eps / self.m_reps


def repeat_encode(x: Any, encoder: Callable[[Any, BitStream], Any],
                  m_reps: int, stream: BitStream) -> list:
    """Run encoder (already at eps / m_reps) m_reps times on x."""
    if m_reps < 1:
        raise(ValueError(f"m_reps must be positive: {m_reps}"))
    return [encoder(x, stream) for _ in range(m_reps)]


def repeat_decode(reports: Sequence[Any],
                  decoder: Optional[Callable[[Any], np.ndarray]] = None
                  ) -> np.ndarray:
    """Return the average of the decoded reports."""
    if not len(reports):
        raise(ValueError("No reports"))
    if decoder is not None:
        reports = [decoder(report) for report in reports]
    return np.mean(np.asarray(reports, dtype=np.float64), axis=0)
