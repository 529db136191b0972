"""Tests for PrivHS and PrivUnit mean estimation."""

import math

import numpy as np
import pytest

from ldp_compress.compress import (CompressionConfig, decompress,
                                   deletion_ratio_bounds,
                                   exact_output_distribution)
from ldp_compress.mean import (MeanReport, RepetitionConfig, cap_first_moment,
                               cap_fraction, cap_threshold,
                               compress_priv_unit, decompress_priv_unit,
                               lift_to_sphere, marginal_moment, norm_proxy,
                               optimize_split, predicted_error,
                               priv_hs_decode, priv_hs_encode, priv_hs_norm,
                               priv_hs_params, priv_hs_sign_probability,
                               priv_unit_debias, priv_unit_decode,
                               priv_unit_encode, priv_unit_params,
                               priv_unit_randomizer_spec, project_from_sphere,
                               repeat_decode, repeat_encode, sphere_prg)
from ldp_compress.randcore import (BitStream, PrgSpec, Seed, derive_stream,
                                   sphere_bits, uniform_unit_vector)


def unit(d, label='x'):
    return uniform_unit_vector(derive_stream(0, 'unit', label, d), d)


def test_priv_hs_norm():
    assert priv_hs_norm(2000, 8) ** 2 == pytest.approx(3145, rel=0.01)
    assert priv_hs_norm(1, 1.0) == pytest.approx(1 / math.tanh(0.5))
    with pytest.raises(ValueError):
        priv_hs_norm(0, 1.0)
    with pytest.raises(ValueError):
        priv_hs_norm(10, 0.0)


def test_cap_geometry_matches_quadrature():
    for d, gamma in ((5, 0.3), (50, 0.1), (1000, 0.02)):
        fraction = cap_fraction(d, gamma)
        assert fraction == pytest.approx(
            marginal_moment(d, gamma, 1.0, power=0), rel=1e-6)
        assert cap_threshold(d, fraction) == pytest.approx(gamma, abs=1e-9)
        assert cap_first_moment(d, gamma) == pytest.approx(
            marginal_moment(d, gamma, 1.0, power=1), rel=1e-6)

    assert cap_fraction(10, 0.0) == pytest.approx(0.5)
    assert cap_fraction(10, -1.0) == 1.0
    assert cap_fraction(10, 1.0) == 0.0
    assert marginal_moment(20, -1.0, 1.0, power=0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        cap_fraction(1, 0.0)
    with pytest.raises(ValueError):
        cap_threshold(10, 1.0)


@pytest.mark.parametrize('gamma', [-0.9, -0.4, 0.0, 0.25, 0.7, 0.99])
def test_cap_fraction_closed_forms(gamma):
    assert cap_fraction(2, gamma) == pytest.approx(math.acos(gamma) / math.pi,
                                                   abs=1e-12)
    assert cap_fraction(3, gamma) == pytest.approx((1 - gamma) / 2,
                                                   abs=1e-12)


@pytest.mark.parametrize('d, gamma', [(2, 0.3), (3, -0.2), (10, 0.2),
                                      (100, 0.05)])
def test_cap_fraction_by_sampling(d, gamma):
    n = 10000
    stream = derive_stream(0, 'cap', d)
    inside = sum(uniform_unit_vector(stream, d)[0] >= gamma
                 for _ in range(n))
    assert abs(inside / n - cap_fraction(d, gamma)) <= 3 / math.sqrt(n)


def test_lift_to_sphere():
    lifted = lift_to_sphere([0.6, 0.0])
    assert np.allclose(lifted, [0.6, 0.0, 0.8])
    assert np.allclose(project_from_sphere(lifted), [0.6, 0.0])
    with pytest.raises(ValueError):
        lift_to_sphere([1.0, 1.0])


def test_priv_unit_params():
    params = priv_unit_params(100, 4.0, theta=0.5)
    assert params.eps0 + params.eps1 == pytest.approx(4.0)
    assert params.q_cap == pytest.approx(1 / (1 + math.exp(2.0)))
    assert params.p_cap == pytest.approx(math.exp(2.0) / (1 + math.exp(2.0)))
    assert cap_fraction(100, params.gamma_cap) == pytest.approx(params.q_cap)
    assert params.m > 0
    assert priv_unit_debias(params) == pytest.approx(params.m)
    assert params.proxy == pytest.approx(1 / params.m ** 2)

    with pytest.raises(ValueError):
        priv_unit_params(1, 4.0)
    with pytest.raises(ValueError):
        priv_unit_params(10, math.inf)
    with pytest.raises(ValueError):
        priv_unit_params(10, 4.0, theta=1.5)


def test_optimize_split():
    theta, proxy = optimize_split(4.0, 100)
    assert 0 <= theta <= 1
    assert proxy <= priv_unit_params(100, 4.0, theta=0.5).proxy
    assert priv_unit_params(100, 4.0).theta == theta


def test_priv_hs_round_trip():
    x = unit(8)
    prg = sphere_prg(8)
    report = priv_hs_encode(x, 2.0, derive_stream(0, 'privhs'), prg)
    assert report.scheme == 'privhs'
    assert report.sign in (-1, 1)
    assert report.seed.bits == 256
    decoded = priv_hs_decode(report, 8, 2.0, prg)
    assert np.linalg.norm(decoded) == pytest.approx(priv_hs_norm(8, 2.0))
    with pytest.raises(ValueError):
        priv_hs_encode(2 * x, 2.0, derive_stream(0, 'privhs'), prg)


def test_priv_hs_exact_privacy_in_one_dimension():
    eps = 1.0
    prg = PrgSpec(seed_bits=6, output_bits=sphere_bits(1))
    laws = {}
    for x in (1.0, -1.0):
        law = {}
        for seed in prg.seeds():
            v = uniform_unit_vector(BitStream.from_seed(seed, prg), 1)
            keep = priv_hs_sign_probability(np.array([x]), v, eps)
            law[(seed.value, 1)] = keep / prg.count
            law[(seed.value, -1)] = (1 - keep) / prg.count
        assert sum(law.values()) == pytest.approx(1.0)
        laws[x] = law

    ratio = max(laws[1.0][key] / laws[-1.0][key] for key in laws[1.0])
    assert ratio == pytest.approx(math.exp(eps))


def test_priv_unit_samples_are_unit_vectors():
    params = priv_unit_params(20, 3.0, theta=0.5)
    x = unit(20)
    stream = derive_stream(0, 'privunit-samples')
    inside = 0
    for _ in range(2000):
        v = priv_unit_encode(x, params, stream)
        assert np.linalg.norm(v) == pytest.approx(1.0)
        inside += float(x @ v) >= params.gamma_cap
    assert inside / 2000 == pytest.approx(params.p_cap, abs=0.04)
    with pytest.raises(ValueError):
        priv_unit_encode(unit(10), params, stream)


@pytest.mark.slow
def test_priv_unit_cap_probability():
    params = priv_unit_params(20, 3.0, theta=0.5)
    x = unit(20)
    n = 100000
    stream = derive_stream(0, 'privunit-cap')
    inside = sum(float(x @ priv_unit_encode(x, params, stream))
                 >= params.gamma_cap for _ in range(n))
    assert inside / n == pytest.approx(params.p_cap, abs=0.01)


def test_priv_unit_decode_forms():
    params = priv_unit_params(10, 2.0, theta=0.5)
    v = unit(10, 'v')
    assert np.allclose(priv_unit_decode(v, params), v / params.m)
    report = MeanReport('privunit', vector=v)
    assert np.allclose(priv_unit_decode(report, params), v / params.m)

    prg = sphere_prg(10)
    seed = Seed(12345, 256)
    from_seed = decompress_priv_unit(seed, params, prg)
    assert np.allclose(priv_unit_decode(MeanReport('privunit-seed', seed=seed),
                                        params, prg), from_seed)
    assert np.linalg.norm(from_seed) == pytest.approx(1 / params.m)


def test_compressed_priv_unit():
    params = priv_unit_params(6, 2.0, theta=0.5)
    spec = priv_unit_randomizer_spec(params)
    assert spec.t == sphere_bits(6)
    prg = PrgSpec(seed_bits=8, output_bits=sphere_bits(6),
                  key=b'ldpc-sphere')
    x = unit(6)

    law = exact_output_distribution(x, spec, prg)
    high, low = deletion_ratio_bounds(law)
    assert math.log(high) <= 2 * spec.eps + 1e-9
    assert -math.log(low) <= 2 * spec.eps + 1e-9

    cfg = CompressionConfig.for_spec(spec, 0.01, prg)
    seed = compress_priv_unit(x, params, cfg, derive_stream(0, 'compress'))
    v = decompress(seed, spec, prg)
    assert np.allclose(decompress_priv_unit(seed, params, prg), v / params.m)


def test_mean_report_equality():
    seed = Seed(3, 8)
    assert MeanReport('privhs', seed=seed, sign=1) == \
        MeanReport('privhs', seed=seed, sign=1)
    assert MeanReport('privhs', seed=seed, sign=1) != \
        MeanReport('privhs', seed=seed, sign=-1)
    assert MeanReport('privunit', vector=[1.0, 0.0]) == \
        MeanReport('privunit', vector=np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        MeanReport('privhs')
    with pytest.raises(ValueError):
        MeanReport('privhs', seed=seed, sign=2)


def test_repetition():
    config = RepetitionConfig(4, 8.0)
    assert config.per_eps == 2.0
    with pytest.raises(ValueError):
        RepetitionConfig(0, 8.0)

    stream = derive_stream(0, 'repeat')
    reports = repeat_encode(unit(5), lambda x, s: priv_hs_encode(x, 2.0, s),
                            3, stream)
    assert len(reports) == 3
    average = repeat_decode(reports, lambda r: priv_hs_decode(r, 5, 2.0))
    assert average.shape == (5,)
    assert np.allclose(repeat_decode([np.ones(2), np.zeros(2)]), [0.5, 0.5])
    with pytest.raises(ValueError):
        repeat_decode([])


def test_predicted_error():
    assert predicted_error('privhs', 8, 2.0, 100) == pytest.approx(
        (priv_hs_norm(8, 2.0) ** 2 - 1) / 100)
    assert predicted_error('privhs', 8, 2.0, 100, m_reps=2) == pytest.approx(
        (priv_hs_norm(8, 1.0) ** 2 - 1) / 200)
    with pytest.raises(ValueError):
        norm_proxy('sqkr', 8, 2.0)
    with pytest.raises(ValueError):
        predicted_error('privhs', 8, 2.0, 100, m_reps=0)


@pytest.mark.parametrize('eps', [4, 5, 6, 7, 8])
def test_scheme_ordering(eps):
    d = 1000
    optimized = norm_proxy('privunit', d, eps)
    halved = norm_proxy('privunit', d, eps, theta=0.5)
    assert optimized <= halved <= priv_hs_params(d, eps).proxy


def test_repetition_tradeoff():
    d, n = 1000, 10000
    errors = [predicted_error('privunit', d, 8.0, n, m_reps=m)
              for m in (1, 2, 4, 8)]
    assert errors == sorted(errors)
    assert errors[1] / errors[0] <= 2.5


@pytest.mark.slow
def test_priv_hs_unbiased():
    d, eps, batches, n = 100, 4.0, 10, 10000
    x = unit(d)
    prg = sphere_prg(d)
    norm = priv_hs_norm(d, eps)
    stream = derive_stream(0, 'privhs-unbiased')
    means, errors = [], []
    for _ in range(batches):
        decoded = np.array([
            priv_hs_decode(priv_hs_encode(x, eps, stream, prg), d, eps, prg)
            for _ in range(n)])
        mean = decoded.mean(axis=0)
        means.append(mean)
        errors.append(float((mean - x) @ (mean - x)))

    sigma = norm / math.sqrt(d * batches * n)
    assert np.all(np.abs(np.mean(means, axis=0) - x) <= 4 * sigma)
    assert np.mean(errors) == pytest.approx(norm ** 2 / n, rel=0.15)


@pytest.mark.slow
def test_priv_unit_unbiased():
    d, eps, total = 100, 4.0, 100000
    params = priv_unit_params(d, eps)
    x = unit(d)
    stream = derive_stream(0, 'privunit-unbiased')
    mean = np.mean([priv_unit_decode(priv_unit_encode(x, params, stream),
                                     params) for _ in range(total)], axis=0)
    sigma = np.sqrt((x ** 2 + 1 / (d - 1)) / (params.m ** 2 * total))
    assert np.all(np.abs(mean - x) <= 4 * sigma)
