"""Tests for RAPPOR and PI-RAPPOR frequency estimation."""

import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from ldp_compress.compress import (CompressionConfig, compress,
                                   decompress, estimate_fooling_gap,
                                   exact_output_distribution)
from ldp_compress.field import BoolThreshold, field_bits
from ldp_compress.freq import (AffineFn, CountEstimate, RapporParams,
                               affine_from_seed, affine_to_seed,
                               choose_general_params, choose_params, debias,
                               exact_report_law, expected_l2_error,
                               frequency_oracle, gen_histogram,
                               gen_histogram_fast, gen_pi_rappor_encode,
                               histogram, noiseless_params,
                               pi_rappor_as_compression, pi_rappor_encode,
                               rappor_encode, rappor_histogram,
                               rappor_reference_law, sample_phi_conditioned,
                               theoretical_variance, true_counts)
from ldp_compress.randcore import derive_stream


@pytest.fixture
def small_params():
    """k = 4 over GF(5) at eps = ln 1.5."""
    return RapporParams(k=4, p=5, alpha0=Fraction(2, 5),
                        alpha1=Fraction(3, 5), eps=math.log(1.5))


def test_choose_params():
    params = choose_params(10, math.log(3))
    assert params.p == 307
    assert params.alpha0 == Fraction(77, 307)
    assert params.alpha1 == Fraction(230, 307)
    assert params.threshold == 77
    assert params.report_bits == 18
    assert params.realized_eps <= math.log(3)
    assert params.realized_eps == pytest.approx(math.log(230 / 77))


def test_choose_params_prime_override(small_params):
    params = choose_params(4, math.log(1.5), prime=5)
    assert params == small_params
    assert params.realized_eps == pytest.approx(math.log(1.5))
    with pytest.raises(ValueError):
        choose_params(4, math.log(1.5), prime=3)
    with pytest.raises(ValueError):
        choose_params(4, math.log(1.5), prime=9)


def test_choose_params_exact_scan():
    default = choose_params(10, math.log(3))
    exact = choose_params(10, math.log(3), exact=True)
    assert exact.p >= default.p
    assert abs(exact.alpha0 - Fraction(1, 4)) <= \
        abs(default.alpha0 - Fraction(1, 4))
    assert default.realized_eps <= exact.realized_eps <= math.log(3)


def test_choose_params_replacement():
    params = choose_params(10, math.log(3), 'replacement')
    assert params.alpha1 == Fraction(1, 2)
    assert params.realized_eps == pytest.approx(
        math.log((1 - params.alpha0) / params.alpha0))
    assert params.realized_eps <= math.log(3)


def test_prime_bound_on_exact_quotient():
    # e^eps / delta is 13 in exact arithmetic, a hair above it in floats.
    params = choose_params(4, math.log(3), delta=3 / 13)
    assert params.p == 13
    assert params.alpha0 == Fraction(4, 13)
    general = choose_general_params(4, math.log(3), delta=3 / 13)
    assert (general.p, general.dim) == (13, 1)
    # A quotient that isn't whole still rounds up.
    assert choose_params(4, math.log(3), delta=3 / 13.5).p == 17


@pytest.mark.parametrize('kwargs', [
    dict(k=1, eps=1.0), dict(k=10, eps=0.0), dict(k=10, eps=1.0,
                                                  variant='swap'),
    dict(k=10, eps=1.0, delta=0.0),
])
def test_choose_params_rejects(kwargs):
    with pytest.raises(ValueError):
        choose_params(**kwargs)


def test_params_validation():
    with pytest.raises(ValueError):
        RapporParams(k=4, p=5, alpha0=Fraction(1, 3), alpha1=Fraction(2, 3))
    with pytest.raises(ValueError):
        RapporParams(k=4, p=5, alpha0=Fraction(3, 5), alpha1=Fraction(2, 5))
    with pytest.raises(ValueError):
        RapporParams(k=5, p=5, alpha0=Fraction(2, 5), alpha1=Fraction(3, 5))
    with pytest.raises(ValueError):
        RapporParams(k=4, p=5, alpha0=0, alpha1=Fraction(3, 5))
    with pytest.raises(ValueError):
        RapporParams(k=4, p=5, alpha0=0, alpha1=Fraction(3, 5),
                     variant='noiseless')


def test_params_carry_bool_threshold(small_params):
    assert small_params.decode_threshold == BoolThreshold(2, 5)
    assert small_params.decode_threshold.alpha == small_params.alpha0

    noiseless = noiseless_params(6)
    assert noiseless.bool_threshold is None
    with pytest.raises(ValueError):
        noiseless.decode_threshold
    with pytest.raises(ValueError):
        histogram([AffineFn((1, 2), noiseless.p)], noiseless)


def test_general_params():
    params = choose_general_params(100, math.log(3), q=5)
    assert params.dim == 3
    assert params.alpha0 == Fraction(2, 5)
    assert params.report_bits == 12
    assert params.point(1) == (0, 0, 1)
    assert params.point(100) == (4, 0, 0)
    assert params.points().shape == (100, 3)
    with pytest.raises(IndexError):
        params.point(101)
    with pytest.raises(ValueError):
        choose_general_params(100, math.log(3), q=4)


def test_affine_fn():
    phi = AffineFn((3, 2), 7)
    assert phi(4).value == 4
    params = RapporParams(k=6, p=7, alpha0=Fraction(2, 7),
                          alpha1=Fraction(5, 7))
    assert [phi.bit(j, params) for j in range(1, 7)] == [0, 1, 0, 0, 0, 1]
    with pytest.raises(ValueError):
        AffineFn((7, 1), 7)
    with pytest.raises(ValueError):
        AffineFn((1,), 7)


def test_affine_seed_numbering(small_params):
    seen = set()
    for value in range(25):
        phi = affine_from_seed(value, small_params)
        assert affine_to_seed(phi, small_params) == value
        seen.add(phi.coefficients)
    assert len(seen) == 25


def test_exact_privacy_by_enumeration(small_params):
    laws = {j: exact_report_law(j, small_params) for j in range(1, 5)}
    for law in laws.values():
        assert len(law) == 25
        assert sum(law.values()) == 1

    uniform = Fraction(1, 25)
    deletion = max(max(prob / uniform, uniform / prob)
                   for law in laws.values() for prob in law.values())
    assert deletion == Fraction(3, 2)
    assert deletion == max(small_params.alpha1 / small_params.alpha0,
                           (1 - small_params.alpha0)
                           / (1 - small_params.alpha1))

    replacement = max(laws[a][phi] / laws[b][phi]
                      for a in laws for b in laws for phi in laws[a])
    assert replacement == Fraction(9, 4)
    alpha0, alpha1 = small_params.alpha0, small_params.alpha1
    assert replacement == alpha1 * (1 - alpha0) / (alpha0 * (1 - alpha1))


def test_pairwise_independence_by_enumeration():
    params = RapporParams(k=6, p=11, alpha0=Fraction(3, 11),
                          alpha1=Fraction(8, 11))
    functions = [affine_from_seed(value, params) for value in range(121)]
    bits = np.array([[phi.bit(j, params) for j in range(1, 7)]
                     for phi in functions])

    # Uniform phi.
    for j1 in range(6):
        assert Fraction(int(bits[:, j1].sum()), 121) == params.alpha0
        for j2 in range(6):
            if j1 == j2:
                continue
            for b1 in (0, 1):
                for b2 in (0, 1):
                    joint = Fraction(int(np.sum((bits[:, j1] == b1)
                                                & (bits[:, j2] == b2))), 121)
                    p1 = Fraction(int(np.sum(bits[:, j1] == b1)), 121)
                    p2 = Fraction(int(np.sum(bits[:, j2] == b2)), 121)
                    assert joint == p1 * p2

    # Encoded reports of value 2.
    law = exact_report_law(2, params)
    for j in range(1, 7):
        marginal = sum(prob for coefficients, prob in law.items()
                       if AffineFn(coefficients, 11).bit(j, params))
        assert marginal == (params.alpha1 if j == 2 else params.alpha0)
        if j == 2:
            continue
        both = sum(prob for coefficients, prob in law.items()
                   if AffineFn(coefficients, 11).bit(j, params)
                   and AffineFn(coefficients, 11).bit(2, params))
        assert both == params.alpha0 * params.alpha1


def test_sample_phi_conditioned(small_params, entropy):
    for j in range(1, 5):
        for b in (0, 1):
            for _ in range(20):
                phi = sample_phi_conditioned(j, b, small_params, entropy)
                assert phi.bit(j, small_params) == b


@pytest.mark.slow
def test_conditioned_draws_are_uniform_on_their_class(small_params):
    functions = [affine_from_seed(value, small_params) for value in range(25)]
    n = 50000
    for b, size in ((1, 10), (0, 15)):
        allowed = {phi.coefficients for phi in functions
                   if phi.bit(3, small_params) == b}
        assert len(allowed) == size

        stream = derive_stream(0, 'conditioned', b)
        drawn = Counter(sample_phi_conditioned(3, b, small_params,
                                               stream).coefficients
                        for _ in range(n))
        assert set(drawn) == allowed
        for count in drawn.values():
            assert abs(count / n - 1 / size) <= 3 / math.sqrt(n)


@pytest.mark.slow
def test_encoder_law_matches_exact_report_law(small_params):
    n = 100000
    stream = derive_stream(0, 'encoder-law')
    drawn = Counter(pi_rappor_encode(2, small_params, stream).coefficients
                    for _ in range(n))
    law = exact_report_law(2, small_params)
    assert set(drawn) <= set(law)
    for coefficients, prob in law.items():
        assert abs(drawn[coefficients] / n - float(prob)) <= 3 / math.sqrt(n)


def test_pi_rappor_encode_checks_value(small_params):
    stream = derive_stream(0, 'check')
    with pytest.raises(IndexError):
        pi_rappor_encode(0, small_params, stream)
    with pytest.raises(IndexError):
        pi_rappor_encode(5, small_params, stream)


def test_pi_rappor_generator_fools_coordinate_tests(small_params):
    spec, prg = pi_rappor_as_compression(small_params)
    assert spec.t == 3 * 4
    assert spec.exp_eps == pytest.approx(1.5)
    gap = estimate_fooling_gap(spec, prg, spec.inputs)
    assert gap.exact
    assert gap.beta < 1e-12


def test_compressed_rappor_is_pi_rappor(small_params):
    spec, prg = pi_rappor_as_compression(small_params)
    law = exact_output_distribution(3, spec, prg)
    expected = exact_report_law(3, small_params)
    for seed, prob in zip(law.seeds, law.seed_law):
        phi = affine_from_seed(seed.value, small_params)
        assert prob == pytest.approx(float(expected[phi.coefficients]))

    cfg = CompressionConfig.for_spec(spec, 0.01, prg)
    seed = compress(3, spec, cfg, derive_stream(0, 'compressed-rappor'))
    phi = affine_from_seed(seed.value, small_params)
    bits = decompress(seed, spec, prg)
    assert bits == tuple(phi.bit(j, small_params) for j in range(1, 5))


def test_rappor_generator_layout(small_params):
    spec, prg = pi_rappor_as_compression(small_params)
    width = field_bits(small_params.p)
    assert prg.output_bits == spec.t == width * small_params.k
    assert prg.count == 25
    for seed in prg.seeds():
        phi = affine_from_seed(seed.value, small_params)
        assert decompress(seed, spec, prg) == tuple(
            phi.bit(j, small_params) for j in range(1, 5))


def test_rappor_reference_sampler_marginals(small_params):
    spec, _ = pi_rappor_as_compression(small_params)
    n = 20000
    stream = derive_stream(0, 'reference')
    ones = np.sum([spec.ref_sample(stream) for _ in range(n)], axis=0)
    assert np.all(np.abs(ones / n - 2 / 5) <= 4 * math.sqrt(0.24 / n))


def test_rappor_reference_law(small_params):
    law = rappor_reference_law(small_params)
    assert len(law) == 16
    assert sum(law.values()) == 1
    assert law[(0, 0, 0, 0)] == Fraction(3, 5) ** 4


def test_rappor_counts():
    params = choose_params(8, math.log(3))
    values = [1 + i % 8 for i in range(4000)]
    stream = derive_stream(0, 'rappor')
    reports = [rappor_encode(j, params, stream) for j in values]
    assert reports[0].dtype == np.uint8
    assert reports[0].shape == (8,)
    estimate = rappor_histogram(reports, params)
    sigma = math.sqrt(theoretical_variance(params, 4000, 500))
    assert np.all(np.abs(estimate.estimates - 500) < 5 * sigma)


def test_noiseless_counts_are_exact():
    params = noiseless_params(6)
    values = [1, 2, 2, 6, 6, 6]
    stream = derive_stream(0, 'noiseless')
    reports = [rappor_encode(j, params, stream) for j in values]
    estimate = rappor_histogram(reports, params)
    assert list(estimate.estimates) == [1, 2, 0, 0, 0, 3]
    assert stream.bits_consumed == 0


def test_histogram_matches_oracle():
    params = choose_params(20, 1.0)
    stream = derive_stream(0, 'oracle')
    values = [1 + i % 20 for i in range(300)]
    reports = [pi_rappor_encode(j, params, stream) for j in values]
    estimate = histogram(reports, params)
    for j in (1, 7, 20):
        assert estimate[j] == pytest.approx(
            frequency_oracle(reports, j, params))
    assert np.array_equal(estimate.estimates,
                          gen_histogram(reports, params).estimates)


def test_fast_generalized_histogram_matches_naive():
    params = choose_general_params(8, 1.0, q=3)
    assert (params.p, params.dim, params.alpha0) == (3, 2, Fraction(1, 3))
    stream = derive_stream(0, 'generalized')
    reports = [gen_pi_rappor_encode(1 + i % 8, params, stream)
               for i in range(200)]
    assert all(len(phi.coefficients) == 3 for phi in reports)
    fast = gen_histogram_fast(reports, params)
    naive = gen_histogram(reports, params)
    assert np.array_equal(fast.estimates, naive.estimates)


def test_histogram_rejects_bad_reports(small_params):
    with pytest.raises(ValueError):
        histogram([], small_params)
    with pytest.raises(ValueError):
        histogram([AffineFn((1, 2, 3), 5)], small_params)


def test_debias_and_errors(small_params):
    assert debias(2, 5, small_params) == pytest.approx(0.0)
    assert debias(3, 5, small_params) == pytest.approx(5.0)
    estimate = CountEstimate([1.0, 2.0, 3.0, 4.0], 10, small_params)
    assert estimate[2] == 2.0
    assert estimate.l2_error([1, 1, 1, 1]) == pytest.approx(14.0)
    assert estimate.linf_error([1, 1, 1, 1]) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        CountEstimate([np.nan, 0, 0, 0], 10, small_params)
    with pytest.raises(IndexError):
        estimate[5]


def test_true_counts():
    assert list(true_counts([1, 3, 3, 4], 4)) == [1, 0, 2, 1]


def test_theoretical_variance():
    params = choose_params(100, math.log(3))
    # alpha0 + alpha1 = 1, so the variance doesn't depend on c_j.
    assert theoretical_variance(params, 10000, 0) == pytest.approx(
        theoretical_variance(params, 10000, 500))
    assert theoretical_variance(params, 10000, 0) == pytest.approx(7500,
                                                                   rel=0.02)
    assert expected_l2_error(params, 10000, [100] * 100) == pytest.approx(
        100 * theoretical_variance(params, 10000, 100))


@pytest.mark.slow
def test_variance_reproduction():
    params = choose_params(100, math.log(3))
    n, trials = 10000, 200
    values = [1 + i % 100 for i in range(n)]
    counts = true_counts(values, 100)
    estimates = []
    for trial in range(trials):
        stream = derive_stream(0, 'variance', trial)
        reports = [pi_rappor_encode(j, params, stream) for j in values]
        estimates.append(histogram(reports, params).estimates)
    estimates = np.array(estimates)

    variance = np.var(estimates, axis=0, ddof=1).mean()
    assert variance == pytest.approx(7500, rel=0.1)
    l2_error = np.mean(np.sum((estimates - counts) ** 2, axis=1))
    assert l2_error == pytest.approx(7.5e5, rel=0.1)
