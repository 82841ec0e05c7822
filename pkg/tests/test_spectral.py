import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiscale_sr.signals import dense_operator
from multiscale_sr.spectral import (NonInvertibleError, asymptotic_trace, box_dft, condition_number,
                                    continuum_minimum, cyclic_dense_trace, finite_condition_number,
                                    has_common_zero, near_zero_count, near_zero_lower_bound,
                                    pairwise_coprime, periodic_sinc, predicted_mse, stacked_profile,
                                    transfer_function, valid_mode_trace, zero_sets_disjoint)
from oracles import circulant_gram_trace, window_sum_1d


def coprime_tuples(size, lo=2, hi=15):
    return st.lists(st.integers(lo, hi), min_size=size, max_size=size, unique=True).filter(pairwise_coprime)


def test_sinc_at_zero_is_one():
    for k in range(1, 30):
        assert periodic_sinc(k, 0.0) == 1.0


def test_sinc_zeros():
    assert abs(periodic_sinc(2, math.pi)) < 1e-15
    assert abs(periodic_sinc(3, 2 * math.pi / 3)) < 1e-15


def test_sinc_endpoint_magnitude():
    for k in range(1, 10):
        assert abs(periodic_sinc(k, 2 * math.pi)) == 1.0


def test_sinc_rejects_out_of_range():
    with pytest.raises(ValueError):
        periodic_sinc(3, -0.1)
    with pytest.raises(ValueError):
        periodic_sinc(3, 7.0)
    with pytest.raises(ValueError):
        periodic_sinc(0, 1.0)


def test_sinc_matches_direct_dft_of_box7():
    n = 1024
    w = 2 * np.pi * np.arange(n) / n
    direct = np.abs(np.exp(-1j * np.outer(w, np.arange(7))).sum(axis=1) / 7)
    np.testing.assert_allclose(np.abs(periodic_sinc(7, w)), direct, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(k=st.integers(2, 40), w=st.floats(0, 2 * math.pi))
def test_sinc_bounded(k, w):
    v = abs(periodic_sinc(k, w))
    assert v <= 1.0
    if 1e-6 < w < 2 * math.pi - 1e-6:
        assert v < 1.0


def test_box_dft_n4_k2():
    np.testing.assert_allclose(np.abs(box_dft(2, 4)), [1, 1 / math.sqrt(2), 0, 1 / math.sqrt(2)], atol=1e-15)
    direct = np.fft.fft([0.5, 0.5, 0, 0])
    np.testing.assert_allclose(box_dft(2, 4), direct, atol=1e-15)


def test_box_dft_coprime_grid_has_no_zeros():
    assert np.all(np.abs(box_dft(3, 8)) > 0.1)


def test_box_dft_k_equals_n():
    vals = np.abs(box_dft(6, 6))
    assert vals[0] == pytest.approx(1.0)
    assert np.all(vals[1:] == 0)


def test_box_dft_rejects_long_box():
    with pytest.raises(ValueError):
        box_dft(9, 8)


@settings(max_examples=40, deadline=None)
@given(k=st.integers(1, 12), n=st.integers(12, 40), d=st.sampled_from([1, 2]))
def test_box_dft_matches_fft(k, n, d):
    kernel = np.zeros((n,) * d)
    kernel[(slice(0, k),) * d] = 1.0 / k**d
    np.testing.assert_allclose(box_dft(k, n, d), np.fft.fftn(kernel), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(k=st.integers(1, 9), n=st.integers(3, 24), two_d=st.booleans())
def test_transfer_function_diagonalizes_cyclic_measurement(k, n, two_d):
    shape = (n, n + 1) if two_d else (n,)
    T = dense_operator(shape, (k,), "cyclic", "unit")
    u = np.random.default_rng(n).normal(size=shape)
    y = (T @ u.ravel()).reshape(shape)
    np.testing.assert_allclose(np.fft.fftn(y), transfer_function(k, shape, "unit") * np.fft.fftn(u), atol=1e-9)


def test_near_zero_count_examples():
    assert near_zero_count(4, 1024, 1, 0.01) >= 3
    assert near_zero_count(5, 16, 2, 1.0) == 16**2
    assert near_zero_count(3, 300, 2, 1e-12) >= 1196
    assert near_zero_lower_bound(3, 300, 2) == 1196


@settings(max_examples=30, deadline=None)
@given(k=st.integers(2, 8), m=st.integers(20, 60), d=st.sampled_from([1, 2]))
def test_near_zero_bound_on_divisible_grids(k, m, d):
    n = k * m
    assert near_zero_count(k, n, d, 1e-12) >= near_zero_lower_bound(k, n, d)


def test_zero_sets_disjoint_iff_coprime():
    for k1 in range(2, 16):
        for k2 in range(k1 + 1, 16):
            brute = {Fraction(m, k1) for m in range(1, k1)} & {Fraction(m, k2) for m in range(1, k2)}
            assert zero_sets_disjoint(k1, k2) == (not brute) == (math.gcd(k1, k2) == 1)


def test_profile_max_is_sqrt_s():
    prof = stacked_profile((9, 11), 200)
    assert prof.max_value == pytest.approx(math.sqrt(2))
    assert prof.sigma_values[0] == pytest.approx(math.sqrt(2))


def test_profile_shared_factor_zero():
    prof = stacked_profile((9, 12), 990)
    assert prof.min_value == 0.0
    assert prof.sigma_values[330] == 0.0
    assert not prof.invertible and not prof.coprime


def test_profile_single_full_box():
    prof = stacked_profile((16,), 16)
    assert np.count_nonzero(prof.sigma_values) == 1


@settings(max_examples=40, deadline=None)
@given(scales=st.lists(st.integers(2, 9), min_size=2, max_size=3, unique=True), d=st.sampled_from([1, 2]))
def test_positivity_iff_no_common_zero(scales, d):
    if d == 1:
        scales = scales[:2]
    elif len(scales) < 3:
        return
    n = 4 * math.lcm(*scales)
    if d == 2 and n > 600:
        return
    prof = stacked_profile(scales, n, d)
    assert prof.invertible == (not has_common_zero(scales, d))
    if d == 1 or len(scales) == d + 1:
        assert prof.invertible == pairwise_coprime(scales)


def test_condition_number_bounded_for_coprime():
    bound = math.sqrt(2) / continuum_minimum((9, 11))
    kappas = [condition_number(stacked_profile((9, 11), n)) for n in (330, 990, 9900)]
    assert max(kappas) / min(kappas) - 1 < 0.02
    assert all(k <= bound * (1 + 1e-9) for k in kappas)
    assert condition_number(stacked_profile((9, 11), 110)) <= bound


def test_condition_number_dense_cross_check():
    T = dense_operator((110,), (9, 11), "cyclic", "mean")
    s = np.linalg.svd(T, compute_uv=False)
    assert condition_number(stacked_profile((9, 11), 110)) == pytest.approx(s.max() / s.min(), rel=1e-9)


def test_condition_number_shared_factor_infinite():
    prof = stacked_profile((9, 12), 990)
    assert math.isinf(condition_number(prof))
    assert math.isfinite(finite_condition_number(prof))


def test_condition_number_diverges_for_shared_factor():
    grids = [n + 1 for n in range(50, 801, 50)]
    kappas = [condition_number(stacked_profile((4, 6), n)) for n in grids]
    assert all(math.isfinite(k) for k in kappas)
    assert all(b >= a for a, b in zip(kappas, kappas[1:]))
    assert kappas[-1] > 10 * kappas[0]
    assert math.isinf(condition_number(stacked_profile((4, 6), 800)))


def test_predicted_mse_identity_map():
    pred = predicted_mse(stacked_profile((1,), 37))
    assert pred.trace_normalized == pytest.approx(1.0)
    assert pred.rmse_factor == pytest.approx(1.0)


def test_predicted_mse_matches_dense_at_990():
    pred = predicted_mse(stacked_profile((9, 11), 990), sigma=2.0)
    dense = cyclic_dense_trace((9, 11), 990)
    assert pred.trace_normalized == pytest.approx(dense, rel=1e-9)
    assert pred.expected_mse == pytest.approx(4 * dense, rel=1e-9)
    assert pred.asymptotic_value == pytest.approx(asymptotic_trace((9, 11)))


def test_predicted_mse_rejects_zero():
    with pytest.raises(NonInvertibleError) as info:
        predicted_mse(stacked_profile((2, 4), 16))
    assert info.value.frequency is not None


def test_loop_oracle_agrees():
    assert cyclic_dense_trace((2, 3), 14) == pytest.approx(circulant_gram_trace((2, 3), 14), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(data=st.data(), d=st.sampled_from([1, 2]))
def test_predicted_mse_equals_dense_trace(data, d):
    scales = data.draw(coprime_tuples(d + 1, 1, 7))
    n = data.draw(st.integers(max(scales), 64 if d == 1 else 8))
    prof = stacked_profile(scales, n, d)
    if not prof.invertible:
        return
    assert predicted_mse(prof).trace_normalized == pytest.approx(cyclic_dense_trace(scales, n, d), rel=1e-8)


@settings(max_examples=20, deadline=None)
@given(scales=coprime_tuples(3, 2, 12))
def test_lower_bound_triples_2d(scales):
    pred = predicted_mse(stacked_profile(scales, 48, 2), asymptotic=False)
    assert pred.trace_normalized >= min(scales) ** 2 / 3
    assert pred.lower_bound == min(scales) ** 2 / 3


def test_asymptotic_trace_convergence():
    asym = asymptotic_trace((9, 11))
    cyc = predicted_mse(stacked_profile((9, 11), 10**4), asymptotic=False).trace_normalized
    assert abs(cyc - asym) / asym < 0.01
    g = 99 * 64
    from multiscale_sr.spectral import _midpoint_trace
    assert abs(_midpoint_trace((9, 11), 1, g) - _midpoint_trace((9, 11), 1, 2 * g)) / asym < 1e-3


def test_asymptotic_trace_small_pair_bound():
    assert asymptotic_trace((2, 3)) >= 1.0


def test_asymptotic_trace_rejects_shared_factor():
    with pytest.raises(NonInvertibleError):
        asymptotic_trace((4, 6))


def test_valid_trace_identity():
    assert valid_mode_trace((1,), 13) == pytest.approx(1.0)


def test_valid_trace_hand_built():
    n = 10
    cols = []
    for k in (2, 3):
        block = np.array([window_sum_1d(np.eye(n)[i], k, "valid") for i in range(n)]).T / k
        cols.append(block)
    T = np.vstack(cols)
    expected = np.trace(np.linalg.inv(T.T @ T)) / n
    assert valid_mode_trace((2, 3), n) == pytest.approx(expected, rel=1e-12)


def test_valid_trace_approaches_cyclic():
    gaps = []
    for n in (50, 100, 200, 400):
        cyc = predicted_mse(stacked_profile((9, 11), n), asymptotic=False).trace_normalized
        val = valid_mode_trace((9, 11), n)
        assert val >= cyc
        gaps.append(val - cyc)
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_valid_trace_rejects_rank_deficient():
    with pytest.raises(NonInvertibleError):
        valid_mode_trace((2, 4), 12)
