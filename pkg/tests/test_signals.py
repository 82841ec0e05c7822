import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from multiscale_sr.signals import (BoxKernel, ConvMode, GridSignal, MeasurementSet, Normalization,
                                   ShapeError, add_noise, aggregate_scale, apply_T, apply_T_adjoint,
                                   box_convolve, dense_operator, integral_image, interlace_measure,
                                   output_length, source_length)
from oracles import EXAMPLE_X, window_sum

MODES = [ConvMode.VALID, ConvMode.FULL, ConvMode.CYCLIC]
finite = st.floats(-100, 100, allow_nan=False)


def test_box_convolve_valid_small():
    out = box_convolve([1, 2, 3, 4], 2, ConvMode.VALID)
    np.testing.assert_array_equal(out.values, [3, 5, 7])


def test_box_convolve_cyclic_wraps():
    out = box_convolve([1, 2, 3, 4], 2, ConvMode.CYCLIC)
    np.testing.assert_array_equal(out.values, [3, 5, 7, 5])


def test_example_matrix_looks_constant():
    np.testing.assert_array_equal(box_convolve(EXAMPLE_X, 2, "valid").values, np.full((3, 3), 4.0))
    np.testing.assert_array_equal(box_convolve(EXAMPLE_X, 3, "valid").values, np.full((2, 2), 9.0))
    ms_x = apply_T(EXAMPLE_X, (2, 3), "valid", "unit")
    ms_1 = apply_T(np.ones((4, 4)), (2, 3), "valid", "unit")
    np.testing.assert_array_equal(ms_x.flat(), ms_1.flat())


def test_mean_kernel_averages():
    out = box_convolve(np.ones((5, 5)), BoxKernel(3, 2, "mean"), "valid")
    np.testing.assert_allclose(out.values, 1.0)


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("k", [1, 2, 3, 7])
def test_box_convolve_matches_loops_1d(mode, k):
    u = np.random.default_rng(k).normal(size=9)
    np.testing.assert_allclose(box_convolve(u, k, mode).values, window_sum(u, k, mode.value), atol=1e-12)


@pytest.mark.parametrize("mode", MODES)
def test_box_convolve_matches_loops_2d(mode):
    u = np.random.default_rng(0).normal(size=(7, 6))
    np.testing.assert_allclose(box_convolve(u, 3, mode).values, window_sum(u, 3, mode.value), atol=1e-12)


def test_cyclic_window_longer_than_signal():
    u = np.arange(4.0)
    np.testing.assert_allclose(box_convolve(u, 6, "cyclic").values, window_sum(u, 6, "cyclic"))


def test_errors():
    with pytest.raises(ShapeError):
        box_convolve(np.ones(3), 4, "valid")
    with pytest.raises(ValueError):
        BoxKernel(0)
    with pytest.raises(ValueError):
        GridSignal([1.0, np.nan])
    with pytest.raises(ValueError):
        GridSignal(np.ones((2, 2, 2)))


@pytest.mark.parametrize("mode,expected", [("valid", 1021), ("full", 1027), ("cyclic", 1024)])
def test_output_lengths(mode, expected):
    assert output_length(1024, 4, mode) == expected
    assert source_length(expected, 4, mode) == 1024


def test_interlace_length_on_1024():
    assert interlace_measure(np.zeros(1024), 4, "valid").shape == (1021,)


def test_interlace_identity_k1():
    u = np.random.default_rng(1).normal(size=(5, 4))
    for mode in MODES:
        np.testing.assert_array_equal(interlace_measure(u, 1, mode).values, u)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 14), k=st.integers(1, 6), mode=st.sampled_from(MODES),
       two_d=st.booleans(), seed=st.integers(0, 2**16))
def test_interlace_equals_box_convolve(n, k, mode, two_d, seed):
    if mode is ConvMode.VALID and n < k:
        return
    shape = (n, n + 1) if two_d else (n,)
    if mode is ConvMode.VALID and min(shape) < k:
        return
    u = np.random.default_rng(seed).integers(-5, 6, size=shape).astype(float)
    np.testing.assert_array_equal(interlace_measure(u, k, mode).values, box_convolve(u, k, mode).values)


def test_aggregate_cyclic_example():
    u = np.array([1, 2, 3, 4, 5, 6], dtype=float)
    y2 = box_convolve(u, 2, "cyclic")
    np.testing.assert_array_equal(aggregate_scale(y2, 2, 2, "cyclic").values, box_convolve(u, 4, "cyclic").values)
    np.testing.assert_array_equal(aggregate_scale(y2, 2, 1, "cyclic").values, y2.values)


def test_aggregate_valid_k3_m4():
    u = np.random.default_rng(7).normal(size=40)
    agg = aggregate_scale(box_convolve(u, 3, "valid"), 3, 4, "valid").values
    direct = box_convolve(u, 12, "valid").values
    np.testing.assert_allclose(agg, direct, rtol=1e-12, atol=1e-12 * np.abs(direct).max())


@settings(max_examples=50, deadline=None)
@given(n=st.integers(6, 30), k=st.integers(1, 4), m=st.integers(1, 4), mode=st.sampled_from(MODES),
       two_d=st.booleans(), mean=st.booleans())
def test_aggregate_property(n, k, m, mode, two_d, mean):
    if mode is ConvMode.VALID and m * k > n:
        return
    norm = Normalization.MEAN if mean else Normalization.UNIT
    shape = (n, n) if two_d else (n,)
    u = np.random.default_rng(n * 31 + k).normal(size=shape)
    y = apply_T(u, (k,), mode, norm).data[0]
    agg = aggregate_scale(y, k, m, mode, norm).values
    direct = apply_T(u, (m * k,), mode, norm).data[0].values
    np.testing.assert_allclose(agg, direct, rtol=1e-12, atol=1e-11)


def test_aggregate_errors():
    with pytest.raises(ValueError):
        aggregate_scale(np.ones(5), 2, 0, "valid")
    with pytest.raises(ShapeError):
        aggregate_scale(box_convolve(np.ones(6), 2, "valid"), 2, 4, "valid")


def test_integral_image_examples():
    table = integral_image([1.0, 1.0, 1.0])
    np.testing.assert_array_equal(table.cumulative, [0, 1, 2, 3])
    assert table.box_sum((0,), (3,)) == 3
    ones = integral_image(np.ones((3, 3)))
    for r in range(2):
        for c in range(2):
            assert ones.box_sum((r, c), (r + 2, c + 2)) == 4


def test_integral_image_random_windows():
    rng = np.random.default_rng(64)
    u = rng.normal(size=(64, 64))
    table = integral_image(u)
    for _ in range(100):
        r0, r1 = sorted(rng.integers(0, 65, size=2))
        c0, c1 = sorted(rng.integers(0, 65, size=2))
        direct = u[r0:r1, c0:c1].sum()
        assert table.box_sum((r0, c0), (r1, c1)) == pytest.approx(direct, rel=1e-9, abs=1e-9)


def test_window_sums_match_box_convolve():
    u = np.random.default_rng(3).normal(size=(10, 12))
    np.testing.assert_allclose(integral_image(u).window_sums(4), box_convolve(u, 4, "valid").values, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(5, 16), scales=st.lists(st.integers(1, 5), min_size=1, max_size=3, unique=True),
       mode=st.sampled_from(MODES), two_d=st.booleans(), mean=st.booleans(), seed=st.integers(0, 999))
def test_adjoint_identity(n, scales, mode, two_d, mean, seed):
    norm = Normalization.MEAN if mean else Normalization.UNIT
    shape = (n, n - 1) if two_d else (n,)
    rng = np.random.default_rng(seed)
    u = rng.normal(size=shape)
    Tu = apply_T(u, scales, mode, norm)
    v = Tu.with_data([rng.normal(size=z.shape) for z in Tu.data])
    lhs = float(Tu.flat() @ v.flat())
    rhs = float(np.sum(u * apply_T_adjoint(v).values))
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("mode", ["valid", "cyclic"])
def test_adjoint_scales_3_5(mode):
    rng = np.random.default_rng(35)
    u = rng.normal(size=24)
    Tu = apply_T(u, (3, 5), mode, "unit")
    v = Tu.with_data([rng.normal(size=z.shape) for z in Tu.data])
    assert float(Tu.flat() @ v.flat()) == pytest.approx(float(u @ apply_T_adjoint(v).values), rel=1e-10)


def test_adjoint_k1_identity():
    v = MeasurementSet((1,), "valid", "unit", (np.arange(5.0),), (5,))
    np.testing.assert_array_equal(apply_T_adjoint(v).values, np.arange(5.0))


def test_cyclic_gram_first_row():
    T = np.zeros((6, 6))
    for a in range(6):
        T[a, a] = T[a, (a + 1) % 6] = 1
    gram = T.T @ T
    e0 = np.zeros(6)
    e0[0] = 1
    row = apply_T_adjoint(apply_T(e0, (2,), "cyclic", "unit")).values
    np.testing.assert_array_equal(row, gram[0])
    for i in range(6):
        np.testing.assert_array_equal(gram[i], np.roll(gram[0], i))


@pytest.mark.parametrize("mode", MODES)
def test_dense_operator_matches_fast(mode):
    u = np.random.default_rng(5).normal(size=(6, 7))
    T = dense_operator(u.shape, (2, 3), mode, "mean")
    np.testing.assert_allclose(T @ u.ravel(), apply_T(u, (3, 2), mode, "mean").flat(), atol=1e-12)


def test_mean_is_unit_over_k_power():
    u = np.random.default_rng(9).normal(size=(8, 8))
    for mode in MODES:
        unit = box_convolve(u, BoxKernel(3, 2, "unit"), mode).values
        mean = box_convolve(u, BoxKernel(3, 2, "mean"), mode).values
        np.testing.assert_array_equal(mean, unit / 9)


@settings(max_examples=40, deadline=None)
@given(u=arrays(float, st.integers(3, 20), elements=finite), k=st.integers(1, 5), t=st.integers(-10, 10))
def test_cyclic_shift_equivariance(u, k, t):
    shifted = box_convolve(np.roll(u, t), k, "cyclic").values
    np.testing.assert_allclose(shifted, np.roll(box_convolve(u, k, "cyclic").values, t), atol=1e-9)


def test_measurement_set_sorts_and_validates():
    u = np.random.default_rng(0).normal(size=10)
    a = box_convolve(u, 3, "valid")
    b = box_convolve(u, 2, "valid")
    ms = MeasurementSet((3, 2), "valid", "unit", (a, b), (10,))
    assert ms.scales == (2, 3)
    assert ms.data[0].shape == (9,)
    with pytest.raises(ShapeError):
        MeasurementSet((2, 3), "valid", "unit", (a, b), (10,))
    with pytest.raises(ValueError):
        MeasurementSet((2, 2), "valid", "unit", (b, b), (10,))
    with pytest.raises(ValueError):
        MeasurementSet((2,), "valid", "unit", (b,), (10,), sigma=-1)


def test_add_noise_contract():
    ms = apply_T(np.zeros(1000), (2, 3), "cyclic", "unit")
    assert np.array_equal(add_noise(ms, 0.0, 1).flat(), ms.flat())
    a = add_noise(ms, 1.0, seed=42)
    b = add_noise(ms, 1.0, seed=42)
    assert np.array_equal(a.flat(), b.flat())
    assert a.sigma == 1.0
    assert not np.array_equal(a.data[0].values, a.data[1].values)
    with pytest.raises(ValueError):
        add_noise(ms, -1.0)


def test_add_noise_std():
    ms = apply_T(np.zeros(10**6), (1,), "cyclic", "unit")
    std = add_noise(ms, 1.0, seed=2024).flat().std()
    assert 0.997 <= std <= 1.003
