"""The compiled kernel and the pure-Python fallback must agree bit for bit."""

import numpy as np
import pytest

from boundarywalk import _backend, _kernel_py


def test_backend_selected():
    assert _backend.BACKEND in ("compiled", "python")


def test_stream_key_matches_fallback():
    for seed in (0, 1, 12345, 2**63 - 1):
        for stream in (0, 1, 77):
            assert _backend.stream_key(seed, stream) == _kernel_py.stream_key(
                seed, stream
            )


def test_uniform_matches_fallback():
    key = _kernel_py.stream_key(42, 0)
    for counter in (0, 1, 2, 1000, 2**40):
        assert _backend.uniform(key, counter) == _kernel_py.uniform(key, counter)


def test_uniform_in_unit_interval():
    key = _kernel_py.stream_key(7, 3)
    us = [_backend.uniform(key, c) for c in range(1000)]
    assert all(0.0 <= u < 1.0 for u in us)
    # crude uniformity check: the mean of 1000 draws is within 5 sigma of 1/2
    assert abs(sum(us) / len(us) - 0.5) < 5 * (12**-0.5) / len(us) ** 0.5


def test_fill_uniforms_matches_scalar_uniform():
    key = _kernel_py.stream_key(9, 1)
    counters = np.arange(1, 257, dtype=np.uint64)
    vec = _backend.fill_uniforms(key, counters)
    scalars = np.array([_kernel_py.uniform(key, int(c)) for c in counters])
    np.testing.assert_array_equal(vec, scalars)


def test_sample_indices_matches_fallback():
    key = _kernel_py.stream_key(3, 2)
    counters = np.arange(1, 10_001, dtype=np.uint64)
    cdf = np.array([0.1, 0.35, 0.6, 1.0])
    a = _backend.sample_indices(key, counters, cdf)
    b = _kernel_py.sample_indices(key, counters, cdf)
    np.testing.assert_array_equal(a, b)
    assert a.min() >= 0 and a.max() < len(cdf)


def test_sample_indices_matches_searchsorted():
    key = _kernel_py.stream_key(11, 0)
    counters = np.arange(1, 4097, dtype=np.uint64)
    cdf = np.array([0.25, 0.5, 0.75, 1.0])
    us = _backend.fill_uniforms(key, counters)
    expected = np.minimum(np.searchsorted(cdf, us, side="right"), len(cdf) - 1)
    np.testing.assert_array_equal(_backend.sample_indices(key, counters, cdf), expected)


def test_distinct_keys_decorrelate():
    k1 = _kernel_py.stream_key(0, 0)
    k2 = _kernel_py.stream_key(0, 1)
    assert k1 != k2
    assert _backend.uniform(k1, 5) != _backend.uniform(k2, 5)


@pytest.mark.skipif(_backend.BACKEND != "compiled", reason="compiled kernel absent")
def test_compiled_backend_is_distinct_module():
    from boundarywalk import _kernel

    assert _backend.fill_uniforms is _kernel.fill_uniforms
