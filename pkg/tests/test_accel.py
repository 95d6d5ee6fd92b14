import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from mrso import _accel

pytestmark = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba missing")

masks_st = st.integers(1, 3).flatmap(
    lambda w: hnp.arrays(np.uint64, st.tuples(st.integers(0, 12), st.just(w)))
)


def _bits(row):
    return {w * 64 + b for w, word in enumerate(row) for b in range(64) if (int(word) >> b) & 1}


def _both(fn, *args, **kw):
    with _accel.use_backend("numba"):
        a = fn(*args, **kw)
    with _accel.use_backend("numpy"):
        b = fn(*args, **kw)
    return a, b


def test_pack_unpack_round_trip():
    m = np.array([[1, 2**63 + 5], [0, 7]], dtype=np.uint64)
    assert np.array_equal(_accel.pack_bits(_accel.unpack_bits(m)), m)
    assert _accel.unpack_bits(m)[0, 64 + 63] == 1


@given(masks_st, masks_st)
def test_product_or(m1, m2):
    if m1.shape[1] != m2.shape[1]:
        m2 = np.zeros((m2.shape[0], m1.shape[1]), dtype=np.uint64)
    a, b = _both(_accel.product_or, m1, m2)
    assert np.array_equal(a, b)
    assert a.shape == (len(m1) * len(m2), m1.shape[1])
    for i in range(len(m1)):
        for j in range(len(m2)):
            assert _bits(a[i * len(m2) + j]) == _bits(m1[i]) | _bits(m2[j])


@given(masks_st, st.data())
def test_eta_keep(masks, data):
    nbits = 64 * masks.shape[1]
    ncodon = data.draw(st.integers(1, min(8, nbits // 2)))
    a_off = data.draw(st.integers(0, nbits - ncodon))
    b_off = data.draw(st.integers(0, nbits - ncodon))
    incompat = data.draw(hnp.arrays(np.bool_, (ncodon, ncodon)))
    a, b = _both(_accel.eta_keep, masks, a_off, b_off, ncodon, incompat)
    assert np.array_equal(a, b)
    for r, row in enumerate(masks):
        bits = _bits(row)
        bad = any(incompat[x, y] for x in range(ncodon) for y in range(ncodon)
                  if a_off + x in bits and b_off + y in bits)
        assert a[r] == (not bad)


@given(masks_st, st.data())
def test_remap(masks, data):
    nbits = 64 * masks.shape[1]
    used = data.draw(st.integers(1, nbits))
    words_out = data.draw(st.integers(1, 3))
    target = np.array(data.draw(st.lists(st.integers(0, 64 * words_out - 1), min_size=used, max_size=used)))
    a, b = _both(_accel.remap, masks, target, words_out)
    assert np.array_equal(a, b)
    for r, row in enumerate(masks):
        want = {int(target[j]) for j in _bits(row) if j < used}
        assert _bits(a[r]) == want


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4))
def test_chunked_dispatch_matches_serial(workers):
    from concurrent.futures import ThreadPoolExecutor

    rng = np.random.default_rng(workers)
    m1 = rng.integers(0, 2**63, size=(70, 2), dtype=np.uint64)
    m2 = rng.integers(0, 2**63, size=(40, 2), dtype=np.uint64)
    incompat = rng.random((16, 16)) < 0.2
    target = rng.integers(0, 128, size=128)
    old = _accel.MIN_CHUNK
    _accel.MIN_CHUNK = 8
    try:
        with ThreadPoolExecutor(workers) as pool:
            for name in ("numba", "numpy"):
                with _accel.use_backend(name):
                    prod = _accel.product_or(m1, m2)
                    assert np.array_equal(_accel.product_or(m1, m2, pool, workers), prod)
                    assert np.array_equal(_accel.eta_keep(prod, 3, 70, 16, incompat, pool, workers),
                                          _accel.eta_keep(prod, 3, 70, 16, incompat))
                    assert np.array_equal(_accel.remap(prod, target, 2, pool, workers),
                                          _accel.remap(prod, target, 2))
    finally:
        _accel.MIN_CHUNK = old


def test_env_flag_selects_numpy(monkeypatch):
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "from mrso import _accel; print(_accel.backend())"],
        env={**__import__("os").environ, "MRSO_DISABLE_NUMBA": "1"},
        capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_benchmark_script_runs():
    import subprocess
    import sys
    from pathlib import Path

    script = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    out = subprocess.run([sys.executable, str(script), "--rows", "256", "--repeat", "1"],
                         capture_output=True, text=True, check=True).stdout
    assert "eta_keep" in out and "solve" in out
