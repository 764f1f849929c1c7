import os
import subprocess
import sys

import numpy as np
import pytest

from spherefront import _kernels
from spherefront.ambient import gram_defect
from spherefront.curves import bishop, make_helix

needs_numba = pytest.mark.skipif(not _kernels.NUMBA_AVAILABLE, reason="numba not installed")


def _run_both(fn):
    before = _kernels.get_backend()
    try:
        out = {}
        for name in ("numpy", "numba"):
            _kernels.set_backend(name)
            out[name] = np.asarray(fn())
        return out
    finally:
        _kernels.set_backend(before)


def test_backend_selection_from_env():
    code = "from spherefront import _kernels; print(_kernels.get_backend())"
    env = dict(os.environ, SPHEREFRONT_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    if _kernels.NUMBA_AVAILABLE:
        env["SPHEREFRONT_NUMBA"] = "1"
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        assert out.stdout.strip() == "numba"


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError):
        _kernels.set_backend("cuda")


def test_min_singular_matches_svd(rng, backend):
    for shape in [(40, 2, 8), (7, 5, 2, 4), (30, 3, 5)]:
        mats = rng.standard_normal(shape)
        ref = np.linalg.svd(mats, compute_uv=False)[..., -1]
        assert np.allclose(_kernels.min_singular(mats), ref, atol=1e-12)


def test_min_singular_rank_deficient(backend):
    m = np.zeros((1, 2, 8))
    m[0, 0, 0] = 1.0
    m[0, 1, 0] = 2.0
    assert _kernels.min_singular(m)[0] == pytest.approx(0.0, abs=1e-15)
    assert _kernels.min_singular(np.zeros((1, 2, 3)))[0] == 0.0


def test_gram_schmidt_orthonormal(rng, backend):
    frames = rng.standard_normal((20, 3, 5))
    out = _kernels.gram_schmidt(frames)
    assert gram_defect(out) < 1e-13
    # flag preserved: first vector is the normalized input
    assert np.allclose(out[:, 0], frames[:, 0] / np.linalg.norm(frames[:, 0], axis=1, keepdims=True))


def test_bishop_frame_backend_independent(backend):
    fr = bishop(make_helix(2.0, 0.5, 256))
    assert fr.frame_defect() < 1e-12
    assert np.max(np.abs(fr.kappa - 1.5)) < 1e-6


@needs_numba
def test_backends_agree(rng):
    curve = make_helix(2.0, 0.5, 256)
    h = curve.length / 1024
    half = np.arange(2 * 1024 + 1) * (h / 2)
    g, e, de = curve.derivatives(half, 2)
    basis0 = np.array([[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
    basis0 = basis0 - np.outer(basis0 @ g[0], g[0]) - np.outer(basis0 @ e[0], e[0])
    basis0 = _kernels.gram_schmidt(basis0)
    g0 = -de[0] / np.linalg.norm(de[0])
    stacks = rng.standard_normal((64, 2, 8))
    frames = rng.standard_normal((64, 3, 4))
    for fn in (
        lambda: _kernels.bishop_sweep(g, e, de, basis0, h),
        lambda: _kernels.transport_sweep(e, de, g0, h),
        lambda: _kernels.min_singular(stacks),
        lambda: _kernels.gram_schmidt(frames),
    ):
        out = _run_both(fn)
        assert np.max(np.abs(out["numpy"] - out["numba"])) < 1e-12


def test_transport_sweep_keeps_constraints(backend):
    curve = make_helix(2.0, 0.5, 256)
    h = curve.length / 512
    half = np.arange(2 * 512 + 1) * (h / 2)
    e, de = curve.derivatives(half, 2)[1:]
    g0 = -de[0] / np.linalg.norm(de[0])
    g0 = g0 - (g0 @ e[0]) * e[0]
    g0 /= np.linalg.norm(g0)
    out = _kernels.transport_sweep(e, de, g0, h)
    assert np.max(np.abs(np.linalg.norm(out, axis=1) - 1)) < 1e-14
    assert np.max(np.abs(np.sum(out * e[::2], axis=1))) < 1e-14


def test_benchmark_script_runs(tmp_path):
    if not _kernels.NUMBA_AVAILABLE:
        pytest.skip("numba not installed")
    script = os.path.join(os.path.dirname(__file__), "..", "benchmarks", "bench_kernels.py")
    out = subprocess.run([sys.executable, script, "--m", "128", "--repeat", "1",
                          "--json", str(tmp_path / "b.json")], capture_output=True, text=True, check=True)
    assert "bishop_sweep" in out.stdout
    assert (tmp_path / "b.json").exists()
