"""Hot numeric loops, each with a numba and a pure-numpy implementation.

The numba path is used when numba imports and ``SPHEREFRONT_NUMBA`` is not
``0``.  Both paths implement the same arithmetic; tests run them side by side
and ``benchmarks/bench_kernels.py`` times them.
"""
from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    numba = None
    NUMBA_AVAILABLE = False

_backend = "numba" if (NUMBA_AVAILABLE and os.environ.get("SPHEREFRONT_NUMBA", "1") != "0") else "numpy"


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba is not installed")
    _backend = name


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------


def _gram_schmidt_np(frames: np.ndarray) -> np.ndarray:
    out = np.array(frames, dtype=float, copy=True)
    k = out.shape[-2]
    for i in range(k):
        v = out[..., i, :]
        for j in range(i):
            u = out[..., j, :]
            v = v - np.sum(v * u, axis=-1, keepdims=True) * u
        # second pass keeps the defect at rounding level
        for j in range(i):
            u = out[..., j, :]
            v = v - np.sum(v * u, axis=-1, keepdims=True) * u
        out[..., i, :] = v / np.linalg.norm(v, axis=-1, keepdims=True)
    return out


def _project_normal_np(basis: np.ndarray, gam: np.ndarray, e: np.ndarray) -> np.ndarray:
    basis = basis - np.outer(basis @ gam, gam)
    basis = basis - np.outer(basis @ e, e)
    return _gram_schmidt_np(basis)


def _bishop_sweep_np(gam_half, e_half, de_half, basis0, h):
    steps = (gam_half.shape[0] - 1) // 2
    k, dim = basis0.shape
    frames = np.empty((steps + 1, k, dim))
    frames[0] = basis0

    def rhs(b, idx):
        mu = b @ de_half[idx]
        return -np.outer(mu, e_half[idx])

    cur = basis0.copy()
    for i in range(steps):
        a = 2 * i
        k1 = rhs(cur, a)
        k2 = rhs(cur + 0.5 * h * k1, a + 1)
        k3 = rhs(cur + 0.5 * h * k2, a + 1)
        k4 = rhs(cur + h * k3, a + 2)
        cur = cur + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        cur = _project_normal_np(cur, gam_half[a + 2], e_half[a + 2])
        frames[i + 1] = cur
    return frames


def _transport_sweep_np(E_half, dE_half, g0, h):
    steps = (E_half.shape[0] - 1) // 2
    out = np.empty((steps + 1, g0.shape[0]))
    out[0] = g0
    cur = g0.copy()

    def rhs(g, idx):
        return -(g @ dE_half[idx]) * E_half[idx]

    for i in range(steps):
        a = 2 * i
        k1 = rhs(cur, a)
        k2 = rhs(cur + 0.5 * h * k1, a + 1)
        k3 = rhs(cur + 0.5 * h * k2, a + 1)
        k4 = rhs(cur + h * k3, a + 2)
        cur = cur + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        E = E_half[a + 2]
        cur = cur - (cur @ E) * E
        cur = cur / np.linalg.norm(cur)
        out[i + 1] = cur
    return out


def _min_singular_np(mats: np.ndarray) -> np.ndarray:
    if mats.shape[-2] == 2:
        return _min_singular2_np(mats)
    sv = np.linalg.svd(mats, compute_uv=False)
    return sv[..., -1]


def _min_singular2_np(mats: np.ndarray) -> np.ndarray:
    # two rows: sigma_min = |r0 ^ r1| / sigma_max, both free of cancellation
    r0, r1 = mats[..., 0, :], mats[..., 1, :]
    minors = r0[..., :, None] * r1[..., None, :] - r0[..., None, :] * r1[..., :, None]
    wedge2 = 0.5 * np.sum(minors**2, axis=(-1, -2))
    a, d, b = np.sum(r0 * r0, -1), np.sum(r1 * r1, -1), np.sum(r0 * r1, -1)
    smax2 = 0.5 * (a + d) + np.sqrt(0.25 * (a - d) ** 2 + b * b)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(smax2 > 0, np.sqrt(wedge2 / np.where(smax2 > 0, smax2, 1.0)), 0.0)


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if NUMBA_AVAILABLE:

    @njit(cache=True)
    def _gs_inplace(b):
        k, dim = b.shape
        for i in range(k):
            for _ in range(2):
                for j in range(i):
                    d = 0.0
                    for c in range(dim):
                        d += b[i, c] * b[j, c]
                    for c in range(dim):
                        b[i, c] -= d * b[j, c]
            nrm = 0.0
            for c in range(dim):
                nrm += b[i, c] * b[i, c]
            nrm = np.sqrt(nrm)
            for c in range(dim):
                b[i, c] /= nrm

    @njit(cache=True)
    def _gram_schmidt_nb(frames):
        flat = frames.reshape((-1, frames.shape[-2], frames.shape[-1])).copy()
        for p in range(flat.shape[0]):
            _gs_inplace(flat[p])
        return flat

    @njit(cache=True)
    def _remove(b, v):
        k, dim = b.shape
        for i in range(k):
            d = 0.0
            for c in range(dim):
                d += b[i, c] * v[c]
            for c in range(dim):
                b[i, c] -= d * v[c]

    @njit(cache=True)
    def _bishop_rhs(b, de, e, out):
        k, dim = b.shape
        for i in range(k):
            mu = 0.0
            for c in range(dim):
                mu += b[i, c] * de[c]
            for c in range(dim):
                out[i, c] = -mu * e[c]

    @njit(cache=True)
    def _bishop_sweep_nb(gam_half, e_half, de_half, basis0, h):
        steps = (gam_half.shape[0] - 1) // 2
        k, dim = basis0.shape
        frames = np.empty((steps + 1, k, dim))
        frames[0] = basis0
        cur = basis0.copy()
        k1 = np.empty_like(cur)
        k2 = np.empty_like(cur)
        k3 = np.empty_like(cur)
        k4 = np.empty_like(cur)
        for i in range(steps):
            a = 2 * i
            _bishop_rhs(cur, de_half[a], e_half[a], k1)
            _bishop_rhs(cur + 0.5 * h * k1, de_half[a + 1], e_half[a + 1], k2)
            _bishop_rhs(cur + 0.5 * h * k2, de_half[a + 1], e_half[a + 1], k3)
            _bishop_rhs(cur + h * k3, de_half[a + 2], e_half[a + 2], k4)
            cur = cur + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            _remove(cur, gam_half[a + 2])
            _remove(cur, e_half[a + 2])
            _gs_inplace(cur)
            frames[i + 1] = cur
        return frames

    @njit(cache=True)
    def _transport_rhs(g, dE, E):
        d = 0.0
        for c in range(g.shape[0]):
            d += g[c] * dE[c]
        return -d * E

    @njit(cache=True)
    def _transport_sweep_nb(E_half, dE_half, g0, h):
        steps = (E_half.shape[0] - 1) // 2
        dim = g0.shape[0]
        out = np.empty((steps + 1, dim))
        out[0] = g0
        cur = g0.copy()
        for i in range(steps):
            a = 2 * i
            k1 = _transport_rhs(cur, dE_half[a], E_half[a])
            k2 = _transport_rhs(cur + 0.5 * h * k1, dE_half[a + 1], E_half[a + 1])
            k3 = _transport_rhs(cur + 0.5 * h * k2, dE_half[a + 1], E_half[a + 1])
            k4 = _transport_rhs(cur + h * k3, dE_half[a + 2], E_half[a + 2])
            cur = cur + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            E = E_half[a + 2]
            d = 0.0
            for c in range(dim):
                d += cur[c] * E[c]
            nrm = 0.0
            for c in range(dim):
                cur[c] -= d * E[c]
                nrm += cur[c] * cur[c]
            cur = cur / np.sqrt(nrm)
            out[i + 1] = cur
        return out

    @njit(cache=True)
    def _min_singular2_nb(flat):
        out = np.empty(flat.shape[0])
        cols = flat.shape[2]
        for p in range(flat.shape[0]):
            w2 = 0.0
            a = 0.0
            d = 0.0
            b = 0.0
            for i in range(cols):
                x0 = flat[p, 0, i]
                x1 = flat[p, 1, i]
                a += x0 * x0
                d += x1 * x1
                b += x0 * x1
                for j in range(i + 1, cols):
                    m = x0 * flat[p, 1, j] - flat[p, 0, j] * x1
                    w2 += m * m
            smax2 = 0.5 * (a + d) + np.sqrt(0.25 * (a - d) ** 2 + b * b)
            out[p] = np.sqrt(w2 / smax2) if smax2 > 0 else 0.0
        return out

    @njit(cache=True)
    def _min_singular_nb(mats):
        flat = mats.reshape((-1, mats.shape[-2], mats.shape[-1]))
        if flat.shape[1] == 2:
            return _min_singular2_nb(flat)
        out = np.empty(flat.shape[0])
        for p in range(flat.shape[0]):
            _, sv, _ = np.linalg.svd(np.ascontiguousarray(flat[p]), full_matrices=False)
            out[p] = sv[-1]
        return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def gram_schmidt(frames: np.ndarray) -> np.ndarray:
    """Orthonormalize the rows of every ``(k, dim)`` block in *frames*."""
    frames = np.ascontiguousarray(frames, dtype=float)
    if _backend == "numba":
        return _gram_schmidt_nb(frames).reshape(frames.shape)
    return _gram_schmidt_np(frames)


def bishop_sweep(gam_half, e_half, de_half, basis0, h):
    """RK4 sweep of ``e_j' = -<e', e_j> e`` on a half-step table.

    The tables hold values at ``s0 + i*h/2``; the result has one frame per
    full step.  Each step re-projects the frame onto the normal space of
    ``{gamma, e}`` and re-orthonormalizes it.
    """
    args = [np.ascontiguousarray(a, dtype=float) for a in (gam_half, e_half, de_half, basis0)]
    if _backend == "numba":
        return _bishop_sweep_nb(*args, float(h))
    return _bishop_sweep_np(*args, float(h))


def transport_sweep(E_half, dE_half, g0, h):
    """RK4 sweep of ``g' = -<g, E'> E`` keeping ``g`` unit and orthogonal to ``E``."""
    args = [np.ascontiguousarray(a, dtype=float) for a in (E_half, dE_half, g0)]
    if _backend == "numba":
        return _transport_sweep_nb(*args, float(h))
    return _transport_sweep_np(*args, float(h))


def min_singular(mats: np.ndarray) -> np.ndarray:
    """Smallest singular value of each matrix in a ``(..., r, c)`` stack."""
    mats = np.ascontiguousarray(mats, dtype=float)
    if _backend == "numba":
        return _min_singular_nb(mats).reshape(mats.shape[:-2])
    return _min_singular_np(mats)
