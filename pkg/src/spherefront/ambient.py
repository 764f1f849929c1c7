"""Linear algebra in the ambient space R^{n+2}.

Points of S^{n+1}, H^{n+1} and de Sitter space all live here.  The array
helpers (:func:`dot`, :func:`wedge_rows`) are vectorized over leading axes and
are what the rest of the package uses internally; :func:`inner`, :func:`wedge`,
:func:`orthonormalize` and :func:`align_rigid` are the typed entry points.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import orthogonal_procrustes

from . import _kernels
from .config import DEFAULT_TOLERANCES


class Signature(str, Enum):
    EUCLIDEAN = "euclidean"
    LORENTZIAN = "lorentzian"


class DegenerateCovarianceError(ValueError):
    pass


@dataclass(frozen=True)
class AmbientVector:
    coords: np.ndarray
    signature: Signature = Signature.EUCLIDEAN

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        if c.ndim != 1:
            raise ValueError("AmbientVector coords must be one-dimensional")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "signature", Signature(self.signature))

    @property
    def dim(self) -> int:
        return self.coords.shape[0]


def _as_vector(v) -> AmbientVector:
    return v if isinstance(v, AmbientVector) else AmbientVector(np.asarray(v, dtype=float))


def dot(u: np.ndarray, v: np.ndarray, signature: Signature | str = Signature.EUCLIDEAN) -> np.ndarray:
    """Inner product along the last axis, broadcasting over the rest."""
    prod = np.asarray(u) * np.asarray(v)
    if Signature(signature) is Signature.LORENTZIAN:
        return prod[..., 1:].sum(axis=-1) - prod[..., 0]
    return prod.sum(axis=-1)


def inner(u: AmbientVector, v: AmbientVector) -> float:
    u, v = _as_vector(u), _as_vector(v)
    if u.dim != v.dim:
        raise ValueError(f"dimension mismatch: {u.dim} vs {v.dim}")
    if u.signature is not v.signature:
        raise ValueError("cannot mix Euclidean and Lorentzian vectors")
    return float(dot(u.coords, v.coords, u.signature))


def _det(m: np.ndarray) -> np.ndarray:
    size = m.shape[-1]
    if size == 1:
        return m[..., 0, 0]
    if size == 2:
        return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    if size <= 4:
        # cofactor expansion along the first row
        total = 0.0
        for j in range(size):
            minor = np.delete(np.delete(m, 0, axis=-2), j, axis=-1)
            total = total + (-1) ** j * m[..., 0, j] * _det(minor)
        return total
    return np.linalg.det(m)


def wedge_rows(rows: np.ndarray) -> np.ndarray:
    """Generalized cross product of the ``n+1`` rows of a ``(..., n+1, n+2)`` stack.

    Component ``i`` is the signed minor obtained by expanding the formal
    determinant with the canonical basis as its first row.
    """
    rows = np.asarray(rows, dtype=float)
    k, dim = rows.shape[-2:]
    if k != dim - 1:
        raise ValueError(f"need {dim - 1} vectors in R^{dim}, got {k}")
    out = np.empty(rows.shape[:-2] + (dim,))
    for i in range(dim):
        minor = np.delete(rows, i, axis=-1)
        out[..., i] = (-1) ** i * _det(minor)
    return out


def wedge(vs) -> AmbientVector:
    vecs = [_as_vector(v) for v in vs]
    if not vecs:
        raise ValueError("wedge needs at least one vector")
    if any(v.signature is not Signature.EUCLIDEAN for v in vecs):
        raise ValueError("wedge is defined for Euclidean vectors only")
    dims = {v.dim for v in vecs}
    if len(dims) != 1:
        raise ValueError("all vectors must share a dimension")
    return AmbientVector(wedge_rows(np.stack([v.coords for v in vecs])))


@dataclass(frozen=True)
class OrthoFrame:
    vectors: np.ndarray  # (k, n+2)

    def __post_init__(self):
        v = np.array(self.vectors, dtype=float)
        if v.ndim != 2 or v.shape[0] > v.shape[1]:
            raise ValueError("OrthoFrame expects k <= n+2 row vectors")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def gram_defect(self) -> float:
        g = self.vectors @ self.vectors.T
        return float(np.max(np.abs(g - np.eye(len(g)))))

    def __len__(self) -> int:
        return self.vectors.shape[0]


def gram_defect(frames: np.ndarray) -> float:
    """Max ``|<v_i, v_j> - delta_ij|`` over a stack of ``(k, dim)`` frames."""
    g = np.einsum("...ic,...jc->...ij", frames, frames)
    return float(np.max(np.abs(g - np.eye(frames.shape[-2]))))


def orthonormalize(frame: OrthoFrame, tol=DEFAULT_TOLERANCES) -> OrthoFrame:
    """Gram-Schmidt preserving the flag (and so the first direction)."""
    vecs = frame.vectors
    sv = np.linalg.svd(vecs @ vecs.T, compute_uv=False)
    if sv[-1] <= tol.min_gram_singular:
        raise ValueError(f"frame is nearly dependent (min Gram singular value {sv[-1]:.3e})")
    return OrthoFrame(_kernels.gram_schmidt(vecs))


def align_rigid(src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, float]:
    """Orthogonal ``A`` minimizing ``sum |A src_i - dst_i|^2`` and the RMS residual."""
    src = np.asarray(src, dtype=float).reshape(-1, np.shape(src)[-1])
    dst = np.asarray(dst, dtype=float).reshape(-1, np.shape(dst)[-1])
    if src.shape != dst.shape:
        raise ValueError(f"point lists differ in shape: {src.shape} vs {dst.shape}")
    n_pts, dim = src.shape
    if n_pts < dim:
        raise ValueError(f"need at least {dim} points to fix an orthogonal map, got {n_pts}")
    cov = src.T @ dst
    sv = np.linalg.svd(cov, compute_uv=False)
    if sv[0] == 0.0 or (dim > 1 and sv[-2] <= 1e-12 * sv[0]):
        raise DegenerateCovarianceError("cross-covariance has rank < dim - 1")
    r, _ = orthogonal_procrustes(src, dst)
    A = r.T
    resid = np.sqrt(np.mean(np.sum((src @ A.T - dst) ** 2, axis=1)))
    return A, float(resid)
