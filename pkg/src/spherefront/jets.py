"""Truncated Taylor-jet arithmetic.

A jet of order K is an array ``J`` of shape ``(K+1, ...)`` holding normalized
Taylor coefficients ``J[k] = f^(k)(s0) / k!``, vectorized over the trailing
axes.  Used to push derivatives through arclength reparametrization and
sphere normalization without finite differences.
"""
from __future__ import annotations

from math import factorial

import numpy as np


def from_derivatives(derivs) -> np.ndarray:
    """Stack ``[f, f', f'', ...]`` into a jet."""
    return np.stack([np.asarray(d, dtype=float) / factorial(k) for k, d in enumerate(derivs)])


def to_derivatives(jet: np.ndarray) -> list[np.ndarray]:
    return [jet[k] * factorial(k) for k in range(jet.shape[0])]


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    order = min(a.shape[0], b.shape[0])
    shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
    out = np.zeros((order,) + shape)
    for k in range(order):
        for i in range(k + 1):
            out[k] = out[k] + a[i] * b[k - i]
    return out


def dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Jet of the inner product over the last axis."""
    return mul(a, b).sum(axis=-1)


def recip(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    out[0] = 1.0 / a[0]
    for k in range(1, a.shape[0]):
        acc = np.zeros_like(a[0])
        for i in range(1, k + 1):
            acc = acc + a[i] * out[k - i]
        out[k] = -acc * out[0]
    return out


def sqrt(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    out[0] = np.sqrt(a[0])
    for k in range(1, a.shape[0]):
        acc = np.zeros_like(a[0])
        for i in range(1, k):
            acc = acc + out[i] * out[k - i]
        out[k] = (a[k] - acc) / (2.0 * out[0])
    return out


def compose(outer_derivs, inner_jet: np.ndarray) -> np.ndarray:
    """Jet of ``F(u(s))`` from ``F^(j)`` evaluated at ``u(s0)`` and the jet of ``u``.

    ``outer_derivs[j]`` has shape ``(P, ...)`` matching the point axis of
    ``inner_jet`` (shape ``(K+1, P)``).
    """
    order = inner_jet.shape[0]
    if len(outer_derivs) < order:
        raise ValueError(f"need {order} outer derivatives, got {len(outer_derivs)}")
    extra = np.ndim(outer_derivs[0]) - inner_jet.ndim + 1
    delta = inner_jet.copy()
    delta[0] = 0.0
    delta = delta.reshape(delta.shape + (1,) * extra)
    power = np.zeros_like(delta)
    power[0] = 1.0
    out = np.zeros((order,) + np.shape(outer_derivs[0]))
    for j in range(order):
        out = out + power * (np.asarray(outer_derivs[j]) / factorial(j))
        power = mul(power, delta)
    return out


def normalize(vec_jet: np.ndarray) -> np.ndarray:
    """Jet of ``v / |v|`` for a vector-valued jet with the vector on the last axis."""
    inv = recip(sqrt(dot(vec_jet, vec_jet)))
    return mul(vec_jet, inv[..., None])
