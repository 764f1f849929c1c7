"""Regular curves on S^{n+1}: helices, reparametrization, frames, periods.

A :class:`SphericalCurve` is a continuous object: it can be evaluated, with
derivatives, at any parameter value.  Its uniform sample grid (``curve.s``)
is what downstream grids are built on.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable

import numpy as np
import sympy as sp
from scipy.interpolate import PchipInterpolator, make_interp_spline
from scipy.optimize import minimize_scalar

from . import _kernels, jets
from .ambient import dot, gram_defect, wedge_rows
from .config import (
    DEFAULT_TOLERANCES,
    MIN_CURVE_SAMPLES,
    MIN_STEPS_PER_PERIOD,
    PERIOD_SEARCH_MAX,
    Tolerances,
)


class PeriodKind(str, Enum):
    PERIODIC = "periodic"
    ANTIPERIODIC = "antiperiodic"
    OPEN = "open"


@dataclass(frozen=True)
class PeriodInfo:
    kind: PeriodKind
    period: float | None = None
    residual: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", PeriodKind(self.kind))
        if self.kind is PeriodKind.OPEN:
            if self.period is not None:
                raise ValueError("open curves carry no period")
        elif self.period is None or not self.period > 0:
            raise ValueError("closed curves need a positive period")

    @property
    def antiperiod(self) -> float | None:
        return self.period / 2 if self.kind is PeriodKind.ANTIPERIODIC else None

    @property
    def is_closed(self) -> bool:
        return self.kind is not PeriodKind.OPEN

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "period": self.period,
            "antiperiod": self.antiperiod,
            "residual": self.residual,
        }


DerivativeFn = Callable[[np.ndarray, int], np.ndarray]


@dataclass(frozen=True)
class SphericalCurve:
    """Curve ``s -> gamma(s)`` in the unit sphere of R^dim.

    ``closed`` means ``gamma`` is known to satisfy ``gamma(s + length) =
    gamma(s)``; the sample grid then covers ``[0, length)``.  Otherwise the
    grid covers ``[0, length]`` including the endpoint.  ``extends`` says
    whether ``fn`` is valid outside the sampled interval.
    """

    fn: DerivativeFn
    length: float
    m: int
    dim: int
    derivative_source: str
    is_arclength: bool
    closed: bool
    extends: bool
    max_order: int
    name: str = ""
    period_info: PeriodInfo | None = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.m < MIN_CURVE_SAMPLES:
            raise ValueError(f"curves need at least {MIN_CURVE_SAMPLES} samples, got {self.m}")
        if self.derivative_source not in ("analytic", "spline", "fourier"):
            raise ValueError(f"unknown derivative source {self.derivative_source!r}")

    @property
    def h(self) -> float:
        return self.length / (self.m if self.closed else self.m - 1)

    @property
    def s(self) -> np.ndarray:
        return np.arange(self.m) * self.h

    @property
    def n(self) -> int:
        return self.dim - 2

    def derivative(self, s, k: int = 0) -> np.ndarray:
        if k > self.max_order:
            raise ValueError(f"{self.derivative_source} curve supports derivatives up to order {self.max_order}")
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self.closed and not self.extends:
            s = np.mod(s, self.length)
        return self.fn(s, k)

    def derivatives(self, s, order: int) -> list[np.ndarray]:
        return [self.derivative(s, k) for k in range(order + 1)]

    @property
    def samples(self) -> np.ndarray:
        return self.derivative(self.s, 0)

    def resample(self, m: int) -> "SphericalCurve":
        return dataclasses.replace(self, m=int(m))

    def with_period_info(self, info: PeriodInfo) -> "SphericalCurve":
        return dataclasses.replace(self, period_info=info)

    def check_invariants(self, tol: Tolerances = DEFAULT_TOLERANCES) -> None:
        g = self.samples
        err = np.max(np.abs(dot(g, g) - 1.0))
        if err > tol.unit_sphere:
            raise ValueError(f"samples leave the unit sphere by {err:.3e}")
        if self.is_arclength:
            speed = np.linalg.norm(self.derivative(self.s, 1), axis=1)
            err = np.max(np.abs(speed - 1.0))
            if err > tol.arclength:
                raise ValueError(f"curve flagged arclength but | |gamma'| - 1 | = {err:.3e}")


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def _rational_ratio(x: float, max_den: int = 1000, tol: float = 1e-9) -> Fraction | None:
    frac = Fraction(x).limit_denominator(max_den)
    return frac if abs(float(frac) - x) <= tol * max(1.0, abs(x)) else None


def helix_phi(a: float, b: float) -> float:
    """Angle with ``a^2 cos^2 phi + b^2 sin^2 phi = 1``."""
    if a == 1.0 and b == 1.0:
        return 0.0
    if not (b * b < 1.0 < a * a):
        raise ValueError(f"helix parameters need b^2 < 1 < a^2 (or a = b = 1), got a={a}, b={b}")
    return math.acos(math.sqrt((1.0 - b * b) / (a * a - b * b)))


def helix_curvature_torsion(a: float, b: float) -> tuple[float, float]:
    return math.sqrt(max((a * a - 1.0) * (1.0 - b * b), 0.0)), a * b


def helix_ab_from_kappa_tau(kappa: float, tau: float) -> tuple[float, float]:
    """Solve ``a^2 b^2 = tau^2``, ``a^2 + b^2 = tau^2 + kappa^2 + 1`` with ``b^2 < 1 < a^2``."""
    if kappa < 0:
        raise ValueError("curvature must be non-negative")
    if kappa == 0:
        return 1.0, 1.0
    total = tau * tau + kappa * kappa + 1.0
    disc = math.sqrt(total * total - 4.0 * tau * tau)
    big, small = (total + disc) / 2.0, (total - disc) / 2.0
    a = math.sqrt(big)
    b = math.copysign(math.sqrt(small), tau) if tau != 0 else 0.0
    return a, b


def make_helix(a: float, b: float, m: int = 1024) -> SphericalCurve:
    """``(cos phi cos as, cos phi sin as, sin phi cos bs, sin phi sin bs)``, unit speed."""
    phi = helix_phi(a, b)
    cp, sn = math.cos(phi), math.sin(phi)
    amps = np.array([cp, cp, sn, sn])
    freqs = np.array([a, a, b, b])
    shifts = np.array([0.0, -math.pi / 2, 0.0, -math.pi / 2])

    def fn(s, k):
        arg = np.outer(s, freqs) + shifts + k * math.pi / 2
        return amps * freqs**k * np.cos(arg)

    if b == 0.0 or (a == 1.0 and b == 1.0):
        length, closed = 2 * math.pi / abs(a), True
    else:
        ratio = _rational_ratio(abs(a / b))
        if ratio is not None:
            length, closed = 2 * math.pi * ratio.numerator / abs(a), True
        else:
            length, closed = 4 * math.pi / abs(b), False
    return SphericalCurve(
        fn, length, m, 4, "analytic", True, closed, True, 64,
        name=f"helix(a={a:.12g}, b={b:.12g})", params={"a": a, "b": b, "phi": phi},
    )


def great_circle(m: int = 1024) -> SphericalCurve:
    return dataclasses.replace(make_helix(1.0, 1.0, m), name="great circle")


def helix_from_kappa_tau(kappa: float, tau: float, m: int = 1024) -> SphericalCurve:
    a, b = helix_ab_from_kappa_tau(kappa, tau)
    return make_helix(a, b, m)


def curve_from_expressions(exprs, var: sp.Symbol, length: float, m: int = 1024, *,
                           closed: bool = False, name: str = "", max_order: int = 6) -> SphericalCurve:
    """Curve ``p(u)/|p(u)|`` from sympy component expressions in ``var``.

    Derivatives of ``p`` are exact (sympy); the projection to the sphere is
    differentiated with jets.
    """
    exprs = [sp.sympify(e) for e in exprs]
    table = []
    for k in range(max_order + 1):
        table.append(sp.lambdify(var, [sp.diff(e, var, k) for e in exprs], "numpy"))

    def raw(u, k):
        cols = table[k](u)
        return np.stack([np.broadcast_to(np.asarray(c, dtype=float), u.shape) for c in cols], axis=-1)

    def fn(u, k):
        pj = jets.from_derivatives([raw(u, j) for j in range(k + 1)])
        return jets.to_derivatives(jets.normalize(pj))[k]

    return SphericalCurve(fn, float(length), m, len(exprs), "analytic", False, closed, True,
                          max_order, name=name or "expression curve")


def _fourier_fn(samples: np.ndarray, period: float) -> DerivativeFn:
    m = samples.shape[0]
    coef = np.fft.rfft(samples, axis=0) / m
    ks = np.arange(coef.shape[0])
    weights = np.full(ks.shape, 2.0)
    weights[0] = 1.0
    if m % 2 == 0:
        weights[-1] = 1.0
    coef = coef * weights[:, None]
    omega = 2 * math.pi / period

    def raw(s, k):
        out = np.empty((s.shape[0], samples.shape[1]))
        factor = (1j * omega * ks) ** k
        scaled = coef * factor[:, None]
        for lo in range(0, s.shape[0], 2048):
            chunk = s[lo:lo + 2048]
            phase = np.exp(1j * omega * np.outer(chunk, ks))
            out[lo:lo + 2048] = (phase @ scaled).real
        return out

    return raw


def from_samples(s: np.ndarray, points: np.ndarray, *, closed: bool, name: str = "sampled curve",
                 tol: Tolerances = DEFAULT_TOLERANCES) -> SphericalCurve:
    """Continuous curve through uniform samples.

    Closed curves use trigonometric (Fourier) interpolation, open curves a
    quintic spline.  The interpolant is projected back onto the sphere.
    """
    s = np.asarray(s, dtype=float)
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] != s.shape[0]:
        raise ValueError("points must be (m, n+2) matching s")
    steps = np.diff(s)
    if steps.size == 0 or np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, abs(steps[0])):
        raise ValueError("samples must lie on a uniform parameter grid")
    err = np.max(np.abs(np.sum(points**2, axis=1) - 1.0))
    if err > tol.unit_sphere:
        raise ValueError(f"samples leave the unit sphere by {err:.3e}")
    h = float(steps[0])
    offset = float(s[0])
    if closed:
        length = h * len(s)
        raw = _fourier_fn(points, length)
        source, max_order = "fourier", 32
    else:
        length = h * (len(s) - 1)
        spline = make_interp_spline(s - offset, points, k=5)
        raw = lambda u, k: spline(u, nu=k)  # noqa: E731
        source, max_order = "spline", 4

    def fn(u, k):
        pj = jets.from_derivatives([raw(u, j) for j in range(k + 1)])
        return jets.to_derivatives(jets.normalize(pj))[k]

    speed = np.linalg.norm(fn(s - offset, 1), axis=1)
    return SphericalCurve(fn, length, len(s), points.shape[1], source,
                          bool(np.max(np.abs(speed - 1.0)) <= tol.arclength), closed, closed, max_order,
                          name=name)


# ---------------------------------------------------------------------------
# arclength
# ---------------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


class _ArclengthMap:
    """Arclength ``S(u)`` of a base curve and its inverse ``u(s)``."""

    def __init__(self, base: SphericalCurve, intervals: int):
        self.base = base
        self.U = base.length
        self.knots = np.linspace(0.0, self.U, intervals + 1)
        du = self.knots[1] - self.knots[0]
        nodes = self.knots[:-1, None] + (0.5 * (_GL_X + 1.0))[None, :] * du
        speed = np.linalg.norm(base.derivative(nodes.ravel(), 1), axis=1).reshape(nodes.shape)
        pieces = 0.5 * du * speed @ _GL_W
        self.table = np.concatenate([[0.0], np.cumsum(pieces)])
        self.total = float(self.table[-1])
        self.inverse = PchipInterpolator(self.table, self.knots)
        self.min_speed = float(speed.min())

    def S(self, u: np.ndarray) -> np.ndarray:
        idx = np.clip(np.searchsorted(self.knots, u, side="right") - 1, 0, len(self.knots) - 2)
        lo = self.knots[idx]
        half = 0.5 * (u - lo)
        nodes = lo[:, None] + (half[:, None] * (_GL_X + 1.0)[None, :])
        speed = np.linalg.norm(self.base.derivative(nodes.ravel(), 1), axis=1).reshape(nodes.shape)
        return self.table[idx] + half * (speed @ _GL_W)

    def u_of_s(self, s: np.ndarray) -> np.ndarray:
        wraps = np.zeros_like(s)
        if self.base.closed:
            wraps = np.floor(s / self.total)
            s = s - wraps * self.total
        u = self.inverse(np.clip(s, 0.0, self.total))
        for _ in range(3):
            speed = np.linalg.norm(self.base.derivative(u, 1), axis=1)
            u = u - (self.S(u) - s) / speed
        return u + wraps * self.U


def reparametrize_arclength(curve: SphericalCurve, m: int | None = None,
                            tol: Tolerances = DEFAULT_TOLERANCES) -> SphericalCurve:
    """Unit-speed version of *curve*, derivatives via jets of ``gamma(u(s))``."""
    if curve.is_arclength:
        return curve if m is None else curve.resample(m)
    speed = np.linalg.norm(curve.derivative(curve.s, 1), axis=1)
    if speed.min() <= tol.regular_speed:
        bad = float(curve.s[np.argmin(speed)])
        raise ValueError(f"curve is not regular near u={bad:.6g} (|gamma'| = {speed.min():.3e})")
    amap = _ArclengthMap(curve, max(4 * curve.m, 4096))
    if amap.min_speed <= tol.regular_speed:
        raise ValueError("curve is not regular between samples")
    max_order = min(curve.max_order, 6)

    def fn(s, k):
        u = amap.u_of_s(s)
        base = curve.derivatives(u, k)
        ujet = np.zeros((k + 1,) + u.shape)
        ujet[0] = u
        for j in range(k):
            vel = jets.compose(base[1:j + 2], ujet[: j + 1])
            w = jets.recip(jets.sqrt(jets.dot(vel, vel)))
            ujet[j + 1] = w[j] / (j + 1)
        return jets.to_derivatives(jets.compose(base, ujet))[k]

    out = SphericalCurve(
        fn, amap.total, m or curve.m, curve.dim, curve.derivative_source, True, curve.closed,
        curve.closed, max_order, name=f"arclength[{curve.name}]",
        params={**curve.params, "base_parameter": amap.u_of_s},
    )
    return out


def tangent_curve(curve: SphericalCurve) -> SphericalCurve:
    """The unit tangent ``e = gamma'`` as a (generally non-unit-speed) curve."""
    if not curve.is_arclength:
        raise ValueError("tangent_curve expects an arclength-parametrized curve")
    return SphericalCurve(
        lambda s, k: curve.derivative(s, k + 1), curve.length, curve.m, curve.dim,
        curve.derivative_source, False, curve.closed, curve.extends, curve.max_order - 1,
        name=f"tangent[{curve.name}]",
    )


# ---------------------------------------------------------------------------
# Frenet-Serret data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrenetData:
    s: np.ndarray
    gamma: np.ndarray
    e: np.ndarray
    n: np.ndarray  # NaN where kappa <= kappa_min
    b: np.ndarray  # NaN where undefined (or dim != 4)
    kappa: np.ndarray
    tau: np.ndarray
    defined: np.ndarray
    kappa_min: float

    def frame_defect(self) -> float:
        idx = self.defined
        if self.b.shape[-1] == 4 and np.any(idx):
            frames = np.stack([self.gamma[idx], self.e[idx], self.n[idx], self.b[idx]], axis=1)
        else:
            frames = np.stack([self.gamma[idx], self.e[idx], self.n[idx]], axis=1)
        return gram_defect(frames) if np.any(idx) else 0.0


def _require_arclength(curve: SphericalCurve, tol: Tolerances) -> None:
    if not curve.is_arclength:
        raise ValueError("operation requires an arclength-parametrized curve")


def frenet_from_derivatives(g, d1, d2, d3, kappa_min: float = DEFAULT_TOLERANCES.kappa_min,
                            s=None) -> FrenetData:
    """Frenet frame, curvature and torsion from sampled derivatives of a unit-speed curve."""
    acc = d2 + g
    kappa = np.linalg.norm(acc, axis=1)
    defined = kappa > kappa_min
    n = np.full_like(g, np.nan)
    n[defined] = acc[defined] / kappa[defined, None]
    b = np.full_like(g, np.nan)
    tau = np.full(g.shape[0], np.nan)
    if g.shape[1] == 4 and np.any(defined):
        rows = np.stack([g[defined], d1[defined], n[defined]], axis=1)
        # orient (gamma, e, n, b) positively; the opposite wedge sign flips tau
        b[defined] = -wedge_rows(rows)
        tau[defined] = dot(d3[defined] + d1[defined], b[defined]) / kappa[defined]
    return FrenetData(
        np.arange(g.shape[0]) if s is None else s, g, d1, n, b, kappa, tau, defined, kappa_min
    )


def frenet(curve: SphericalCurve, s=None, tol: Tolerances = DEFAULT_TOLERANCES) -> FrenetData:
    _require_arclength(curve, tol)
    s = curve.s if s is None else np.asarray(s, dtype=float)
    g, d1, d2, d3 = curve.derivatives(s, 3)
    return frenet_from_derivatives(g, d1, d2, d3, tol.kappa_min, s=s)


# ---------------------------------------------------------------------------
# Bishop frames
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BishopFrame:
    curve: SphericalCurve
    s: np.ndarray  # (m,)
    gamma: np.ndarray  # (m, N)
    e: np.ndarray  # (m, N)
    normals: np.ndarray  # (m, n, N)
    mu: np.ndarray  # (m, n)
    end_normals: np.ndarray  # (n, N) frame at s = length
    holonomy: np.ndarray | None  # (n, n), rows: e_j(L) in the basis e_k(0)

    @property
    def n(self) -> int:
        return self.normals.shape[1]

    @property
    def kappa(self) -> np.ndarray:
        return np.linalg.norm(self.mu, axis=1)

    @property
    def h(self) -> float:
        return self.curve.h

    def frame_defect(self) -> float:
        frames = np.concatenate([self.gamma[:, None], self.e[:, None], self.normals], axis=1)
        return gram_defect(frames)


def default_normal_basis(gamma0: np.ndarray, e0: np.ndarray) -> np.ndarray:
    """Complete ``{gamma0, e0}`` with ambient basis vectors by Gram-Schmidt."""
    dim = gamma0.shape[0]
    basis = [gamma0 / np.linalg.norm(gamma0), e0 / np.linalg.norm(e0)]
    for i in range(dim):
        v = np.eye(dim)[i]
        for u in basis:
            v = v - (v @ u) * u
        for u in basis:
            v = v - (v @ u) * u
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            basis.append(v / norm)
        if len(basis) == dim:
            break
    return np.array(basis[2:])


def bishop(curve: SphericalCurve, initial_normal_basis=None,
           tol: Tolerances = DEFAULT_TOLERANCES) -> BishopFrame:
    """Relatively parallel normal frame ``e_j' = -mu_j e`` by RK4 with re-orthonormalization."""
    _require_arclength(curve, tol)
    m = curve.m
    intervals = m if curve.closed else m - 1
    refine = max(1, math.ceil(MIN_STEPS_PER_PERIOD / intervals))
    steps = intervals * refine
    h = curve.length / steps
    s_half = np.arange(2 * steps + 1) * (h / 2)
    gam_half, e_half, de_half = curve.derivatives(s_half, 2)
    speed = np.linalg.norm(e_half, axis=1)
    if np.min(speed) <= tol.regular_speed:
        raise ValueError("curve is not regular")

    if initial_normal_basis is None:
        basis0 = default_normal_basis(gam_half[0], e_half[0])
    else:
        basis0 = np.asarray(getattr(initial_normal_basis, "vectors", initial_normal_basis), dtype=float)
        if basis0.shape != (curve.n, curve.dim):
            raise ValueError(f"initial basis must be {curve.n} vectors in R^{curve.dim}")
        full = np.vstack([gam_half[0], e_half[0], basis0])
        if gram_defect(full[None]) > 1e-10:
            raise ValueError("initial basis must be orthonormal and orthogonal to gamma(0), gamma'(0)")

    frames = _kernels.bishop_sweep(gam_half, e_half, de_half, basis0, h)
    nodes = frames[::refine]
    normals = nodes[:m]
    end = nodes[intervals]
    idx = np.arange(m) * 2 * refine
    mu = np.einsum("mjc,mc->mj", normals, de_half[idx])
    holonomy = end @ basis0.T if curve.closed else None
    return BishopFrame(curve, curve.s, gam_half[idx], e_half[idx], normals, mu, end, holonomy)


# ---------------------------------------------------------------------------
# period classification
# ---------------------------------------------------------------------------


def classify_period(curve: SphericalCurve, tol: Tolerances = DEFAULT_TOLERANCES,
                    L_max: float = PERIOD_SEARCH_MAX, n_probe: int = 256) -> PeriodInfo:
    """Smallest antiperiod (checked first) or period of *curve*, else open.

    A coarse scan of shift candidates keeps local minima of the max residual,
    each refined by bounded scalar minimization of the mean-square residual.
    """
    _require_arclength(curve, tol)
    if curve.extends:
        limit = L_max
        probe = np.linspace(0.0, curve.length, n_probe, endpoint=not curve.closed)
    else:
        limit = 0.5 * curve.length
        probe = np.linspace(0.0, 0.5 * curve.length, n_probe)
    if curve.closed:
        limit = min(limit, curve.length * (1 + 1e-9))
    step = min(0.01, curve.h)
    # one dense evaluation serves the whole coarse scan: shifts are index offsets
    stride = max(1, int(round((probe[-1] - probe[0]) / (step * (n_probe - 1)))))
    probe_idx = np.arange(n_probe) * stride
    probe = probe_idx * step
    n_cands = int(math.ceil(limit / step))
    dense = curve.derivative(np.arange(probe_idx[-1] + n_cands + 1) * step, 0)
    base = dense[probe_idx]
    cands = np.arange(1, n_cands + 1) * step

    def residuals(shifts, sign):
        pts = curve.derivative((probe[None, :] + shifts[:, None]).ravel(), 0)
        diff = pts.reshape(len(shifts), len(probe), -1) + sign * base[None]
        return np.linalg.norm(diff, axis=2)

    def coarse(sign):
        out = np.empty(n_cands)
        for k in range(1, n_cands + 1):
            out[k - 1] = np.linalg.norm(dense[probe_idx + k] + sign * base, axis=1).max()
        return out

    def first_zero(values, sign):
        left = np.concatenate([[np.inf], values[:-1]])
        right = np.concatenate([values[1:], [np.inf]])
        minima = np.nonzero((values <= left) & (values <= right) & (values < 2 * step))[0]
        for i in minima:
            c = cands[i]
            res = minimize_scalar(
                lambda L: float(np.mean(residuals(np.array([L]), sign) ** 2)),
                bounds=(max(c - step, 0.5 * step), c + step), method="bounded",
                options={"xatol": 1e-14, "maxiter": 200},
            )
            worst = float(residuals(np.array([res.x]), sign).max())
            if worst <= tol.period:
                return float(res.x), worst
        return None

    anti = first_zero(coarse(+1.0), +1.0)
    if anti is not None:
        return PeriodInfo(PeriodKind.ANTIPERIODIC, 2 * anti[0], anti[1])
    per = first_zero(coarse(-1.0), -1.0)
    if per is not None:
        return PeriodInfo(PeriodKind.PERIODIC, per[0], per[1])
    return PeriodInfo(PeriodKind.OPEN)


def ensure_period_info(curve: SphericalCurve, tol: Tolerances = DEFAULT_TOLERANCES) -> SphericalCurve:
    if curve.period_info is not None:
        return curve
    return curve.with_period_info(classify_period(curve, tol))


# ---------------------------------------------------------------------------
# reference curves
# ---------------------------------------------------------------------------

_u = sp.Symbol("u", real=True)


def tau_crossing_curve(m: int = 1024) -> SphericalCurve:
    """Unit-speed test curve whose torsion changes sign.

    Normalized trigonometric curve in R^4 built from two incommensurate
    frequency pairs (1 and sqrt(2)); open, since the frequencies never
    close up.
    """
    w = sp.sqrt(2)
    exprs = [
        sp.cos(_u),
        sp.sin(_u),
        sp.Rational(1, 5) * sp.cos(w * _u) + sp.Rational(1, 2),
        sp.Rational(1, 5) * sp.sin(w * _u) + sp.Rational(4, 5),
    ]
    base = curve_from_expressions(exprs, _u, 2 * math.pi, m=max(m, 256), name="tau-crossing")
    return reparametrize_arclength(base, m=m)


def generic_curve(m: int = 1024) -> SphericalCurve:
    """Closed trigonometric curve (not unit speed) used to audit reparametrization."""
    exprs = [
        sp.cos(_u) + sp.Rational(3, 10) * sp.cos(3 * _u),
        sp.sin(_u) + sp.Rational(1, 5) * sp.sin(2 * _u),
        sp.Rational(1, 2) * sp.cos(2 * _u) + sp.Rational(1, 5),
        sp.Rational(1, 2) * sp.sin(_u) + sp.Rational(3, 5),
    ]
    return curve_from_expressions(exprs, _u, 2 * math.pi, m=m, closed=True, name="generic trig")
