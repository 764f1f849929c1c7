"""Developable tubes and evaluated front grids.

A tube over a Bishop-framed curve is ``f(s, x) = sum_j x_j e_j(s)`` with unit
normal ``nu = gamma(s)``.  :func:`evaluate` samples it on an ``(s, x)`` grid
with exact partial derivatives; :class:`FrontGrid` is also the container for
parallel fronts, caustics, duals and the reference frontals.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .ambient import Signature, dot
from .config import DEFAULT_TOLERANCES, MIN_TUBE_RESOLUTION, Tolerances
from .curves import (
    BishopFrame,
    PeriodInfo,
    PeriodKind,
    SphericalCurve,
    bishop,
    classify_period,
    reparametrize_arclength,
)

STRATUM_REGULAR = 0
STRATUM_I = 1
STRATUM_NI = 2
STRATUM_SINGULAR = 3  # singular, but not on the tube stratification
STRATUM_NAMES = {0: "regular", 1: "S_I", 2: "S_NI", 3: "singular"}


@dataclass(frozen=True)
class PrincipalCurvatureValue:
    """Point ``[cos theta : sin theta]`` of the real projective line.

    For fronts of constant curvature 1 this is ``Lambda = [1 : rho]``.
    """

    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(np.mod(self.theta, math.pi)))

    @classmethod
    def from_rho(cls, rho: float) -> "PrincipalCurvatureValue":
        if math.isinf(rho):
            return cls(math.pi / 2)
        return cls(math.atan(rho))

    @classmethod
    def from_homogeneous(cls, a: float, b: float) -> "PrincipalCurvatureValue":
        if a == 0 and b == 0:
            raise ValueError("[0:0] is not a point of the projective line")
        return cls(math.atan2(b, a))

    @property
    def homogeneous(self) -> tuple[float, float]:
        return math.cos(self.theta), math.sin(self.theta)

    @property
    def rho(self) -> float:
        c, s = self.homogeneous
        return math.inf if abs(c) < 1e-300 else s / c

    def is_singular(self, tol: float = 1e-8) -> bool:
        return min(self.theta, math.pi - self.theta) <= tol

    def is_umbilic(self, tol: float = DEFAULT_TOLERANCES.umbilic) -> bool:
        return abs(self.theta - math.pi / 2) <= tol


def angle_to_zero(theta: np.ndarray) -> np.ndarray:
    """Distance of projective angles from ``[1:0]``."""
    th = np.mod(theta, math.pi)
    return np.minimum(th, math.pi - th)


@dataclass(frozen=True)
class FrontGrid:
    """Sampled front or frontal on a structured ``(u1, u2)`` grid.

    ``df[i, j, k]`` and ``dnu[i, j, k]`` are the partial derivatives along the
    k-th coordinate direction (exact where available).  ``thetas[i, j]`` holds
    the projective principal-curvature angles; index 0 is the ``Lambda``
    channel (the direction in which ``nu`` moves).
    """

    u1: np.ndarray
    u2: np.ndarray
    f: np.ndarray
    nu: np.ndarray
    df: np.ndarray
    dnu: np.ndarray
    thetas: np.ndarray
    singular: np.ndarray
    stratum: np.ndarray
    periodic: tuple[bool, bool] = (False, True)
    structured: bool = True
    kappa: np.ndarray | None = None
    kappa_min: float = DEFAULT_TOLERANCES.kappa_min
    sing_tol: float = 1e-8
    signature: Signature = Signature.EUCLIDEAN
    c: float = 1.0
    end_row: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None  # (f, nu, theta) at s = L
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.f.shape[:2]

    @property
    def h(self) -> tuple[float, float]:
        return float(self.u1[1] - self.u1[0]), float(self.u2[1] - self.u2[0])

    @property
    def theta(self) -> np.ndarray:
        return self.thetas[..., 0]

    @property
    def rho(self) -> np.ndarray:
        th = np.mod(self.theta, math.pi)
        with np.errstate(divide="ignore"):
            out = np.tan(th)
        return np.where(np.abs(th - math.pi / 2) < 1e-15, np.inf, out)

    @property
    def metric(self) -> np.ndarray:
        return np.einsum("...ic,...jc->...ij", self.df, self.df)

    def Lambda(self, i: int, j: int) -> PrincipalCurvatureValue:
        return PrincipalCurvatureValue(self.thetas[i, j, 0])

    def invariant_defects(self) -> dict[str, float]:
        sig = self.signature
        out = {"nu_unit": float(np.max(np.abs(dot(self.nu, self.nu) - 1.0)))}
        if self.c != 0:
            out["f_unit"] = float(np.max(np.abs(dot(self.f, self.f, sig) - self.c / abs(self.c))))
            out["f_nu"] = float(np.max(np.abs(dot(self.f, self.nu, sig))))
        out["df_nu"] = float(np.max(np.abs(dot(self.df, self.nu[:, :, None, :], sig))))
        return out


@dataclass(frozen=True)
class TubeFront:
    """Developable tube over a Bishop-framed center curve, sampled on an ``(s, x)`` grid."""

    frame: BishopFrame
    s: np.ndarray
    x: np.ndarray  # (m_x, n) points of S^{n-1}
    tangents: np.ndarray  # (m_x, n-1, n) orthonormal basis of T_x S^{n-1}
    t: np.ndarray | None  # angles for n = 2
    tol: Tolerances = DEFAULT_TOLERANCES
    name: str = "tube"

    @property
    def n(self) -> int:
        return self.frame.n

    @property
    def curve(self) -> SphericalCurve:
        return self.frame.curve

    @property
    def m_s(self) -> int:
        return len(self.s)

    @property
    def m_x(self) -> int:
        return len(self.x)

    @property
    def period_info(self) -> PeriodInfo:
        info = self.curve.period_info
        return info if info is not None else classify_period(self.curve, self.tol)

    @property
    def sing_scale(self) -> float:
        return max(1.0, float(np.max(np.abs(self.frame.mu))))


def _sphere_grid(n: int, m_x: int) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    if n == 2:
        t = np.arange(m_x) * (2 * math.pi / m_x)
        x = np.stack([np.cos(t), np.sin(t)], axis=1)
        tang = np.stack([-np.sin(t), np.cos(t)], axis=1)[:, None, :]
        return x, tang, t
    # deterministic scattered sample of S^{n-1}; pointwise evaluation only
    rng = np.random.default_rng(20240601 + n)
    x = rng.standard_normal((m_x, n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    tang = np.empty((m_x, n - 1, n))
    for i, p in enumerate(x):
        q, _ = np.linalg.qr(np.column_stack([p, np.eye(n)]))
        tang[i] = q[:, 1:n].T
    return x, tang, None


def build_tube(frame: BishopFrame, m_s: int | None = None, m_x: int = 256,
               tol: Tolerances = DEFAULT_TOLERANCES, name: str = "tube") -> TubeFront:
    """Sample the tube ``f(s, x) = sum x_j e_j(s)`` over *frame*."""
    m_s = frame.curve.m if m_s is None else int(m_s)
    if m_s < MIN_TUBE_RESOLUTION or m_x < MIN_TUBE_RESOLUTION:
        raise ValueError(f"tube resolution must be at least {MIN_TUBE_RESOLUTION} in each direction")
    if m_s != len(frame.s):
        frame = bishop(frame.curve.resample(m_s), frame.normals[0], tol)
    x, tang, t = _sphere_grid(frame.n, m_x)
    return TubeFront(frame, frame.s, x, tang, t, tol, name)


def tube_from_curve(curve: SphericalCurve, m_s: int = 512, m_x: int = 256,
                    tol: Tolerances = DEFAULT_TOLERANCES, initial_normal_basis=None,
                    name: str | None = None) -> TubeFront:
    """Arclength-parametrize, classify the period, frame and sample in one go."""
    if not curve.is_arclength:
        curve = reparametrize_arclength(curve, tol=tol)
    curve = curve.resample(m_s)
    if curve.period_info is None:
        curve = curve.with_period_info(classify_period(curve, tol))
    frame = bishop(curve, initial_normal_basis, tol)
    return build_tube(frame, m_s, m_x, tol, name or f"tube[{curve.name}]")


def classify_nodes(thetas: np.ndarray, kappa: np.ndarray | None, kappa_min: float,
                   sing_tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Singular flags and strata from projective angles."""
    near = angle_to_zero(thetas) <= math.atan(sing_tol)
    main = near[..., 0]
    singular = np.any(near, axis=-1)
    stratum = np.full(singular.shape, STRATUM_REGULAR, dtype=np.int8)
    stratum[singular] = STRATUM_SINGULAR
    if kappa is not None:
        flat = (kappa <= kappa_min)[:, None]
        stratum[main & flat] = STRATUM_I
        stratum[main & ~flat] = STRATUM_NI
    return singular, stratum


def evaluate(front: TubeFront) -> FrontGrid:
    """Positions, normals, exact partials and principal-curvature data on the tube grid."""
    fr = front.frame
    E = fr.normals  # (m_s, n, N)
    f = np.einsum("xj,sjc->sxc", front.x, E)
    rho = front.x @ fr.mu.T  # (m_x, m_s)
    rho = rho.T
    m_s, m_x = rho.shape
    N = E.shape[-1]
    n = fr.n
    df = np.empty((m_s, m_x, n, N))
    df[:, :, 0] = -rho[..., None] * fr.e[:, None, :]
    df[:, :, 1:] = np.einsum("xkj,sjc->sxkc", front.tangents, E)
    nu = np.broadcast_to(fr.gamma[:, None, :], f.shape).copy()
    dnu = np.zeros_like(df)
    dnu[:, :, 0] = fr.e[:, None, :]
    thetas = np.full((m_s, m_x, n), math.pi / 2)
    thetas[..., 0] = np.mod(np.arctan(rho), math.pi)
    kappa = fr.kappa
    sing_tol = front.tol.sing_rel * front.sing_scale
    singular, stratum = classify_nodes(thetas, kappa, front.tol.kappa_min, sing_tol)
    end_row = None
    if fr.curve.closed:
        L = fr.curve.length
        mu_end = fr.end_normals @ fr.curve.derivative(L, 2)[0]
        end_row = (front.x @ fr.end_normals,
                   np.broadcast_to(fr.curve.derivative(L, 0), (m_x, N)).copy(),
                   np.mod(np.arctan(front.x @ mu_end), math.pi))
    u2 = front.t if front.t is not None else np.arange(m_x, dtype=float)
    return FrontGrid(
        front.s, u2, f, nu, df, dnu, thetas, singular, stratum,
        periodic=(False, front.t is not None), structured=front.t is not None,
        kappa=kappa, kappa_min=front.tol.kappa_min, sing_tol=sing_tol, end_row=end_row,
        meta={"kind": "tube", "name": front.name, "closed": fr.curve.closed},
    )


# ---------------------------------------------------------------------------
# singular curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SingularSet:
    """Roots of ``t -> mu_1 cos t + mu_2 sin t`` per s-slice (n = 2)."""

    s: np.ndarray
    roots: list  # per slice: array of t values
    flat_slices: np.ndarray  # slices in S_I (whole circle singular)

    @property
    def counts(self) -> np.ndarray:
        return np.array([len(r) for r in self.roots])

    def points(self) -> np.ndarray:
        """``(k, 2)`` array of all ``(s, t)`` roots."""
        rows = [(s, t) for s, ts in zip(self.s, self.roots) for t in ts]
        return np.array(rows, dtype=float).reshape(-1, 2)


def _bisect(fn, lo, hi, flo, tol):
    """Vectorized bisection on brackets with ``fn(lo) * fn(hi) < 0``."""
    lo, hi, flo = lo.copy(), hi.copy(), flo.copy()
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def singular_curve(front: TubeFront, samples: int | None = None) -> SingularSet:
    """Root-find the singular parameters on every s-slice of a surface tube."""
    if front.n != 2:
        raise ValueError("singular curve extraction is implemented for n = 2")
    mu = front.frame.mu
    kappa = front.frame.kappa
    m = samples or max(front.m_x, 64)
    t = np.arange(m + 1) * (2 * math.pi / m)
    vals = mu[:, :1] * np.cos(t) + mu[:, 1:] * np.sin(t)  # (m_s, m+1)
    vals[:, -1] = vals[:, 0]  # sin(2 pi) is not 0 in floating point
    flat = kappa <= front.tol.kappa_min
    roots = []
    for i in range(len(front.s)):
        if flat[i]:
            roots.append(front.t.copy())
            continue
        v = vals[i]
        exact = t[:-1][v[:-1] == 0.0]
        idx = np.nonzero(v[:-1] * v[1:] < 0)[0]
        a, b = mu[i]
        found = _bisect(lambda tt: a * np.cos(tt) + b * np.sin(tt), t[idx], t[idx + 1], v[idx],
                        front.tol.bisection)
        roots.append(np.sort(np.mod(np.concatenate([exact, found]), 2 * math.pi)))
    return SingularSet(front.s, roots, flat)


def closed_form_roots(mu: np.ndarray) -> np.ndarray:
    """``psi +- pi/2`` with ``psi = atan2(mu2, mu1)``, mapped to ``[0, 2pi)``."""
    psi = np.arctan2(mu[:, 1], mu[:, 0])
    r = np.stack([psi + math.pi / 2, psi - math.pi / 2], axis=1)
    return np.sort(np.mod(r, 2 * math.pi), axis=1)


def singular_polylines(front: TubeFront, sset: SingularSet | None = None) -> list[np.ndarray]:
    """Singular curves as ambient polylines, branches tracked across slices."""
    sset = sset or singular_curve(front)
    fr = front.frame
    lines: list[list[np.ndarray]] = []
    active: list[tuple[int, float]] = []
    for i, ts in enumerate(sset.roots):
        if sset.flat_slices[i] or len(ts) == 0:
            active = []
            continue
        pts = np.cos(ts)[:, None] * fr.normals[i, 0] + np.sin(ts)[:, None] * fr.normals[i, 1]
        new_active = []
        used = set()
        for t, p in zip(ts, pts):
            best = None
            for k, (li, tprev) in enumerate(active):
                d = abs((t - tprev + math.pi) % (2 * math.pi) - math.pi)
                if k not in used and d < 0.5 and (best is None or d < best[1]):
                    best = (k, d)
            if best is None:
                lines.append([p])
                new_active.append((len(lines) - 1, t))
            else:
                used.add(best[0])
                li = active[best[0]][0]
                lines[li].append(p)
                new_active.append((li, t))
        active = new_active
    return [np.array(line) for line in lines if len(line) >= 2]


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------


def fd_central(arr: np.ndarray, h: float, axis: int, periodic: bool) -> np.ndarray:
    """Second-order central difference; NaN on non-periodic boundary layers."""
    if periodic:
        return (np.roll(arr, -1, axis=axis) - np.roll(arr, 1, axis=axis)) / (2 * h)
    out = np.full(arr.shape, np.nan)
    sl = [slice(None)] * arr.ndim
    lo, mid, hi = list(sl), list(sl), list(sl)
    lo[axis], mid[axis], hi[axis] = slice(0, -2), slice(1, -1), slice(2, None)
    out[tuple(mid)] = (arr[tuple(hi)] - arr[tuple(lo)]) / (2 * h)
    return out


def fd_second(arr: np.ndarray, h: float, axis: int, periodic: bool) -> np.ndarray:
    if periodic:
        return (np.roll(arr, -1, axis=axis) - 2 * arr + np.roll(arr, 1, axis=axis)) / (h * h)
    out = np.full(arr.shape, np.nan)
    sl = [slice(None)] * arr.ndim
    lo, mid, hi = list(sl), list(sl), list(sl)
    lo[axis], mid[axis], hi[axis] = slice(0, -2), slice(1, -1), slice(2, None)
    out[tuple(mid)] = (arr[tuple(hi)] - 2 * arr[tuple(mid)] + arr[tuple(lo)]) / (h * h)
    return out


_D4_CENTRAL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D4_FORWARD = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0


def fd4_at(values: np.ndarray, index: int, h: float) -> np.ndarray:
    """Fourth-order derivative at ``values[index]`` (one-sided near the ends)."""
    m = values.shape[0]
    if 2 <= index <= m - 3:
        return np.tensordot(_D4_CENTRAL, values[index - 2:index + 3], axes=1) / h
    if index < 2:
        return np.tensordot(_D4_FORWARD, values[index:index + 5], axes=1) / h
    return -np.tensordot(_D4_FORWARD, values[index - 4:index + 1][::-1], axes=1) / h


def grid_fd(grid: FrontGrid, which: str = "f") -> np.ndarray:
    """Central-difference partials ``(m1, m2, 2, N)`` of ``f`` or ``nu``."""
    arr = grid.f if which == "f" else grid.nu
    h1, h2 = grid.h
    return np.stack([
        fd_central(arr, h1, 0, grid.periodic[0]),
        fd_central(arr, h2, 1, grid.periodic[1]),
    ], axis=2)


def corank_at_roots(front: TubeFront, sset: SingularSet | None = None) -> np.ndarray:
    """``sigma_min / sigma_max`` of finite-difference ``df`` at every non-flat root.

    Returns ``(k, 3)`` rows ``(ratio, sigma_min, sigma_max)``.
    """
    sset = sset or singular_curve(front)
    fr = front.frame
    h = front.frame.curve.h
    ht = 2 * math.pi / front.m_x
    rows = []
    offsets = np.arange(-2, 3) * ht
    for i, ts in enumerate(sset.roots):
        if sset.flat_slices[i]:
            continue
        for t in ts:
            col = np.cos(t) * fr.normals[:, 0] + np.sin(t) * fr.normals[:, 1]
            fs = fd4_at(col, i, h)
            tt = t + offsets
            ring = np.cos(tt)[:, None] * fr.normals[i, 0] + np.sin(tt)[:, None] * fr.normals[i, 1]
            ft = np.tensordot(_D4_CENTRAL, ring, axes=1) / ht
            sv = np.linalg.svd(np.stack([fs, ft]), compute_uv=False)
            rows.append((sv[-1] / sv[0], sv[-1], sv[0]))
    return np.array(rows).reshape(-1, 3)


# ---------------------------------------------------------------------------
# umbilics, parallel fronts, lift metric, global classification
# ---------------------------------------------------------------------------


def umbilic_scan(grid: FrontGrid, tol: float = DEFAULT_TOLERANCES.umbilic) -> list[tuple[int, int]]:
    """Nodes where every projective principal-curvature angle agrees (``delta1 df = delta2 dnu``)."""
    th = np.mod(grid.thetas, math.pi)
    ref = th[..., :1]
    diff = np.abs((th - ref + math.pi / 2) % math.pi - math.pi / 2)
    mask = np.all(diff <= tol, axis=-1) & np.all(np.isfinite(th), axis=-1)
    if grid.thetas.shape[-1] == 1:
        mask &= np.abs(th[..., 0] - math.pi / 2) <= tol
    return [tuple(int(v) for v in ij) for ij in np.argwhere(mask)]


def parallel_front(grid: FrontGrid, delta: float) -> FrontGrid:
    """``f^d = cos d f + sin d nu``, ``nu^d = -sin d f + cos d nu`` with all node data recomputed."""
    if grid.c != 1.0 or grid.signature is not Signature.EUCLIDEAN:
        raise ValueError("parallel fronts are implemented for the unit sphere")
    if delta == 0:
        return grid
    c, s = math.cos(delta), math.sin(delta)
    f = c * grid.f + s * grid.nu
    nu = -s * grid.f + c * grid.nu
    df = c * grid.df + s * grid.dnu
    dnu = -s * grid.df + c * grid.dnu
    thetas = np.mod(grid.thetas - delta, math.pi)
    # the s-family keeps its tube stratum label only while the t-family stays regular
    kappa = grid.kappa if abs(c) > 0 else None
    singular, stratum = classify_nodes(thetas, kappa, grid.kappa_min, grid.sing_tol)
    end_row = None
    if grid.end_row is not None:
        fe, ne, te = grid.end_row
        end_row = (c * fe + s * ne, -s * fe + c * ne, np.mod(te - delta, math.pi))
    meta = dict(grid.meta)
    meta["delta"] = meta.get("delta", 0.0) + delta
    return dataclasses.replace(grid, f=f, nu=nu, df=df, dnu=dnu, thetas=thetas, singular=singular,
                               stratum=stratum, end_row=end_row, meta=meta)


def principal_curvatures_fd(grid: FrontGrid, mask: np.ndarray | None = None) -> np.ndarray:
    """Principal curvatures from finite-difference ``df``, ``dnu``: eigenvalues of ``-dnu = A df``.

    Returns ``(m1, m2, n)`` sorted eigenvalues, NaN where *mask* is false or
    the differences are unavailable.
    """
    dF = grid_fd(grid, "f")
    dN = grid_fd(grid, "nu")
    m1, m2 = grid.shape
    out = np.full((m1, m2, 2), np.nan)
    ok = np.all(np.isfinite(dF), axis=(2, 3)) & np.all(np.isfinite(dN), axis=(2, 3))
    if mask is not None:
        ok &= mask
    G = np.einsum("...ic,...jc->...ij", dF[ok], dF[ok])
    B = -np.einsum("...ic,...jc->...ij", dN[ok], dF[ok])
    # shape operator in coordinates: G^{-1} B (B symmetric up to truncation)
    S = np.linalg.solve(G, B)
    ev = np.linalg.eigvals(S).real
    out[ok] = np.sort(ev, axis=-1)
    return out


@dataclass(frozen=True)
class LiftMetricField:
    coeffs: np.ndarray  # (m1, m2, n, n) matrix of <df,df> + <dnu,dnu>
    lower_bound_gap: np.ndarray  # (m1, m2) min eigenvalue of coeffs - (ds^2 + g_sphere)
    witness: bool
    slack: float

    @property
    def s_coefficient(self) -> np.ndarray:
        return self.coeffs[..., 0, 0]


def lift_metric(grid: FrontGrid, tol: Tolerances = DEFAULT_TOLERANCES) -> LiftMetricField:
    """Lift metric ``<df,df> + <dnu,dnu>`` and the bound ``ds^2 + g_{S^{n-1}}``."""
    L = np.einsum("...ic,...jc->...ij", grid.df, grid.df) + np.einsum("...ic,...jc->...ij", grid.dnu, grid.dnu)
    # the x-directions are orthonormal on S^{n-1}, so the bound is the identity
    gap = np.linalg.eigvalsh(L - np.eye(L.shape[-1]))[..., 0]
    return LiftMetricField(L, gap, bool(np.min(gap) >= -tol.lift_slack), tol.lift_slack)


def coorientability(front: TubeFront) -> str:
    kind = front.period_info.kind
    if kind is PeriodKind.ANTIPERIODIC:
        return "non-co-orientable"
    if kind is PeriodKind.PERIODIC:
        return "co-orientable"
    return "open-curve"


def completeness(front: TubeFront) -> dict:
    """Completeness verdict (closed center curve) and weak completeness (lift bound)."""
    info = front.period_info
    return {
        "complete": info.is_closed,
        "weakly_complete": True,
        "criterion": "closed center curve; lift metric dominates ds^2 + g_sphere",
    }


def is_totally_geodesic(front: TubeFront) -> bool:
    return bool(np.max(front.frame.kappa) <= front.tol.kappa_min)


# ---------------------------------------------------------------------------
# generic frontals
# ---------------------------------------------------------------------------


def complement_basis(f: np.ndarray, nu: np.ndarray, signature: Signature, c: float) -> np.ndarray:
    """Basis ``(..., n, N)`` of the normal-bundle complement: ``{f, nu}``-orthogonal (``{nu}`` when flat)."""
    J = np.ones(f.shape[-1])
    if Signature(signature) is Signature.LORENTZIAN:
        J[0] = -1.0
    cols = [nu * J] if c == 0 else [f * J, nu * J]
    W = np.stack(cols, axis=-1)  # (..., N, r)
    A = np.concatenate([W, np.broadcast_to(np.eye(f.shape[-1]), W.shape[:-1] + (f.shape[-1],))], axis=-1)
    Q, _ = np.linalg.qr(A)
    return np.swapaxes(Q[..., len(cols):], -1, -2)


def pencil_angles(f, nu, df, dnu, signature: Signature = Signature.EUCLIDEAN, c: float = 1.0,
                  degenerate_tol: float = 1e-14) -> np.ndarray:
    """Projective roots ``[a:b]`` of ``det(b(-dnu) - a df) = 0`` on the complement (n = 2).

    Index 0 is the root farthest from ``[0:1]`` (the direction along which
    ``nu`` moves); degenerate pencils give NaN.
    """
    if df.shape[-2] != 2:
        raise NotImplementedError("pencil angles are implemented for surfaces (n = 2)")
    B = complement_basis(f, nu, signature, c)
    J = np.ones(f.shape[-1])
    if Signature(signature) is Signature.LORENTZIAN:
        J[0] = -1.0
    P = np.einsum("...kc,...lc->...kl", df * J, B)
    Q = -np.einsum("...kc,...lc->...kl", dnu * J, B)
    detP = P[..., 0, 0] * P[..., 1, 1] - P[..., 0, 1] * P[..., 1, 0]
    detQ = Q[..., 0, 0] * Q[..., 1, 1] - Q[..., 0, 1] * Q[..., 1, 0]
    mixed = Q[..., 0, 0] * P[..., 1, 1] + Q[..., 1, 1] * P[..., 0, 0] - Q[..., 0, 1] * P[..., 1, 0] - Q[..., 1, 0] * P[..., 0, 1]
    # detP cos^2 - mixed cos sin + detQ sin^2 = 0, written in double angles
    mean = 0.5 * (detP + detQ)
    x, y = 0.5 * (detP - detQ), -0.5 * mixed
    R = np.hypot(x, y)
    scale = np.maximum(1.0, np.abs(P).max(axis=(-1, -2)) + np.abs(Q).max(axis=(-1, -2))) ** 2
    degenerate = (R <= degenerate_tol * scale) & (np.abs(mean) <= degenerate_tol * scale)
    with np.errstate(invalid="ignore", divide="ignore"):
        phi = np.arctan2(y, x)
        spread = np.arccos(np.clip(-mean / np.where(R > 0, R, 1.0), -1.0, 1.0))
    roots = np.stack([0.5 * (phi + spread), 0.5 * (phi - spread)], axis=-1)
    roots = np.mod(roots, math.pi)
    far = np.abs(roots - math.pi / 2)
    order = np.argsort(-far, axis=-1, kind="stable")
    roots = np.take_along_axis(roots, order, axis=-1)
    roots[degenerate] = np.nan
    return roots


def frontal_grid(u1, u2, f, nu, df, dnu, *, periodic=(False, False), signature=Signature.EUCLIDEAN,
                 c: float = 1.0, sing_tol: float = 1e-8, meta: dict | None = None) -> FrontGrid:
    """FrontGrid for a sampled frontal given positions, normals and their partials."""
    thetas = pencil_angles(f, nu, df, dnu, signature, c)
    singular, stratum = classify_nodes(np.nan_to_num(thetas, nan=0.0), None, 0.0, sing_tol)
    return FrontGrid(np.asarray(u1, float), np.asarray(u2, float), f, nu, df, dnu, thetas, singular,
                     stratum, periodic=tuple(periodic), signature=Signature(signature), c=c,
                     sing_tol=sing_tol, meta=dict(meta or {}))


def sample_frontal(fn, u1, u2, *, periodic=(False, True), signature=Signature.EUCLIDEAN,
                   c: float = 1.0, sing_tol: float = 1e-8, meta: dict | None = None) -> FrontGrid:
    """Sample ``(f, nu) = fn(U1, U2)`` and take partials by central differences.

    Non-periodic axes get one ghost layer on each side, so every node sees a
    centered stencil.
    """
    u1, u2 = np.asarray(u1, float), np.asarray(u2, float)
    hs = (u1[1] - u1[0], u2[1] - u2[0])
    axes = []
    for u, h, per in zip((u1, u2), hs, periodic):
        axes.append(u if per else np.concatenate([[u[0] - h], u, [u[-1] + h]]))
    U1, U2 = np.meshgrid(*axes, indexing="ij")
    f, nu = fn(U1, U2)
    parts = []
    for which in (f, nu):
        d = [fd_central(which, hs[k], k, periodic[k]) for k in (0, 1)]
        parts.append(np.stack(d, axis=2))
    core = tuple(slice(None) if per else slice(1, -1) for per in periodic)
    df, dnu = parts[0][core], parts[1][core]
    return frontal_grid(u1, u2, f[core], nu[core], df, dnu, periodic=periodic, signature=signature,
                        c=c, sing_tol=sing_tol, meta=meta)
