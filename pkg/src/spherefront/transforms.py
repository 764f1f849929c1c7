"""Caustics, inverse caustics, duals, projections and meshes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import minimize_scalar

from . import _kernels
from .ambient import DegenerateCovarianceError, Signature, align_rigid, dot
from .config import DEFAULT_TOLERANCES, MIN_STEPS_PER_PERIOD, Tolerances
from .curves import (
    FrenetData,
    PeriodInfo,
    PeriodKind,
    SphericalCurve,
    bishop,
    classify_period,
    frenet,
    reparametrize_arclength,
    tangent_curve,
)
from .fronts import (
    FrontGrid,
    TubeFront,
    build_tube,
    classify_nodes,
    coorientability,
    evaluate,
    fd_central,
    frontal_grid,
    sample_frontal,
    tube_from_curve,
)

# ---------------------------------------------------------------------------
# caustics
# ---------------------------------------------------------------------------


def caustic_center_curve(curve: SphericalCurve, tol: Tolerances = DEFAULT_TOLERANCES) -> SphericalCurve:
    """Unit tangent ``e = gamma'`` reparametrized by arclength, with its period classified."""
    e = tangent_curve(curve)
    speed = np.linalg.norm(e.derivative(e.s, 1), axis=1)
    # |e'|^2 = 1 + kappa^2 on the unit sphere
    if speed.min() < 1.0 - 1e-8:
        raise ValueError(f"tangent curve speed {speed.min():.3e} < 1; center curve is not unit speed")
    center = reparametrize_arclength(e, tol=tol)
    return center.with_period_info(classify_period(center, tol))


def caustic(front: TubeFront, m_s: int | None = None, m_x: int | None = None) -> TubeFront:
    """Caustic as the developable tube over the unit tangent of the center curve."""
    tol = front.tol
    center = caustic_center_curve(front.curve, tol).resample(m_s or front.m_s)
    frame = bishop(center, None, tol)
    return build_tube(frame, m_s or front.m_s, m_x or front.m_x, tol, name=f"caustic[{front.name}]")


@dataclass(frozen=True)
class PointwiseCaustic:
    s: np.ndarray
    t: np.ndarray
    f: np.ndarray
    nu: np.ndarray


def caustic_pointwise(grid: FrontGrid) -> PointwiseCaustic:
    """``f^C = (f + rho nu) / sqrt(1 + rho^2)`` node by node."""
    th = np.mod(grid.theta, math.pi)
    th = np.where(th > math.pi / 2, th - math.pi, th)  # keeps cos > 0, so the formula sign matches
    c, s = np.cos(th)[..., None], np.sin(th)[..., None]
    return PointwiseCaustic(grid.u1, grid.u2, c * grid.f + s * grid.nu, -s * grid.f + c * grid.nu)


def caustic_tangency_residuals(front: TubeFront, grid: FrontGrid | None = None) -> dict[str, float]:
    """Max ``|<f^C, gamma'>|`` and ``|<d f^C, gamma'>|`` (central differences, interior s)."""
    grid = grid or evaluate(front)
    pc = caustic_pointwise(grid)
    e = front.frame.e[:, None, :]
    h_s, h_t = grid.h
    fs = fd_central(pc.f, h_s, 0, False)
    ft = fd_central(pc.f, h_t, 1, True)
    return {
        "f": float(np.max(np.abs(dot(pc.f, e)))),
        "fs": float(np.nanmax(np.abs(dot(fs, e)))),
        "ft": float(np.max(np.abs(dot(ft, e)))),
        "h": max(h_s, h_t),
    }


@dataclass(frozen=True)
class CausticTransfer:
    gamma_period: PeriodInfo
    center_period: PeriodInfo
    periodic_transfer: bool
    antiperiodic_transfer: bool
    coorientability: str
    complete: bool
    weakly_complete: bool
    lift_min: float  # min over nodes of (1 + kappa^2 + (x.mu^C)^2) - 1
    lift_witness: bool

    def as_dict(self) -> dict:
        return {
            "gamma_period": self.gamma_period.as_dict(),
            "center_period": self.center_period.as_dict(),
            "periodic_transfer": self.periodic_transfer,
            "antiperiodic_transfer": self.antiperiodic_transfer,
            "coorientability": self.coorientability,
            "complete": self.complete,
            "weakly_complete": self.weakly_complete,
            "lift_min": self.lift_min,
            "lift_witness": self.lift_witness,
        }


def caustic_lift_coefficients(front: TubeFront, caus: TubeFront) -> np.ndarray:
    """s-coefficient ``1 + kappa^2 + (x.mu^C)^2`` of the caustic lift metric in the original s.

    ``mu^C`` is the caustic Bishop data measured per unit original arclength,
    ``mu^C = mu_sigma * dsigma/ds`` with ``dsigma/ds = sqrt(1 + kappa^2)``.
    """
    center = caus.curve
    to_s = center.params.get("base_parameter")
    if to_s is None:
        raise ValueError("caustic center curve does not record its original parameter")
    s_nodes = to_s(caus.s)
    g, d1, d2 = front.curve.derivatives(s_nodes, 2)
    kappa = np.linalg.norm(d2 + g, axis=1)
    rho_sigma = caus.x @ caus.frame.mu.T  # (m_x, m_s)
    mu_c = rho_sigma.T * np.sqrt(1.0 + kappa**2)[:, None]
    return 1.0 + kappa[:, None] ** 2 + mu_c**2


def caustic_completeness_transfer(front: TubeFront, caus: TubeFront | None = None) -> CausticTransfer:
    caus = caus or caustic(front)
    tol = front.tol
    g_info = front.period_info
    c_info = caus.period_info
    coeff = caustic_lift_coefficients(front, caus)
    gap = float(np.min(coeff - 1.0))
    return CausticTransfer(
        g_info, c_info,
        periodic_transfer=(not g_info.is_closed) or c_info.is_closed,
        antiperiodic_transfer=(g_info.kind is not PeriodKind.ANTIPERIODIC) or c_info.kind is PeriodKind.ANTIPERIODIC,
        coorientability=coorientability(caus),
        complete=c_info.is_closed,
        weakly_complete=gap >= -tol.lift_slack,
        lift_min=gap,
        lift_witness=gap >= -tol.lift_slack,
    )


# ---------------------------------------------------------------------------
# inverse caustic
# ---------------------------------------------------------------------------


def _max_margin_direction(W: np.ndarray) -> np.ndarray | None:
    """Unit ``c`` maximizing ``min_i (W c)_i`` if that minimum can be made positive."""
    from scipy.optimize import minimize

    scale = np.max(np.linalg.norm(W, axis=1))
    Wn = W / scale
    c0 = Wn.mean(axis=0)
    if np.linalg.norm(c0) == 0:
        c0 = Wn[0]
    res = minimize(lambda v: 0.5 * v @ v, c0 / np.linalg.norm(c0) * 10, jac=lambda v: v,
                   constraints=[{"type": "ineq", "fun": lambda v: Wn @ v - 1.0, "jac": lambda v: Wn}],
                   method="SLSQP", options={"maxiter": 500, "ftol": 1e-14})
    v = res.x
    if not np.all(Wn @ v > 0):
        return None
    return v / np.linalg.norm(v)


def integral_curve(E: SphericalCurve, gamma0: np.ndarray | None = None,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> SphericalCurve:
    """Regular curve ``gamma`` on the sphere with ``gamma' = lambda E``, ``lambda = -<gamma, E'>``.

    This is the unit-sphere form of ``gamma' || E``: differentiating
    ``<gamma, E> = 0`` fixes ``lambda``.  The flow is linear and isometric on
    ``E^perp``, so ``lambda(s) = <gamma(0), w(s)>`` for a computable ``w``; by
    default ``gamma(0)`` maximizes ``min lambda`` so the curve stays regular.
    The result is parametrized by the parameter of *E* (not by arclength).
    """
    if not E.is_arclength:
        raise ValueError("inverse caustic expects an arclength center curve")
    intervals = E.m if E.closed else E.m - 1
    refine = max(1, math.ceil(MIN_STEPS_PER_PERIOD / intervals))
    steps = intervals * refine
    h = E.length / steps
    half = np.arange(2 * steps + 1) * (h / 2)
    E_half, dE_half = E.derivatives(half, 1)
    grid = half[::2]
    En, dEn = E_half[::2], dE_half[::2]
    # orthonormal basis of E(0)^perp and its transport
    q, _ = np.linalg.qr(np.column_stack([E_half[0], np.eye(E.dim)]))
    basis0 = q[:, 1:E.dim].T
    flows = np.stack([_kernels.transport_sweep(E_half, dE_half, b0, h) for b0 in basis0], axis=1)
    W = -np.einsum("skc,sc->sk", flows, dEn)  # lambda for each basis start
    if gamma0 is None:
        coeff = _max_margin_direction(W)
        if coeff is None:
            raise ValueError("no regular integral curve: lambda must vanish for every start point")
    else:
        gamma0 = np.asarray(gamma0, dtype=float)
        if abs(gamma0 @ gamma0 - 1) > tol.unit_sphere or abs(gamma0 @ E_half[0]) > tol.unit_sphere:
            raise ValueError("initial point must be a unit vector orthogonal to E(0)")
        coeff = basis0 @ gamma0
    nodes = np.einsum("k,skc->sc", coeff, flows)
    nodes /= np.linalg.norm(nodes, axis=1, keepdims=True)
    lam = -np.einsum("ij,ij->i", nodes, dEn)
    if np.min(np.abs(lam)) <= tol.regular_speed or np.min(lam) * np.max(lam) < 0:
        raise ValueError("integral curve is not regular (lambda vanishes)")
    spline = CubicHermiteSpline(grid, nodes, lam[:, None] * En)
    mid = spline(0.5 * (grid[1:] + grid[:-1]))
    drift = float(np.max(np.abs(np.sum(mid**2, axis=1) - 1.0)))
    if drift > 1e-8:
        raise ValueError(f"integral curve leaves the sphere by {drift:.2e}; step too large")
    closed = E.closed and float(np.linalg.norm(nodes[-1] - nodes[0])) < 1e-8
    max_order = min(E.max_order, 5)

    def fn(u, k):
        g = spline(u)
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        Es = E.derivatives(u, k)
        gs, lams = [g], []
        for j in range(k):
            lams.append(-sum(comb(j, i) * np.einsum("ij,ij->i", gs[i], Es[j - i + 1]) for i in range(j + 1)))
            gs.append(sum(comb(j, i) * lams[i][:, None] * Es[j - i] for i in range(j + 1)))
        return gs[k]

    return SphericalCurve(fn, E.length, E.m, E.dim, E.derivative_source, False, closed, False,
                          max_order, name=f"integral[{E.name}]")


def inverse_caustic(front: TubeFront, gamma0: np.ndarray | None = None) -> TubeFront:
    """Tube whose caustic is *front*: the tube over an integral curve of its center curve."""
    base = integral_curve(front.curve, gamma0, front.tol)
    return tube_from_curve(base, front.m_s, front.m_x, front.tol, name=f"inverse_caustic[{front.name}]")


# ---------------------------------------------------------------------------
# duals (n = 2)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RuledSurface:
    """``f(s, t) = cos t p(s) + sin t v(s)`` with ``(p, v, q, w)`` orthonormal."""

    s: np.ndarray
    p: np.ndarray
    v: np.ndarray
    q: np.ndarray
    w: np.ndarray
    name: str = "ruled"

    def points(self, t: np.ndarray) -> np.ndarray:
        return np.cos(t)[None, :, None] * self.p[:, None] + np.sin(t)[None, :, None] * self.v[:, None]

    def dual(self) -> "RuledSurface":
        return RuledSurface(self.s, self.q, self.w, self.p, self.v, f"dual[{self.name}]")


def frenet_ruled_tube(fd: FrenetData, name: str = "tube") -> RuledSurface:
    """The tube image written on the Frenet normal plane: ``cos t n + sin t b``."""
    return RuledSurface(fd.s, fd.n, fd.b, fd.gamma, fd.e, name)


@dataclass(frozen=True)
class DualSurface:
    grid: FrontGrid
    frenet: FrenetData
    ruled: RuledSurface
    incidence: dict
    stack_sigma: np.ndarray  # smallest singular value of (df, dnu) per node
    flagged: np.ndarray  # (k, 2) node indices where the Legendrian lift degenerates

    @property
    def center_curve(self) -> np.ndarray:
        return self.frenet.b


def dual(front: TubeFront) -> DualSurface:
    """``f^# = cos t gamma + sin t gamma'`` with normal ``b`` (n = 2)."""
    if front.n != 2:
        raise ValueError("duals are defined for surfaces in S^3 (n = 2)")
    fd = frenet(front.curve, front.s, front.tol)
    if not np.all(fd.defined):
        raise ValueError("Frenet frame undefined (kappa <= kappa_min) somewhere on the center curve")
    t = front.t
    ct, st = np.cos(t)[None, :, None], np.sin(t)[None, :, None]
    g, e, n, b = (a[:, None, :] for a in (fd.gamma, fd.e, fd.n, fd.b))
    kappa = fd.kappa[:, None, None]
    tau = fd.tau[:, None, None]
    f = ct * g + st * e
    de = -g + kappa * n
    df = np.stack([ct * e + st * de, -st * g + ct * e], axis=2)
    nu = np.broadcast_to(b, f.shape).copy()
    dnu = np.stack([np.broadcast_to(-tau * n, f.shape), np.zeros_like(f)], axis=2)
    grid = frontal_grid(front.s, t, f, nu, df, dnu, periodic=(False, True),
                        sing_tol=front.tol.sing_rel * front.sing_scale,
                        meta={"kind": "dual", "name": f"dual[{front.name}]"})
    h = max(grid.h)
    stack = np.concatenate([df, dnu], axis=-1)
    sigma = _kernels.min_singular(stack)
    flagged = np.argwhere(sigma < front.tol.front_factor * h)
    fs = fd_central(f, grid.h[0], 0, False)
    ft = fd_central(f, grid.h[1], 1, True)
    incidence = {
        "f_b": float(np.max(np.abs(dot(f, nu)))),
        "fs_b": float(np.nanmax(np.abs(dot(fs, nu)))),
        "ft_b": float(np.max(np.abs(dot(ft, nu)))),
        "h": h,
    }
    return DualSurface(grid, fd, frenet_ruled_tube(fd, front.name).dual(), incidence, sigma, flagged)


def tau_roots(curve: SphericalCurve, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Zeros of the torsion located by sign changes on the sample grid and Brent refinement."""
    from scipy.optimize import brentq

    s = curve.s
    tau = frenet(curve, s, tol).tau

    def tau_at(x):
        return float(frenet(curve, np.array([x]), tol).tau[0])

    idx = np.nonzero(np.sign(tau[:-1]) * np.sign(tau[1:]) < 0)[0]
    roots = [brentq(tau_at, s[i], s[i + 1], xtol=1e-13) for i in idx]
    roots += [float(s[i]) for i in np.nonzero(tau == 0)[0]]
    return np.sort(np.array(roots))


# ---------------------------------------------------------------------------
# self-duality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SelfDualResult:
    is_self_dual: bool
    residual: float  # RMS alignment residual (absolute)
    relative_residual: float  # residual / diameter
    tau_deviation: float
    tau_verdict: bool
    alignment_verdict: bool
    diameter: float
    transform: np.ndarray
    hypothesis: dict = field(default_factory=dict)

    @property
    def channels_agree(self) -> bool:
        return self.tau_verdict == self.alignment_verdict

    def as_dict(self) -> dict:
        return {
            "is_self_dual": self.is_self_dual,
            "residual": self.residual,
            "relative_residual": self.relative_residual,
            "tau_deviation": self.tau_deviation,
            "tau_verdict": self.tau_verdict,
            "alignment_verdict": self.alignment_verdict,
            "channels_agree": self.channels_agree,
            "diameter": self.diameter,
        }


def _diameter(points: np.ndarray, limit: int = 2000) -> float:
    pts = points.reshape(-1, points.shape[-1])
    step = max(1, len(pts) // limit)
    sub = pts[::step]
    d2 = np.sum(sub**2, axis=1)
    gram = d2[:, None] + d2[None, :] - 2 * sub @ sub.T
    return float(np.sqrt(max(gram.max(), 0.0)))


def self_dual_test(front: TubeFront, stride: int = 4) -> SelfDualResult:
    """Congruence test between the tube and its dual together with ``max ||tau| - 1|``.

    A congruence must carry the center curve ``gamma`` of the tube onto the
    center curve ``b`` of the dual.  Candidate parameter correspondences
    ``s -> +-s + shift`` are scored on the center curves; each survivor is
    scored on the whole surface under the eight ruling correspondences
    ``t -> +-t + k pi/2`` by orthogonal Procrustes.
    """
    if front.n != 2:
        raise ValueError("self-duality is defined for n = 2")
    tol = front.tol
    curve = front.curve
    fd = frenet(curve, front.s, tol)
    if not np.all(fd.defined):
        raise ValueError("torsion undefined: kappa <= kappa_min somewhere")
    tau_dev = float(np.max(np.abs(np.abs(fd.tau) - 1.0)))

    s = front.s[::stride]
    t = front.t[::stride]
    tube = frenet_ruled_tube(frenet(curve, s, tol))
    T = tube.points(t)
    diam = _diameter(T)

    def dual_at(s_img):
        d = frenet(curve, s_img, tol)
        return RuledSurface(s_img, d.gamma, d.e, d.n, d.b)

    def curve_score(s_img):
        b = frenet(curve, s_img, tol).b
        try:
            return align_rigid(tube.q, b)[1]
        except DegenerateCovarianceError:
            return np.inf

    span = curve.length
    shifts = front.s[::max(1, stride // 2)]
    cands = []
    for direction in (1.0, -1.0):
        scores = np.array([curve_score(direction * s + d) for d in shifts])
        k = int(np.argmin(scores))
        best_d, best = shifts[k], scores[k]
        if best > 1e-9 * diam:
            lo = shifts[k] - (shifts[1] - shifts[0])
            hi = shifts[k] + (shifts[1] - shifts[0])
            res = minimize_scalar(lambda d: curve_score(direction * s + d), bounds=(lo, hi),
                                  method="bounded", options={"xatol": 1e-12})
            if res.fun < best:
                best_d, best = float(res.x), float(res.fun)
        cands.append((best, direction, best_d))

    best = (np.inf, np.eye(4), {})
    for _, direction, shift in cands:
        D = dual_at(direction * s + shift)
        for sign_t in (1.0, -1.0):
            for k in range(4):
                Dt = D.points(sign_t * t + k * math.pi / 2)
                try:
                    A, rms = align_rigid(T, Dt)
                except DegenerateCovarianceError:
                    continue
                if rms < best[0]:
                    best = (rms, A, {"s_direction": direction, "s_shift": float(shift % span),
                                     "t_sign": sign_t, "t_shift": k * math.pi / 2})
    rms, A, hyp = best
    rel = rms / diam
    tau_ok = tau_dev < tol.tau_unit
    align_ok = rel < tol.self_dual_rel
    return SelfDualResult(tau_ok and align_ok, float(rms), float(rel), tau_dev, tau_ok, align_ok, diam, A, hyp)


def dual_involution_residual(front: TubeFront, stride: int = 4) -> float:
    """RMS between the tube and the dual of its dual, relative to the diameter."""
    fd = frenet(front.curve, front.s[::stride], front.tol)
    tube = frenet_ruled_tube(fd)
    t = front.t[::stride]
    T = tube.points(t)
    back = tube.dual().dual().points(t)
    _, rms = align_rigid(T, back)
    return rms / _diameter(T)


# ---------------------------------------------------------------------------
# reference frontals f_E and f_H
# ---------------------------------------------------------------------------


def frontal_fE_points(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``f_E(x) = (x_1, .., x_n, 0)`` with constant normal ``(0, .., 0, 1)`` for ``x`` on ``S^n``."""
    x = np.asarray(x, dtype=float)
    f = x.copy()
    f[..., -1] = 0.0
    nu = np.zeros_like(x)
    nu[..., -1] = 1.0
    return f, nu


def hyperbolic_chart(y: np.ndarray) -> np.ndarray:
    """``(1 + |y|^2, 2y) / (1 - |y|^2)`` from the unit ball onto the hyperboloid."""
    y = np.asarray(y, dtype=float)
    r2 = np.sum(y**2, axis=-1, keepdims=True)
    if np.any(r2 >= 1.0):
        raise ValueError("hyperbolic chart is defined on the open unit ball")
    return np.concatenate([1.0 + r2, 2.0 * y], axis=-1) / (1.0 - r2)


def frontal_fH_points(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``f_H(x)`` = chart of ``(x_1, .., x_n, 0) / 2``; normal is the last coordinate vector."""
    y = np.asarray(x, dtype=float) / 2.0
    y[..., -1] = 0.0
    f = hyperbolic_chart(y)
    nu = np.zeros_like(f)
    nu[..., -1] = 1.0
    return f, nu


def polar_band(m_theta: int, m_phi: int, band: float) -> tuple[np.ndarray, np.ndarray]:
    """Colatitudes ``[band, pi - band]`` (odd count, so the equator is a node) and periodic longitudes."""
    if m_theta % 2 == 0:
        raise ValueError("m_theta must be odd so the equator is sampled")
    theta = np.linspace(band, math.pi - band, m_theta)
    theta[m_theta // 2] = math.pi / 2
    return theta, np.arange(m_phi) * (2 * math.pi / m_phi)


def sphere_point(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def example_frontal_fE(n: int = 2, m_theta: int = 129, m_phi: int = 128, band: float = 0.3) -> FrontGrid:
    """``f_E`` on a colatitude band of ``S^2``; partials by finite differences."""
    if n != 2:
        raise NotImplementedError("structured f_E grids are built for n = 2; use frontal_fE_points")
    theta, phi = polar_band(m_theta, m_phi, band)
    return sample_frontal(lambda a, b: frontal_fE_points(sphere_point(a, b)), theta, phi,
                          periodic=(False, True), c=0.0, meta={"kind": "fE", "name": "fE"})


def example_frontal_fH(n: int = 2, m_theta: int = 129, m_phi: int = 128, band: float = 0.3) -> FrontGrid:
    """``f_H`` in the hyperboloid model (Lorentzian ambient, ``c = -1``)."""
    if n != 2:
        raise NotImplementedError("structured f_H grids are built for n = 2; use frontal_fH_points")
    theta, phi = polar_band(m_theta, m_phi, band)
    return sample_frontal(lambda a, b: frontal_fH_points(sphere_point(a, b)), theta, phi,
                          periodic=(False, True), signature=Signature.LORENTZIAN, c=-1.0,
                          meta={"kind": "fH", "name": "fH"})


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------


def stereographic(x: np.ndarray) -> np.ndarray:
    """``(x1, x3, x4) / (1 + x2)``."""
    x = np.asarray(x, dtype=float)
    return x[..., [0, 2, 3]] / (1.0 + x[..., 1:2])


def stereographic_inverse(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    r2 = np.sum(y**2, axis=-1, keepdims=True)
    out = np.empty(y.shape[:-1] + (4,))
    out[..., 1:2] = (1.0 - r2) / (1.0 + r2)
    out[..., [0, 2, 3]] = 2.0 * y / (1.0 + r2)
    return out


def central(x: np.ndarray, eps: float = DEFAULT_TOLERANCES.projection_eps) -> np.ndarray:
    """``(x1, x2, x3) / x4`` on the open upper hemisphere."""
    x = np.asarray(x, dtype=float)
    if np.any(x[..., 3] <= eps):
        raise ValueError("central projection needs x4 > eps (upper hemisphere)")
    return x[..., :3] / x[..., 3:4]


def lift_klein(v: np.ndarray) -> np.ndarray:
    """Inverse of the central projection: ``(v, 1) / sqrt(1 + |v|^2)``."""
    v = np.asarray(v, dtype=float)
    ext = np.concatenate([v, np.ones(v.shape[:-1] + (1,))], axis=-1)
    return ext / np.sqrt(1.0 + np.sum(v**2, axis=-1, keepdims=True))


@dataclass(frozen=True)
class AmbientMesh:
    vertices: np.ndarray  # (V, N)
    faces: np.ndarray  # (F, 3), 0-based
    scalars: dict
    polylines: list


@dataclass(frozen=True)
class ProjectedMesh:
    vertices: np.ndarray
    faces: np.ndarray  # 0-based
    scalars: dict
    polylines: list
    projection: str
    dropped: int = 0
    dropped_polyline_points: int = 0


def grid_faces(rows: int, cols: int, wrap_cols: bool) -> np.ndarray:
    """Quad ``(i,j),(i+1,j),(i+1,j+1),(i,j+1)`` split into ``(a,b,c)`` and ``(a,c,d)``."""
    jmax = cols if wrap_cols else cols - 1
    i, j = np.meshgrid(np.arange(rows - 1), np.arange(jmax), indexing="ij")
    i, j = i.ravel(), j.ravel()
    j1 = (j + 1) % cols
    a, b, c, d = i * cols + j, (i + 1) * cols + j, (i + 1) * cols + j1, i * cols + j1
    return np.concatenate([np.stack([a, b, c], 1), np.stack([a, c, d], 1)]).reshape(2, -1, 3).transpose(1, 0, 2).reshape(-1, 3)


def mesh_from_grid(grid: FrontGrid, polylines=()) -> AmbientMesh:
    """Triangulated mesh of a grid; closed tubes get their ``s = L`` row from the end frame."""
    f = grid.f
    theta = grid.theta
    strat = grid.stratum
    if grid.end_row is not None:
        fe, _, te = grid.end_row
        f = np.concatenate([f, fe[None]], axis=0)
        theta = np.concatenate([theta, te[None]], axis=0)
        kap = None if grid.kappa is None else grid.kappa[:1]
        thetas_end = np.concatenate([te[None, :, None], grid.thetas[:1, :, 1:]], axis=-1)
        _, se = classify_nodes(thetas_end, kap, grid.kappa_min, grid.sing_tol)
        strat = np.concatenate([strat, se], axis=0)
    rows, cols = f.shape[:2]
    th = np.mod(theta, math.pi)
    rho = np.where(np.abs(th - math.pi / 2) < 1e-15, np.inf, np.tan(th))
    faces = grid_faces(rows, cols, grid.periodic[1])
    return AmbientMesh(f.reshape(-1, f.shape[-1]), faces,
                       {"rho": rho.ravel(), "stratum": strat.ravel().astype(int)},
                       [np.asarray(p) for p in polylines])


def _project(mesh: AmbientMesh, fn, keep_fn, name: str) -> ProjectedMesh:
    keep = keep_fn(mesh.vertices)
    new_index = np.cumsum(keep) - 1
    face_ok = np.all(keep[mesh.faces], axis=1)
    faces = new_index[mesh.faces[face_ok]]
    verts = fn(mesh.vertices[keep])
    scalars = {k: v[keep] for k, v in mesh.scalars.items()}
    lines, lost = [], 0
    for line in mesh.polylines:
        ok = keep_fn(line)
        lost += int(np.sum(~ok))
        # split at excluded points
        start = None
        for i, flag in enumerate(list(ok) + [False]):
            if flag and start is None:
                start = i
            elif not flag and start is not None:
                if i - start >= 2:
                    lines.append(fn(line[start:i]))
                start = None
    return ProjectedMesh(verts, faces, scalars, lines, name, int(np.sum(~keep)), lost)


def project_stereographic(mesh: AmbientMesh, eps: float = DEFAULT_TOLERANCES.projection_eps) -> ProjectedMesh:
    return _project(mesh, stereographic, lambda v: v[:, 1] > -1.0 + eps, "stereo")


def project_central(mesh: AmbientMesh, eps: float = DEFAULT_TOLERANCES.projection_eps) -> ProjectedMesh:
    return _project(mesh, lambda v: v[:, :3] / v[:, 3:4], lambda v: v[:, 3] > eps, "central")


def project_none(mesh: AmbientMesh) -> ProjectedMesh:
    return _project(mesh, lambda v: v, lambda v: np.ones(len(v), dtype=bool), "none")


def project(mesh: AmbientMesh, which: str, eps: float = DEFAULT_TOLERANCES.projection_eps) -> ProjectedMesh:
    if which == "stereo":
        return project_stereographic(mesh, eps)
    if which == "central":
        return project_central(mesh, eps)
    if which == "none":
        return project_none(mesh)
    raise ValueError(f"unknown projection {which!r}")
