"""Reference fixtures used by the verification battery, the CLI and the tests.

Every builder takes a refinement ``level`` (0, 1, 2, ...) that doubles the
resolution in both grid directions, so convergence audits can walk h, h/2, h/4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ambient import Signature
from .config import DEFAULT_TOLERANCES, Tolerances
from .curves import great_circle, make_helix, helix_ab_from_kappa_tau, tau_crossing_curve
from .fronts import FrontGrid, TubeFront, evaluate, sample_frontal, tube_from_curve
from .transforms import example_frontal_fE, example_frontal_fH, polar_band, sphere_point

# polar band away from the coordinate poles
BAND = 0.3
BASE_THETA = 32  # intervals in colatitude at level 0
BASE_PHI = 64


def _polar_sizes(level: int) -> tuple[int, int]:
    return BASE_THETA * 2**level + 1, BASE_PHI * 2**level


def totally_geodesic(level: int = 0) -> FrontGrid:
    """The great sphere ``S^2 = {x_4 = 0}`` with constant normal ``e_4``."""
    theta, phi = polar_band(*_polar_sizes(level), BAND)

    def fn(a, b):
        x = sphere_point(a, b)
        f = np.concatenate([x, np.zeros(x.shape[:-1] + (1,))], axis=-1)
        nu = np.zeros_like(f)
        nu[..., 3] = 1.0
        return f, nu

    return sample_frontal(fn, theta, phi, periodic=(False, True), c=1.0,
                          meta={"kind": "totally-geodesic", "name": "totally-geodesic"})


def small_sphere(level: int = 0, height: float = 0.5) -> FrontGrid:
    """``{x_4 = height} cap S^3``, radius ``r = sqrt(1 - height^2)``; its normal has rank-2 derivative."""
    r = math.sqrt(1.0 - height**2)
    theta, phi = polar_band(*_polar_sizes(level), BAND)

    def fn(a, b):
        u = sphere_point(a, b)
        one = np.ones(u.shape[:-1] + (1,))
        f = np.concatenate([r * u, height * one], axis=-1)
        nu = np.concatenate([height * u, -r * one], axis=-1)
        return f, nu

    return sample_frontal(fn, theta, phi, periodic=(False, True), c=1.0,
                          meta={"kind": "small-sphere", "name": "small-sphere", "height": height})


def fE(level: int = 0) -> FrontGrid:
    return example_frontal_fE(2, *_polar_sizes(level), BAND)


def fH(level: int = 0) -> FrontGrid:
    return example_frontal_fH(2, *_polar_sizes(level), BAND)


def helix_tube(a: float, b: float, level: int = 0, m_s: int = 128, m_x: int = 64,
               tol: Tolerances = DEFAULT_TOLERANCES) -> TubeFront:
    k = 2**level
    return tube_from_curve(make_helix(a, b, m_s * k), m_s * k, m_x * k, tol)


def kappa_tau_tube(kappa: float, tau: float, level: int = 0, m_s: int = 128, m_x: int = 64,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> TubeFront:
    a, b = helix_ab_from_kappa_tau(kappa, tau)
    return helix_tube(a, b, level, m_s, m_x, tol)


def tau_crossing_tube(level: int = 0, m_s: int = 128, m_x: int = 64,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> TubeFront:
    k = 2**level
    return tube_from_curve(tau_crossing_curve(m_s * k), m_s * k, m_x * k, tol)


def great_circle_tube(level: int = 0, m_s: int = 128, m_x: int = 64,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> TubeFront:
    k = 2**level
    return tube_from_curve(great_circle(m_s * k), m_s * k, m_x * k, tol)


# the three helices named throughout: tau = 1, tau = 5/4 (co-orientable), antiperiodic
HELICES = {
    "tau-one": (2.0, 0.5),
    "coorientable": (math.sqrt(2.5), math.sqrt(5 / 8)),
    "antiperiodic": (math.sqrt(5.0), math.sqrt(5.0) / 3),
}


@dataclass(frozen=True)
class Fixture:
    """Named frontal family with the verdicts the theory predicts."""

    name: str
    build: Callable[[int], FrontGrid]
    c: float
    signature: Signature
    constant_curvature: bool  # rank(dnu) <= 1 expected
    front: bool  # Legendrian lift expected to be an immersion


def _tube_grid(level: int) -> FrontGrid:
    return evaluate(helix_tube(*HELICES["tau-one"], level=level))


FIXTURES: dict[str, Fixture] = {
    "tube": Fixture("tube", _tube_grid, 1.0, Signature.EUCLIDEAN, True, True),
    "fE": Fixture("fE", fE, 0.0, Signature.EUCLIDEAN, True, False),
    "fH": Fixture("fH", fH, -1.0, Signature.LORENTZIAN, True, False),
    "totally-geodesic": Fixture("totally-geodesic", totally_geodesic, 1.0, Signature.EUCLIDEAN, True, True),
    "small-sphere": Fixture("small-sphere", small_sphere, 1.0, Signature.EUCLIDEAN, False, True),
}
