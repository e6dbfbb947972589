"""Entropy functionals of polarized toric data.

For a piecewise affine convex q on the moment polytope P (dimension n) the
two base functionals are

    mu(q)    = -2 pi * (int_boundary e^q dsigma) / (int_P e^q dmu)
    sigma(q) = (int_P (n + q) e^q dmu) / (int_P e^q dmu) - log int_P e^q dmu

combined as mu_lambda = mu + lambda * sigma.  The vector fields enter
through the affine potentials q_xi(mu) = <mu, -xi>.  This module evaluates
the functionals, their first variation (the Futaki pairing), parameter
sweeps along rays, the Mabuchi slope / Calabi energy package, and the small
parameter limit tying the two together.
"""

from __future__ import annotations

from collections import namedtuple
from fractions import Fraction
from math import log, pi

from .integrate import ExpIntegrator
from .paconvex import (
    AffineForm,
    as_pa,
    boundary_pa_moment,
    pa_moment,
)

TWO_PI = 2.0 * pi


def _xi_form(P, xi) -> AffineForm:
    """q_xi as an exact affine form <mu, -xi>."""
    coords = tuple(Fraction(c) for c in xi)
    if len(coords) != P.dim:
        raise ValueError("xi has wrong length")
    return AffineForm(tuple(-c for c in coords), 0)


def _entropy_values(gear, n, exp_combo):
    A, _ = gear.interior(exp_combo)
    B, _ = gear.boundary(exp_combo)
    C, _ = gear.interior(exp_combo, [(float(n), exp_combo)])
    mu = -TWO_PI * B / A
    sigma = C / A - log(A)
    return A, B, mu, sigma


def mu_star(P, q, rho=1.0) -> float:
    """mu of rho * q."""
    gear = ExpIntegrator(P, [as_pa(q, P)])
    A, _ = gear.interior((float(rho),))
    B, _ = gear.boundary((float(rho),))
    return -TWO_PI * B / A


def sigma_star(P, q, rho=1.0) -> float:
    """sigma of rho * q."""
    gear = ExpIntegrator(P, [as_pa(q, P)])
    _, _, _, sigma = _entropy_values(gear, P.dim, (float(rho),))
    return sigma


def mu_lambda(P, q, lam, rho=1.0) -> float:
    """mu + lambda * sigma of rho * q."""
    gear = ExpIntegrator(P, [as_pa(q, P)])
    _, _, mu, sigma = _entropy_values(gear, P.dim, (float(rho),))
    return mu + float(lam) * sigma


def futaki(P, xi, q0, lam=0.0) -> float:
    """minus the first variation of mu_lambda at q_xi in the direction q0.

    Vanishes for every q0 exactly when xi is a critical point of
    xi -> mu_lambda(q_xi).
    """
    qxi = _xi_form(P, xi)
    q0 = as_pa(q0, P)
    n = float(P.dim)
    lam = float(lam)
    gear = ExpIntegrator(P, [qxi, q0])
    e = (1.0, 0.0)
    q0f = (0.0, (0.0, 1.0))
    A, _ = gear.interior(e)
    A1, _ = gear.interior(e, [q0f])
    B, _ = gear.boundary(e)
    B1, _ = gear.boundary(e, [q0f])
    C, _ = gear.interior(e, [(n, e)])
    C1, _ = gear.interior(e, [(n + 1.0, e), q0f])
    dmu = -TWO_PI * (B1 * A - B * A1) / (A * A)
    dsigma = (C1 * A - C * A1) / (A * A) - A1 / A
    return -(dmu + lam * dsigma)


EntropyPoint = namedtuple(
    "EntropyPoint",
    ["parameter", "numerator", "denominator", "mu", "sigma", "mu_lambda", "scaled"],
)


class EntropyReport:
    """Sweep of mu/sigma/mu_lambda along q_xi + rho * q0 for rho in a grid."""

    def __init__(self, rows, lam, xi):
        self.rows = list(rows)
        self.lam = lam
        self.xi = tuple(xi)

    def best(self):
        return max(self.rows, key=lambda r: r.mu_lambda)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


def _parse_grid(grid):
    if isinstance(grid, (tuple, list)) and len(grid) == 3 and not hasattr(grid[2], "__len__"):
        start, end, count = grid
        count = int(count)
        if count < 2:
            return [float(start)]
        step = (float(end) - float(start)) / (count - 1)
        return [float(start) + step * i for i in range(count)]
    return [float(g) for g in grid]


def entropy_curve(P, q0, xi=None, lam=0.0, grid=(0.0, 5.0, 201)) -> EntropyReport:
    """Evaluate mu, sigma, mu_lambda of q_xi + rho * q0 over a rho grid.

    grid is (start, end, count) or an explicit sequence.  numerator and
    denominator are the boundary and interior integrals of e^(q_xi + rho q0),
    scaled is -mu / (2 pi).
    """
    if xi is None:
        xi = (0,) * P.dim
    qxi = _xi_form(P, xi)
    q0 = as_pa(q0, P)
    n = float(P.dim)
    lam = float(lam)
    gear = ExpIntegrator(P, [qxi, q0])
    rows = []
    for rho in _parse_grid(grid):
        combo = (1.0, rho)
        A, _ = gear.interior(combo)
        B, _ = gear.boundary(combo)
        C, _ = gear.interior(combo, [(n, combo)])
        mu = -TWO_PI * B / A
        sigma = C / A - log(A)
        rows.append(
            EntropyPoint(rho, B, A, mu, sigma, mu + lam * sigma, -mu / TWO_PI)
        )
    return EntropyReport(rows, lam, xi)


# -- Mabuchi slope and Calabi energy ------------------------------------------


def kappa(P) -> Fraction:
    """Anticanonical degree ratio: minus boundary measure over volume."""
    return -P.boundary_measure() / P.volume()


def mabuchi_slope(P, q) -> Fraction:
    """M(q) = int_boundary q dsigma + kappa * int_P q dmu, exact."""
    q = as_pa(q, P)
    return boundary_pa_moment(q, 1) + kappa(P) * pa_moment(q, 1)


CalabiReport = namedtuple(
    "CalabiReport", ["m_na", "variance", "c_na", "rho_max", "sup_value"]
)


def calabi(P, q) -> CalabiReport:
    """Calabi energy data of q.

    c_na = -(2 pi / vol) M(q) - variance / (2 vol) with
    variance = int (q - qbar)^2 dmu.  Along the ray rho * q the energy is the
    concave quadratic -(2 pi M rho + variance rho^2 / 2) / vol, so the
    supremum over rho >= 0 is 0 when M >= 0 and is attained at
    rho_max = -2 pi M / variance otherwise.
    """
    q = as_pa(q, P)
    vol = P.volume()
    M = mabuchi_slope(P, q)
    qbar = pa_moment(q, 1) / vol
    variance = pa_moment(q, 2, shift=-qbar)
    c_na = float(-TWO_PI * M / vol - variance / (2 * vol))
    if M >= 0 or variance == 0:
        rho_max = 0.0
        sup_value = 0.0
    else:
        rho_max = float(-TWO_PI * M / variance)
        sup_value = float(2 * pi * pi * M * M / (vol * variance))
    return CalabiReport(float(M), float(variance), c_na, rho_max, sup_value)


def extremal_limit_check(P, q, rho_small=1e-3):
    """Compare the rescaled entropy increment against the Calabi energy.

    Returns (lhs, rhs, gap) where
    lhs = (mu_lambda(rho q) - mu_lambda(0)) / rho at lambda = -1/rho and
    rhs = c_na(q); the gap shrinks linearly in rho.
    """
    rho = float(rho_small)
    if rho <= 0:
        raise ValueError("rho_small must be positive")
    q = as_pa(q, P)
    n = P.dim
    lam = -1.0 / rho
    gear = ExpIntegrator(P, [q])
    _, _, mu, sigma = _entropy_values(gear, n, (rho,))
    vol = float(P.volume())
    bnd = float(P.boundary_measure())
    mu0 = -TWO_PI * bnd / vol
    sigma0 = n - log(vol)
    lhs = ((mu + lam * sigma) - (mu0 + lam * sigma0)) / rho
    rhs = calabi(P, q).c_na
    return lhs, rhs, abs(lhs - rhs)
