"""Maximization of the entropy functionals over vector fields.

The objective is xi -> mu_lambda(q_xi) with q_xi(mu) = <mu, -xi>.  A
quasi-Newton (BFGS) ascent with Armijo backtracking runs from a small set of
seeds; the analytic gradient comes from the first-variation formulas, so no
finite differences are involved.  The trace of each run is monotone by
construction of the line search.
"""

from __future__ import annotations

from collections import namedtuple
from fractions import Fraction
from math import log, sqrt

from .functionals import TWO_PI, calabi
from .integrate import ExpIntegrator, ValidationFailure
from .paconvex import AffineForm, as_pa


class MaxIterExceeded(RuntimeError):
    """No seed reached the gradient tolerance."""


OptimizationResult = namedtuple(
    "OptimizationResult", ["xi", "value", "gradient_norm", "trace", "status"]
)


class _Objective:
    """mu_lambda(q_xi) and its gradient, sharing one integration context."""

    def __init__(self, P, lam):
        n = P.dim
        funcs = [
            AffineForm(tuple(-1 if j == i else 0 for j in range(n)), 0)
            for i in range(n)
        ]
        self.gear = ExpIntegrator(P, funcs)
        self.n = n
        self.lam = float(lam)

    def _abc(self, xi):
        combo = tuple(float(c) for c in xi)
        A, _ = self.gear.interior(combo)
        B, _ = self.gear.boundary(combo)
        C, _ = self.gear.interior(combo, [(float(self.n), combo)])
        return combo, A, B, C

    def value(self, xi):
        _, A, B, C = self._abc(xi)
        return -TWO_PI * B / A + self.lam * (C / A - log(A))

    def value_grad(self, xi):
        combo, A, B, C = self._abc(xi)
        value = -TWO_PI * B / A + self.lam * (C / A - log(A))
        grad = []
        for i in range(self.n):
            unit = tuple(1.0 if k == i else 0.0 for k in range(self.n))
            probe = [(0.0, unit)]
            Ai, _ = self.gear.interior(combo, probe)
            Bi, _ = self.gear.boundary(combo, probe)
            Ci, _ = self.gear.interior(combo, [(self.n + 1.0, combo), (0.0, unit)])
            dmu = -TWO_PI * (Bi * A - B * Ai) / (A * A)
            dsigma = (Ci * A - C * Ai) / (A * A) - Ai / A
            grad.append(dmu + self.lam * dsigma)
        return value, grad


def _project(x, box):
    if box is None:
        return list(x)
    out = []
    for xi, (lo, hi) in zip(x, box):
        out.append(min(max(xi, lo), hi))
    return out


def _on_boundary(x, box, tol=1e-10):
    if box is None:
        return False
    for xi, (lo, hi) in zip(x, box):
        if abs(xi - lo) <= tol or abs(xi - hi) <= tol:
            return True
    return False


def _bfgs_ascent(obj, x0, gtol, max_iter, box):
    n = len(x0)
    x = _project(x0, box)
    f, g = obj.value_grad(x)
    H = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    trace = [(tuple(x), f)]
    status = "max-iter"
    for _ in range(max_iter):
        gnorm = sqrt(sum(gi * gi for gi in g))
        if gnorm <= gtol:
            status = "converged"
            break
        d = [sum(H[i][j] * g[j] for j in range(n)) for i in range(n)]
        slope = sum(di * gi for di, gi in zip(d, g))
        if slope <= 0.0:
            # curvature model went bad; reset to steepest ascent
            H = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
            d = list(g)
            slope = gnorm * gnorm
        t = 1.0
        xn = x
        fn = f
        while t >= 1e-14:
            cand = _project([x[i] + t * d[i] for i in range(n)], box)
            fc = obj.value(cand)
            if fc >= f + 1e-4 * t * slope:
                xn, fn = cand, fc
                break
            t *= 0.5
        if t < 1e-14:
            # no progress possible along the model direction
            break
        fn, gn = obj.value_grad(xn)
        s = [xn[i] - x[i] for i in range(n)]
        u = [g[i] - gn[i] for i in range(n)]  # curvature pair for ascent
        su = sum(si * ui for si, ui in zip(s, u))
        if su > 1e-14:
            rho = 1.0 / su
            Hu = [sum(H[i][j] * u[j] for j in range(n)) for i in range(n)]
            uHu = sum(u[i] * Hu[i] for i in range(n))
            for i in range(n):
                for j in range(n):
                    H[i][j] += (
                        (1.0 + rho * uHu) * rho * s[i] * s[j]
                        - rho * (s[i] * Hu[j] + Hu[i] * s[j])
                    )
        x, f, g = xn, fn, gn
        trace.append((tuple(x), f))
    gnorm = sqrt(sum(gi * gi for gi in g))
    if gnorm <= gtol:
        status = "converged"
    if status == "converged" and _on_boundary(x, box):
        status = "boundary-hit"
    elif status == "max-iter" and box is not None and _on_boundary(x, box):
        status = "boundary-hit"
    return OptimizationResult(tuple(x), f, gnorm, trace, status)


def default_seeds(n):
    seeds = [tuple(0.0 for _ in range(n))]
    for i in range(n):
        for s in (1.0, -1.0):
            seeds.append(tuple(s if j == i else 0.0 for j in range(n)))
    seeds.append(tuple(1.0 for _ in range(n)))
    seeds.append(tuple(-1.0 for _ in range(n)))
    return seeds


def maximize_over_vectors(
    P, lam=0.0, seeds=None, box=None, gtol=1e-8, max_iter=500
) -> OptimizationResult:
    """Maximize xi -> mu_lambda(q_xi) by multi-start BFGS.

    lam > 0 makes the objective unbounded in general and requires an
    explicit box ((lo, hi) per coordinate).  Raises MaxIterExceeded when no
    seed converges; otherwise returns the best run (its trace is monotone).
    """
    lam = float(lam)
    if lam > 0 and box is None:
        raise ValueError("lam > 0 needs an explicit search box")
    obj = _Objective(P, lam)
    if seeds is None:
        seeds = default_seeds(P.dim)
    results = [_bfgs_ascent(obj, list(s), gtol, max_iter, box) for s in seeds]
    finished = [r for r in results if r.status in ("converged", "boundary-hit")]
    if not finished:
        best = max(results, key=lambda r: r.value)
        raise MaxIterExceeded(
            "no seed converged; best value %.12g with gradient %.3g"
            % (best.value, best.gradient_norm)
        )
    return max(finished, key=lambda r: r.value)


def _golden_max(h, a, b, xtol):
    inv_phi = (sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = h(c), h(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = h(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = h(d)
    x = 0.5 * (a + b)
    return x, h(x)


def maximize_along_ray(P, eta, lam=0.0, bracket=None, xtol=1e-8):
    """Maximize x -> mu_lambda(q_{x eta}).

    The bracket is expanded by doubling until both ends fall below the value
    at the origin (properness of the objective guarantees this terminates),
    a coarse scan picks the best basin, and golden-section refines to xtol.
    Returns (x_star, value).
    """
    obj = _Objective(P, lam)

    def h(x):
        return obj.value(tuple(x * c for c in eta))

    if bracket is None:
        lo, hi = -1.0, 1.0
    else:
        lo, hi = float(bracket[0]), float(bracket[1])
    h0 = h(0.0)
    for _ in range(60):
        if h(lo) < h0:
            break
        lo *= 2.0
    for _ in range(60):
        if h(hi) < h0:
            break
        hi *= 2.0
    grid = 64
    xs = [lo + (hi - lo) * i / grid for i in range(grid + 1)]
    vals = [h(x) for x in xs]
    k = vals.index(max(vals))
    a = xs[max(0, k - 1)]
    b = xs[min(grid, k + 1)]
    return _golden_max(h, a, b, xtol)


def normalized_df(P, q0, xtol=1e-8):
    """Calabi energy report for q0, cross-checked numerically.

    The closed-form supremum over the ray rho * q0 is compared against a
    golden-section maximization of rho -> c_na(rho * q0), each point of
    which is computed from its own exact moments.  Disagreement raises
    ValidationFailure.
    """
    q0 = as_pa(q0, P)
    report = calabi(P, q0)

    def c_at(rho):
        if rho <= 0.0:
            return 0.0
        return calabi(P, Fraction(rho) * q0).c_na

    hi = 2.0 * report.rho_max + 1.0
    x_star, numeric = _golden_max(c_at, 0.0, hi, xtol)
    vol = float(P.volume())
    # the x resolution of the search limits the achievable value agreement
    # through the slope of the ray energy
    slope = TWO_PI * abs(report.m_na) / vol + report.variance / vol
    scale = 1.0 + abs(report.sup_value)
    if abs(numeric - report.sup_value) > 1e-6 * scale + 10.0 * xtol * slope:
        raise ValidationFailure(
            "closed-form supremum %.12g vs numeric %.12g"
            % (report.sup_value, numeric)
        )
    if abs(x_star - report.rho_max) > 1e-5 * (1.0 + report.rho_max):
        raise ValidationFailure(
            "closed-form maximizer %.12g vs numeric %.12g" % (report.rho_max, x_star)
        )
    return report
