"""Exponential integrals over rational polytopes.

Two independent evaluation routes are provided.

Triangulation route: integrals of (product of affine factors) * e^(affine)
over a simplex reduce, through the barycentric moment identity

    int_simplex lam^alpha e^(lam . a) dlam = (prod alpha_i!) *
        exp[a_0 (alpha_0+1 times), ..., a_n (alpha_n+1 times)],

to confluent divided differences of exp, which the _ddexp kernel evaluates
without cancellation.  Piecewise-affine data is handled on the cell complex.

Localization route: the vertex sum

    int_P e^(<mu, xi>) dmu = (-1)^n sum_v e^(<v, xi>) index(v) /
        prod_i <mu_{v,i}, xi>

over simple vertices with inward primitive edge generators mu_{v,i}, plus a
two-dimensional boundary variant.  Directions pairing to an exact rational
zero with some edge are evaluated as analytic limits: the direction is
perturbed to xi + t*zeta with a generic rational zeta, each vertex term is
expanded as a truncated Laurent series in t, the negative powers cancel in
the sum and the t^0 coefficient is the limit.  Directions that are merely
near-singular in floating point raise NearSingularDirection instead.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from itertools import product as _iproduct
from math import exp, factorial, sqrt

from .polytope import _coords, _dot
from .paconvex import AffineForm, as_pa, common_cells

try:  # compiled kernel, with pure-Python fallback
    from ._ddexp import BACKEND, ddexp
except ImportError:  # pragma: no cover - depends on build environment
    from ._ddexp_py import BACKEND, ddexp

KERNEL_BACKEND = BACKEND


class NearSingularDirection(ValueError):
    """Localization direction pairs too close to zero with an edge."""


class ValidationFailure(RuntimeError):
    """Independent evaluation routes disagree beyond tolerance."""


class IntegralResult:
    """Value of an integral plus the route taken and an error estimate.

    estimated_abs_error is a forward-error heuristic (machine epsilon times
    the accumulated magnitude), not a rigorous bound.
    """

    __slots__ = ("value", "method", "estimated_abs_error")

    def __init__(self, value, method, estimated_abs_error):
        self.value = float(value)
        self.method = method
        self.estimated_abs_error = float(estimated_abs_error)

    def __float__(self):
        return self.value

    def __repr__(self):
        return "IntegralResult(%.17g, method=%r, est_err=%.3g)" % (
            self.value,
            self.method,
            self.estimated_abs_error,
        )


# -- simplex kernels ----------------------------------------------------------


def simplex_exp_from_values(det, exp_values):
    """det * exp[values]; det is |det(edge matrix)| = n! * volume."""
    return det * ddexp(exp_values)


def _simplex_weighted(det, avals, factor_vals):
    """Integral over one simplex of (prod_j f_j) e^(e) given vertex values.

    avals[i] is the exponent at vertex i; factor_vals[j][i] the j-th affine
    factor at vertex i.  Each factor contributes one barycentric power, so a
    tuple of vertex choices maps to a confluent divided difference with the
    chosen nodes repeated.
    """
    if not factor_vals:
        return det * ddexp(avals)
    m = len(avals)
    coeff = {}
    for tup in _iproduct(range(m), repeat=len(factor_vals)):
        w = 1.0
        for vals, idx in zip(factor_vals, tup):
            w *= vals[idx]
        if w != 0.0:
            key = tuple(sorted(tup))
            coeff[key] = coeff.get(key, 0.0) + w
    total = 0.0
    for key, w in coeff.items():
        if w == 0.0:
            continue
        alph = 1
        for c in Counter(key).values():
            alph *= factorial(c)
        total += w * alph * ddexp(list(avals) + [avals[i] for i in key])
    return det * total


def simplex_exp_integral(simplex, exponent: AffineForm, weight=None) -> float:
    """Integral of weight * e^exponent over a simplex (weight affine or None)."""
    avals = [float(exponent(v)) for v in simplex.vertices]
    det = abs(float(simplex.edge_matrix_det()))
    if weight is None:
        return det * ddexp(avals)
    wvals = [float(weight(v)) for v in simplex.vertices]
    return _simplex_weighted(det, avals, [wvals])


# -- reusable integration contexts --------------------------------------------


class ExpIntegrator:
    """Fixed (polytope, function list); evaluates many float combinations.

    funcs are PA functions (or affine forms, or None for the zero function)
    on P.  interior()/boundary() integrate

        (prod_j (c_j + sum_k combo_jk * funcs_k)) * e^(sum_k e_k * funcs_k)

    against the lattice measure of P or of its boundary.  The cell complex,
    triangulations, and per-vertex function values are computed once, so a
    parameter sweep only pays for divided differences.
    """

    def __init__(self, P, funcs):
        self.P = P
        self.funcs = [as_pa(f, P) for f in funcs]
        self.dim = P.dim
        self._records = None
        self._children = None

    def _build(self):
        records = []
        for (cell, ids) in common_cells(self.P, self.funcs):
            pieces = [pa.pieces[i] for pa, i in zip(self.funcs, ids)]
            for s in cell.triangulate():
                det = abs(float(s.edge_matrix_det()))
                if det == 0.0:
                    continue
                vals = [
                    [float(piece(v)) for piece in pieces] for v in s.vertices
                ]
                records.append((det, vals))
        self._records = records

    def interior(self, exp_combo, factor_combos=()):
        """Returns (value, magnitude) where magnitude sums |contributions|."""
        if self._records is None:
            self._build()
        total = 0.0
        mag = 0.0
        for (det, vals) in self._records:
            avals = [
                sum(c * row[k] for k, c in enumerate(exp_combo)) for row in vals
            ]
            fvals = [
                [
                    const + sum(c * row[k] for k, c in enumerate(coeffs))
                    for row in vals
                ]
                for (const, coeffs) in factor_combos
            ]
            contrib = _simplex_weighted(det, avals, fvals)
            total += contrib
            mag += abs(contrib)
        return total, mag

    def boundary(self, exp_combo, factor_combos=()):
        if self.dim == 1:
            total = 0.0
            mag = 0.0
            for f in self.P.facets:
                v = self.P.vertices[f.vertex_indices[0]]
                row = [float(pa(v)) for pa in self.funcs]
                a = sum(c * row[k] for k, c in enumerate(exp_combo))
                w = 1.0
                for (const, coeffs) in factor_combos:
                    w *= const + sum(c * row[k] for k, c in enumerate(coeffs))
                contrib = w * exp(a)
                total += contrib
                mag += abs(contrib)
            return total, mag
        if self._children is None:
            self._children = []
            for i in range(len(self.P.facets)):
                restricted = [pa.restrict_to_facet(i) for pa in self.funcs]
                if restricted:
                    sub = restricted[0].P
                else:
                    sub, _, _ = self.P.facet_polytope(i)
                self._children.append(ExpIntegrator(sub, restricted))
        total = 0.0
        mag = 0.0
        for child in self._children:
            t, m = child.interior(exp_combo, factor_combos)
            total += t
            mag += m
        return total, mag


# -- public integral drivers ---------------------------------------------------


def _weight_terms(weight, P, q, rho):
    """Normalize a weight spec to (funcs, [(scalar, [factor combos])]).

    Accepted: None, an AffineForm, the strings "entropy" ((n + rho*q)) and
    "qsq" (q^2), or a list of (coefficient, power) pairs meaning
    sum coefficient(mu) * q(mu)^power with power <= 2 and coefficient a
    rational number or AffineForm.
    """
    funcs = [q]
    if weight is None:
        return funcs, [(1.0, [])]
    if isinstance(weight, AffineForm):
        funcs.append(weight)
        return funcs, [(1.0, [(0.0, (0.0, 1.0))])]
    if weight == "entropy":
        return funcs, [(1.0, [(float(P.dim), (float(rho),))])]
    if weight == "qsq":
        return funcs, [(1.0, [(0.0, (1.0,)), (0.0, (1.0,))])]
    items = []
    for (coefficient, power) in weight:
        power = int(power)
        if power < 0 or power > 2:
            raise ValueError("q powers up to 2 are supported")
        if isinstance(coefficient, AffineForm):
            funcs.append(coefficient)
            items.append((1.0, len(funcs) - 1, power))
        else:
            items.append((float(coefficient), None, power))
    width = len(funcs)
    out = []
    for (scalar, fidx, power) in items:
        combos = []
        if fidx is not None:
            combos.append(
                (0.0, tuple(1.0 if k == fidx else 0.0 for k in range(width)))
            )
        for _ in range(power):
            combos.append((0.0, (1.0,) + (0.0,) * (width - 1)))
        out.append((scalar, combos))
    return funcs, out


def polytope_exp_integral(P, q, rho=1.0, weight=None, method="auto") -> IntegralResult:
    """Integral over P of weight * e^(rho q) against the lattice measure.

    q may be a PA function, an AffineForm, or None (zero).  method picks the
    route: "triangulation" (default under "auto"), or "localization", which
    requires weight=None and a polytope with simple vertices.
    """
    qpa = as_pa(q, P)
    if method not in ("auto", "triangulation", "localization"):
        raise ValueError("unknown method %r" % (method,))
    if method == "localization":
        if weight is not None:
            raise ValueError("localization evaluates unweighted integrals only")
        value, mag = _localize_integral(P, qpa, float(rho))
        return IntegralResult(value, "localization", 1e-13 * mag)
    funcs, terms = _weight_terms(weight, P, qpa, rho)
    gear = ExpIntegrator(P, funcs)
    exp_combo = (float(rho),) + (0.0,) * (len(gear.funcs) - 1)
    total = 0.0
    mag = 0.0
    for (scalar, combos) in terms:
        t, m = gear.interior(exp_combo, combos)
        total += scalar * t
        mag += abs(scalar) * m
    return IntegralResult(total, "triangulation", 1e-14 * mag * (P.dim + 2))


def boundary_exp_integral(P, q, rho=1.0, weight=None) -> IntegralResult:
    """Integral of weight * e^(rho q) over the boundary of P.

    Facet lattice measures; evaluated by recursion to the facets in their
    exact lattice charts.
    """
    qpa = as_pa(q, P)
    funcs, terms = _weight_terms(weight, P, qpa, rho)
    gear = ExpIntegrator(P, funcs)
    exp_combo = (float(rho),) + (0.0,) * (len(gear.funcs) - 1)
    total = 0.0
    mag = 0.0
    for (scalar, combos) in terms:
        t, m = gear.boundary(exp_combo, combos)
        total += scalar * t
        mag += abs(scalar) * m
    return IntegralResult(total, "triangulation", 1e-14 * mag * (P.dim + 2))


# -- localization ---------------------------------------------------------------


def _vertex_pairings(P, eta):
    """[(vertex, index, [(t_i, mu_i)])] with exact pairings t_i = <mu_i, eta>."""
    out = []
    for v, cone in zip(P.vertices, P.vertex_cones):
        if cone is None:
            raise ValueError("localization needs simple vertices")
        pairs = [(_dot(g, eta), g) for g in cone.generators]
        out.append((v, cone.index, pairs))
    return out


def _norm(vec):
    return sqrt(sum(float(c) ** 2 for c in vec))


_GENERICITY = 1e-6


def brion_localize(P, eta, scale=1.0, boundary=False) -> float:
    """Vertex-sum evaluation of int e^(<mu, scale*eta>) over P (or its boundary).

    eta must be exact rational; scale is a float.  Raises
    NearSingularDirection when any edge pairing falls below the genericity
    threshold 1e-6 * |eta| * |mu| (exact zeros included); polytope_exp_integral
    with method="localization" additionally handles the exact-zero case by an
    analytic limit.
    """
    eta = _coords(eta)
    x = float(scale)
    if x == 0.0:
        raise ValueError("scale must be nonzero")
    data = _vertex_pairings(P, eta)
    neta = _norm(eta)
    if neta == 0.0:
        raise ValueError("direction must be nonzero")
    for (_, _, pairs) in data:
        for (t, mu) in pairs:
            if abs(float(t)) < _GENERICITY * neta * _norm(mu):
                raise NearSingularDirection(
                    "edge %r pairs to %s with the direction" % (mu, t)
                )
    n = P.dim
    if boundary:
        if n != 2:
            raise ValueError("boundary localization is two-dimensional only")
        total = 0.0
        for (v, _, pairs) in data:
            (t1, _), (t2, _) = pairs
            t1f, t2f = float(t1) * x, float(t2) * x
            total -= exp(x * float(_dot(v.coords, eta))) * (t1f + t2f) / (t1f * t2f)
        return total
    sign = -1.0 if n % 2 else 1.0
    total = 0.0
    for (v, index, pairs) in data:
        denom = 1.0
        for (t, _) in pairs:
            denom *= x * float(t)
        total += exp(x * float(_dot(v.coords, eta))) * index / denom
    return sign * total


# truncated Laurent series: (lead power, coefficient list)


def _ser_mul(a, b, keep):
    la, ca = a
    lb, cb = b
    out = [0.0] * min(keep, len(ca) + len(cb) - 1)
    for i, xi in enumerate(ca):
        if xi == 0.0:
            continue
        top = min(len(out) - i, len(cb))
        for j in range(top):
            out[i + j] += xi * cb[j]
    return (la + lb, out)


def _ser_coeff(a, power):
    lead, c = a
    i = power - lead
    return c[i] if 0 <= i < len(c) else 0.0


_AUX_SEEDS = (
    Fraction(3, 7),
    Fraction(5, 11),
    Fraction(7, 13),
    Fraction(11, 17),
    Fraction(13, 19),
    Fraction(17, 23),
)


def _aux_direction(n, zero_edges):
    for seed in _AUX_SEEDS:
        zeta = tuple(seed ** k for k in range(n))
        if all(_dot(mu, zeta) != 0 for mu in zero_edges):
            return zeta
    raise ValidationFailure("no generic auxiliary direction found")


def brion_localize_limit(P, eta, scale=1.0, boundary=False) -> float:
    """Localization that resolves exact rational zero pairings by a limit.

    Replaces the direction by eta + t*zeta and expands every vertex term as
    a truncated Laurent series in t; the negative powers cancel across
    vertices and the t^0 coefficient of the sum is the analytic limit.
    NearSingularDirection is still raised for pairings that are small in
    floating point without being exactly zero.
    """
    eta = _coords(eta)
    x = float(scale)
    if x == 0.0:
        raise ValueError("scale must be nonzero")
    data = _vertex_pairings(P, eta)
    neta = _norm(eta)
    if neta == 0.0:
        raise ValueError("direction must be nonzero")
    zero_edges = []
    for (_, _, pairs) in data:
        for (t, mu) in pairs:
            if t == 0:
                zero_edges.append(mu)
            elif abs(float(t)) < _GENERICITY * neta * _norm(mu):
                raise NearSingularDirection(
                    "edge %r pairs to %s with the direction" % (mu, t)
                )
    n = P.dim
    if boundary and n != 2:
        raise ValueError("boundary localization is two-dimensional only")
    if not zero_edges:
        return brion_localize(P, eta, scale=x, boundary=boundary)

    zeta = _aux_direction(n, zero_edges)
    zmax = 0
    for (_, _, pairs) in data:
        zmax = max(zmax, sum(1 for (t, _) in pairs if t == 0))
    keep = zmax + 4

    total = (0, [0.0])
    magnitude = {}
    for (v, index, pairs) in data:
        a = x * float(_dot(v.coords, eta))
        b = x * float(_dot(v.coords, zeta))
        ea = exp(a)
        term = (0, [ea * b ** j / factorial(j) for j in range(keep)])
        if boundary:
            (t1, m1), (t2, m2) = pairs
            s1, s2 = _dot(m1, zeta), _dot(m2, zeta)
            num = (0, [float(t1 + t2), float(s1 + s2)])
            term = _ser_mul(term, num, keep)
            for (t, s) in ((t1, s1), (t2, s2)):
                term = _ser_mul(term, _inv_linear(t, s, 1.0, keep), keep)
            term = _ser_mul(term, (0, [-1.0 / x]), keep)
        else:
            sign = -1.0 if n % 2 else 1.0
            term = _ser_mul(term, (0, [sign * index]), keep)
            for (t, mu) in pairs:
                s = _dot(mu, zeta)
                term = _ser_mul(term, _inv_linear(t, s, x, keep), keep)
        lead, coeffs = term
        tl, tc = total
        newlead = min(lead, tl)
        width = max(lead + len(coeffs), tl + len(tc)) - newlead
        merged = [0.0] * width
        for i, c in enumerate(tc):
            merged[tl - newlead + i] += c
        for i, c in enumerate(coeffs):
            merged[lead - newlead + i] += c
            p = lead + i
            if p < 0:
                magnitude[p] = magnitude.get(p, 0.0) + abs(c)
        total = (newlead, merged)

    for p, msum in magnitude.items():
        residue = _ser_coeff(total, p)
        if abs(residue) > 1e-8 * (msum + 1e-300):
            raise ValidationFailure(
                "Laurent coefficient at t^%d failed to cancel (%.3g of %.3g)"
                % (p, residue, msum)
            )
    return _ser_coeff(total, 0)


def _inv_linear(t, s, x, keep):
    """Series of 1 / (x * (t + tau * s)) in tau, exact zero t allowed."""
    if t == 0:
        return (-1, [1.0 / (x * float(s))])
    base = 1.0 / (x * float(t))
    ratio = -float(s) / float(t)
    coeffs = []
    acc = base
    for _ in range(keep):
        coeffs.append(acc)
        acc *= ratio
    return (0, coeffs)


def _localize_integral(P, qpa, rho):
    """Interior integral of e^(rho q) via per-cell vertex localization."""
    total = 0.0
    mag = 0.0
    for (i, cell) in qpa.cells():
        piece = qpa.pieces[i]
        const = float(piece.constant)
        if rho == 0.0 or all(g == 0 for g in piece.gradient):
            contrib = exp(rho * const) * float(cell.volume())
        else:
            contrib = exp(rho * const) * brion_localize_limit(
                cell, piece.gradient, scale=rho
            )
        total += contrib
        mag += abs(contrib)
    return total, mag


# -- cross validation -----------------------------------------------------------


class CrossValidation:
    """Agreement report between the triangulation and localization routes."""

    __slots__ = (
        "interior_triangulation",
        "interior_localization",
        "boundary_triangulation",
        "boundary_localization",
        "rel_gap",
        "passed",
    )

    def __init__(self, it, il, bt, bl, rel_gap, passed):
        self.interior_triangulation = it
        self.interior_localization = il
        self.boundary_triangulation = bt
        self.boundary_localization = bl
        self.rel_gap = rel_gap
        self.passed = passed

    def __repr__(self):
        return (
            "CrossValidation(rel_gap=%.3g, passed=%r)" % (self.rel_gap, self.passed)
        )


_VALIDATION_TOL = 1e-7


def cross_validate(P, q, rho=1.0) -> CrossValidation:
    """Evaluate interior (and where available boundary) integrals both ways.

    Raises ValidationFailure when the relative gap exceeds 1e-7.  The
    boundary comparison runs when P is 2-dimensional and q is globally
    affine (the regime where the boundary vertex formula applies); otherwise
    those fields are None.
    """
    qpa = as_pa(q, P)
    rho = float(rho)
    it = polytope_exp_integral(P, qpa, rho=rho).value
    il, _ = _localize_integral(P, qpa, rho)
    gaps = [abs(it - il) / max(abs(it), abs(il), 1e-300)]
    bt = bl = None
    if P.dim == 2 and len(qpa.pieces) == 1 and rho != 0.0:
        piece = qpa.pieces[0]
        if any(g != 0 for g in piece.gradient):
            bt = boundary_exp_integral(P, qpa, rho=rho).value
            bl = exp(rho * float(piece.constant)) * brion_localize_limit(
                P, piece.gradient, scale=rho, boundary=True
            )
            gaps.append(abs(bt - bl) / max(abs(bt), abs(bl), 1e-300))
    rel_gap = max(gaps)
    passed = rel_gap <= _VALIDATION_TOL
    report = CrossValidation(it, il, bt, bl, rel_gap, passed)
    if not passed:
        raise ValidationFailure(
            "evaluation routes disagree: rel gap %.3g (%r)" % (rel_gap, report)
        )
    return report
