"""Piecewise affine convex functions on polytopes.

A function q = max_E (<mu, eta_E> - lambda_E) is stored as a tuple of exact
affine pieces bound to a polytope.  This module provides the cell complex on
which q is affine, Legendre duality, rooftop truncation, the pushforward
(Duistermaat-Heckman) measure with its moments, and the d_p / d_exp metrics.

Exact rational arithmetic throughout, except where a quantity is
transcendental (Laplace transforms, d_exp, non-integer powers).
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial, log1p

from .polytope import (
    EMPTY,
    DegenerateHull,
    LatticePolytope,
    RationalVector,
    _coords,
    _dot,
    _rank,
    _solve,
    _sub,
    build_polytope,
)


class EmptyPieces(ValueError):
    """make_pa received no pieces."""


class AffineForm:
    """Exact affine function mu -> <mu, gradient> + constant."""

    __slots__ = ("gradient", "constant")

    def __init__(self, gradient, constant=0):
        self.gradient = tuple(Fraction(g) for g in _coords(gradient))
        self.constant = Fraction(constant)

    @classmethod
    def zero(cls, dim):
        return cls((0,) * dim, 0)

    @classmethod
    def constant_form(cls, dim, c):
        return cls((0,) * dim, c)

    def __call__(self, point) -> Fraction:
        return _dot(_coords(point), self.gradient) + self.constant

    def __add__(self, other):
        if isinstance(other, AffineForm):
            return AffineForm(
                tuple(a + b for a, b in zip(self.gradient, other.gradient)),
                self.constant + other.constant,
            )
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, AffineForm):
            return AffineForm(
                tuple(a - b for a, b in zip(self.gradient, other.gradient)),
                self.constant - other.constant,
            )
        return NotImplemented

    def __rmul__(self, s):
        s = Fraction(s)
        return AffineForm(tuple(s * g for g in self.gradient), s * self.constant)

    def __eq__(self, other):
        if isinstance(other, AffineForm):
            return self.gradient == other.gradient and self.constant == other.constant
        return NotImplemented

    def __hash__(self):
        return hash((self.gradient, self.constant))

    def restrict(self, origin, basis):
        """Pull back through the chart y -> origin + sum_j y_j basis[j]."""
        grad = tuple(_dot(b, self.gradient) for b in basis)
        const = self.constant + _dot(_coords(origin), self.gradient)
        return AffineForm(grad, const)

    def to_float(self):
        return tuple(float(g) for g in self.gradient), float(self.constant)

    def __repr__(self):
        return "AffineForm(%r, %s)" % (self.gradient, self.constant)


def _as_piece(piece, dim):
    """Accept an AffineForm or an (eta, lambda) pair meaning <mu,eta> - lambda."""
    if isinstance(piece, AffineForm):
        return piece
    eta, lam = piece
    form = AffineForm(eta, -Fraction(lam))
    if len(form.gradient) != dim:
        raise ValueError("piece gradient has wrong length")
    return form


class PiecewiseAffineConvex:
    """max of finitely many exact affine pieces, bound to a polytope."""

    def __init__(self, pieces, P):
        self.pieces = tuple(pieces)
        self.P = P
        self._cells = None
        self._facet_restrictions = {}

    def __call__(self, point) -> Fraction:
        return max(piece(point) for piece in self.pieces)

    def active_piece(self, point) -> int:
        vals = [piece(point) for piece in self.pieces]
        return vals.index(max(vals))

    def cells(self):
        """[(piece_index, cell)] with full-dimensional cells only."""
        if self._cells is None:
            out = []
            for i, piece in enumerate(self.pieces):
                cell = self.P
                for j, other in enumerate(self.pieces):
                    if j == i or other == piece:
                        continue
                    grad = tuple(a - b for a, b in zip(other.gradient, piece.gradient))
                    cell = cell.clip(grad, piece.constant - other.constant)
                    if cell is EMPTY:
                        break
                if cell is not EMPTY:
                    out.append((i, cell))
            self._cells = out
        return list(self._cells)

    def restrict_to_facet(self, facet_index):
        """Restriction to a facet of P, in that facet's lattice chart."""
        if facet_index not in self._facet_restrictions:
            sub, origin, basis = self.P.facet_polytope(facet_index)
            pieces = [piece.restrict(origin, basis) for piece in self.pieces]
            self._facet_restrictions[facet_index] = make_pa(pieces, sub)
        return self._facet_restrictions[facet_index]

    def __add__(self, other):
        if isinstance(other, AffineForm):
            return PiecewiseAffineConvex([p + other for p in self.pieces], self.P)
        return NotImplemented

    def __rmul__(self, s):
        s = Fraction(s)
        if s < 0:
            raise ValueError("scaling by a negative factor breaks convexity of max")
        if s == 0:
            return PiecewiseAffineConvex([AffineForm.zero(self.P.dim)], self.P)
        return PiecewiseAffineConvex([s * p for p in self.pieces], self.P)

    def __repr__(self):
        return "PiecewiseAffineConvex(pieces=%d)" % len(self.pieces)


def make_pa(pieces, P) -> PiecewiseAffineConvex:
    pieces = list(pieces)
    if not pieces:
        raise EmptyPieces("need at least one affine piece")
    forms = []
    for piece in pieces:
        form = _as_piece(piece, P.dim)
        if form not in forms:
            forms.append(form)
    return PiecewiseAffineConvex(forms, P)


def as_pa(q, P) -> PiecewiseAffineConvex:
    """Coerce None / AffineForm / PA to a PA bound to P."""
    if q is None:
        return PiecewiseAffineConvex([AffineForm.zero(P.dim)], P)
    if isinstance(q, AffineForm):
        return PiecewiseAffineConvex([q], P)
    if isinstance(q, PiecewiseAffineConvex):
        return q
    return make_pa(q, P)


def common_cells(P, funcs):
    """Refine P so every function in funcs is affine per cell.

    Returns [(cell, idx_tuple)] where idx_tuple[k] is the active piece index
    of funcs[k] on that cell.  Entries of funcs may be PA functions bound to
    P, AffineForms, or None.
    """
    work = [(P, ())]
    for f in funcs:
        pa = as_pa(f, P)
        refined = []
        for (cell, ids) in work:
            if len(pa.pieces) == 1:
                refined.append((cell, ids + (0,)))
                continue
            for i, piece in enumerate(pa.pieces):
                sub = cell
                for j, other in enumerate(pa.pieces):
                    if j == i or other == piece:
                        continue
                    grad = tuple(
                        a - b for a, b in zip(other.gradient, piece.gradient)
                    )
                    sub = sub.clip(grad, piece.constant - other.constant)
                    if sub is EMPTY:
                        break
                if sub is not EMPTY:
                    refined.append((sub, ids + (i,)))
        work = refined
    return work


# -- Legendre duality --------------------------------------------------------


class LegendreTransform:
    """Conjugate f(zeta) = max_v (<v, zeta> - q(v)) over the support points.

    The support points are the cell-complex vertices of q, where the sup over
    the polytope is attained.
    """

    def __init__(self, points):
        self.points = tuple(points)

    def __call__(self, zeta) -> Fraction:
        z = _coords(zeta)
        return max(_dot(v.coords, z) - value for (v, value) in self.points)

    def pieces(self):
        """(w, c) pairs with f = max <w, zeta> + c."""
        return [(v, -value) for (v, value) in self.points]


def legendre(q: PiecewiseAffineConvex) -> LegendreTransform:
    seen = {}
    for (_, cell) in q.cells():
        for v in cell.vertices:
            if v not in seen:
                seen[v] = q(v)
    return LegendreTransform(sorted(seen.items(), key=lambda kv: kv[0].coords))


def legendre_dual(fspec, P) -> PiecewiseAffineConvex:
    """Conjugate of a max-affine function back onto P.

    fspec is a LegendreTransform or a list of (w, c) pairs encoding
    f(zeta) = max_j <w_j, zeta> + c_j.  The result is the lower convex
    envelope mu -> f*(mu) as a PA function on P.
    """
    if isinstance(fspec, LegendreTransform):
        pairs = fspec.pieces()
    else:
        pairs = list(fspec)
    pts = []
    for (w, c) in pairs:
        coords = _coords(w) + (-Fraction(c),)
        if coords not in pts:
            pts.append(coords)
    n = P.dim
    if len(pts) == 0:
        raise EmptyPieces("empty conjugate spec")
    # all graph points on one non-vertical hyperplane: a single affine piece
    diffs = [_sub(p, pts[0]) for p in pts[1:]]
    if _rank(diffs) < n + 1:
        base = [pts[0]]
        for p in pts[1:]:
            trial = base + [p]
            if _rank([_sub(x, base[0]) for x in trial[1:]]) == len(trial) - 1:
                base.append(p)
        if len(base) < n + 1:
            raise DegenerateHull("support points do not span the base space")
        rows = [[p[i] for i in range(n)] + [1] for p in base]
        sol = _solve(rows, [p[n] for p in base])
        if sol is None:
            raise DegenerateHull("graph points span a vertical hyperplane")
        piece = AffineForm(sol[:n], sol[n])
        for p in pts:
            if piece(p[:n]) != p[n]:
                raise DegenerateHull("graph points span a vertical hyperplane")
        return PiecewiseAffineConvex([piece], P)
    hull = build_polytope(pts)
    pieces = []
    for f in hull.facets:
        ut = Fraction(f.normal[n])
        if ut >= 0:
            continue
        grad = tuple(-Fraction(c) / ut for c in f.normal[:n])
        const = f.offset / ut
        pieces.append(AffineForm(grad, const))
    if not pieces:
        raise DegenerateHull("no lower facets in conjugate hull")
    return PiecewiseAffineConvex(pieces, P)


def rooftop(q: PiecewiseAffineConvex, tau) -> PiecewiseAffineConvex:
    """Pointwise max(q, -tau)."""
    tau = Fraction(tau)
    pieces = list(q.pieces) + [AffineForm.constant_form(q.P.dim, -tau)]
    return make_pa(pieces, q.P)


# -- exact polynomial moments ------------------------------------------------


def _h_complete(vals, k) -> Fraction:
    """Complete homogeneous symmetric polynomial h_k of exact values."""
    if k == 0:
        return Fraction(1)
    old = [Fraction(1)] * len(vals)
    for _ in range(k):
        new = [Fraction(0)] * len(vals)
        new[0] = vals[0] * old[0]
        for t in range(1, len(vals)):
            new[t] = new[t - 1] + vals[t] * old[t]
        old = new
    return old[-1]


def _simplex_poly_moment(simplex, aff: AffineForm, k: int) -> Fraction:
    """Exact integral of aff^k over a simplex against lattice measure."""
    n = simplex.dim
    if n == 0:
        return aff(simplex.vertices[0]) ** k
    vals = [aff(v) for v in simplex.vertices]
    det = abs(simplex.edge_matrix_det())
    return det * _h_complete(vals, k) * Fraction(factorial(k), factorial(n + k))


def poly_moment(P, aff: AffineForm, k: int = 1) -> Fraction:
    """Exact integral of aff(mu)^k over P."""
    return sum(
        (_simplex_poly_moment(s, aff, k) for s in P.triangulate()), Fraction(0)
    )


def pa_moment(q: PiecewiseAffineConvex, k: int = 1, shift=Fraction(0)) -> Fraction:
    """Exact integral of (q(mu) + shift)^k over the polytope of q."""
    shift = Fraction(shift)
    total = Fraction(0)
    for (i, cell) in q.cells():
        aff = q.pieces[i] + AffineForm.constant_form(q.P.dim, shift)
        total += poly_moment(cell, aff, k)
    return total


def boundary_pa_moment(q: PiecewiseAffineConvex, k: int = 1) -> Fraction:
    """Exact integral of q^k over the boundary, facet lattice measures."""
    P = q.P
    if P.dim == 1:
        return sum(
            (q(P.vertices[f.vertex_indices[0]]) ** k for f in P.facets), Fraction(0)
        )
    total = Fraction(0)
    for i in range(len(P.facets)):
        total += pa_moment(q.restrict_to_facet(i), k)
    return total


# -- Duistermaat-Heckman ------------------------------------------------------


def dh_cdf(q: PiecewiseAffineConvex, tau) -> Fraction:
    """Mass of [tau, infinity) under the pushforward of mu by -q.

    Equals the exact volume of {q <= -tau}.
    """
    tau = Fraction(tau)
    region = q.P
    for piece in q.pieces:
        region = region.clip(piece.gradient, -tau - piece.constant)
        if region is EMPTY:
            return Fraction(0)
    return region.volume()


class DHSummary:
    """Pushforward measure summary: mass, CDF, moments, Laplace transform."""

    def __init__(self, q: PiecewiseAffineConvex):
        self.q = q
        self.volume = q.P.volume()
        self.moments = tuple(
            pa_moment(q, k) * (-1) ** k for k in range(5)
        )  # moments[k] = integral of t^k against DH, t = -q
        self.barycenter = self.moments[1] / self.volume
        mean = self.moments[1] / self.volume  # = -qbar
        self.variance = pa_moment(q, 2, shift=mean)  # integral of (q - qbar)^2

    def cdf(self, tau) -> Fraction:
        return dh_cdf(self.q, tau)

    def moment(self, k) -> Fraction:
        if not 0 <= k <= 4:
            raise ValueError("moments tabulated for 0 <= k <= 4")
        return self.moments[k]

    def laplace(self, rho) -> float:
        """integral of e^{-rho t} d(DH) = integral of e^{rho q} d mu."""
        from .integrate import polytope_exp_integral

        return polytope_exp_integral(self.q.P, self.q, rho=rho).value

    def support(self):
        vals = [
            -self.q(v) for (_, cell) in self.q.cells() for v in cell.vertices
        ]
        return min(vals), max(vals)


def dh_summary(q: PiecewiseAffineConvex) -> DHSummary:
    return DHSummary(q)


# -- metrics -----------------------------------------------------------------


def _check_same_polytope(q, qp):
    if q.P is not qp.P and q.P.vertices != qp.P.vertices:
        raise ValueError("metrics need both functions on the same polytope")


def sup_abs_diff(q, qp) -> Fraction:
    """Exact sup of |q - q'| over the polytope."""
    _check_same_polytope(q, qp)
    best = Fraction(0)
    for (cell, (i, j)) in common_cells(q.P, [q, qp]):
        diff = q.pieces[i] - qp.pieces[j]
        for v in cell.vertices:
            val = abs(diff(v))
            if val > best:
                best = val
    return best


def _signed_regions(q, qp):
    """Common-refinement cells split by the sign of q - q', with |q - q'|.

    Yields (cell, aff) pairs where aff = |q - q'| restricted to the cell.
    """
    out = []
    zero = AffineForm.zero(q.P.dim)
    for (cell, (i, j)) in common_cells(q.P, [q, qp]):
        diff = q.pieces[i] - qp.pieces[j]
        if diff == zero:
            out.append((cell, diff))
            continue
        plus = cell.clip(tuple(-g for g in diff.gradient), diff.constant)
        if plus is not EMPTY:
            out.append((plus, diff))
        minus = cell.clip(diff.gradient, -diff.constant)
        if minus is not EMPTY:
            out.append((minus, zero - diff))
    return out


def _simplex_power_nonint(simplex, aff: AffineForm, p: float) -> float:
    """integral of aff^p over a simplex, aff >= 0 there, any real p >= 1.

    Uses the exact pushforward density of an affine map on a segment or
    triangle; dimensions above 2 are not supported for non-integer p.
    """
    n = simplex.dim
    vals = sorted(float(aff(v)) for v in simplex.vertices)
    det = abs(float(simplex.edge_matrix_det()))
    if det == 0.0:
        return 0.0
    if n == 1:
        g0, g1 = vals
        if g1 - g0 <= 1e-14 * max(1.0, abs(g1)):
            return det * ((0.5 * (g0 + g1)) ** p)
        return det * (g1 ** (p + 1) - g0 ** (p + 1)) / ((p + 1) * (g1 - g0))
    if n == 2:
        area = det / 2.0
        g0, g1, g2 = vals
        if g2 - g0 <= 1e-14 * max(1.0, abs(g2)):
            return area * (((g0 + g1 + g2) / 3.0) ** p)

        def ramp_up(a, lo, hi):
            # integral of s^p (s - a) ds on [lo, hi]
            def F(s):
                return s ** (p + 2) / (p + 2) - a * s ** (p + 1) / (p + 1)

            return F(hi) - F(lo)

        def ramp_down(b, lo, hi):
            # integral of s^p (b - s) ds on [lo, hi]
            def F(s):
                return b * s ** (p + 1) / (p + 1) - s ** (p + 2) / (p + 2)

            return F(hi) - F(lo)

        total = 0.0
        if g1 > g0:
            total += ramp_up(g0, g0, g1) / ((g1 - g0) * (g2 - g0))
        if g2 > g1:
            total += ramp_down(g2, g1, g2) / ((g2 - g1) * (g2 - g0))
        return 2.0 * area * total
    raise NotImplementedError("non-integer p implemented for dim <= 2 only")


def metric_dp(q, qp, p) -> float:
    """L^p distance (integral of |q - q'|^p)^{1/p}, p >= 1.

    Integer p is evaluated exactly before the final root; non-integer p uses
    closed-form pushforward integrals (dim <= 2).
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    regions = _signed_regions(q, qp)
    if float(p) == int(p):
        k = int(p)
        total = Fraction(0)
        for (cell, aff) in regions:
            total += poly_moment(cell, aff, k)
        return float(total) ** (1.0 / k)
    total = 0.0
    for (cell, aff) in regions:
        for s in cell.triangulate():
            total += _simplex_power_nonint(s, aff, float(p))
    return total ** (1.0 / float(p))


def metric_dexp(q, qp) -> float:
    """Luxemburg norm of q - q' for the Orlicz function e^t - 1.

    Smallest beta with integral of (e^{|q-q'|/beta} - 1) d mu <= 1, found by
    bisection; the defining integral at the returned beta lies in
    [1 - 1e-8, 1].
    """
    from .integrate import simplex_exp_from_values

    sup = sup_abs_diff(q, qp)
    if sup == 0:
        return 0.0
    vol = float(q.P.volume())
    regions = _signed_regions(q, qp)
    cached = []
    for (cell, aff) in regions:
        for s in cell.triangulate():
            det = abs(float(s.edge_matrix_det()))
            vals = [float(aff(v)) for v in s.vertices]
            cached.append((det, vals))

    def big_g(beta):
        inv = 1.0 / beta
        total = 0.0
        for (det, vals) in cached:
            total += simplex_exp_from_values(det, [v * inv for v in vals])
        return total - vol

    lo = 1e-14
    hi = float(sup) / log1p(1.0 / vol) + 1.0
    while big_g(hi) > 1.0:
        hi *= 2.0
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if big_g(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi and big_g(hi) >= 1.0 - 1e-8:
            break
    return hi
