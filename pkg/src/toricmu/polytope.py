"""Exact rational polytopes with lattice-normalized measures.

Everything here runs on ``fractions.Fraction``: hulls, facet data, clipping,
triangulation, volumes.  The ambient lattice is Z^n.  Volume is normalized so
the unit cube has volume 1, and each facet carries the (n-1)-dimensional
measure induced by its own lattice (Euclidean area divided by the Euclidean
length of the primitive integer normal).  That normalization is what makes
the boundary terms of the entropy functionals lattice-invariant.
"""

from __future__ import annotations

import json
from fractions import Fraction
from itertools import combinations, product
from math import gcd


class DegenerateHull(ValueError):
    """Raised when input points do not affinely span the ambient space."""


class _EmptyRegion:
    """Sentinel for an empty or measure-zero clip result."""

    __slots__ = ()

    def __repr__(self):
        return "EMPTY"

    def __bool__(self):
        return False


EMPTY = _EmptyRegion()


def _frac(x) -> Fraction:
    if isinstance(x, float):
        # floats convert exactly (binary rational); callers wanting decimal
        # semantics should pass strings or Fractions
        return Fraction(x)
    return Fraction(x)


class RationalVector:
    """Immutable point/vector of Q^n with exact arithmetic."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        self.coords = tuple(_frac(c) for c in coords)

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __eq__(self, other):
        if isinstance(other, RationalVector):
            return self.coords == other.coords
        return NotImplemented

    def __hash__(self):
        return hash(self.coords)

    def __add__(self, other):
        return RationalVector(a + b for a, b in zip(self.coords, _coords(other)))

    def __sub__(self, other):
        return RationalVector(a - b for a, b in zip(self.coords, _coords(other)))

    def __rmul__(self, s):
        s = _frac(s)
        return RationalVector(s * c for c in self.coords)

    def dot(self, other) -> Fraction:
        return sum((a * b for a, b in zip(self.coords, _coords(other))), Fraction(0))

    def floats(self):
        return tuple(float(c) for c in self.coords)

    def __repr__(self):
        return "RationalVector((%s))" % ", ".join(str(c) for c in self.coords)


def _coords(v):
    return v.coords if isinstance(v, RationalVector) else tuple(_frac(c) for c in v)


def _dot(u, v) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _primitive(vec) -> tuple:
    """Scale a nonzero rational vector to a primitive integer vector."""
    den = 1
    for c in vec:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in vec]
    g = 0
    for c in ints:
        g = gcd(g, abs(c))
    if g == 0:
        raise ValueError("zero vector has no primitive form")
    return tuple(c // g for c in ints)


def _det(rows) -> Fraction:
    """Exact determinant by fraction Gaussian elimination."""
    n = len(rows)
    m = [list(map(Fraction, r)) for r in rows]
    det = Fraction(1)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if m[r][col] != 0:
                piv = r
                break
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            if m[r][col] != 0:
                f = m[r][col] * inv
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return det

def _rank(rows) -> int:
    if not rows:
        return 0
    m = [list(map(Fraction, r)) for r in rows]
    nr, nc = len(m), len(m[0])
    rank = 0
    row = 0
    for col in range(nc):
        piv = None
        for r in range(row, nr):
            if m[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        inv = 1 / m[row][col]
        for r in range(row + 1, nr):
            if m[r][col] != 0:
                f = m[r][col] * inv
                for c in range(col, nc):
                    m[r][c] -= f * m[row][c]
        row += 1
        rank += 1
        if rank == min(nr, nc):
            break
    return rank


def _solve(rows, rhs):
    """Solve a square exact system; returns None when singular."""
    n = len(rows)
    m = [list(map(Fraction, rows[i])) + [Fraction(rhs[i])] for i in range(n)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if m[r][col] != 0:
                piv = r
                break
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        for c in range(col, n + 1):
            m[col][c] *= inv
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                for c in range(col, n + 1):
                    m[r][c] -= f * m[col][c]
    return tuple(m[i][n] for i in range(n))


def _cross(rows):
    """Vector orthogonal to n-1 independent rows in Q^n (Laplace minors)."""
    n = len(rows) + 1
    out = []
    for j in range(n):
        minor = [[r[c] for c in range(n) if c != j] for r in rows]
        s = Fraction(-1) ** j
        out.append(s * _det(minor) if minor else Fraction(1))
    return tuple(out)


def _kernel_basis_int(u):
    """Basis of the integer kernel {x in Z^n : <u,x> = 0} for primitive u.

    Column gcd reduction on the identity; the columns whose pairing with u
    has been driven to zero generate the kernel lattice exactly.
    """
    n = len(u)
    cols = [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    pair = list(u)
    while True:
        nz = [j for j in range(n) if pair[j] != 0]
        if len(nz) <= 1:
            break
        piv = min(nz, key=lambda j: abs(pair[j]))
        for j in nz:
            if j == piv:
                continue
            q = pair[j] // pair[piv]
            if q != 0:
                pair[j] -= q * pair[piv]
                cols[j] = [cols[j][i] - q * cols[piv][i] for i in range(n)]
    basis = [tuple(cols[j]) for j in range(n) if pair[j] == 0]
    assert len(basis) == n - 1
    return basis


class Facet:
    """One facet: outward primitive integer normal, offset, vertex indices."""

    __slots__ = ("normal", "offset", "vertex_indices")

    def __init__(self, normal, offset, vertex_indices):
        self.normal = tuple(int(c) for c in normal)
        self.offset = Fraction(offset)
        self.vertex_indices = tuple(vertex_indices)

    def __repr__(self):
        return "Facet(normal=%r, offset=%s)" % (self.normal, self.offset)


class VertexCone:
    """Tangent cone data at a simple vertex.

    generators are the primitive integer edge directions; index is the
    absolute determinant of the generator matrix (1 iff the cone is smooth).
    """

    __slots__ = ("generators", "index")

    def __init__(self, generators, index):
        self.generators = tuple(tuple(int(c) for c in g) for g in generators)
        self.index = int(index)

    def __repr__(self):
        return "VertexCone(generators=%r, index=%d)" % (self.generators, self.index)


class Simplex:
    """Full-dimensional simplex; normalized_volume is |det| / n!."""

    __slots__ = ("vertices",)

    def __init__(self, vertices):
        self.vertices = tuple(
            v if isinstance(v, RationalVector) else RationalVector(v) for v in vertices
        )

    @property
    def dim(self):
        return len(self.vertices) - 1

    def edge_matrix_det(self) -> Fraction:
        v0 = self.vertices[0].coords
        rows = [_sub(v.coords, v0) for v in self.vertices[1:]]
        return _det(rows)

    def normalized_volume(self) -> Fraction:
        n = self.dim
        if n == 0:
            return Fraction(1)
        fact = 1
        for k in range(2, n + 1):
            fact *= k
        return abs(self.edge_matrix_det()) / fact

    def __repr__(self):
        return "Simplex(%r)" % (self.vertices,)


class LatticePolytope:
    """Full-dimensional rational polytope with exact facet data.

    Construct through :func:`build_polytope`; the constructor trusts its
    arguments.
    """

    def __init__(self, dim, vertices, facets, vertex_cones, nonsimple_vertices):
        self.dim = dim
        self.vertices = tuple(vertices)
        self.facets = tuple(facets)
        self.vertex_cones = tuple(vertex_cones)
        self.nonsimple_vertices = tuple(nonsimple_vertices)
        self.simple = not self.nonsimple_vertices
        self._volume = None
        self._triangulation = None
        self._facet_charts = {}

    # -- measures ---------------------------------------------------------

    def volume(self) -> Fraction:
        if self._volume is None:
            self._volume = sum(
                (s.normalized_volume() for s in self.triangulate()), Fraction(0)
            )
        return self._volume

    def facet_measure(self, facet_index) -> Fraction:
        """Lattice measure of a facet.

        Equals the Lebesgue measure of the facet pulled back through an
        integer basis of the facet's own lattice, so it is invariant under
        GL(n, Z) and translation.
        """
        if self.dim == 1:
            return Fraction(1)
        sub, _, _ = self.facet_polytope(facet_index)
        return sub.volume()

    def boundary_measure(self) -> Fraction:
        return sum(
            (self.facet_measure(i) for i in range(len(self.facets))), Fraction(0)
        )

    def barycenter(self) -> RationalVector:
        total = self.volume()
        acc = [Fraction(0)] * self.dim
        for s in self.triangulate():
            w = s.normalized_volume() / (self.dim + 1)
            for v in s.vertices:
                for i, c in enumerate(v.coords):
                    acc[i] += w * c
        return RationalVector(c / total for c in acc)

    # -- membership and clipping ------------------------------------------

    def contains(self, point, strict=False) -> bool:
        p = _coords(point)
        for f in self.facets:
            val = _dot(p, f.normal)
            if val > f.offset or (strict and val == f.offset):
                return False
        return True

    def clip(self, normal, offset):
        """Intersect with the halfspace <x, normal> <= offset.

        Returns EMPTY when the intersection is empty or not full-dimensional.
        """
        normal = _coords(normal)
        offset = _frac(offset)
        if all(c == 0 for c in normal):
            return self if offset >= 0 else EMPTY
        vals = [_dot(v.coords, normal) for v in self.vertices]
        if all(val <= offset for val in vals):
            if all(val < offset for val in vals):
                return self
            # the halfspace is tight somewhere; result is this polytope
            # unless it is entirely contained in the hyperplane
            if all(val == offset for val in vals):
                return EMPTY
            return self
        if all(val >= offset for val in vals):
            return EMPTY
        constraints = [(f.normal, f.offset) for f in self.facets]
        constraints.append((normal, offset))
        pts = _enumerate_vertices(constraints, self.dim)
        keep = []
        for p in pts:
            if p not in keep:
                keep.append(p)
        if len(keep) <= self.dim:
            return EMPTY
        try:
            return build_polytope(keep)
        except DegenerateHull:
            return EMPTY

    # -- structure ---------------------------------------------------------

    def triangulate(self):
        if self._triangulation is None:
            self._triangulation = _triangulate(self)
        return list(self._triangulation)

    def facet_polytope(self, facet_index):
        """Facet as an (n-1)-polytope in exact lattice chart coordinates.

        Returns (sub_polytope, origin, basis) where points of the facet are
        origin + basis @ y.  The chart maps the facet lattice onto Z^{n-1},
        so sub-polytope volume equals the facet's lattice measure.
        """
        if facet_index not in self._facet_charts:
            f = self.facets[facet_index]
            basis = _kernel_basis_int(f.normal)
            origin = self.vertices[f.vertex_indices[0]]
            ys = []
            for vi in f.vertex_indices:
                diff = _sub(self.vertices[vi].coords, origin.coords)
                ys.append(_chart_coords(diff, basis))
            sub = build_polytope(ys)
            self._facet_charts[facet_index] = (sub, origin, basis)
        return self._facet_charts[facet_index]

    def lattice_points(self, scale=1):
        """Integer points of scale * P (scale a positive integer)."""
        scale = int(scale)
        los, his = [], []
        for i in range(self.dim):
            vals = [scale * v.coords[i] for v in self.vertices]
            lo, hi = min(vals), max(vals)
            los.append(-int(-lo // 1))
            his.append(int(hi // 1))
        out = []
        for p in product(*(range(lo, hi + 1) for lo, hi in zip(los, his))):
            ok = True
            for f in self.facets:
                if _dot(p, f.normal) > scale * f.offset:
                    ok = False
                    break
            if ok:
                out.append(p)
        return out

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(
            {
                "dim": self.dim,
                "vertices": [[str(c) for c in v.coords] for v in self.vertices],
            }
        )

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        verts = [[Fraction(c) for c in row] for row in data["vertices"]]
        P = build_polytope(verts)
        if data.get("dim", P.dim) != P.dim:
            raise ValueError("dim field does not match vertex length")
        return P

    def __repr__(self):
        return "LatticePolytope(dim=%d, vertices=%d, facets=%d)" % (
            self.dim,
            len(self.vertices),
            len(self.facets),
        )


def _chart_coords(diff, basis):
    """Solve basis^T y = diff exactly (basis columns independent)."""
    n = len(diff)
    k = len(basis)
    # pick k independent rows of the n x k matrix whose columns are basis
    mat = [[basis[j][i] for j in range(k)] for i in range(n)]
    for rows in combinations(range(n), k):
        sq = [mat[i] for i in rows]
        if _det(sq) != 0:
            y = _solve(sq, [diff[i] for i in rows])
            # consistency is guaranteed for points in the facet hyperplane
            return y
    raise ValueError("basis is rank deficient")


def _enumerate_vertices(constraints, n):
    """All basic feasible points of an exact H-representation."""
    pts = []
    for rows in combinations(range(len(constraints)), n):
        A = [constraints[i][0] for i in rows]
        b = [constraints[i][1] for i in rows]
        p = _solve(A, b)
        if p is None:
            continue
        feasible = True
        for (a, c) in constraints:
            if _dot(p, a) > c:
                feasible = False
                break
        if feasible:
            pts.append(p)
    return pts


def build_polytope(vertices) -> LatticePolytope:
    """Convex hull with exact facet and vertex-cone data.

    Accepts any iterable of rational points (duplicates and interior points
    allowed).  Raises DegenerateHull when the points do not span.  Vertices
    of non-simple polytopes are kept, with the affected cones set to None
    and listed in nonsimple_vertices.
    """
    pts = []
    for v in vertices:
        c = _coords(v)
        if c not in pts:
            pts.append(c)
    if not pts:
        raise DegenerateHull("no points")
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise ValueError("mixed coordinate lengths")
    diffs = [_sub(p, pts[0]) for p in pts[1:]]
    if _rank(diffs) < n:
        raise DegenerateHull("points span a %d-dim affine space in R^%d" % (_rank(diffs), n))

    if n == 1:
        return _build_segment(pts)

    hull_facets = _hull_facets(pts, n)

    # recompute incidence from scratch against the merged facet list
    facet_pts = []
    for (u, b) in hull_facets:
        on = [i for i, p in enumerate(pts) if _dot(p, u) == b]
        facet_pts.append(on)

    vertex_ids = []
    for i, p in enumerate(pts):
        active = [k for k, on in enumerate(facet_pts) if i in on]
        if len(active) < n:
            continue
        if _rank([hull_facets[k][0] for k in active]) == n:
            vertex_ids.append(i)

    vertex_ids.sort(key=lambda i: pts[i])
    remap = {old: new for new, old in enumerate(vertex_ids)}
    verts = [RationalVector(pts[i]) for i in vertex_ids]

    order = sorted(range(len(hull_facets)), key=lambda k: (hull_facets[k][0], hull_facets[k][1]))
    facets = []
    for k in order:
        u, b = hull_facets[k]
        idx = tuple(sorted(remap[i] for i in facet_pts[k] if i in remap))
        facets.append(Facet(u, b, idx))

    cones, nonsimple = _vertex_cones(verts, facets, n)
    return LatticePolytope(n, verts, facets, cones, nonsimple)


def _build_segment(pts):
    xs = [p[0] for p in pts]
    lo, hi = min(xs), max(xs)
    verts = [RationalVector((lo,)), RationalVector((hi,))]
    facets = [Facet((-1,), -lo, (0,)), Facet((1,), hi, (1,))]
    cones = [VertexCone(((1,),), 1), VertexCone(((-1,),), 1)]
    return LatticePolytope(1, verts, facets, cones, ())


def _hull_facets(pts, n):
    """Beneath-beyond with exact strict visibility; returns merged (u, b)."""
    base = [0]
    for i in range(1, len(pts)):
        trial = base + [i]
        if _rank([_sub(pts[j], pts[0]) for j in trial[1:]]) == len(trial) - 1:
            base.append(i)
        if len(base) == n + 1:
            break
    interior = tuple(
        sum(pts[j][i] for j in base) / Fraction(n + 1) for i in range(n)
    )

    facets = []  # records (frozenset verts, u, b), simplicial while building
    for drop in range(n + 1):
        group = [base[j] for j in range(n + 1) if j != drop]
        u, b = _oriented_plane([pts[i] for i in group], interior)
        facets.append((frozenset(group), u, b))

    for i in range(len(pts)):
        if i in base:
            continue
        p = pts[i]
        visible = [F for F in facets if _dot(p, F[1]) > F[2]]
        if not visible:
            continue
        invisible = [F for F in facets if _dot(p, F[1]) <= F[2]]
        ridge_count = {}
        for (vs, _, _) in visible:
            for r in combinations(sorted(vs), n - 1):
                ridge_count[r] = ridge_count.get(r, 0) + 1
        new = []
        for r, cnt in ridge_count.items():
            if cnt != 1:
                continue
            group = list(r) + [i]
            u, b = _oriented_plane([pts[j] for j in group], interior)
            new.append((frozenset(group), u, b))
        facets = invisible + new

    merged = {}
    for (_, u, b) in facets:
        merged[(u, b)] = True
    return list(merged.keys())


def _oriented_plane(points, interior):
    """Hyperplane through n affinely independent points, outward oriented."""
    rows = [_sub(p, points[0]) for p in points[1:]]
    normal = _cross(rows)
    u = _primitive(normal)
    b = _dot(points[0], u)
    side = _dot(interior, u)
    if side > b:
        u = tuple(-c for c in u)
        b = -b
    elif side == b:
        raise DegenerateHull("reference point lies on a candidate facet")
    return u, b


def _vertex_cones(verts, facets, n):
    cones = []
    nonsimple = []
    for vi in range(len(verts)):
        active = [f for f in facets if vi in f.vertex_indices]
        if len(active) != n:
            cones.append(None)
            nonsimple.append(vi)
            continue
        gens = []
        ok = True
        for drop in range(n):
            rows = [active[k].normal for k in range(n) if k != drop]
            d = _cross(rows)
            if all(c == 0 for c in d):
                ok = False
                break
            if _dot(d, active[drop].normal) > 0:
                d = tuple(-c for c in d)
            gens.append(_primitive(d))
        if not ok:
            cones.append(None)
            nonsimple.append(vi)
            continue
        idx = abs(_det(gens))
        cones.append(VertexCone(gens, idx))
    return cones, tuple(nonsimple)


def _triangulate(P):
    n = P.dim
    if n == 1:
        return [Simplex(P.vertices)]
    if len(P.vertices) == n + 1:
        return [Simplex(P.vertices)]
    apex = P.vertices[0]
    out = []
    for i, f in enumerate(P.facets):
        if _dot(apex.coords, f.normal) == f.offset:
            continue
        sub, origin, basis = P.facet_polytope(i)
        for s in sub.triangulate():
            lifted = [apex]
            for y in s.vertices:
                pt = list(origin.coords)
                for j, yj in enumerate(y.coords):
                    for c in range(n):
                        pt[c] += yj * basis[j][c]
                lifted.append(RationalVector(pt))
            out.append(Simplex(lifted))
    return out


# -- module-level operation aliases ----------------------------------------


def volume(P) -> Fraction:
    return P.volume()


def facet_measure(P, facet_index) -> Fraction:
    return P.facet_measure(facet_index)


def clip(P, halfspace):
    """halfspace = (normal, offset) meaning <x, normal> <= offset."""
    normal, offset = halfspace
    return P.clip(normal, offset)


def triangulate(P):
    return P.triangulate()


def polytope_from_json(text) -> LatticePolytope:
    return LatticePolytope.from_json(text)
