# cython: boundscheck=False, wraparound=False, cdivision=True
"""Confluent divided differences of exp, compiled kernel.

Same algorithm as _ddexp_py (Opitz bidiagonal scaling and squaring with a
series-filled seed table); see that module for the derivation and the
stability argument.  Node count is capped at 64, far above anything the
integrators produce.
"""

from libc.math cimport exp, fabs


DEF MAXN = 64


def ddexp(nodes):
    """Divided difference exp[nodes[0], ..., nodes[-1]]."""
    cdef double[MAXN] h
    cdef double[MAXN] s
    cdef double[MAXN * MAXN] B
    cdef double[MAXN * MAXN] C
    cdef double[MAXN] new
    cdef double[MAXN] old
    cdef int m = len(nodes)
    cdef int i, j, k, t, K, r, sq, small
    cdef double c, spread, eps, invf, total, term, acc, scale

    if m <= 0:
        raise ValueError("need at least one node")
    if m > MAXN:
        raise ValueError("too many nodes")
    if m == 1:
        return exp(<double> nodes[0])

    c = 0.0
    for i in range(m):
        h[i] = <double> nodes[i]
        c += h[i]
    c /= m
    spread = 0.0
    for i in range(m):
        h[i] -= c
        if fabs(h[i]) > spread:
            spread = fabs(h[i])

    K = 0
    while spread * (0.5 ** K) > 0.5 and K < 1100:
        K += 1
    eps = 0.5 ** K
    for i in range(m):
        s[i] = h[i] * eps

    for i in range(m * m):
        B[i] = 0.0
    for i in range(m):
        B[i * m + i] = exp(s[i])
    for i in range(m):
        scale = 1.0
        for j in range(i + 1, m):
            scale *= eps
            # series over nodes s[i..j]
            r = j - i
            invf = 1.0
            for k in range(2, r + 1):
                invf /= k
            total = invf
            for t in range(r + 1):
                old[t] = 1.0
            small = 0
            for k in range(1, 60):
                invf /= r + k
                new[0] = s[i] * old[0]
                for t in range(1, r + 1):
                    new[t] = new[t - 1] + s[i + t] * old[t]
                term = new[r] * invf
                total += term
                for t in range(r + 1):
                    old[t] = new[t]
                # sign-symmetric nodes zero out alternate terms, so one
                # small term is not yet convergence
                if fabs(term) <= 1e-19 * fabs(total):
                    small += 1
                    if small >= 2:
                        break
                else:
                    small = 0
            B[i * m + j] = scale * total

    for sq in range(K):
        for i in range(m):
            for j in range(i, m):
                acc = 0.0
                for k in range(i, j + 1):
                    acc += B[i * m + k] * B[k * m + j]
                C[i * m + j] = acc
        for i in range(m):
            for j in range(i, m):
                B[i * m + j] = C[i * m + j]

    return exp(c) * B[m - 1]


BACKEND = "cython"
