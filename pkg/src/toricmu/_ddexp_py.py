"""Confluent divided differences of exp, pure Python reference kernel.

ddexp(nodes) returns exp[b_0, ..., b_{m-1}], the divided difference of the
exponential over the given nodes, repeated nodes allowed.  The classical
recursive formula divides by node gaps and is catastrophically unstable for
clustered nodes, so this kernel instead exponentiates the Opitz bidiagonal
matrix (diagonal = nodes, superdiagonal = 1), whose exponential carries every
divided difference exp[b_i..b_j] in entry (i, j).

Stability comes from three ingredients: nodes are centered (factor exp(c)
pulled out), scaled by 2^-K until the spread is at most 1/2, and the seed
table is filled entry by entry from the complete-homogeneous-symmetric series

    exp[x_0..x_r] = sum_k h_k(x_0..x_r) / (r + k)!

which converges fast for small nodes.  The K squarings that undo the scaling
only ever add and multiply nonnegative numbers, so no cancellation occurs at
any point.
"""

from math import exp, factorial, frexp


def _safe_exp(x):
    if x > 709.0:
        return float("inf")
    return exp(x)


def _dd_series(x):
    """Divided difference of exp over small nodes (|x_i| <= 1/2)."""
    r = len(x) - 1
    invf = 1.0 / factorial(r)
    total = invf
    old = [1.0] * (r + 1)
    small = 0
    for k in range(1, 60):
        invf /= r + k
        new = [0.0] * (r + 1)
        new[0] = x[0] * old[0]
        for t in range(1, r + 1):
            new[t] = new[t - 1] + x[t] * old[t]
        term = new[r] * invf
        total += term
        old = new
        # sign-symmetric nodes zero out alternate terms, so one small term
        # is not yet convergence
        if abs(term) <= 1e-19 * abs(total):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
    return total


def _square_upper(B):
    m = len(B)
    C = [[0.0] * m for _ in range(m)]
    for i in range(m):
        Bi = B[i]
        Ci = C[i]
        for j in range(i, m):
            acc = 0.0
            for k in range(i, j + 1):
                acc += Bi[k] * B[k][j]
            Ci[j] = acc
    return C


def ddexp(nodes):
    """Divided difference exp[nodes[0], ..., nodes[-1]] (order insensitive)."""
    m = len(nodes)
    if m == 0:
        raise ValueError("need at least one node")
    if m == 1:
        return _safe_exp(nodes[0])
    c = sum(nodes) / m
    h = [b - c for b in nodes]
    spread = max(abs(v) for v in h)
    K = 0
    if spread > 0.5:
        # smallest K with spread / 2^K <= 1/2
        K = max(0, frexp(spread / 0.5)[1])
        while spread * (0.5 ** K) > 0.5:
            K += 1
    eps = 0.5 ** K
    s = [v * eps for v in h]

    B = [[0.0] * m for _ in range(m)]
    for i in range(m):
        B[i][i] = exp(s[i])
    for i in range(m):
        for j in range(i + 1, m):
            B[i][j] = (eps ** (j - i)) * _dd_series(s[i : j + 1])
    for _ in range(K):
        B = _square_upper(B)
    return _safe_exp(c) * B[0][m - 1]


BACKEND = "python"
