"""Slow, independent reference implementations used only by the tests.

Written with plain loops over Python lists so they share no code path with
the vectorised library routines they check.
"""

from __future__ import annotations

import itertools
from decimal import Decimal, getcontext

getcontext().prec = 40


def rows(table):
    return [list(map(int, r)) for r in table]


def disagreement(table) -> set:
    rs = rows(table)
    return {x for x in range(len(rs[0])) if len({r[x] for r in rs}) > 1}


def max_pair_disagreement(table, sample) -> int:
    rs = rows(table)
    best = 0
    for f, g in itertools.combinations(rs, 2):
        best = max(best, sum(1 for x in sample if f[x] != g[x]))
    return best


def growth(table, k) -> int:
    rs = rows(table)
    m = len(rs[0])
    if k == 0:
        return 1
    return max(len({tuple(r[i] for i in c) for r in rs}) for c in itertools.combinations(range(m), k))


def vc(table) -> int:
    rs = rows(table)
    m = len(rs[0])
    d = 0
    for k in range(1, m + 1):
        if any(len({tuple(r[i] for i in c) for r in rs}) == 2**k for c in itertools.combinations(range(m), k)):
            d = k
        else:
            break
    return d


def binary_risk(pred, px, eta) -> float:
    total = 0.0
    for v, w, e in zip(pred, px, eta):
        total += w * (1 - e if v == 1 else e)
    return total


def chow_risk(pred, px, eta, p) -> float:
    total = 0.0
    for v, w, e in zip(pred, px, eta):
        if v == -1:
            total += w * (0.5 - p)
        else:
            total += w * (1 - e if v == 1 else e)
    return total


def empirical_chow(pred, pairs, p) -> float:
    loss = 0.0
    for x, y in pairs:
        v = pred[x]
        loss += (0.5 - p) if v == -1 else float(v != y)
    return loss / len(pairs)


def _dlog(x: Decimal) -> Decimal:
    return max(x.ln(), Decimal(1))


def alpha_sq(n, delta, d) -> Decimal:
    n, delta, d = Decimal(n), Decimal(str(delta)), Decimal(d)
    e = Decimal(1).exp()
    return 4 / n * (3 * d * _dlog(e * max(2 * n, d) / d) + _dlog(Decimal(56) / delta))


def beta_sq(n, delta, d) -> Decimal:
    n, delta, d = Decimal(n), Decimal(str(delta)), Decimal(d)
    e = Decimal(1).exp()
    return 4 / n * (2 * d * _dlog(e * max(2 * n, d) / d) + _dlog(Decimal(24) / delta))


def gamma_sq(n, delta, d) -> Decimal:
    n, delta, d = Decimal(n), Decimal(str(delta)), Decimal(d)
    e = Decimal(1).exp()
    return 4 / n * (3 * d * _dlog(e * max(2 * n, d) / d) + _dlog(Decimal(32) / delta))


def schedule_J(eps, delta, p, d) -> int:
    k = 0
    while True:
        k += 1
        if 148 * alpha_sq(2 ** (k - 1), Decimal(str(delta)) / (k + 1) ** 2, d) / Decimal(str(p)) <= Decimal(str(eps)):
            return k


def theta(table, px, eps) -> float:
    """Double loop over centres g and radii eps0 >= eps, enumerating each ball."""
    rs = rows(table)
    m = len(px)
    dist = [[sum(px[x] for x in range(m) if f[x] != g[x]) for f in rs] for g in rs]
    best = 1.0
    for gi in range(len(rs)):
        radii = {eps} | {r for r in dist[gi] if r >= eps}
        for r0 in radii:
            ball = [f for fi, f in enumerate(rs) if dist[gi][fi] <= r0]
            mass = sum(px[x] for x in range(m) if len({f[x] for f in ball}) > 1)
            best = max(best, mass / r0)
    return best


def star(table) -> int:
    """Largest k with centre f0, points x_1..x_k and members f_i differing from f0 on {x_1..x_k} only at x_i."""
    rs = rows(table)
    m = len(rs[0])
    best = 0
    for f0 in rs:
        for k in range(m, best, -1):
            found = False
            for pts in itertools.combinations(range(m), k):
                if all(
                    any([f[y] != f0[y] for y in pts] == [y == x for y in pts] for f in rs) for x in pts
                ):
                    found = True
                    break
            if found:
                best = k
                break
    return best


def theta_balls(table, px, eps) -> float:
    """Same double loop as ``theta``, enumerating balls with array operations."""
    import numpy as np

    t = np.asarray(table)
    px = np.asarray(px, dtype=float)
    best = 1.0
    for g in range(len(t)):
        dist = np.array([px[t[f] != t[g]].sum() for f in range(len(t))])
        for r0 in {eps} | {float(r) for r in dist if r >= eps}:
            ball = t[dist <= r0]
            mass = px[ball.min(axis=0) != ball.max(axis=0)].sum()
            best = max(best, mass / r0)
    return best
