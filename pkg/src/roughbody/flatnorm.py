"""Flat norms of simplicial chains via linear programming.

The flat norm is computed relative to the ambient complex: the fill S
ranges over real coefficients on (k+1)-simplices and the LP minimizes
mass(T - boundary(S)) + mass(S) after sign-splitting the absolute values.
The value is the simplicial flat norm; it satisfies F <= M, F(bd S) <= M(S)
and decreases under ambient refinement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chains import Chain
from .errors import AmbientTooSmall, LPNumericalFailure
from .mesh import Complex
from .simplex_lp import solve_lp

ROUND_TOL = 1e-8


@dataclass
class FlatDecomposition:
    """Optimal T = R + boundary(S) with value = mass(R) + mass(S)."""

    value: float
    R: Chain
    S: Chain | None
    iterations: int


def flat_norm(T: Chain, ambient: Complex | None = None) -> FlatDecomposition:
    """Ambient-relative flat norm of T with an optimal decomposition."""
    cx = T.complex
    if ambient is not None and ambient is not cx:
        raise AmbientTooSmall("chain does not live on the ambient complex")
    k = T.degree
    if k >= cx.top_degree:
        return FlatDecomposition(T.mass(), T, None, 0)

    m = cx.n_simplices(k)
    p = cx.n_simplices(k + 1)
    t = np.zeros(m)
    for i, a in T.coeffs.items():
        t[i] = a
    B = np.zeros((m, p))
    for j, row in enumerate(cx.incidence[k + 1]):
        for fidx, sgn in row:
            B[fidx, j] += sgn

    vol_k = cx.volumes(k)
    vol_k1 = cx.volumes(k + 1)
    A = np.hstack([np.eye(m), -np.eye(m), B, -B])
    c = np.concatenate([vol_k, vol_k, vol_k1, vol_k1])
    basis = [i if t[i] >= 0 else m + i for i in range(m)]
    res = solve_lp(c, A, t, basis=basis)

    s = res.x[2 * m : 2 * m + p] - res.x[2 * m + p :]
    scale = max(1.0, float(np.abs(t).max(initial=0.0)))
    S = Chain(cx, k + 1, {j: s[j] for j in range(p) if abs(s[j]) > ROUND_TOL * 1e-4 * scale})
    R = T - S.boundary()
    value = R.mass() + S.mass()
    if abs(value - res.value) > ROUND_TOL * (1.0 + abs(value)):
        raise LPNumericalFailure(
            f"decomposition value {value} disagrees with LP optimum {res.value}"
        )
    return FlatDecomposition(value, R, S, res.iterations)


def flat_distance(A: Chain, B: Chain, ambient: Complex | None = None) -> float:
    """Flat distance F(A - B) on the common ambient complex."""
    return flat_norm(A - B, ambient).value


@dataclass
class CauchyReport:
    """Successive-distance table for a sequence of chains."""

    distances: list[float]
    ratios: list[float]
    eps: float
    ratio_bound: float
    method: str
    passed: bool


def certify_cauchy(
    chains: list[Chain],
    ambient: Complex | None = None,
    eps: float = 1e-6,
    ratio_bound: float = 1.0,
    method: str = "flat",
) -> CauchyReport:
    """Certify that successive flat distances shrink geometrically below eps.

    method "flat" solves the LP for each difference; method "mass" uses
    mass(T_{i+1} - T_i), a rigorous upper bound for the flat distance
    (take S = 0), which certifies the Cauchy property without an LP solve.
    """
    if len(chains) < 2:
        raise ValueError("need at least two chains")
    for ch in chains[1:]:
        ch._check_compatible(chains[0])
    dist = []
    for a, b in zip(chains, chains[1:]):
        if method == "mass":
            dist.append((b - a).mass())
        else:
            dist.append(flat_distance(b, a, ambient))
    ratios = []
    passed = dist[-1] <= eps
    for d0, d1 in zip(dist, dist[1:]):
        if d0 > eps:
            r = d1 / d0
            ratios.append(r)
            if not r < ratio_bound:
                passed = False
        else:
            ratios.append(0.0 if d1 <= eps else np.inf)
            if d1 > eps:
                passed = False
    return CauchyReport(dist, ratios, eps, ratio_bound, method, passed)


def cochain_flat_norm(X) -> float:
    """Flat norm of a cochain: max pointwise comass of its form and coboundary form.

    Whitney realizations are affine per simplex, so the supremum of the
    (Euclidean, since n <= 3) pointwise comass is attained at vertices and
    the value is exact.
    """
    from .forms import whitney_realize

    w = whitney_realize(X)
    return max(w.vertex_comass_max(), w.d().vertex_comass_max())
