"""Flat cochains, lowest-order Whitney forms and lazily evaluated currents.

A cochain stores one coefficient per k-simplex.  Its Whitney realization
is the piecewise-polynomial form field with those simplex integrals; the
realization is tangentially continuous, so weak exterior derivatives have
no face terms and all pairings reduce to exact polynomial integrals.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import factorial

import numpy as np

from . import multivec
from .chains import Chain
from .errors import (
    ComplexMismatch,
    DegreeMismatch,
    DegreeOverflow,
    TopDegree,
)
from .mesh import Complex, barycentric_refine
from .poly import Poly, integrate_over_simplex


class Cochain:
    """Sparse k-cochain: simplex index -> coefficient (Whitney duality)."""

    __slots__ = ("complex", "degree", "coeffs")

    def __init__(self, cx: Complex, degree: int, coeffs: dict[int, float] | None = None):
        if degree < 0 or degree > cx.top_degree:
            raise DegreeMismatch(f"degree {degree} not carried by the complex")
        self.complex = cx
        self.degree = degree
        self.coeffs = {int(i): float(a) for i, a in (coeffs or {}).items() if a != 0.0}

    def __add__(self, other: "Cochain") -> "Cochain":
        if self.complex is not other.complex or self.degree != other.degree:
            raise ComplexMismatch("cochain mismatch")
        out = dict(self.coeffs)
        for i, a in other.coeffs.items():
            v = out.get(i, 0.0) + a
            if v == 0.0:
                out.pop(i, None)
            else:
                out[i] = v
        return Cochain(self.complex, self.degree, out)

    def scale(self, a: float) -> "Cochain":
        return Cochain(self.complex, self.degree, {i: a * v for i, v in self.coeffs.items()})

    def __neg__(self) -> "Cochain":
        return self.scale(-1.0)

    def __call__(self, chain: Chain) -> float:
        return evaluate(self, chain)


def evaluate(X: Cochain, T: Chain) -> float:
    """Simplicial pairing X(T) = sum over simplices of coeff * coefficient."""
    if X.complex is not T.complex:
        raise ComplexMismatch("cochain and chain live on different complexes")
    if X.degree != T.degree:
        raise DegreeMismatch("cochain and chain degrees differ")
    return float(sum(a * X.coeffs.get(i, 0.0) for i, a in T.coeffs.items()))


def coboundary(X: Cochain) -> Cochain:
    """(dX)(A) = X(boundary A); the adjoint of the boundary operator."""
    cx = X.complex
    if X.degree >= cx.top_degree:
        raise TopDegree("coboundary exceeds the top degree of the mesh")
    out: dict[int, float] = {}
    for idx, row in enumerate(cx.incidence[X.degree + 1]):
        acc = 0.0
        for fidx, sgn in row:
            c = X.coeffs.get(fidx)
            if c:
                acc += sgn * c
        if acc != 0.0:
            out[idx] = acc
    return Cochain(cx, X.degree + 1, out)


class FormField:
    """Per-top-simplex polynomial k-form (degree <= 2 coefficients)."""

    __slots__ = ("complex", "degree", "comps")

    def __init__(self, cx: Complex, degree: int, comps: dict[int, list[Poly]] | None = None):
        self.complex = cx
        self.degree = degree
        self.comps = comps or {}

    def _dim(self) -> int:
        return multivec.dim(self.complex.dim, self.degree)

    def value(self, top_idx: int, x: np.ndarray) -> np.ndarray:
        polys = self.comps.get(top_idx)
        if polys is None:
            return np.zeros(self._dim())
        return np.array([p(x) for p in polys])

    def __add__(self, other: "FormField") -> "FormField":
        if self.complex is not other.complex or self.degree != other.degree:
            raise ComplexMismatch("form fields are incompatible")
        out = {i: list(p) for i, p in self.comps.items()}
        for i, polys in other.comps.items():
            if i in out:
                out[i] = [a + b for a, b in zip(out[i], polys)]
            else:
                out[i] = list(polys)
        return FormField(self.complex, self.degree, out)

    def scale(self, a: float) -> "FormField":
        return FormField(
            self.complex, self.degree, {i: [p.scale(a) for p in polys] for i, polys in self.comps.items()}
        )

    def __sub__(self, other: "FormField") -> "FormField":
        return self + other.scale(-1.0)

    def d(self) -> "FormField":
        """Piecewise exterior derivative (no face terms for Whitney-realized fields)."""
        cx = self.complex
        n = cx.dim
        k = self.degree
        out_tuples = multivec.basis_tuples(n, k + 1)
        out_index = multivec.basis_index(n, k + 1)
        out: dict[int, list[Poly]] = {}
        for top, polys in self.comps.items():
            res = [Poly.zero(n) for _ in out_tuples]
            for i, I in enumerate(multivec.basis_tuples(n, k)):
                for dax in range(n):
                    sign, merged = multivec.merge_sign((dax,), I)
                    if sign == 0:
                        continue
                    dp = polys[i].diff(dax)
                    if dp.is_zero():
                        continue
                    res[out_index[merged]] = res[out_index[merged]] + dp.scale(sign)
            out[top] = res
        return FormField(cx, k + 1, out)

    def wedge(self, other: "FormField") -> "FormField":
        if self.complex is not other.complex:
            raise ComplexMismatch("form fields on different complexes")
        n = self.complex.dim
        if self.degree + other.degree > n:
            raise DegreeOverflow("wedge exceeds ambient dimension")
        table = multivec.wedge_table(n, self.degree, other.degree)
        out: dict[int, list[Poly]] = {}
        for top in set(self.comps) & set(other.comps):
            res = [Poly.zero(n) for _ in multivec.basis_tuples(n, self.degree + other.degree)]
            a, b = self.comps[top], other.comps[top]
            for i, j, o, s in table:
                prod = a[i] * b[j]
                if not prod.is_zero():
                    res[o] = res[o] + prod.scale(s)
            out[top] = res
        return FormField(self.complex, self.degree + other.degree, out)

    def vertex_comass_max(self) -> float:
        """Max Euclidean component norm over supported simplices' vertices."""
        cx = self.complex
        best = 0.0
        for top, polys in self.comps.items():
            for x in cx.coords(cx.top_degree, top):
                v = np.array([p(x) for p in polys])
                best = max(best, float(np.linalg.norm(v)))
        return best

    def pairing_with_chain(self, T: Chain) -> float:
        """Exact integral of the form over the chain (degree must match)."""
        if T.complex is not self.complex:
            raise ComplexMismatch("chain on a different complex")
        if T.degree != self.degree:
            raise DegreeMismatch("form and chain degrees differ")
        cx = self.complex
        total = 0.0
        for idx, a in T.coeffs.items():
            top = cx.containing_top(T.degree, idx)
            polys = self.comps.get(top)
            if polys is None:
                continue
            xi = cx.unit_tangent(T.degree, idx).components
            scalar = Poly.zero(cx.dim)
            for comp, p in zip(xi, polys):
                if comp != 0.0 and not p.is_zero():
                    scalar = scalar + p.scale(comp)
            if scalar.is_zero():
                continue
            total += a * integrate_over_simplex(scalar, cx.coords(T.degree, idx), cx.volume(T.degree, idx))
        return total


def constant_form(cx: Complex, degree: int, comps) -> FormField:
    """Form field with the same constant covector on every top simplex."""
    comps = np.asarray(comps, dtype=float)
    n = cx.dim
    polys = [Poly.constant(n, c) for c in comps]
    return FormField(cx, degree, {i: list(polys) for i in range(cx.n_simplices(cx.top_degree))})


def _wedge_rows(rows: np.ndarray, n: int) -> np.ndarray:
    """Components of g_1 ^ ... ^ g_k for covector rows g_i."""
    k = rows.shape[0]
    comps = np.empty(multivec.dim(n, k))
    for i, axes in enumerate(multivec.basis_tuples(n, k)):
        comps[i] = np.linalg.det(rows[:, list(axes)]) if k else 1.0
    return comps


def whitney_realize(X: Cochain) -> FormField:
    """Lowest-order Whitney form with the cochain's simplex integrals."""
    cx = X.complex
    n = cx.dim
    k = X.degree
    K = cx.top_degree
    comps: dict[int, list[Poly]] = {}
    if not X.coeffs:
        return FormField(cx, k, comps)
    ncomp = multivec.dim(n, k)
    for top, verts in enumerate(cx.simplices[K]):
        G = cx.barygrads(top)  # row i: (grad lambda_i, const)
        res = None
        pos_of = {v: i for i, v in enumerate(verts)}
        for sub in combinations(range(K + 1), k + 1):
            key = frozenset(verts[i] for i in sub)
            fidx = cx.index[k].get(key)
            if fidx is None:
                continue
            coeff = X.coeffs.get(fidx)
            if not coeff:
                continue
            stored = cx.simplices[k][fidx]
            rows = [pos_of[v] for v in stored]
            if res is None:
                res = [Poly.zero(n) for _ in range(ncomp)]
            fact = factorial(k) * coeff
            for i in range(k + 1):
                lam = Poly.affine(n, G[rows[i], :n], G[rows[i], n])
                others = rows[:i] + rows[i + 1 :]
                if k == 0:
                    wcomps = np.array([1.0])
                else:
                    wcomps = _wedge_rows(G[others, :n], n)
                sign = fact * (1.0 if i % 2 == 0 else -1.0)
                for c_idx, w in enumerate(wcomps):
                    if w != 0.0:
                        res[c_idx] = res[c_idx] + lam.scale(sign * w)
        if res is not None:
            comps[top] = res
    return FormField(cx, k, comps)


def wedge(X: Cochain, omega: FormField) -> FormField:
    """Realized wedge of a cochain with a form field; Leibniz rule holds piecewise."""
    return whitney_realize(X).wedge(omega)


@dataclass
class CurrentEntry:
    carrier_degree: int
    carrier_index: int
    density: list[Poly]  # one polynomial per Lambda_q component


class EvaluableCurrent:
    """Lazily represented current: polynomial q-vector densities on carrier simplices.

    Pairing with a form field integrates <omega(x), density(x)> over each
    carrier simplex with exact polynomial quadrature.
    """

    def __init__(self, cx: Complex, degree: int, entries: list[CurrentEntry] | None = None):
        self.complex = cx
        self.degree = degree
        self.entries = entries or []

    def __add__(self, other: "EvaluableCurrent") -> "EvaluableCurrent":
        if self.complex is not other.complex or self.degree != other.degree:
            raise ComplexMismatch("currents are incompatible")
        return EvaluableCurrent(self.complex, self.degree, self.entries + other.entries)

    def scale(self, a: float) -> "EvaluableCurrent":
        out = [
            CurrentEntry(e.carrier_degree, e.carrier_index, [p.scale(a) for p in e.density])
            for e in self.entries
        ]
        return EvaluableCurrent(self.complex, self.degree, out)

    def __sub__(self, other: "EvaluableCurrent") -> "EvaluableCurrent":
        return self + other.scale(-1.0)

    def evaluate(self, omega: FormField) -> float:
        if omega.complex is not self.complex:
            raise ComplexMismatch("form field on a different complex")
        if omega.degree != self.degree:
            raise DegreeMismatch("form degree does not match current degree")
        cx = self.complex
        total = 0.0
        for e in self.entries:
            top = cx.containing_top(e.carrier_degree, e.carrier_index)
            polys = omega.comps.get(top)
            if polys is None:
                continue
            scalar = Poly.zero(cx.dim)
            for p_omega, p_rho in zip(polys, e.density):
                if not p_omega.is_zero() and not p_rho.is_zero():
                    scalar = scalar + p_omega * p_rho
            if scalar.is_zero():
                continue
            coords = cx.coords(e.carrier_degree, e.carrier_index)
            total += integrate_over_simplex(scalar, coords, cx.volume(e.carrier_degree, e.carrier_index))
        return total

    def evaluate_cochain(self, X: Cochain) -> float:
        return self.evaluate(whitney_realize(X))

    def boundary_evaluate(self, omega: FormField) -> float:
        """Pairing of the boundary current with omega, via (bd T)(w) = T(dw)."""
        return self.evaluate(omega.d())

    # -- mass ------------------------------------------------------------

    def mass(self, tol: float = 1e-9) -> float:
        """Total variation of the densities over the carriers.

        Exact when a density keeps a constant direction (it is then a
        plus/minus-affine scalar and the carrier is split along its zero
        set); otherwise adaptively refined with convexity brackets.
        """
        cx = self.complex
        total = 0.0
        for e in self.entries:
            coords = cx.coords(e.carrier_degree, e.carrier_index)
            vol = cx.volume(e.carrier_degree, e.carrier_index)
            vals = np.array([[p(x) for p in e.density] for x in coords])
            scale = np.abs(vals).max(initial=0.0)
            if scale == 0.0:
                continue
            svals = np.linalg.svd(vals, compute_uv=False)
            if svals.size == 1 or svals[1] <= 1e-12 * svals[0]:
                total += _integral_abs_affine(coords, vals @ _principal(vals), vol)
            else:
                total += _adaptive_norm_integral(coords, e.density, vol, tol)
        return total

    def materialize(self, tol: float = 1e-3, size_budget: int = 600):
        """Simplicial chain approximating a same-dimension current.

        Refines the ambient barycentrically until the density oscillation
        per piece is below tol (relative) or the refined mesh would exceed
        size_budget top simplices; returns (chain, refinement, error_bound)
        where error_bound dominates mass(self - chain), so callers can use
        a coarse materialization soundly.
        """
        cx = self.complex
        q = self.degree
        if any(e.carrier_degree != q for e in self.entries):
            raise DegreeMismatch("only same-dimension currents materialize to chains")
        osc0 = 0.0
        scale = 0.0
        for e in self.entries:
            coords = cx.coords(q, e.carrier_index)
            xi = cx.unit_tangent(q, e.carrier_index).components
            s_vals = np.array([np.dot([p(x) for p in e.density], xi) for x in coords])
            osc0 = max(osc0, float(s_vals.max() - s_vals.min()))
            scale = max(scale, float(np.abs(s_vals).max()))
        K = cx.top_degree
        shrink = K / (K + 1.0)
        growth = factorial(K + 1)
        size = cx.n_simplices(K)
        levels = 0
        osc = osc0
        while osc > tol * max(scale, 1e-300) and size * growth <= size_budget:
            osc *= shrink
            size *= growth
            levels += 1
        ref = barycentric_refine(cx, levels)
        coeffs: dict[int, float] = {}
        err = 0.0
        for e in self.entries:
            xi = cx.unit_tangent(q, e.carrier_index).components
            for piece in ref.carry[q][e.carrier_index]:
                pc = ref.complex.coords(q, piece)
                bary = pc.mean(axis=0)
                s = float(np.dot([p(bary) for p in e.density], xi))
                if s != 0.0:
                    coeffs[piece] = coeffs.get(piece, 0.0) + s
                s_verts = [float(np.dot([p(x) for p in e.density], xi)) for x in pc]
                dev = max(abs(v - s) for v in s_verts)
                err += dev * ref.complex.volume(q, piece)
        return Chain(ref.complex, q, coeffs), ref, err


def _principal(vals: np.ndarray) -> np.ndarray:
    _, _, Vt = np.linalg.svd(vals)
    return Vt[0]


def _integral_abs_affine(coords: np.ndarray, vertex_vals: np.ndarray, vol: float) -> float:
    """Exact integral of |affine scalar| by splitting at its zero set."""
    k = coords.shape[0] - 1
    vmax = np.abs(vertex_vals).max()
    if vmax == 0.0:
        return 0.0
    snap = 1e-14 * vmax
    vals = np.where(np.abs(vertex_vals) <= snap, 0.0, vertex_vals)
    if (vals >= 0).all() or (vals <= 0).all():
        return vol * float(np.abs(vals).mean()) if k >= 0 else 0.0
    pieces = _split_coords_by_values(coords, vals)
    total = 0.0
    for pc, pv in pieces:
        E = (pc[1:] - pc[0]).T
        gram = E.T @ E
        pvol = np.sqrt(max(np.linalg.det(gram), 0.0)) / factorial(k)
        total += pvol * float(np.abs(pv).mean())
    return total


def _split_coords_by_values(coords: np.ndarray, vals: np.ndarray):
    """Split a simplex along the zero set of an affine scalar (vertex values)."""
    from .mesh import _split_ids

    pts = [np.asarray(c, dtype=float) for c in coords]
    vlist = list(map(float, vals))

    def crossing(u: int, v: int) -> int:
        da, db = vlist[u], vlist[v]
        t = da / (da - db)
        pts.append(pts[u] + t * (pts[v] - pts[u]))
        vlist.append(0.0)
        return len(pts) - 1

    ids = tuple(range(len(pts)))
    plus, minus = _split_ids(ids, vlist, crossing)
    out = []
    for piece in plus + minus:
        pc = np.asarray([pts[i] for i in piece])
        pv = np.asarray([vlist[i] for i in piece])
        out.append((pc, pv))
    return out


def _adaptive_norm_integral(coords: np.ndarray, density: list[Poly], vol: float, tol: float) -> float:
    """Integral of |density(x)| (affine vector field) with convexity brackets."""
    k = coords.shape[0] - 1

    def norm_at(x):
        return float(np.linalg.norm([p(x) for p in density]))

    def recurse(c, v, depth):
        upper = v * np.mean([norm_at(x) for x in c])
        lower = v * norm_at(c.mean(axis=0))
        if upper - lower <= tol * max(upper, 1e-300) or depth > 24:
            return 0.5 * (upper + lower)
        # bisect the longest edge
        besti, bestj, bestd = 0, 1, -1.0
        for i in range(k + 1):
            for j in range(i + 1, k + 1):
                d = float(np.linalg.norm(c[i] - c[j]))
                if d > bestd:
                    besti, bestj, bestd = i, j, d
        mid = 0.5 * (c[besti] + c[bestj])
        c1 = c.copy()
        c1[besti] = mid
        c2 = c.copy()
        c2[bestj] = mid
        return recurse(c1, v / 2, depth + 1) + recurse(c2, v / 2, depth + 1)

    return recurse(np.asarray(coords, dtype=float), vol, 0)


def interior_product(X: Cochain, T: Chain) -> EvaluableCurrent:
    """The (r-k)-current X -| T with (X -| T)(w) = (X ^ w)(T)."""
    if X.complex is not T.complex:
        raise ComplexMismatch("cochain and chain live on different complexes")
    k, r = X.degree, T.degree
    if k > r:
        raise DegreeMismatch("contraction degree exceeds chain degree")
    cx = T.complex
    n = cx.dim
    W = whitney_realize(X)
    q = r - k
    entries = []
    for idx, a in T.coeffs.items():
        top = cx.containing_top(r, idx)
        polys = W.comps.get(top)
        if polys is None:
            continue
        xi = cx.unit_tangent(r, idx).components
        vec_index = multivec.basis_index(n, r)
        density = []
        for J in multivec.basis_tuples(n, q):
            acc = Poly.zero(n)
            for i, I in enumerate(multivec.basis_tuples(n, k)):
                sign, merged = multivec.merge_sign(I, J)
                if sign == 0 or polys[i].is_zero():
                    continue
                factor = sign * xi[vec_index[merged]] * a
                if factor != 0.0:
                    acc = acc + polys[i].scale(factor)
            density.append(acc)
        if any(not p.is_zero() for p in density):
            entries.append(CurrentEntry(r, idx, density))
    return EvaluableCurrent(cx, q, entries)


def chain_as_current(T: Chain) -> EvaluableCurrent:
    """The evaluable current of a simplicial chain (constant densities)."""
    cx = T.complex
    entries = []
    for idx, a in T.coeffs.items():
        xi = cx.unit_tangent(T.degree, idx).components
        density = [Poly.constant(cx.dim, a * c) for c in xi]
        entries.append(CurrentEntry(T.degree, idx, density))
    return EvaluableCurrent(cx, T.degree, entries)
