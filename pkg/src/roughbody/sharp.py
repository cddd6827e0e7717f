"""Sharp (piecewise-linear Lipschitz) scalar fields and chain products.

A sharp field is determined by vertex values; its gradient is constant on
each top simplex.  Multiplication with a chain is the interior product
with the induced 0-cochain, kept lazy as a density current and
materialized to a simplicial chain only when the flat-norm LP needs one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chains import Chain
from .errors import ComplexMismatch, DegreeZero
from .flatnorm import flat_norm
from .forms import Cochain, CurrentEntry, EvaluableCurrent, coboundary, interior_product
from .mesh import Complex
from .poly import Poly

BOUND_SLACK = 1e-6


class SharpField:
    """PL scalar field from vertex values, with per-simplex constant gradients."""

    __slots__ = ("complex", "values", "_gradients")

    def __init__(self, cx: Complex, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (cx.vertices.shape[0],):
            raise ValueError("need one value per vertex")
        self.complex = cx
        self.values = values
        self._gradients: dict[int, np.ndarray] = {}

    def gradient(self, top_idx: int) -> np.ndarray:
        g = self._gradients.get(top_idx)
        if g is None:
            G = self.complex.barygrads(top_idx)
            verts = self.complex.simplices[self.complex.top_degree][top_idx]
            g = G[:, : self.complex.dim].T @ self.values[list(verts)]
            self._gradients[top_idx] = g
        return g

    def gradient_norm(self, top_idx: int) -> float:
        return float(np.linalg.norm(self.gradient(top_idx)))

    def vertex_magnitude(self, v: int) -> float:
        return float(abs(self.values[v]))

    def as_poly(self, top_idx: int) -> Poly:
        """Affine polynomial agreeing with the field on one top simplex."""
        g = self.gradient(top_idx)
        verts = self.complex.simplices[self.complex.top_degree][top_idx]
        v0 = self.complex.vertices[verts[0]]
        return Poly.affine(self.complex.dim, g, self.values[verts[0]] - float(g @ v0))

    def as_cochain(self) -> Cochain:
        """The flat 0-cochain induced by the field (vertex values)."""
        return Cochain(self.complex, 0, {i: float(v) for i, v in enumerate(self.values)})

    def sup(self, region=None) -> float:
        cx = self.complex
        if region is None:
            return float(np.abs(self.values).max())
        best = 0.0
        for i in region:
            for v in cx.simplices[cx.top_degree][i]:
                best = max(best, abs(float(self.values[v])))
        return best

    def lipschitz_constant(self, region=None) -> float:
        cx = self.complex
        if region is None:
            region = range(cx.n_simplices(cx.top_degree))
        return max(self.gradient_norm(i) for i in region)

    def __add__(self, other: "SharpField") -> "SharpField":
        if self.complex is not other.complex:
            raise ComplexMismatch("fields on different complexes")
        return SharpField(self.complex, self.values + other.values)

    def scale(self, a: float) -> "SharpField":
        return SharpField(self.complex, a * self.values)


def multiply(phi: SharpField, A: Chain) -> EvaluableCurrent:
    """phi * A as a lazy current: carrier simplices of A with PL scalar density."""
    if phi.complex is not A.complex:
        raise ComplexMismatch("field and chain live on different complexes")
    cx = A.complex
    entries = []
    for idx, a in A.coeffs.items():
        top = cx.containing_top(A.degree, idx)
        p = phi.as_poly(top).scale(a)
        xi = cx.unit_tangent(A.degree, idx).components
        density = [p.scale(float(c)) if c != 0.0 else Poly.zero(cx.dim) for c in xi]
        entries.append(CurrentEntry(A.degree, idx, density))
    return EvaluableCurrent(cx, A.degree, entries)


def boundary_product(phi: SharpField, A: Chain) -> EvaluableCurrent:
    """boundary(phi A) written as phi*boundary(A) - d(alpha_phi) -| A."""
    if A.degree == 0:
        raise DegreeZero("the boundary product rule needs degree >= 1")
    first = multiply(phi, A.boundary())
    second = interior_product(coboundary(phi.as_cochain()), A)
    return first - second


@dataclass
class ProductBoundsReport:
    """Both sides of the normal-norm and flat-norm product bounds."""

    sup_phi: float
    lip_phi: float
    n_lhs: float
    n_rhs: float
    f_lhs: float
    f_rhs: float
    materialization_error: float
    n_ok: bool
    f_ok: bool

    @property
    def passed(self) -> bool:
        return self.n_ok and self.f_ok


def check_product_bounds(
    phi: SharpField,
    A: Chain,
    region=None,
    materialize_tol: float = 1e-3,
    materialize_budget: int = 150,
) -> ProductBoundsReport:
    """Verify N(phi A) <= (sup|phi| + r Lip) N(A) and the flat-norm analogue.

    The flat side is evaluated on a materialized subdivision; the check
    subtracts the documented materialization error bound so it can only
    fail on a genuine violation.
    """
    if A.degree == 0:
        raise DegreeZero("product norm bounds need degree >= 1")
    r = A.degree
    sup_phi = phi.sup(region)
    lip_phi = phi.lipschitz_constant(region)

    prod = multiply(phi, A)
    n_lhs = prod.mass() + boundary_product(phi, A).mass()
    n_rhs = (sup_phi + r * lip_phi) * A.normal_norm()
    n_ok = n_lhs <= n_rhs + BOUND_SLACK * (1.0 + n_rhs)

    mat, ref, err = prod.materialize(materialize_tol, size_budget=materialize_budget)
    f_lhs = flat_norm(mat).value
    f_rhs = (sup_phi + (r + 1) * lip_phi) * flat_norm(ref.carry_chain(A)).value
    f_ok = f_lhs - err <= f_rhs + BOUND_SLACK * (1.0 + f_rhs)
    return ProductBoundsReport(sup_phi, lip_phi, n_lhs, n_rhs, f_lhs, f_rhs, err, n_ok, f_ok)
