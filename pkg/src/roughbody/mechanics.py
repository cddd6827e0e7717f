"""Configurations, virtual velocities, Cauchy fluxes and stress reports.

A Cauchy flux is a black-box evaluator on (surface chain, velocity) pairs
with declared balance constants; trust is never assumed, the constants are
audited empirically.  The constructive correspondence with tuples of flat
(n-1)-cochains is implemented in both directions and round-trips exactly
on simplicial data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chains import Chain
from .errors import (
    ComplexMismatch,
    DeclaredConstantViolated,
    ExtensionDependence,
    OrientationReversal,
)
from .flatnorm import cochain_flat_norm
from .forms import Cochain, EvaluableCurrent, FormField, whitney_realize
from .maps import PAMap, is_embedding, pullback_form, pushforward
from .mesh import Complex
from .poly import Poly, integrate_over_simplex
from .sharp import SharpField, multiply

EXTENSION_TOL = 1e-9


class Configuration:
    """A PA map validated as an embedding; the deformed mesh is its image."""

    def __init__(self, pamap: PAMap):
        verdict = is_embedding(pamap)
        if not verdict.ok:
            raise ValueError(f"configuration map is not an embedding: {verdict.witness}")
        self.map = pamap
        self.c = verdict.c
        self.d = verdict.d

    @property
    def source(self) -> Complex:
        return self.map.source

    @property
    def image_complex(self) -> Complex:
        return self.map.image_complex

    def jacobian_det(self, top_idx: int) -> float:
        return self.map.det(top_idx)

    def orientation_preserving(self, support=None) -> bool:
        src = self.source
        rng = support if support is not None else range(src.n_simplices(src.top_degree))
        return all(self.jacobian_det(i) > 0.0 for i in rng)

    def push(self, T: Chain) -> Chain:
        return pushforward(self.map, T)


class VirtualVelocity:
    """n-tuple of sharp fields on the deformed (image) mesh."""

    def __init__(self, fields):
        fields = tuple(fields)
        cx = fields[0].complex
        if any(f.complex is not cx for f in fields):
            raise ComplexMismatch("velocity components live on different complexes")
        if len(fields) != cx.dim:
            raise ValueError(f"need {cx.dim} components, got {len(fields)}")
        self.fields = fields
        self.complex = cx

    def __getitem__(self, i: int) -> SharpField:
        return self.fields[i]

    def __len__(self) -> int:
        return len(self.fields)

    @classmethod
    def constant(cls, cx: Complex, vector) -> "VirtualVelocity":
        vector = np.asarray(vector, dtype=float)
        nv = cx.vertices.shape[0]
        return cls([SharpField(cx, np.full(nv, v)) for v in vector])


@dataclass
class CauchyFlux:
    """Component evaluators (surface chain, scalar velocity) -> power, with constants."""

    components: list[Callable[[Chain, SharpField], float]]
    s: float
    b: float
    complex: Complex

    def evaluate(self, surface: Chain, velocity: VirtualVelocity) -> float:
        return sum(comp(surface, velocity[i]) for i, comp in enumerate(self.components))

    def component(self, i: int, surface: Chain, u: SharpField) -> float:
        return self.components[i](surface, u)


def flux_from_cochains(cochains) -> CauchyFlux:
    """The Cauchy flux Phi(S, v) = sum_i X_i(v_i S) of a cochain tuple.

    Declared constants follow the duality estimates: s is the
    largest component flat norm and b is (n+1) times it.
    """
    cochains = tuple(cochains)
    cx = cochains[0].complex
    if any(X.complex is not cx for X in cochains):
        raise ComplexMismatch("cochain components live on different complexes")
    if len(cochains) != cx.dim:
        raise ValueError(f"need {cx.dim} cochain components")
    forms = [whitney_realize(X) for X in cochains]

    def make(i):
        w = forms[i]

        def comp(surface: Chain, u: SharpField) -> float:
            return multiply(u, surface).evaluate(w)

        return comp

    C = max(cochain_flat_norm(X) for X in cochains)
    return CauchyFlux([make(i) for i in range(cx.dim)], s=C, b=C * (cx.dim + 1), complex=cx)


@dataclass
class CochainRecovery:
    cochains: tuple[Cochain, ...]
    flat_norms: list[float]
    bound: float  # max{s, b} declared by the flux
    bound_ok: bool
    max_extension_deviation: float


def _hat_extension(cx: Complex, facet_idx: int) -> SharpField:
    """PL field equal to 1 on a facet's vertices and 0 elsewhere."""
    values = np.zeros(cx.vertices.shape[0])
    for v in cx.simplices[cx.top_degree - 1][facet_idx]:
        values[v] = 1.0
    return SharpField(cx, values)


def cochains_from_flux(flux: CauchyFlux, cx: Complex | None = None) -> CochainRecovery:
    """Recover the flat (n-1)-cochain tuple of a balanced flux.

    For each facet, the coefficient is the flux of the elementary facet
    chain against the constant-1 velocity; independence of the extension is
    checked against a hat field that tapers within one neighbour ring, and
    a disagreement raises ExtensionDependence (the flux is not balanced).
    """
    cx = cx or flux.complex
    n = cx.dim
    k = n - 1
    ones = SharpField(cx, np.ones(cx.vertices.shape[0]))
    cochains = []
    max_dev = 0.0
    vols = cx.volumes(k)
    for i in range(n):
        coeffs: dict[int, float] = {}
        for idx in range(cx.n_simplices(k)):
            elem = Chain(cx, k, {idx: 1.0})
            a = flux.component(i, elem, ones)
            alt = flux.component(i, elem, _hat_extension(cx, idx))
            dev = abs(a - alt)
            max_dev = max(max_dev, dev)
            if dev > EXTENSION_TOL * max(1.0, abs(a), flux.s * vols[idx]):
                raise ExtensionDependence(
                    f"component {i}, facet {idx}: extensions give {a} and {alt}"
                )
            if a != 0.0:
                coeffs[idx] = a
        cochains.append(Cochain(cx, k, coeffs))
    norms = [cochain_flat_norm(X) for X in cochains]
    bound = max(flux.s, flux.b)
    ok = all(f <= bound + 1e-9 * (1.0 + bound) for f in norms)
    return CochainRecovery(tuple(cochains), norms, bound, ok, max_dev)


@dataclass
class BalanceEstimate:
    s_emp: float
    b_emp: float
    s_witness: tuple | None
    b_witness: tuple | None


def _carrier_region(chain: Chain) -> list[int]:
    cx = chain.complex
    return sorted({cx.containing_top(chain.degree, i) for i in chain.coeffs})


def estimate_balance_constants(
    flux: CauchyFlux,
    surfaces: list[Chain],
    velocities: list[VirtualVelocity],
    bodies: list[Chain] | None = None,
    enforce: bool = True,
) -> BalanceEstimate:
    """Empirical balance constants over sampled surfaces, bodies and velocities.

    Ratios |Phi^i| / (||v_i||_Lip * M) are maximized over the samples; with
    enforce=True an excess over the declared constants raises
    DeclaredConstantViolated with the witness sample.
    """
    s_emp, b_emp = 0.0, 0.0
    s_wit = b_wit = None
    for si, S in enumerate(surfaces):
        if S.is_zero():
            continue
        region = _carrier_region(S)
        mass = S.mass()
        for vi, v in enumerate(velocities):
            for i in range(len(flux.components)):
                from .maps import lip_seminorm

                denom = lip_seminorm(v[i], region) * mass
                if denom <= 0.0:
                    continue
                ratio = abs(flux.component(i, S, v[i])) / denom
                if ratio > s_emp:
                    s_emp, s_wit = ratio, (si, vi, i)
    for bi, B in enumerate(bodies or []):
        if B.is_zero():
            continue
        region = sorted(B.coeffs)
        mass = B.mass()
        bnd = B.boundary()
        for vi, v in enumerate(velocities):
            for i in range(len(flux.components)):
                from .maps import lip_seminorm

                denom = lip_seminorm(v[i], region) * mass
                if denom <= 0.0:
                    continue
                ratio = abs(flux.component(i, bnd, v[i])) / denom
                if ratio > b_emp:
                    b_emp, b_wit = ratio, (bi, vi, i)
    if enforce:
        if s_emp > flux.s + 1e-9 * (1.0 + flux.s):
            raise DeclaredConstantViolated(f"empirical s {s_emp} exceeds declared {flux.s} at {s_wit}")
        if b_emp > flux.b + 1e-9 * (1.0 + flux.b):
            raise DeclaredConstantViolated(f"empirical b {b_emp} exceeds declared {flux.b} at {b_wit}")
    return BalanceEstimate(s_emp, b_emp, s_wit, b_wit)


# -- strain and power ---------------------------------------------------------


def strain(config: Configuration, T: Chain, v: VirtualVelocity) -> tuple[EvaluableCurrent, ...]:
    """Kinematic interpolation eps_i = v_i bd(k# T) - bd(v_i k# T) = d(alpha_{v_i}) -| k# T."""
    from .forms import coboundary, interior_product

    B = config.push(T)
    if v.complex is not config.image_complex:
        raise ComplexMismatch("velocity does not live on the deformed mesh")
    return tuple(interior_product(coboundary(v[i].as_cochain()), B) for i in range(len(v)))


@dataclass
class VirtualPowerReport:
    surface_power: float
    body_power: float
    internal_power: float

    @property
    def residual(self) -> float:
        return abs(self.surface_power + self.body_power - self.internal_power)


def virtual_power_report(
    cochains, config: Configuration, T: Chain, v: VirtualVelocity
) -> VirtualPowerReport:
    """The three power terms of the virtual-power identity.

    surface = sum X_i(v_i k# bd T), body = -sum dX_i(v_i k# T),
    internal = sum X_i(strain_i); surface + body = internal holds to
    quadrature exactness.
    """
    cochains = tuple(cochains)
    B = config.push(T)
    bndB = B.boundary()
    eps = strain(config, T, v)
    surface = body = internal = 0.0
    for i, X in enumerate(cochains):
        w = whitney_realize(X)
        surface += multiply(v[i], bndB).evaluate(w)
        body -= multiply(v[i], B).evaluate(w.d())
        internal += eps[i].evaluate(w)
    return VirtualPowerReport(surface, body, internal)


@dataclass
class StressReport:
    spatial: tuple[float, float, float]  # surface, body, internal powers
    material: tuple[float, float, float]
    max_deviation: float
    piola_kirchhoff: tuple[FormField, ...]
    cauchy: tuple[FormField, ...]


def stress_report(
    cochains, config: Configuration, T: Chain, v: VirtualVelocity
) -> StressReport:
    """Material-frame power integrals cross-checked against spatial evaluations.

    Every term is pulled back per source simplex (compose with the affine
    map, weight by the Jacobian determinant, integrate exactly); the
    Piola-Kirchhoff tuple is the pullback of the Cauchy stress forms.
    """
    cochains = tuple(cochains)
    src = config.source
    n = src.dim
    if config.map.target_dim != n:
        raise OrientationReversal("material frame needs equal source and target dimensions")
    support = sorted(T.coeffs)
    for idx in support:
        if config.jacobian_det(idx) <= 0.0:
            raise OrientationReversal(f"simplex {idx} has non-positive Jacobian")

    vp = virtual_power_report(cochains, config, T, v)
    img = config.map.image()
    forms = [whitney_realize(X) for X in cochains]

    m_surface = m_body = m_internal = 0.0
    for idx in support:
        coeff = T.coeffs[idx]
        entry = img.simplex_map[n][idx]
        if entry is None:
            continue
        image_top = entry[0]
        M, c = config.map.affine_on(idx)
        J = config.jacobian_det(idx)
        coords = src.coords(n, idx)
        vol = src.volume(n, idx)
        for i, w in enumerate(forms):
            polys = w.comps.get(image_top)
            if polys is None:
                continue
            v_poly = v[i].as_poly(image_top)
            # d(v_i w_i): the single n-covector component of the derivative
            vw = [v_poly * p for p in polys]
            d_vw = _d_single_component(vw, n)
            m_surface += coeff * J * integrate_over_simplex(d_vw.compose_affine(M, c), coords, vol)
            # v_i * (d w_i)
            dw = _d_single_component(polys, n)
            m_body -= coeff * J * integrate_over_simplex(
                (v_poly * dw).compose_affine(M, c), coords, vol
            )
            # (d v_i) ^ w_i
            grad = v[i].gradient(image_top)
            dv_wedge = _wedge_1_with(polys, grad, n)
            m_internal += coeff * J * integrate_over_simplex(
                dv_wedge.compose_affine(M, c), coords, vol
            )

    spatial = (vp.surface_power, vp.body_power, vp.internal_power)
    material = (m_surface, m_body, m_internal)
    dev = max(abs(a - b) for a, b in zip(spatial, material))
    pk = tuple(pullback_form(config.map, w) for w in forms)
    return StressReport(spatial, material, dev, pk, tuple(forms))


def _d_single_component(polys: list[Poly], n: int) -> Poly:
    """The lone component of d(omega) for an (n-1)-form's component polynomials."""
    from . import multivec

    out = Poly.zero(n)
    out_index = multivec.basis_index(n, n)
    for i, I in enumerate(multivec.basis_tuples(n, n - 1)):
        for dax in range(n):
            sign, merged = multivec.merge_sign((dax,), I)
            if sign == 0:
                continue
            dp = polys[i].diff(dax)
            if not dp.is_zero():
                assert out_index[merged] == 0
                out = out + dp.scale(sign)
    return out


def _wedge_1_with(polys: list[Poly], grad: np.ndarray, n: int) -> Poly:
    """Single component of (constant 1-covector grad) ^ (n-1)-form polys."""
    from . import multivec

    out = Poly.zero(n)
    for dax in range(n):
        g = float(grad[dax])
        if g == 0.0:
            continue
        for i, I in enumerate(multivec.basis_tuples(n, n - 1)):
            sign, _ = multivec.merge_sign((dax,), I)
            if sign == 0 or polys[i].is_zero():
                continue
            out = out + polys[i].scale(sign * g)
    return out
