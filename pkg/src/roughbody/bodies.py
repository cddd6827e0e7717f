"""Bodies, material surfaces, fractal prefractal sequences and traces.

A body is the indicator n-chain of a polytopal region (coefficients in
{0,1} on positively oriented top simplices).  Generalized (rough) bodies
are represented by prefractal approximant sequences together with a
flat-norm Cauchy certificate; no limit object is ever materialized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import multivec
from .chains import Chain
from .errors import GeneratorOverlap, OverlayFailure, WrongDegree
from .flatnorm import CauchyReport, certify_cauchy
from .mesh import Complex, HalfSpace, build_complex, refine_by_halfspace
from .simplex_lp import simplex_interiors_intersect

ORIENTATION_TOL = 1e-12


@dataclass
class Body:
    """Indicator chain of a polytopal region (degree n, coefficients in {0,1})."""

    chain: Chain

    def __post_init__(self):
        cx = self.chain.complex
        if self.chain.degree != cx.dim or self.chain.degree != cx.top_degree:
            raise WrongDegree("a body is a top-degree chain of full dimension")
        for i, a in self.chain.coeffs.items():
            if abs(a - 1.0) > 1e-12:
                raise ValueError("body coefficients must be 1")

    @property
    def complex(self) -> Complex:
        return self.chain.complex

    def mass(self) -> float:
        return self.chain.mass()

    def boundary_mass(self) -> float:
        return self.chain.boundary().mass()


def _positively_oriented(cx: Complex, idx: int) -> bool:
    C = cx.coords(cx.top_degree, idx)
    E = (C[1:] - C[0]).T
    return np.linalg.det(E) > 0.0


def body_from_simplices(cx: Complex, indices) -> Body:
    """Indicator body over the given top simplices (duplicates are idempotent).

    Simplices must be positively oriented so that the chain represents
    integration of n-forms over the region with multiplicity one.
    """
    if cx.top_degree != cx.dim:
        raise WrongDegree("complex carries no full-dimensional simplices")
    coeffs: dict[int, float] = {}
    for i in indices:
        i = int(i)
        if i < 0 or i >= cx.n_simplices(cx.dim):
            raise WrongDegree(f"simplex index {i} out of range")
        if not _positively_oriented(cx, i):
            raise ValueError(f"simplex {i} is negatively oriented; flip its vertex order")
        coeffs[i] = 1.0
    return Body(Chain(cx, cx.dim, coeffs))


@dataclass
class Surface:
    """Restriction of a body's boundary to a facet subset, outward oriented."""

    chain: Chain
    body: Body
    facets: frozenset[int]

    @property
    def complex(self) -> Complex:
        return self.chain.complex

    def mass(self) -> float:
        return self.chain.mass()


def geometric_boundary_surface(body: Body) -> Surface:
    """Boundary surface rebuilt from outward normals (Stokes route).

    For each boundary facet the tangent is nu* -| (e_1 ^ ... ^ e_n) with nu
    the outward unit normal; the resulting chain must equal boundary(body)
    coefficientwise, which the caller can assert as the Stokes identity.
    """
    cx = body.complex
    n = cx.dim
    if not body.chain.coeffs:
        raise WrongDegree("empty body has no boundary surface")
    bnd = body.chain.boundary()
    vol_vec = np.zeros(multivec.dim(n, n))
    vol_vec[0] = 1.0  # e_1 ^ ... ^ e_n
    owners: dict[int, int] = {}
    for tidx in body.chain.coeffs:
        for fidx, _ in cx.incidence[n][tidx]:
            owners.setdefault(fidx, tidx)
    coeffs: dict[int, float] = {}
    for fidx in bnd.coeffs:
        owner = owners.get(fidx)
        if owner is None:
            raise RuntimeError("boundary facet without an owning body simplex")
        fverts = set(cx.simplices[n - 1][fidx])
        opposite = next(v for v in cx.simplices[n][owner] if v not in fverts)
        fcoords = cx.coords(n - 1, fidx)
        span = (fcoords[1:] - fcoords[0]).T if n > 1 else np.zeros((n, 0))
        away = fcoords.mean(axis=0) - cx.vertices[opposite]
        if span.size:
            proj = span @ np.linalg.pinv(span) @ away
            nu = away - proj
        else:
            nu = away
        nu = nu / np.linalg.norm(nu)
        tangent = multivec.contract(nu, 1, vol_vec, n, n)
        xi = cx.unit_tangent(n - 1, fidx).components
        sign = float(np.dot(tangent, xi))
        coeffs[fidx] = 1.0 if sign > 0 else -1.0
    chain = Chain(cx, n - 1, coeffs)
    return Surface(chain, body, frozenset(bnd.coeffs))


def surface_from_facets(body: Body, facet_indices) -> Surface:
    """Material surface: the body's boundary restricted to selected facets."""
    bnd = body.chain.boundary()
    sel = {int(i) for i in facet_indices}
    missing = sel - set(bnd.coeffs)
    if missing:
        raise WrongDegree(f"facets {sorted(missing)} are not boundary facets of the body")
    return Surface(
        Chain(body.complex, body.complex.dim - 1, {i: bnd.coeffs[i] for i in sel}),
        body,
        frozenset(sel),
    )


# -- Koch prefractals -------------------------------------------------------


def _rot60(v: np.ndarray) -> np.ndarray:
    c, s = 0.5, -np.sqrt(3.0) / 2.0  # -60 degrees: outward for a CCW loop
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


@dataclass
class KochLevel:
    complex: Complex
    body: Body
    loop: list[int]  # CCW boundary vertex ids


def _koch_build(levels: int) -> list[KochLevel]:
    """Hierarchical Koch construction.

    Each step trisects the boundary edges, re-cones the triangles touching
    them (keeping the complex free of T-junctions) and attaches the bump
    triangles; earlier bodies stay exactly representable on later meshes.
    """
    base = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3.0) / 2.0]])
    pool_pts = [base[i] for i in range(3)]
    tris: list[tuple[int, int, int]] = [(0, 1, 2)]
    loop = [0, 1, 2]
    out: list[KochLevel] = []

    def snapshot() -> KochLevel:
        cx = build_complex(np.asarray(pool_pts), {2: list(tris)}, check_overlap=False)
        body = Body(Chain(cx, 2, {i: 1.0 for i in range(len(tris))}))
        return KochLevel(cx, body, list(loop))

    out.append(snapshot())
    for _ in range(levels):
        pts = np.asarray(pool_pts)
        boundary_edges = {}
        for a, b in zip(loop, loop[1:] + loop[:1]):
            q1 = pts[a] + (pts[b] - pts[a]) / 3.0
            q2 = pts[a] + 2.0 * (pts[b] - pts[a]) / 3.0
            tip = pts[a] + (pts[b] - pts[a]) / 3.0 + _rot60(q2 - q1)
            i1 = len(pool_pts); pool_pts.append(q1)
            i2 = len(pool_pts); pool_pts.append(q2)
            it = len(pool_pts); pool_pts.append(tip)
            boundary_edges[frozenset((a, b))] = (a, b, i1, i2, it)
        new_tris: list[tuple[int, int, int]] = []
        for t in tris:
            touched = [frozenset((t[i], t[(i + 1) % 3])) in boundary_edges for i in range(3)]
            if not any(touched):
                new_tris.append(t)
                continue
            centroid = np.mean([pool_pts[v] for v in t], axis=0)
            ic = len(pool_pts); pool_pts.append(centroid)
            for i in range(3):
                a, b = t[i], t[(i + 1) % 3]
                key = frozenset((a, b))
                if key in boundary_edges:
                    ea, eb, i1, i2, _ = boundary_edges[key]
                    seq = (ea, i1, i2, eb) if ea == a else (eb, i2, i1, ea)
                    for u, v in zip(seq, seq[1:]):
                        new_tris.append((ic, u, v))
                else:
                    new_tris.append((ic, a, b))
        for a, b in zip(loop, loop[1:] + loop[:1]):
            ea, eb, i1, i2, it = boundary_edges[frozenset((a, b))]
            if ea != a:
                i1, i2 = i2, i1
            tri = (i1, i2, it)
            E = np.array([pool_pts[tri[1]] - pool_pts[tri[0]], pool_pts[tri[2]] - pool_pts[tri[0]]]).T
            if np.linalg.det(E) < 0:
                tri = (i2, i1, it)
            new_tris.append(tri)
        new_loop = []
        for a, b in zip(loop, loop[1:] + loop[:1]):
            ea, eb, i1, i2, it = boundary_edges[frozenset((a, b))]
            if ea != a:
                i1, i2 = i2, i1
            new_loop.extend([a, i1, it, i2])
        tris = new_tris
        loop = new_loop
        out.append(snapshot())
    return out


def koch_prefractal(level: int) -> Body:
    """Triangulated level-k Koch snowflake body of unit base side."""
    if level < 0:
        raise ValueError("level must be >= 0")
    return _koch_build(level)[-1].body


@dataclass
class GeneralizedBody:
    """Prefractal approximant sequence with a flat-norm Cauchy certificate."""

    bodies: list[Body]
    report: CauchyReport

    def level(self, k: int) -> Body:
        return self.bodies[k]


def koch_generalized_body(levels: int, eps: float = 1e-2, method: str = "mass") -> GeneralizedBody:
    """Koch snowflake as a certified prefractal sequence on one common mesh.

    The hierarchical construction keeps each level's body exactly
    representable on the finest mesh, so successive distances are computed
    on a single complex; method "mass" uses mass(T_{k+1} - T_k) = annexed
    area, a rigorous flat-distance upper bound.
    """
    hierarchy = _koch_build(levels)
    finest = hierarchy[-1].complex
    carried = [_carry_onto(lv.body, finest) for lv in hierarchy]
    report = certify_cauchy([b.chain for b in carried], finest, eps=eps, method=method)
    return GeneralizedBody(carried, report)


def _carry_onto(body: Body, finest: Complex) -> Body:
    """Re-express a body on the finest mesh by barycenter point location."""
    if body.complex is finest:
        return body
    coeffs: dict[int, float] = {}
    barys = finest.barycenters(finest.top_degree)
    region = _RegionLocator(body)
    for i, b in enumerate(barys):
        if region.contains(b):
            coeffs[i] = 1.0
    carried = Body(Chain(finest, finest.dim, coeffs))
    if abs(carried.mass() - body.mass()) > 1e-9 * max(1.0, body.mass()):
        raise OverlayFailure("carried body volume drifted")
    return carried


class _RegionLocator:
    """Point-in-body test against the body's original complex."""

    def __init__(self, body: Body):
        self.cx = body.complex
        self.idxs = sorted(body.chain.coeffs)
        n = self.cx.dim
        C = self.cx.all_coords(n)[self.idxs]
        self.lo = C.min(axis=1)
        self.hi = C.max(axis=1)
        self.grads = [self.cx.barygrads(i) for i in self.idxs]
        self.tol = 1e-9 * max(self.cx.diameter(), 1.0)

    def contains(self, x: np.ndarray) -> bool:
        hit = np.nonzero(
            np.all(x >= self.lo - self.tol, axis=1) & np.all(x <= self.hi + self.tol, axis=1)
        )[0]
        for j in hit:
            G = self.grads[j]
            lam = G[:, :-1] @ x + G[:, -1]
            if np.all(lam >= -1e-9):
                return True
        return False


# -- overlays and traces ------------------------------------------------------


def _facet_halfspaces(cx: Complex) -> list[HalfSpace]:
    """Deduplicated supporting hyperplanes of all top-simplex facets."""
    n = cx.dim
    seen = {}
    out = []
    for idx in range(cx.n_simplices(n - 1)):
        C = cx.coords(n - 1, idx)
        span = (C[1:] - C[0]).T if n > 1 else np.zeros((n, 0))
        if span.size:
            U, _, _ = np.linalg.svd(span, full_matrices=True)
            nu = U[:, -1]
        else:
            nu = np.ones(n)
        nrm = np.linalg.norm(nu)
        if nrm < 1e-14:
            continue
        nu = nu / nrm
        # canonical sign: first nonzero component positive
        for comp in nu:
            if abs(comp) > 1e-12:
                if comp < 0:
                    nu = -nu
                break
        s = float(nu @ C[0])
        key = tuple(round(v / 1e-9) for v in (*nu, s))
        if key not in seen:
            seen[key] = True
            out.append(HalfSpace(tuple(nu), s))
    return out


def _bbox_mesh(points: np.ndarray, pad: float) -> Complex:
    n = points.shape[1]
    lo = points.min(axis=0) - pad
    hi = points.max(axis=0) + pad
    if n == 1:
        verts = np.array([[lo[0]], [hi[0]]])
        return build_complex(verts, {1: [(0, 1)]}, check_overlap=False)
    if n == 2:
        verts = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
        return build_complex(verts, {2: [(0, 1, 2), (0, 2, 3)]}, check_overlap=False)
    corners = np.array(
        [[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])]
    )

    def vid(i, j, k):
        return i * 4 + j * 2 + k

    from itertools import permutations

    tets = []
    for perm in permutations(range(3)):
        path = [np.array([0, 0, 0])]
        for ax in perm:
            nxt = path[-1].copy()
            nxt[ax] = 1
            path.append(nxt)
        t = [vid(*p) for p in path]
        E = (corners[t][1:] - corners[t][0]).T
        if np.linalg.det(E) < 0:
            t[0], t[1] = t[1], t[0]
        tets.append(tuple(t))
    return build_complex(corners, {3: tets}, check_overlap=False)


def common_refinement(a: Body, b: Body) -> tuple[Complex, Body, Body]:
    """Overlay complex on which both bodies are simplicial, volumes preserved.

    A padded bounding-box mesh is refined by every facet hyperplane of both
    source complexes; each overlay cell then lies inside or outside each
    body, so indicator chains transfer by barycenter location.
    """
    if a.complex.dim != b.complex.dim:
        raise OverlayFailure("bodies live in different ambient dimensions")
    points = np.vstack([a.complex.vertices, b.complex.vertices])
    pad = 0.125 * max(1.0, float(np.ptp(points)))
    cx = _bbox_mesh(points, pad)
    planes = _facet_halfspaces(a.complex) + _facet_halfspaces(b.complex)
    for hs in planes:
        cx = refine_by_halfspace(cx, hs).complex
    loc_a = _RegionLocator(a)
    loc_b = _RegionLocator(b)
    barys = cx.barycenters(cx.top_degree)
    ca = {i: 1.0 for i, x in enumerate(barys) if loc_a.contains(x)}
    cb = {i: 1.0 for i, x in enumerate(barys) if loc_b.contains(x)}
    body_a = Body(Chain(cx, cx.dim, ca))
    body_b = Body(Chain(cx, cx.dim, cb))
    for orig, new in ((a, body_a), (b, body_b)):
        if abs(orig.mass() - new.mass()) > 1e-10 * max(1.0, orig.mass()):
            raise OverlayFailure(
                f"volume drifted from {orig.mass()} to {new.mass()} in the overlay"
            )
    return cx, body_a, body_b


def _coplanar_overlap(cx_a: Complex, ia: int, cx_b: Complex, ib: int, tol: float) -> bool:
    """Positive (n-1)-measure overlap of two facets (same supporting plane)."""
    A = cx_a.coords(cx_a.dim - 1, ia)
    B = cx_b.coords(cx_b.dim - 1, ib)
    n = cx_a.dim
    span = (A[1:] - A[0]).T if n > 1 else np.zeros((n, 0))
    # same hyperplane?
    for x in B:
        rel = x - A[0]
        if span.size:
            resid = rel - span @ np.linalg.pinv(span) @ rel
        else:
            resid = rel
        if np.linalg.norm(resid) > tol:
            return False
    if n == 1:
        return True  # coincident points
    # express both in the facet plane coordinates and test interior overlap
    basis, _ = np.linalg.qr(span)
    A2 = (A - A[0]) @ basis
    B2 = (B - A[0]) @ basis
    return simplex_interiors_intersect(A2, B2)


def trace(part: Body, generator: Body) -> tuple[Chain, Complex]:
    """Trace current boundary(P cap M) - boundary(M) restricted to P.

    `part` is the body (a prefractal level of a generalized body or a
    polytopal body); `generator` is the finite-perimeter generator M.  The
    precondition H^{n-1}(boundary(P) cap boundary(M)) = 0 is enforced by
    exact facet-coincidence testing.
    """
    tol = 1e-9 * max(part.complex.diameter(), generator.complex.diameter(), 1.0)
    bnd_p = part.chain.boundary()
    bnd_m = generator.chain.boundary()
    for ia in bnd_p.coeffs:
        for ib in bnd_m.coeffs:
            if _coplanar_overlap(part.complex, ia, generator.complex, ib, tol):
                raise GeneratorOverlap(
                    f"facet {ia} of the body lies inside facet {ib} of the generator"
                )
    cx, bp, bm = common_refinement(part, generator)
    inter = Chain(
        cx, cx.dim, {i: 1.0 for i in set(bp.chain.coeffs) & set(bm.chain.coeffs)}
    )
    first = inter.boundary()
    loc_p = _RegionLocator(part)
    barys = cx.barycenters(cx.dim - 1)
    bm_bnd = bm.chain.boundary()
    second = Chain(
        cx, cx.dim - 1, {i: a for i, a in bm_bnd.coeffs.items() if loc_p.contains(barys[i])}
    )
    return first - second, cx
