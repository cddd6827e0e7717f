"""Command-line front end.

Exit codes: 0 all checks passed, 1 a verification failed (report carries a
witness), 2 input or schema error.  Randomized campaigns are seeded; the
environment variable ROUGHBODY_SEED overrides the --seed flag so acceptance
runs are reproducible.  Reports are JSON (sorted keys); campaign tables are
mirrored to a .csv next to the JSON output.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .bodies import geometric_boundary_surface, koch_prefractal
from .chains import Chain
from .errors import RoughBodyError, SchemaViolation
from .flatnorm import flat_norm
from .forms import Cochain
from .generate import (
    random_body,
    random_chain,
    random_embedding_map,
    random_sharp_field,
)
from .mechanics import (
    CauchyFlux,
    Configuration,
    VirtualVelocity,
    cochains_from_flux,
    estimate_balance_constants,
    flux_from_cochains,
    virtual_power_report,
)
from .mesh import barycentric_refine
from .sharp import SharpField, boundary_product, check_product_bounds, multiply


def _seed(args) -> int:
    env = os.environ.get("ROUGHBODY_SEED")
    if env is not None:
        return int(env)
    return args.seed


def _emit(report: dict, out: str | None, table: list[dict] | None = None) -> None:
    text = io.dumps_report(report)
    if out:
        Path(out).write_text(text)
        if table:
            csv_path = Path(out).with_suffix(".csv")
            with open(csv_path, "w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=list(table[0].keys()))
                writer.writeheader()
                writer.writerows(table)
    sys.stdout.write(text)


def _chain_payload(chain: Chain) -> list[list[float]]:
    return [[i, chain.coeffs[i]] for i in sorted(chain.coeffs)]


def cmd_mesh_validate(args) -> int:
    cx = io.load_mesh(args.mesh, check_overlap=True)
    report = {
        "dim": cx.dim,
        "vertices": int(cx.vertices.shape[0]),
        "simplices": {str(k): cx.n_simplices(k) for k in sorted(cx.simplices)},
        "valid": True,
    }
    _emit(report, args.out)
    return 0


def cmd_flatnorm(args) -> int:
    cx = io.load_mesh(args.mesh)
    chain = io.load_chain(args.chain, mesh=cx)
    if args.subdivide:
        ref = barycentric_refine(cx, args.subdivide)
        chain = ref.carry_chain(chain)
    dec = flat_norm(chain)
    report = {
        "value": dec.value,
        "iterations": dec.iterations,
        "subdivide": args.subdivide,
        "R": _chain_payload(dec.R),
        "S": _chain_payload(dec.S) if dec.S is not None else [],
    }
    _emit(report, args.out)
    return 0


def cmd_fractal(args) -> int:
    if args.type != "koch":
        raise SchemaViolation(f"unknown fractal type '{args.type}'")
    body = koch_prefractal(args.level)
    out = Path(args.out)
    mesh_path = out.with_suffix(".mesh.json")
    io.save_mesh(body.complex, mesh_path)
    io.save_chain(body.chain, out, mesh_path.name, role="body")
    report = {
        "level": args.level,
        "area": body.mass(),
        "perimeter": body.boundary_mass(),
        "triangles": body.complex.n_simplices(2),
        "body": str(out),
        "mesh": str(mesh_path),
    }
    sys.stdout.write(io.dumps_report(report))
    return 0


def _load_flux(path) -> tuple[CauchyFlux, tuple[Cochain, ...]]:
    data = io._load_json(path)
    for key in ("mesh", "components"):
        if key not in data:
            raise SchemaViolation(f"{path}: missing field '{key}'")
    cx = io.load_mesh(Path(path).parent / data["mesh"])
    k = cx.dim - 1
    cochains = tuple(
        Cochain(cx, k, {int(i): float(v) for i, v in comp}) for comp in data["components"]
    )
    return flux_from_cochains(cochains), cochains


def cmd_flux_build(args) -> int:
    cache: dict = {}
    cochains = [io.load_cochain(p, cache=cache) for p in args.cochain]
    flux = flux_from_cochains(tuple(cochains))
    data = {
        "mesh": args.mesh_ref or io._load_json(args.cochain[0])["mesh"],
        "degree": cochains[0].degree,
        "components": [[[i, X.coeffs[i]] for i in sorted(X.coeffs)] for X in cochains],
        "s": flux.s,
        "b": flux.b,
    }
    Path(args.out).write_text(io.dumps_report(data))
    sys.stdout.write(io.dumps_report({"s": flux.s, "b": flux.b, "out": args.out}))
    return 0


def cmd_flux_eval(args) -> int:
    flux, _ = _load_flux(args.flux)
    surface = io.load_chain(args.surface, mesh=flux.complex)
    fields = io.load_sharp_field(args.velocity, mesh=flux.complex)
    if isinstance(fields, SharpField):
        raise SchemaViolation(f"{args.velocity}: velocity file needs 'components'")
    value = flux.evaluate(surface, VirtualVelocity(fields))
    _emit({"value": value, "s": flux.s, "b": flux.b}, args.out)
    return 0


def cmd_flux_roundtrip(args) -> int:
    flux, original = _load_flux(args.flux)
    rec = cochains_from_flux(flux)
    max_err = 0.0
    for X, Y in zip(original, rec.cochains):
        keys = set(X.coeffs) | set(Y.coeffs)
        for i in keys:
            max_err = max(max_err, abs(X.coeffs.get(i, 0.0) - Y.coeffs.get(i, 0.0)))
    ok = max_err <= 1e-9 and rec.bound_ok
    report = {
        "max_coefficient_error": max_err,
        "flat_norms": rec.flat_norms,
        "bound": rec.bound,
        "bound_ok": rec.bound_ok,
        "max_extension_deviation": rec.max_extension_deviation,
        "passed": ok,
    }
    _emit(report, args.out)
    return 0 if ok else 1


def cmd_verify_stokes(args) -> int:
    cx = io.load_mesh(args.mesh)
    rng = np.random.default_rng(_seed(args))
    rows = []
    worst = 0.0
    for t in range(args.trials):
        body = random_body(cx, rng)
        surface = geometric_boundary_surface(body)
        dev = surface.chain.max_coefficient_diff(body.chain.boundary())
        worst = max(worst, dev)
        rows.append({"trial": t, "simplices": len(body.chain.coeffs), "deviation": dev})
    ok = worst <= args.tolerance
    report = {
        "check": "stokes",
        "trials": args.trials,
        "seed": _seed(args),
        "max_deviation": worst,
        "tolerance": args.tolerance,
        "passed": ok,
    }
    _emit(report, args.out, rows)
    return 0 if ok else 1


def cmd_verify_product_rule(args) -> int:
    cx = io.load_mesh(args.mesh)
    rng = np.random.default_rng(_seed(args))
    rows = []
    worst = 0.0
    bound_fail = 0
    for t in range(args.trials):
        phi = random_sharp_field(cx, rng)
        A = random_chain(cx, cx.top_degree, rng)
        omega_co = random_chain(cx, cx.top_degree - 1, rng)  # reuse coefficients
        from .forms import whitney_realize

        omega = whitney_realize(Cochain(cx, cx.top_degree - 1, omega_co.coeffs))
        lhs = multiply(phi, A).boundary_evaluate(omega)
        rhs = boundary_product(phi, A).evaluate(omega)
        dev = abs(lhs - rhs)
        worst = max(worst, dev)
        rep = check_product_bounds(phi, A)
        if not rep.passed:
            bound_fail += 1
        rows.append({"trial": t, "identity_residual": dev, "bounds_ok": rep.passed})
    ok = worst <= args.tolerance and bound_fail == 0
    report = {
        "check": "product-rule",
        "trials": args.trials,
        "seed": _seed(args),
        "max_identity_residual": worst,
        "bound_failures": bound_fail,
        "tolerance": args.tolerance,
        "passed": ok,
    }
    _emit(report, args.out, rows)
    return 0 if ok else 1


def cmd_verify_virtual_power(args) -> int:
    cx = io.load_mesh(args.mesh)
    rng = np.random.default_rng(_seed(args))
    rows = []
    worst = 0.0
    for t in range(args.trials):
        config = Configuration(random_embedding_map(cx, rng))
        icx = config.image_complex
        cochains = tuple(
            Cochain(icx, cx.dim - 1, random_chain(icx, cx.dim - 1, rng).coeffs)
            for _ in range(cx.dim)
        )
        body = random_body(cx, rng)
        v = VirtualVelocity([random_sharp_field(icx, rng) for _ in range(cx.dim)])
        vp = virtual_power_report(cochains, config, body.chain, v)
        worst = max(worst, vp.residual)
        rows.append({"trial": t, "residual": vp.residual})
    ok = worst <= args.tolerance
    report = {
        "check": "virtual-power",
        "trials": args.trials,
        "seed": _seed(args),
        "max_residual": worst,
        "tolerance": args.tolerance,
        "passed": ok,
    }
    _emit(report, args.out, rows)
    return 0 if ok else 1


def cmd_verify_balance(args) -> int:
    flux, _ = _load_flux(args.flux)
    cx = flux.complex
    rng = np.random.default_rng(_seed(args))
    surfaces = []
    bodies = []
    velocities = []
    for _ in range(args.trials):
        body = random_body(cx, rng)
        bodies.append(body.chain)
        surfaces.append(body.chain.boundary())
        velocities.append(VirtualVelocity([random_sharp_field(cx, rng) for _ in range(cx.dim)]))
    rows = []
    for t, (S, v) in enumerate(zip(surfaces, velocities)):
        est_t = estimate_balance_constants(flux, [S], [v], [bodies[t]], enforce=False)
        rows.append({"trial": t, "s_ratio": est_t.s_emp, "b_ratio": est_t.b_emp})
    est = estimate_balance_constants(flux, surfaces, velocities, bodies, enforce=False)
    ok = est.s_emp <= flux.s + 1e-9 and est.b_emp <= flux.b + 1e-9
    report = {
        "check": "balance",
        "trials": args.trials,
        "seed": _seed(args),
        "s_declared": flux.s,
        "b_declared": flux.b,
        "s_empirical": est.s_emp,
        "b_empirical": est.b_emp,
        "witness_s": list(est.s_witness) if est.s_witness else None,
        "witness_b": list(est.b_witness) if est.b_witness else None,
        "passed": ok,
    }
    _emit(report, args.out, rows)
    return 0 if ok else 1


def _rekey_cochain(X: Cochain, target) -> Cochain:
    """Re-express a cochain on a geometrically identical complex."""
    src = X.complex
    k = X.degree

    def key(cx, idx):
        return frozenset(tuple(round(float(v), 9) for v in p) for p in cx.coords(k, idx))

    lookup = {key(target, i): i for i in range(target.n_simplices(k))}
    out: dict[int, float] = {}
    for i, a in X.coeffs.items():
        j = lookup.get(key(src, i))
        if j is None:
            raise SchemaViolation("flux mesh does not match the configuration's image mesh")
        stored_src = src.simplices[k][i]
        stored_tgt = target.simplices[k][j]
        order = sorted(range(len(stored_src)), key=lambda t: tuple(src.vertices[stored_src[t]]))
        order_t = sorted(
            range(len(stored_tgt)), key=lambda t: tuple(target.vertices[stored_tgt[t]])
        )
        from .mesh import _perm_parity

        sign = _perm_parity(tuple(order), tuple(range(len(order)))) * _perm_parity(
            tuple(order_t), tuple(range(len(order_t)))
        )
        out[j] = sign * a
    return Cochain(target, k, out)


def cmd_stress_report(args) -> int:
    from .mechanics import stress_report

    flux, cochains = _load_flux(args.flux)
    pamap = io.load_pamap(args.map)
    config = Configuration(pamap)
    body = io.load_chain(args.body, mesh=pamap.source)
    fields = io.load_sharp_field(args.velocity, mesh=config.image_complex)
    if isinstance(fields, SharpField):
        raise SchemaViolation(f"{args.velocity}: velocity file needs 'components'")
    cochains = tuple(_rekey_cochain(X, config.image_complex) for X in cochains)
    rep = stress_report(cochains, config, body, VirtualVelocity(fields))
    ok = rep.max_deviation <= args.tolerance
    report = {
        "check": "stress-frames",
        "spatial": {"surface": rep.spatial[0], "body": rep.spatial[1], "internal": rep.spatial[2]},
        "material": {
            "surface": rep.material[0],
            "body": rep.material[1],
            "internal": rep.material[2],
        },
        "max_deviation": rep.max_deviation,
        "tolerance": args.tolerance,
        "passed": ok,
    }
    _emit(report, args.out)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roughbody")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh", help="mesh utilities")
    msub = p.add_subparsers(dest="subcommand", required=True)
    v = msub.add_parser("validate", help="schema and invariant checks")
    v.add_argument("--mesh", required=True)
    v.add_argument("--out")
    v.set_defaults(func=cmd_mesh_validate)

    p = sub.add_parser("flatnorm", help="flat norm of a chain with decomposition")
    p.add_argument("--mesh", required=True)
    p.add_argument("--chain", required=True)
    p.add_argument("--subdivide", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_flatnorm)

    p = sub.add_parser("fractal", help="generate a prefractal body")
    p.add_argument("--type", default="koch")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fractal)

    p = sub.add_parser("flux", help="Cauchy flux operations")
    fsub = p.add_subparsers(dest="subcommand", required=True)
    b = fsub.add_parser("build", help="flux from a cochain tuple")
    b.add_argument("--cochain", action="append", required=True)
    b.add_argument("--mesh-ref", help="mesh path to record in the flux file")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_flux_build)
    e = fsub.add_parser("eval", help="evaluate a flux on a surface and velocity")
    e.add_argument("--flux", required=True)
    e.add_argument("--surface", required=True)
    e.add_argument("--velocity", required=True)
    e.add_argument("--out")
    e.set_defaults(func=cmd_flux_eval)
    r = fsub.add_parser("roundtrip", help="recover cochains and compare")
    r.add_argument("--flux", required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_flux_roundtrip)

    p = sub.add_parser("verify", help="randomized verification campaigns")
    vsub = p.add_subparsers(dest="subcommand", required=True)
    s = vsub.add_parser("stokes")
    s.add_argument("--mesh", required=True)
    s.add_argument("--trials", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tolerance", type=float, default=1e-10)
    s.add_argument("--out")
    s.set_defaults(func=cmd_verify_stokes)
    pr = vsub.add_parser("product-rule")
    pr.add_argument("--mesh", required=True)
    pr.add_argument("--trials", type=int, default=50)
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--tolerance", type=float, default=1e-9)
    pr.add_argument("--out")
    pr.set_defaults(func=cmd_verify_product_rule)
    vp = vsub.add_parser("virtual-power")
    vp.add_argument("--mesh", required=True)
    vp.add_argument("--trials", type=int, default=20)
    vp.add_argument("--seed", type=int, default=0)
    vp.add_argument("--tolerance", type=float, default=1e-8)
    vp.add_argument("--out")
    vp.set_defaults(func=cmd_verify_virtual_power)
    ba = vsub.add_parser("balance")
    ba.add_argument("--flux", required=True)
    ba.add_argument("--trials", type=int, default=20)
    ba.add_argument("--seed", type=int, default=0)
    ba.add_argument("--out")
    ba.set_defaults(func=cmd_verify_balance)

    p = sub.add_parser("stress", help="stress representations")
    ssub = p.add_subparsers(dest="subcommand", required=True)
    sr = ssub.add_parser("report")
    sr.add_argument("--flux", required=True)
    sr.add_argument("--map", required=True)
    sr.add_argument("--body", required=True)
    sr.add_argument("--velocity", required=True)
    sr.add_argument("--tolerance", type=float, default=1e-8)
    sr.add_argument("--out")
    sr.set_defaults(func=cmd_stress_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaViolation, FileNotFoundError, ValueError) as exc:
        sys.stderr.write(io.dumps_report({"error": str(exc), "kind": type(exc).__name__}))
        return 2
    except RoughBodyError as exc:
        sys.stderr.write(io.dumps_report({"error": str(exc), "kind": type(exc).__name__}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
