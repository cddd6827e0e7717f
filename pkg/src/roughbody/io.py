"""JSON schemas for the on-disk formats.

Mesh:        {"dim": n, "vertices": [[x, ...]], "simplices": {"k": [[i, ...]]}}
Chain:       {"mesh": path, "degree": k, "coefficients": [[index, value]], "role"?: tag}
Cochain:     {"mesh": path, "degree": k, "coefficients": [[index, value]]}
PA map:      {"mesh": path, "images": [[y, ...] per vertex]}
Sharp field: {"mesh": path, "values": [per-vertex value]}   (vector: {"components": [...]})

Indices are 0-based; simplex orientation is the listed vertex order.
Mesh references are resolved relative to the referencing file.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .chains import Chain
from .errors import SchemaViolation
from .forms import Cochain
from .maps import PAMap
from .mesh import Complex, build_complex
from .sharp import SharpField


def _fail(path, msg: str):
    raise SchemaViolation(f"{path}: {msg}")


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path}: invalid JSON ({exc})") from exc


def load_mesh(path, check_overlap: bool = True) -> Complex:
    data = _load_json(path)
    for key in ("dim", "vertices", "simplices"):
        if key not in data:
            _fail(path, f"missing field '{key}'")
    if data["dim"] not in (1, 2, 3):
        _fail(path, f"field 'dim' must be 1, 2 or 3, got {data['dim']}")
    verts = np.asarray(data["vertices"], dtype=float)
    if verts.ndim != 2 or verts.shape[1] != data["dim"]:
        _fail(path, "field 'vertices' must be a list of dim-length coordinate lists")
    if not isinstance(data["simplices"], dict):
        _fail(path, "field 'simplices' must map degree strings to index lists")
    simplices = {}
    for key, lst in data["simplices"].items():
        try:
            k = int(key)
        except ValueError:
            _fail(path, f"simplex degree '{key}' is not an integer")
        simplices[k] = [tuple(s) for s in lst]
    return build_complex(verts, simplices, check_overlap=check_overlap)


def save_mesh(cx: Complex, path) -> None:
    data = {
        "dim": cx.dim,
        "vertices": [[float(v) for v in row] for row in cx.vertices],
        "simplices": {str(cx.top_degree): [list(s) for s in cx.simplices[cx.top_degree]]},
    }
    _dump(data, path)


def _resolve_mesh(data, path, cache: dict | None = None) -> Complex:
    if "mesh" not in data:
        _fail(path, "missing field 'mesh'")
    mesh_path = Path(path).parent / data["mesh"]
    if cache is not None and str(mesh_path) in cache:
        return cache[str(mesh_path)]
    cx = load_mesh(mesh_path)
    if cache is not None:
        cache[str(mesh_path)] = cx
    return cx


def _coefficients(data, path, cx, degree):
    if "coefficients" not in data:
        _fail(path, "missing field 'coefficients'")
    out = {}
    nmax = cx.n_simplices(degree)
    for pair in data["coefficients"]:
        if len(pair) != 2:
            _fail(path, f"coefficient entry {pair} is not [index, value]")
        idx, val = int(pair[0]), float(pair[1])
        if idx < 0 or idx >= nmax:
            _fail(path, f"coefficient index {idx} out of range for degree {degree}")
        out[idx] = val
    return out


def load_chain(path, mesh: Complex | None = None, cache: dict | None = None) -> Chain:
    data = _load_json(path)
    cx = mesh if mesh is not None else _resolve_mesh(data, path, cache)
    if "degree" not in data:
        _fail(path, "missing field 'degree'")
    k = int(data["degree"])
    return Chain(cx, k, _coefficients(data, path, cx, k))


def save_chain(chain: Chain, path, mesh_path, role: str | None = None) -> None:
    data = {
        "mesh": str(mesh_path),
        "degree": chain.degree,
        "coefficients": [[i, chain.coeffs[i]] for i in sorted(chain.coeffs)],
    }
    if role:
        data["role"] = role
    _dump(data, path)


def load_cochain(path, mesh: Complex | None = None, cache: dict | None = None) -> Cochain:
    data = _load_json(path)
    cx = mesh if mesh is not None else _resolve_mesh(data, path, cache)
    if "degree" not in data:
        _fail(path, "missing field 'degree'")
    k = int(data["degree"])
    return Cochain(cx, k, _coefficients(data, path, cx, k))


def save_cochain(cochain: Cochain, path, mesh_path) -> None:
    data = {
        "mesh": str(mesh_path),
        "degree": cochain.degree,
        "coefficients": [[i, cochain.coeffs[i]] for i in sorted(cochain.coeffs)],
    }
    _dump(data, path)


def load_pamap(path, mesh: Complex | None = None, cache: dict | None = None) -> PAMap:
    data = _load_json(path)
    cx = mesh if mesh is not None else _resolve_mesh(data, path, cache)
    if "images" not in data:
        _fail(path, "missing field 'images'")
    images = np.asarray(data["images"], dtype=float)
    if images.ndim != 2 or images.shape[0] != cx.vertices.shape[0]:
        _fail(path, "field 'images' must list one point per mesh vertex")
    return PAMap(cx, images)


def load_sharp_field(path, mesh: Complex | None = None, cache: dict | None = None):
    """A scalar field, or a list of fields when 'components' is present."""
    data = _load_json(path)
    cx = mesh if mesh is not None else _resolve_mesh(data, path, cache)
    if "components" in data:
        comps = []
        for row in data["components"]:
            arr = np.asarray(row, dtype=float)
            if arr.shape != (cx.vertices.shape[0],):
                _fail(path, "each component must list one value per vertex")
            comps.append(SharpField(cx, arr))
        return comps
    if "values" not in data:
        _fail(path, "missing field 'values' (or 'components')")
    arr = np.asarray(data["values"], dtype=float)
    if arr.shape != (cx.vertices.shape[0],):
        _fail(path, "field 'values' must list one value per vertex")
    return SharpField(cx, arr)


def _plain(obj):
    """Recursively convert numpy scalars and arrays to plain Python values."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj]
    return obj


def _dump(data, path) -> None:
    with open(path, "w") as fh:
        json.dump(_plain(data), fh, sort_keys=True, indent=1)
        fh.write("\n")


def dumps_report(data) -> str:
    """Deterministic JSON for reports (sorted keys, repr floats)."""
    return json.dumps(_plain(data), sort_keys=True, indent=1) + "\n"
