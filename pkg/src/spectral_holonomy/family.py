"""Parametrised operator families: built-ins and parsed definitions.

A family maps a point of real parameter space R^d to an n x n complex
matrix.  Complex parameters are always split into real coordinates
(``re_z``, ``im_z``), so loops and planes live in R^d.

Family definition documents are JSON objects::

    {
      "n": 3,
      "params": ["re_z", "im_z", "c"],
      "define": {"z": "re_z + i*im_z"},
      "entries": [["z+2*i", "-sqrt(2)", "0"], ...],
      "parity": [["0","0","1"], ["0","1","0"], ["1","0","0"]]
    }

``define`` (optional) introduces named sub-expressions, evaluated in order.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import expr
from .errors import (
    DimensionMismatch,
    DSLSyntaxError,
    InputError,
    NonFiniteEntry,
    UnknownBuiltin,
    UnknownIdentifier,
)

SQRT2 = np.sqrt(2.0)
EXCHANGE_13 = np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]], dtype=complex)


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    n: int
    params: tuple
    builder: object = field(repr=False)
    builtin_id: str = None
    document: dict = field(default=None, repr=False)
    parity: np.ndarray = field(default=None, repr=False)

    @property
    def source(self):
        if self.builtin_id is not None:
            return f"builtin:{self.builtin_id}"
        return json.dumps(self.document, sort_keys=True)

    @property
    def dim(self):
        return len(self.params)

    def index(self, name):
        try:
            return self.params.index(name)
        except ValueError:
            raise UnknownIdentifier(f"family has no parameter {name!r}; declared: {list(self.params)}") from None

    def point(self, x=None, **kw):
        """Coerce a mapping, sequence or keywords to a validated coordinate array."""
        if x is None:
            x = kw
        if isinstance(x, dict):
            extra = set(x) - set(self.params)
            missing = [p for p in self.params if p not in x]
            if extra or missing:
                raise DimensionMismatch(
                    f"parameter names must be exactly {list(self.params)}; "
                    f"missing {missing}, unexpected {sorted(extra)}"
                )
            arr = np.array([float(x[p]) for p in self.params])
        else:
            arr = np.asarray(x, dtype=float).reshape(-1)
            if arr.size != self.dim:
                raise DimensionMismatch(f"expected {self.dim} coordinates {list(self.params)}, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise InputError(f"non-finite parameter point {arr}")
        return arr

    def evaluate_many(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.dim:
            raise DimensionMismatch(f"expected points with {self.dim} coordinates, got shape {pts.shape}")
        with np.errstate(all="ignore"):
            mats = self.builder(pts)
        if not np.all(np.isfinite(mats)):
            bad = np.argwhere(~np.all(np.isfinite(mats), axis=(-2, -1)))
            first = pts[tuple(bad[0])] if bad.size else pts
            raise NonFiniteEntry(f"non-finite matrix entries at {len(bad) or 1} point(s), first at {first}")
        return mats

    def evaluate(self, x):
        return self.evaluate_many(self.point(x)[None, :])[0]

    __call__ = evaluate


def _waveguide_t(pts):
    z = pts[..., 0] + 1j * pts[..., 1]
    c = pts[..., 2]
    m = np.zeros(pts.shape[:-1] + (3, 3), dtype=complex)
    m[..., 0, 0] = z + 2j
    m[..., 0, 1] = m[..., 1, 0] = -SQRT2
    m[..., 1, 2] = m[..., 2, 1] = -SQRT2
    m[..., 2, 2] = c * z - 2j
    return m


def _waveguide_h(pts):
    v1, p1, v3, p3, kappa = (pts[..., k] for k in range(5))
    m = np.zeros(pts.shape[:-1] + (3, 3), dtype=complex)
    m[..., 0, 0] = v1 + 1j * p1
    m[..., 0, 1] = m[..., 1, 0] = -kappa
    m[..., 1, 2] = m[..., 2, 1] = -kappa
    m[..., 2, 2] = v3 + 1j * p3
    return m


BUILTINS = {
    "waveguide_T": (("re_z", "im_z", "c"), _waveguide_t,
                    "T(z,c) = [[z+2i, -sqrt2, 0], [-sqrt2, 0, -sqrt2], [0, -sqrt2, c z - 2i]]"),
    "waveguide_H": (("v1", "p1", "v3", "p3", "kappa"), _waveguide_h,
                    "H = [[v1+i p1, -kappa, 0], [-kappa, 0, -kappa], [0, -kappa, v3+i p3]]"),
}


def builtin(name):
    try:
        params, fn, _ = BUILTINS[name]
    except KeyError:
        raise UnknownBuiltin(f"unknown built-in family {name!r}; available: {sorted(BUILTINS)}") from None
    return OperatorFamily(3, params, fn, builtin_id=name, parity=EXCHANGE_13.copy())


def describe_builtins():
    return {name: {"params": list(p), "definition": d} for name, (p, _, d) in BUILTINS.items()}


def _entry_text(t):
    return repr(float(t)) if isinstance(t, (int, float)) else t


def _parse_grid(grid, n, label):
    if not isinstance(grid, list) or len(grid) != n or any(not isinstance(r, list) or len(r) != n for r in grid):
        raise DimensionMismatch(f"{label} must be an {n}x{n} array of expression strings")
    out = []
    for i, row in enumerate(grid):
        out_row = []
        for j, text in enumerate(row):
            text = _entry_text(text)
            if not isinstance(text, str):
                raise DimensionMismatch(f"{label}[{i}][{j}] must be a string")
            out_row.append(expr.parse(text, where=f"{label}[{i}][{j}]"))
        out.append(out_row)
    return out


def parse_family(doc):
    """Build a family from a definition document (JSON text or parsed dict)."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise DSLSyntaxError(f"invalid JSON: {e.msg}", e.lineno, e.colno, "family document") from None
    if not isinstance(doc, dict):
        raise InputError("family document must be an object")
    for key in ("n", "params", "entries"):
        if key not in doc:
            raise InputError(f"family document lacks required field {key!r}")
    n = doc["n"]
    if not isinstance(n, int) or not 1 <= n <= 8:
        raise DimensionMismatch(f"n must be an integer in 1..8, got {n!r}")
    params = tuple(doc["params"])
    if len(set(params)) != len(params) or not all(isinstance(p, str) for p in params):
        raise InputError(f"params must be distinct names, got {list(params)}")
    for p in params:
        if p in expr.RESERVED:
            raise InputError(f"parameter name {p!r} is reserved")

    defines = []
    known = set(params)
    for name, text in (doc.get("define") or {}).items():
        if name in expr.RESERVED or name in known:
            raise InputError(f"cannot define {name!r}: name is reserved or already declared")
        node = expr.parse(text, where=f"define[{name}]")
        unknown = expr.names(node) - known
        if unknown:
            raise UnknownIdentifier(f"define[{name}] references unknown identifier(s) {sorted(unknown)}")
        defines.append((name, node))
        known.add(name)

    entries = _parse_grid(doc["entries"], n, "entries")
    for i, row in enumerate(entries):
        for j, node in enumerate(row):
            unknown = expr.names(node) - known
            if unknown:
                raise UnknownIdentifier(f"entries[{i}][{j}] references unknown identifier(s) {sorted(unknown)}")

    parity = None
    if doc.get("parity") is not None:
        pgrid = _parse_grid(doc["parity"], n, "parity")
        for i, row in enumerate(pgrid):
            for j, node in enumerate(row):
                if expr.names(node):
                    raise InputError(f"parity[{i}][{j}] must not reference parameters")
        parity = np.array([[complex(expr.evaluate(node, {})) for node in row] for row in pgrid])

    def build(pts):
        env = {p: pts[..., k].astype(complex) for k, p in enumerate(params)}
        for name, node in defines:
            env[name] = expr.evaluate(node, env)
        m = np.zeros(pts.shape[:-1] + (n, n), dtype=complex)
        for i, row in enumerate(entries):
            for j, node in enumerate(row):
                m[..., i, j] = expr.evaluate(node, env)
        return m

    return OperatorFamily(n, params, build, document=doc, parity=parity)


def print_family(family):
    """Render a parsed family back to a definition document with canonical expressions."""
    if family.document is None:
        raise InputError("only parsed families can be printed")
    doc = dict(family.document)
    doc["entries"] = [[expr.to_text(expr.parse(_entry_text(t))) for t in row] for row in doc["entries"]]
    if doc.get("define"):
        doc["define"] = {k: expr.to_text(expr.parse(v)) for k, v in doc["define"].items()}
    return json.dumps(doc, indent=2)


def load_family(spec):
    """Family from a built-in name, a definition dict, or JSON text."""
    if isinstance(spec, OperatorFamily):
        return spec
    if isinstance(spec, str) and spec in BUILTINS:
        return builtin(spec)
    if isinstance(spec, str) and not spec.lstrip().startswith("{"):
        raise UnknownBuiltin(f"unknown built-in family {spec!r}; available: {sorted(BUILTINS)}")
    return parse_family(spec)
