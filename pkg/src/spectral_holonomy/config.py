"""Job configuration documents.

A config is one JSON object.  Geometry is resolved at run time: a
``locate`` block scans a plane and names the refined candidates, ``anchors``
derive points from them, and ``loops`` describe paths in terms of both.

Coordinates in loop documents can be

* ``[u, v]``: plane coordinates,
* a string: the name of a candidate or anchor,
* ``{"point": {"re_z": ..., ...}}``: a full parameter point.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .cartography import PlaneSpec, locate_junctions, refine_zeros, scan_plane
from .errors import ConfigError, HolonomyError
from .family import load_family
from .holonomy import TrackingOptions
from .paths import Circle, Concat, Plane, Polyline, Reverse


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return doc


def require(doc, key, where):
    if not isinstance(doc, dict) or key not in doc:
        raise ConfigError(f"{where}: missing required field {key!r}")
    return doc[key]


def family_from(doc):
    spec = require(doc, "family", "config")
    try:
        return load_family(spec)
    except HolonomyError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"family: {e}") from None


def plane_from(family, doc, where="plane"):
    axes = require(doc, "axes", where)
    fixed = doc.get("fixed", {})
    if not isinstance(axes, list) or not isinstance(fixed, dict):
        raise ConfigError(f"{where}: axes must be a list and fixed an object")
    try:
        return Plane(family.params, tuple(axes), fixed)
    except HolonomyError as e:
        raise ConfigError(f"{where}: {e}") from None


def plane_spec_from(family, doc, where):
    plane = plane_from(family, doc, where)
    window = require(doc, "window", where)
    resolution = doc.get("resolution", [201, 201])
    try:
        return PlaneSpec(family.params, plane.axes, plane.fixed, window, resolution)
    except HolonomyError as e:
        raise ConfigError(f"{where}: {e}") from None
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: window must be [[min, max], [min, max]] and resolution [n1, n2]") from None


def tracking_from(doc):
    t = doc.get("tracking", {})
    return TrackingOptions(max_depth=int(t.get("max_depth", 24))), int(t.get("min_samples", 64))


@dataclass
class Geometry:
    """Named candidates and anchors in one plane, plus the loop documents."""

    family: object
    plane: Plane
    points: dict = field(default_factory=dict)
    candidates: list = field(default_factory=list)
    loops: dict = field(default_factory=dict)

    def coords(self, ref, where):
        """Plane coordinates of a reference."""
        if isinstance(ref, str):
            if ref not in self.points:
                raise ConfigError(f"{where}: unknown anchor or candidate {ref!r}; known: {sorted(self.points)}")
            return self.points[ref]
        if isinstance(ref, dict) and "point" in ref:
            return self.plane.project(self.family.point(ref["point"]))
        if isinstance(ref, (list, tuple)) and len(ref) == 2:
            return np.array([float(ref[0]), float(ref[1])])
        raise ConfigError(f"{where}: cannot interpret {ref!r} as a point")

    def full(self, ref, where):
        if isinstance(ref, dict) and "point" in ref:
            return self.family.point(ref["point"])
        return self.plane.embed(self.coords(ref, where))

    def spec(self, doc, where="loop", _seen=()):
        """PathSpec for a loop document or loop name."""
        if isinstance(doc, str):
            if doc in _seen:
                raise ConfigError(f"{where}: loop {doc!r} refers to itself")
            if doc not in self.loops:
                raise ConfigError(f"{where}: unknown loop {doc!r}; known: {sorted(self.loops)}")
            return self.spec(self.loops[doc], f"loops.{doc}", _seen + (doc,))
        if not isinstance(doc, dict) or len(doc) != 1:
            raise ConfigError(f"{where}: a path is an object with exactly one of circle, polyline, concat, reverse")
        (kind, body), = doc.items()
        try:
            if kind == "circle":
                plane = plane_from(self.family, body["plane"], f"{where}.plane") if "plane" in body else self.plane
                center = self.coords(require(body, "center", where), f"{where}.center")
                orient = body.get("orientation", "ccw")
                if "through" in body:
                    return Circle.through(plane, center, self.coords(body["through"], f"{where}.through"), orient)
                return Circle(plane, tuple(center), float(require(body, "radius", where)), orient,
                              float(body.get("start_angle", 0.0)))
            if kind == "polyline":
                if not isinstance(body, list):
                    raise ConfigError(f"{where}: polyline must be a list of points")
                return Polyline(np.array([self.full(p, f"{where}[{k}]") for k, p in enumerate(body)]))
            if kind == "concat":
                return Concat(tuple(self.spec(p, f"{where}[{k}]", _seen) for k, p in enumerate(body)))
            if kind == "reverse":
                return Reverse(self.spec(body, f"{where}.reverse", _seen))
        except ConfigError:
            raise
        except HolonomyError as e:
            raise ConfigError(f"{where}: {e}") from None
        raise ConfigError(f"{where}: unknown path kind {kind!r}")


def _right_normal(a, b):
    d = b - a
    return np.array([d[1], -d[0]])


def resolve_geometry(family, doc, log=None):
    """Build the :class:`Geometry` of a config: locate, name, anchor."""
    plane = plane_from(family, require(doc, "plane", "config"))
    geo = Geometry(family, plane, loops=dict(doc.get("loops", {})))
    loc = doc.get("locate")
    if loc is not None:
        spec_doc = dict(loc, axes=list(plane.axes), fixed=plane.fixed)
        spec = plane_spec_from(family, spec_doc, "locate")
        cands = refine_zeros(scan_plane(family, spec), loc.get("threshold"))
        cands = [c for c in cands if c.refined]
        if loc.get("junctions"):
            cands = locate_junctions(scan_plane(family, spec), cands)
        geo.candidates = cands
        names = loc.get("expect")
        if names is not None:
            if len(names) != len(cands):
                raise LocateMismatch(
                    f"located {len(cands)} refined candidate(s), config expects {len(names)}: {names}")
            for name, c in zip(names, cands):
                geo.points[name] = plane.project(c.location)
        if log:
            log(f"located {len(cands)} candidate(s) in plane {list(plane.axes)}")
    for name, a in doc.get("anchors", {}).items():
        where = f"anchors.{name}"
        if isinstance(a, dict) and "midpoint" in a:
            p, q = (geo.coords(r, where) for r in a["midpoint"])
            geo.points[name] = (p + q) / 2 + float(a.get("normal_offset", 0.0)) * _right_normal(p, q)
        elif isinstance(a, dict) and "offset" in a:
            geo.points[name] = geo.coords(require(a, "from", where), where) + np.asarray(a["offset"], dtype=float)
        else:
            geo.points[name] = geo.coords(a, where)
    return geo


class LocateMismatch(HolonomyError):
    """The scan found a different number of candidates than the config names."""
