"""Mapping the discriminant set of a family.

A plane scan samples the complex discriminant of the characteristic
polynomial on a grid.  Grid minima are refined by Gauss-Newton on
(Re, Im) of the discriminant, junctions (tangencies, cusps) are located by
shrinking-ring minimisation, zero lines are followed through 3 parameters
by predictor-corrector continuation, and EP orders are read off by
encircling candidates.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import minimum_filter

from .errors import AmbiguousEnclosure, DimensionMismatch, InputError, JacobianDegenerate
from .holonomy import TrackingOptions, loop_permutation, trace
from .paths import Circle, Plane, discretize
from .spectra import char_poly_coeffs, coefficient_scale, discriminant_batch, spectra_many, min_gap

REFINE_TOL = 1e-12
FD_REL_STEP = 1e-6
JUNCTION_TOL = 1e-6
RING_POINTS = 720
CURVE_RATIO = 1e-2


@dataclass(frozen=True)
class PlaneSpec:
    """A scan plane: free axes, fixed values, window and grid resolution."""

    params: tuple
    axes: tuple
    fixed: dict
    window: tuple
    resolution: tuple = (201, 201)

    def __post_init__(self):
        Plane(self.params, self.axes, self.fixed)
        window = tuple(tuple(float(v) for v in w) for w in self.window)
        res = tuple(int(r) for r in self.resolution)
        if len(window) != 2 or any(len(w) != 2 or not w[0] < w[1] for w in window):
            raise InputError(f"window must be two increasing [min, max] pairs, got {self.window}")
        if len(res) != 2 or min(res) < 16:
            raise InputError(f"resolution must be at least 16x16, got {self.resolution}")
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "window", window)
        object.__setattr__(self, "resolution", res)

    @classmethod
    def for_family(cls, family, axes, fixed, window, resolution=(201, 201)):
        return cls(family.params, tuple(axes), dict(fixed), window, resolution)

    @property
    def plane(self):
        return Plane(self.params, self.axes, self.fixed)

    @property
    def grid(self):
        return tuple(np.linspace(lo, hi, r) for (lo, hi), r in zip(self.window, self.resolution))

    @property
    def extent(self):
        return np.array([hi - lo for lo, hi in self.window])

    @property
    def lower(self):
        return np.array([lo for lo, _ in self.window])

    @property
    def spacing(self):
        return self.extent / (np.array(self.resolution) - 1)

    def contains(self, uv, margin=0.0):
        uv = np.asarray(uv, dtype=float)
        lo = self.lower - margin * self.extent
        hi = self.lower + (1 + margin) * self.extent
        return bool(np.all(uv >= lo) and np.all(uv <= hi))


@dataclass(frozen=True, eq=False)
class DiscriminantField:
    """Complex discriminant on the grid of ``plane``; ``values[i, j]`` is at ``(u_i, v_j)``."""

    plane: PlaneSpec
    values: np.ndarray
    family: object = field(repr=False)

    @property
    def abs(self):
        return np.abs(self.values)

    def rows(self):
        """Rows ``(axis1, axis2, re, im, abs)`` in grid order."""
        u, v = self.plane.grid
        uu, vv = np.meshgrid(u, v, indexing="ij")
        d = self.values
        return np.stack([uu.ravel(), vv.ravel(), d.real.ravel(), d.imag.ravel(), np.abs(d).ravel()], axis=1)


@dataclass(frozen=True, eq=False)
class EPCandidate:
    """A located point of the discriminant set.

    ``kind`` is ``"point"`` for an isolated zero in the scan plane, ``"curve"``
    for a point on a zero curve and ``"junction"`` where curves meet.
    ``order`` is the measured vanishing order of the discriminant there.
    """

    location: np.ndarray
    refined: bool
    residual: float
    signature: tuple = None
    probe_radius: float = None
    kind: str = "point"
    order: float = None

    def with_signature(self, perm, radius):
        return EPCandidate(self.location, self.refined, self.residual, perm.cycle_type(), radius,
                           self.kind, self.order)

    def as_dict(self, params):
        return {
            "location": {p: float(v) for p, v in zip(params, self.location)},
            "refined": self.refined,
            "residual": float(self.residual),
            "kind": self.kind,
            "order": None if self.order is None else float(self.order),
            "signature": None if self.signature is None else list(self.signature),
            "probe_radius": None if self.probe_radius is None else float(self.probe_radius),
        }


def discriminant_at(family, points, snap=True):
    """Complex discriminant and coefficient scale at a stack of parameter points."""
    pts = np.asarray(points, dtype=float)
    coeffs = char_poly_coeffs(family.evaluate_many(pts), snap)
    return discriminant_batch(coeffs), coefficient_scale(coeffs)


def scan_plane(family, plane, threads=1):
    """Evaluate the discriminant on every grid node of ``plane``."""
    u, v = plane.grid
    uu, vv = np.meshgrid(u, v, indexing="ij")
    pts = plane.plane.embed(np.stack([uu.ravel(), vv.ravel()], axis=-1))
    chunks = np.array_split(pts, max(1, min(int(threads), len(pts))) * 4)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            parts = list(pool.map(lambda c: discriminant_at(family, c)[0], chunks))
    else:
        parts = [discriminant_at(family, c)[0] for c in chunks]
    values = np.concatenate(parts).reshape(uu.shape)
    return DiscriminantField(plane, values, family)


def _residual_tol(scale, n):
    return REFINE_TOL * scale ** (n * (n - 1))


def _plane_disc(family, plane, snap=True):
    emb = plane.plane.embed

    def fn(uv):
        return discriminant_at(family, emb(np.asarray(uv, dtype=float).reshape(-1, 2)), snap)

    return fn


def _gauss_newton(fn, uv, h, max_iter=100):
    """Damped Gauss-Newton on (Re, Im) of ``fn`` over two coordinates, batched."""
    uv = np.array(uv, dtype=float)
    d, _ = fn(uv)
    offs = np.array([[h[0], 0], [-h[0], 0], [0, h[1]], [0, -h[1]]])
    for _ in range(max_iter):
        fd, _ = fn((uv[:, None, :] + offs[None]).reshape(-1, 2))
        fd = fd.reshape(-1, 4)
        du = (fd[:, 0] - fd[:, 1]) / (2 * h[0])
        dv = (fd[:, 2] - fd[:, 3]) / (2 * h[1])
        jac = np.stack([np.stack([du.real, dv.real], -1), np.stack([du.imag, dv.imag], -1)], axis=1)
        rhs = np.stack([d.real, d.imag], -1)
        step = np.array([np.linalg.lstsq(j, r, rcond=None)[0] for j, r in zip(jac, rhs)])
        lam = np.ones(len(uv))
        improved = np.zeros(len(uv), dtype=bool)
        trial_uv, trial_d = uv.copy(), d.copy()
        for _ in range(12):
            todo = ~improved
            if not todo.any():
                break
            cand = uv[todo] - lam[todo, None] * step[todo]
            dc, _ = fn(cand)
            ok = np.abs(dc) < np.abs(d[todo])
            idx = np.nonzero(todo)[0]
            trial_uv[idx[ok]] = cand[ok]
            trial_d[idx[ok]] = dc[ok]
            improved[idx[ok]] = True
            lam[idx[~ok]] *= 0.5
        moved = np.linalg.norm((trial_uv - uv) / h, axis=1)
        uv, d = trial_uv, trial_d
        if not improved.any() or np.all(moved < 1e-6):
            break
    return uv, d


def _ring_values(fn, uv, radius, scale, count=RING_POINTS):
    th = np.linspace(0, 2 * np.pi, count, endpoint=False)
    ring = uv[None, :] + radius * scale[None, :] * np.stack([np.cos(th), np.sin(th)], -1)
    return np.abs(fn(ring)[0])


def _ring_rms(fn, uv, radius, scale, count=24):
    return float(np.sqrt(np.mean(_ring_values(fn, uv, radius, scale, count) ** 2)))


def _vanishing_order(fn, uv, radius, scale):
    small = _ring_rms(fn, uv, radius, scale)
    big = _ring_rms(fn, uv, 2 * radius, scale)
    if small == 0:
        return np.inf
    return float(np.log2(big / small))


def _dedupe(points, scale, tol):
    keep = []
    for k, p in enumerate(points):
        if all(np.max(np.abs((p - points[j]) / scale)) > tol for j in keep):
            keep.append(k)
    return keep


def refine_zeros(field, threshold=None, max_iter=100):
    """Refine grid minima of |discriminant| below ``threshold`` into candidates.

    ``threshold`` defaults to 1e-3 of the largest |discriminant| on the grid.
    Seeds on the grid boundary are skipped; refined points that leave the
    window are dropped.
    """
    plane, fam = field.plane, field.family
    mag = field.abs
    if threshold is None:
        threshold = 1e-3 * float(mag.max())
    is_min = (mag == minimum_filter(mag, size=3, mode="nearest")) & (mag <= threshold)
    is_min[[0, -1], :] = False
    is_min[:, [0, -1]] = False
    idx = np.argwhere(is_min)
    if idx.size == 0:
        return []
    u, v = plane.grid
    seeds = np.stack([u[idx[:, 0]], v[idx[:, 1]]], -1)
    fn = _plane_disc(fam, plane)
    h = FD_REL_STEP * plane.extent
    uv, d = _gauss_newton(fn, seeds, h, max_iter)
    _, scale = fn(uv)
    tol = _residual_tol(scale, fam.n)
    refined = np.abs(d) <= tol

    inside = np.array([plane.contains(p, margin=1e-9) for p in uv])
    order = np.lexsort((-np.abs(d), ~refined))[::-1]
    order = [k for k in order if inside[k]]
    keep = [order[k] for k in _dedupe(uv[order], plane.extent, 0.5 / max(plane.resolution))]

    probe = 2 * plane.spacing / plane.extent
    out = []
    for k in keep:
        ring = _ring_values(fn, uv[k], probe.max(), plane.extent)
        kind = "curve" if ring.min() < CURVE_RATIO * ring.max() else "point"
        loc = plane.plane.embed(uv[k])
        ordv = _vanishing_order(fn, uv[k], 1e-4, plane.extent) if refined[k] else None
        out.append(EPCandidate(loc, bool(refined[k]), float(abs(d[k])), kind=kind, order=ordv))
    return _sort_candidates(out, plane)


def _sort_candidates(cands, plane):
    """Descending second free axis, then ascending first."""
    i, j = plane.plane.indices
    return sorted(cands, key=lambda c: (-round(c.location[j], 12), round(c.location[i], 12)))


def locate_junctions(field, candidates, radii=None, min_order=1.5):
    """Points where zero curves meet or turn back (tangencies, cusps).

    Starting from every refined curve candidate, the RMS of |discriminant|
    on a ring of shrinking radius is minimised over the ring centre.  The
    minimiser converges to the point of highest vanishing order nearby.
    """
    plane, fam = field.plane, field.family
    # unsnapped coefficients keep the ring objective smooth at tiny radii
    fn = _plane_disc(fam, plane, snap=False)
    ext = plane.extent
    radii = radii or [10.0 ** -k for k in range(2, 9)]
    seeds = [plane.plane.project(c.location) for c in candidates if c.refined and c.kind == "curve"]
    if not seeds:
        return []

    offs = np.stack(np.meshgrid(np.linspace(-1, 1, 9), np.linspace(-1, 1, 9), indexing="ij"), -1).reshape(-1, 2)
    th = np.linspace(0, 2 * np.pi, 24, endpoint=False)
    ring = np.stack([np.cos(th), np.sin(th)], -1)

    def ring_rms(centers, rho):
        pts = centers[:, None, :] + rho * ext * ring[None]
        vals = np.abs(fn(pts.reshape(-1, 2))[0]).reshape(len(centers), -1)
        return np.sqrt(np.mean(vals ** 2, axis=1))

    def descend(centers, rho):
        """Zooming 9x9 pattern search on the ring RMS, batched over centres.

        The objective is very flat near a junction (the position error at
        ring radius rho scales like sqrt(rho)), so a derivative-free grid
        search is more dependable here than a simplex method.
        """
        centers = np.array(centers, dtype=float)
        width = np.full(len(centers), 3 * np.sqrt(rho))
        for _ in range(200):
            live = width >= rho
            if not live.any():
                break
            c = centers[live]
            w = width[live]
            trial = c[:, None, :] + w[:, None, None] * offs[None] * ext
            vals = ring_rms(trial.reshape(-1, 2), rho).reshape(len(c), -1)
            best = np.argmin(vals, axis=1)
            centers[live] = trial[np.arange(len(c)), best]
            # shrink when the centre of the pattern is already the best point
            stay = np.all(offs[best] == 0, axis=1)
            width[np.nonzero(live)[0][stay]] *= 0.5
        return centers

    first = descend(np.array(seeds), radii[0])
    first = [p for p in first if plane.contains(p)]
    reps = [first[k] for k in _dedupe(np.array(first), ext, 0.5 * np.sqrt(radii[0]))] if first else []
    if reps:
        reps = np.array(reps)
        for rho in radii[1:]:
            reps = descend(reps, rho)

    found = []
    for uv in reps:
        if not plane.contains(uv):
            continue
        order = _vanishing_order(fn, uv, 1e-4, ext)
        if order < min_order:
            continue
        polished, d = _gauss_newton(fn, uv[None, :], FD_REL_STEP * ext, max_iter=20)
        if np.max(np.abs(polished[0] - uv) / ext) < 1e-6:
            uv, dval = polished[0], d[0]
        else:
            dval = fn(uv[None, :])[0][0]
        found.append((uv, dval, order))

    keep = _dedupe(np.array([f[0] for f in found]), ext, 1e-3) if found else []
    _, scale = fn(np.array([found[k][0] for k in keep])) if keep else (None, None)
    out = []
    for k, s in zip(keep, scale if keep else []):
        uv, dval, order = found[k]
        ok = abs(dval) <= _residual_tol(s, fam.n)
        out.append(EPCandidate(plane.plane.embed(uv), bool(ok), float(abs(dval)), kind="junction", order=order))
    return _sort_candidates(out, plane)


def _line_residual(family, u_axis=None, h=1e-3):
    """Discriminant, or its derivative along ``u_axis`` (fourth-order stencil).

    Coefficients are not snapped here so the function stays smooth across
    the zero set.
    """
    def disc(x):
        return discriminant_at(family, x, snap=False)[0]

    def fn(x):
        x = np.atleast_2d(x)
        if u_axis is None:
            return disc(x)
        e = np.zeros(x.shape[1])
        e[u_axis] = h
        return (8 * (disc(x + e) - disc(x - e)) - disc(x + 2 * e) + disc(x - 2 * e)) / (12 * h)
    return fn


def _jacobian(fn, x, axes, h):
    """2 x len(axes) real Jacobian of (Re, Im) fn by central differences."""
    pts = []
    for a in axes:
        e = np.zeros(len(x))
        e[a] = h
        pts += [x + e, x - e]
    vals = fn(np.array(pts))
    cols = [(vals[2 * k] - vals[2 * k + 1]) / (2 * h) for k in range(len(axes))]
    return np.array([[c.real for c in cols], [c.imag for c in cols]])


def trace_line(family, seed, step=0.02, steps=200, axes=None, bounds=None, direction=None):
    """Follow the zero line of the discriminant through ``seed`` in three parameters.

    Returns the list of accepted points (seed first).  When the discriminant
    vanishes to second order along the whole line (a doubled sheet such as
    the c-axis of the waveguide family), the line is followed as the zero
    set of a directional derivative instead.
    """
    if family.dim < 3:
        raise DimensionMismatch("line tracing needs a family with at least three parameters")
    axes = list(range(3)) if axes is None else [family.index(a) if isinstance(a, str) else int(a) for a in axes]
    if len(axes) != 3:
        raise DimensionMismatch("line tracing needs exactly three free axes")
    loc = seed.location if isinstance(seed, EPCandidate) else np.asarray(seed, dtype=float)
    x = np.array(loc, dtype=float)
    h_fd = FD_REL_STEP * max(1.0, step * 50)

    fn = _line_residual(family)
    jac = _jacobian(fn, x, axes, h_fd)
    sv = np.linalg.svd(jac, compute_uv=False)
    coef_scale = discriminant_at(family, x[None, :])[1][0]
    if sv[1] < JUNCTION_TOL * max(sv[0], 1e-300) or sv[0] < 1e-8 * coef_scale ** (family.n * (family.n - 1)):
        # doubled zero set: use the derivative along the axis giving the best-conditioned Jacobian
        best = None
        for a in axes:
            g = _line_residual(family, a)
            s = np.linalg.svd(_jacobian(g, x, axes, 10 * h_fd), compute_uv=False)
            if best is None or s[1] > best[0]:
                best = (s[1], g, s)
        _, fn, sv = best
        h_fd *= 10
    ref = sv[0]

    def corrector(x0):
        y = x0.copy()
        for _ in range(12):
            r = fn(y[None, :])[0]
            jj = _jacobian(fn, y, axes, h_fd)
            dy = np.linalg.lstsq(jj, np.array([r.real, r.imag]), rcond=None)[0]
            y[axes] -= dy
            if np.linalg.norm(dy) < 1e-11 * max(1.0, np.linalg.norm(y)):
                return y, jj
        return None, None

    def tangent(jj, prev):
        t = np.linalg.svd(jj)[2][-1]
        if prev is not None and t @ prev < 0:
            t = -t
        return t

    jac = _jacobian(fn, x, axes, h_fd)
    t = tangent(jac, None)
    if direction is not None:
        if t @ np.asarray(direction, dtype=float)[: len(t)] < 0:
            t = -t
    points = [x.copy()]
    h = step
    while len(points) <= steps:
        pred = x.copy()
        pred[axes] += h * t
        y, jj = corrector(pred)
        ok = y is not None and np.linalg.norm(y[axes] - pred[axes]) < 0.5 * h
        if ok:
            s = np.linalg.svd(jj, compute_uv=False)
            t_new = tangent(jj, t)
            ok = t_new @ t > 0.9
        if not ok:
            h *= 0.5
            if h < 1e-6 * step:
                raise JacobianDegenerate(
                    f"continuation cannot pass {x}; the zero set is singular there", location=x, points=points)
            continue
        if s[1] < JUNCTION_TOL * ref:
            raise JacobianDegenerate(f"Jacobian degenerates at {y}", location=y, points=points)
        if bounds is not None and not all(lo <= y[family.index(k) if isinstance(k, str) else k] <= hi
                                          for k, (lo, hi) in bounds.items()):
            break
        x, t = y, t_new
        points.append(x.copy())
        # slow down where the Jacobian weakens so isolated singular points are not stepped over
        h = min(step, 2 * h, step * np.sqrt(s[1] / (1e-2 * ref)))
    return points


def classify_ep(family, candidate, plane, radius=None, others=(), opts=None, min_samples=128):
    """Encircle ``candidate`` counter-clockwise in ``plane`` and return the loop permutation."""
    loc = candidate.location if isinstance(candidate, EPCandidate) else np.asarray(candidate, dtype=float)
    if isinstance(plane, PlaneSpec):
        plane = plane.plane
    center = plane.project(loc)
    others = [o.location if isinstance(o, EPCandidate) else np.asarray(o, dtype=float) for o in others]
    others = [o for o in others if np.linalg.norm(o - loc) > 0]
    if radius is None:
        if not others:
            raise InputError("classify_ep needs a radius or other candidates to derive one")
        radius = 0.5 * min(np.linalg.norm(o - loc) for o in others)
    for o in others:
        off_plane = np.linalg.norm(o - plane.embed(plane.project(o)))
        d = np.linalg.norm(plane.project(o) - center)
        if off_plane <= radius / 2 and d <= 1.5 * radius:
            raise AmbiguousEnclosure(
                f"another candidate at {o} lies within {1.5 * radius:.3g} of the probe circle centre")
    circle = Circle(plane, tuple(center), float(radius), "ccw", 0.0)
    return loop_permutation(trace(family, discretize(circle, min_samples), opts or TrackingOptions()))


def enclosing_radius(family, plane, center, factor=1.25, threshold=None):
    """Radius enclosing every discriminant zero of a plane scan, times ``factor``."""
    field = scan_plane(family, plane)
    cands = [c for c in refine_zeros(field, threshold) if c.refined]
    if not cands:
        raise AmbiguousEnclosure("no discriminant zeros found in the enclosure window")
    c0 = np.asarray(center, dtype=float)
    dist = [np.linalg.norm(plane.plane.project(c.location) - c0) for c in cands]
    return factor * max(dist), cands


def gap_at(family, x):
    """Smallest eigenvalue gap at ``x``."""
    return float(min_gap(spectra_many(family, np.atleast_2d(x)))[0])
