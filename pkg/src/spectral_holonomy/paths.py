"""Geometric path descriptions and their sampled realisations.

A path spec maps ``t`` in [0, 1] to a point of the family's real parameter
space.  :func:`discretize` samples a spec; the resulting
:class:`DiscretizedPath` keeps a sampler so the tracker can insert new
points on the true geometry when it bisects a step.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import BasePointMismatch, DegenerateSpec, DimensionMismatch

CLOSE_TOL = 1e-9


@dataclass(frozen=True)
class Plane:
    """Axis-aligned 2-plane: two free coordinates, the others held fixed."""

    params: tuple
    axes: tuple
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        params, axes = tuple(self.params), tuple(self.axes)
        if len(axes) != 2 or axes[0] == axes[1]:
            raise DimensionMismatch(f"a plane needs two distinct free axes, got {list(axes)}")
        unknown = [a for a in list(axes) + list(self.fixed) if a not in params]
        if unknown:
            raise DimensionMismatch(f"unknown parameter(s) {unknown}; family declares {list(params)}")
        if set(axes) & set(self.fixed):
            raise DimensionMismatch(f"axes {list(axes)} cannot also be fixed")
        missing = [p for p in params if p not in axes and p not in self.fixed]
        if missing:
            raise DimensionMismatch(f"plane leaves parameter(s) {missing} unspecified")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "fixed", {k: float(v) for k, v in self.fixed.items()})

    @property
    def indices(self):
        return self.params.index(self.axes[0]), self.params.index(self.axes[1])

    def embed(self, uv):
        uv = np.asarray(uv, dtype=float)
        out = np.empty(uv.shape[:-1] + (len(self.params),))
        for k, p in enumerate(self.params):
            if p not in self.axes:
                out[..., k] = self.fixed[p]
        i, j = self.indices
        out[..., i] = uv[..., 0]
        out[..., j] = uv[..., 1]
        return out

    def project(self, x):
        x = np.asarray(x, dtype=float)
        i, j = self.indices
        return np.stack([x[..., i], x[..., j]], axis=-1)


class PathSpec:
    """Base class: subclasses provide ``point_at``, ``knots`` and ``dim``."""

    def point_at(self, t):
        raise NotImplementedError

    def knots(self, min_samples):
        raise NotImplementedError

    @property
    def start(self):
        return self.point_at(np.array([0.0]))[0]

    @property
    def end(self):
        return self.point_at(np.array([1.0]))[0]


@dataclass(frozen=True)
class Circle(PathSpec):
    """Circle in a plane; ``t=0`` sits at ``start_angle`` (radians)."""

    plane: Plane
    center: tuple
    radius: float
    orientation: str = "ccw"
    start_angle: float = 0.0

    def __post_init__(self):
        if not self.radius > 0 or not np.isfinite(self.radius):
            raise DegenerateSpec(f"circle radius must be positive, got {self.radius}")
        if self.orientation not in ("ccw", "cw"):
            raise DegenerateSpec(f"orientation must be 'ccw' or 'cw', got {self.orientation!r}")
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))

    @classmethod
    def through(cls, plane, center, point, orientation="ccw"):
        """Circle about ``center`` (plane coords) passing through ``point`` (plane coords)."""
        d = np.asarray(point, dtype=float) - np.asarray(center, dtype=float)
        return cls(plane, tuple(center), float(np.hypot(*d)), orientation, float(np.arctan2(d[1], d[0])))

    @property
    def dim(self):
        return len(self.plane.params)

    def point_at(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        sign = 1.0 if self.orientation == "ccw" else -1.0
        # t = 1 is mapped to angle 0 so the loop closes without rounding drift
        phase = np.where(t >= 1.0, 0.0, t)
        ang = self.start_angle + sign * 2 * np.pi * phase
        uv = np.stack([self.center[0] + self.radius * np.cos(ang),
                       self.center[1] + self.radius * np.sin(ang)], axis=-1)
        return self.plane.embed(uv)

    def knots(self, min_samples):
        if min_samples < 16:
            raise DegenerateSpec(f"circles need at least 16 samples, got {min_samples}")
        return np.linspace(0.0, 1.0, min_samples + 1)


@dataclass(frozen=True, eq=False)
class Polyline(PathSpec):
    """Piecewise-linear path, parametrised by arc length."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[0] == 0 or pts.size == 0:
            raise DegenerateSpec("polyline needs at least one point")
        if pts.shape[0] == 1:
            pts = np.vstack([pts, pts])
        object.__setattr__(self, "points", pts)

    @property
    def dim(self):
        return self.points.shape[1]

    def _breaks(self):
        seg = np.linalg.norm(np.diff(self.points, axis=0), axis=1)
        total = seg.sum()
        if total == 0:
            return np.linspace(0.0, 1.0, len(self.points))
        return np.concatenate([[0.0], np.cumsum(seg) / total])

    def point_at(self, t):
        t = np.clip(np.atleast_1d(np.asarray(t, dtype=float)), 0.0, 1.0)
        br = self._breaks()
        k = np.clip(np.searchsorted(br, t, side="right") - 1, 0, len(br) - 2)
        width = br[k + 1] - br[k]
        s = np.where(width > 0, (t - br[k]) / np.where(width > 0, width, 1.0), 0.0)
        out = self.points[k] + s[:, None] * (self.points[k + 1] - self.points[k])
        # exact vertices at the ends
        out[t <= 0.0] = self.points[0]
        out[t >= 1.0] = self.points[-1]
        return out

    def knots(self, min_samples):
        br = self._breaks()
        nseg = len(br) - 1
        widths = np.diff(br)
        counts = np.maximum(1, np.round(widths * max(min_samples, nseg)).astype(int))
        parts = [np.linspace(br[k], br[k + 1], counts[k] + 1)[:-1] for k in range(nseg)]
        return np.concatenate(parts + [[1.0]])


@dataclass(frozen=True)
class Concat(PathSpec):
    """Segments traversed first to last, each taking an equal share of [0, 1]."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise DegenerateSpec("concatenation of zero paths")
        for a, b in zip(parts, parts[1:]):
            gap = np.linalg.norm(a.end - b.start)
            if gap > CLOSE_TOL * max(1.0, np.abs(a.end).max()):
                raise BasePointMismatch(f"concatenated segments do not meet: gap {gap:.3g}")
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self):
        return self.parts[0].dim

    def point_at(self, t):
        t = np.clip(np.atleast_1d(np.asarray(t, dtype=float)), 0.0, 1.0)
        k_parts = len(self.parts)
        k = np.minimum((t * k_parts).astype(int), k_parts - 1)
        local = t * k_parts - k
        out = np.empty((len(t), self.dim))
        for j, part in enumerate(self.parts):
            sel = k == j
            if sel.any():
                out[sel] = part.point_at(local[sel])
        return out

    def knots(self, min_samples):
        k_parts = len(self.parts)
        out = [np.array([0.0])]
        for j, part in enumerate(self.parts):
            out.append((j + part.knots(min_samples)[1:]) / k_parts)
        return np.concatenate(out)


@dataclass(frozen=True)
class Reverse(PathSpec):
    inner: PathSpec

    @property
    def dim(self):
        return self.inner.dim

    def point_at(self, t):
        return self.inner.point_at(1.0 - np.atleast_1d(np.asarray(t, dtype=float)))

    def knots(self, min_samples):
        return 1.0 - self.inner.knots(min_samples)[::-1]


@dataclass(frozen=True, eq=False)
class Perturbed(PathSpec):
    """``base(t) + sum_k a_k sin(pi (k+1) t)``; endpoints are unchanged."""

    base: PathSpec
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.atleast_2d(np.asarray(self.amplitudes, dtype=float))
        if amps.shape[1] != self.base.dim:
            raise DimensionMismatch(f"perturbation modes need {self.base.dim} coordinates")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self):
        return self.base.dim

    def point_at(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        k = np.arange(1, len(self.amplitudes) + 1)
        modes = np.sin(np.pi * np.outer(t, k))
        out = self.base.point_at(t) + modes @ self.amplitudes
        ends = (t <= 0.0) | (t >= 1.0)
        out[ends] = self.base.point_at(t[ends])
        return out

    def knots(self, min_samples):
        return self.base.knots(min_samples)


def random_perturbation(base, rng, amplitude, modes=3, axes=None):
    """Smooth perturbation with random mode amplitudes of size ``amplitude``.

    ``axes`` restricts the displacement to the given coordinate indices.
    """
    amps = rng.uniform(-amplitude, amplitude, size=(modes, base.dim)) / np.arange(1, modes + 1)[:, None]
    if axes is not None:
        mask = np.zeros(base.dim, dtype=bool)
        mask[list(axes)] = True
        amps[:, ~mask] = 0.0
    return Perturbed(base, amps)


@dataclass(frozen=True, eq=False)
class DiscretizedPath:
    """Sampled path.  ``sampler(t)`` gives points on the underlying geometry."""

    samples: np.ndarray
    ts: np.ndarray
    is_loop: bool
    sampler: object = field(default=None, repr=False)

    base_index = 0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        ts = np.asarray(self.ts, dtype=float)
        if s.ndim != 2 or len(s) < 2 or len(ts) != len(s):
            raise DegenerateSpec("a discretized path needs at least two samples with matching parameters")
        if np.any(np.diff(ts) <= 0):
            raise DegenerateSpec("path parameters must be strictly increasing")
        s.setflags(write=False)
        ts.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "ts", ts)

    def __len__(self):
        return len(self.samples)

    @property
    def dim(self):
        return self.samples.shape[1]

    @property
    def start(self):
        return self.samples[0]

    @property
    def end(self):
        return self.samples[-1]

    def point_at(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.sampler is not None:
            return self.sampler(t)
        return np.stack([np.interp(t, self.ts, self.samples[:, k]) for k in range(self.dim)], axis=-1)


def _close(a, b):
    return np.linalg.norm(a - b) <= CLOSE_TOL * max(1.0, float(np.abs(a).max()))


def discretize(spec, min_samples=64, loop=None):
    """Sample ``spec``; ``loop=None`` detects closure from the endpoints."""
    ts = spec.knots(min_samples)
    samples = spec.point_at(ts)
    is_loop = _close(samples[0], samples[-1]) if loop is None else bool(loop)
    if is_loop:
        samples[-1] = samples[0]
    return DiscretizedPath(samples, ts, is_loop, spec.point_at)


def concat_paths(*paths):
    """Join discretized paths end to start; each gets an equal share of [0, 1]."""
    if not paths:
        raise DegenerateSpec("concatenation of zero paths")
    for a, b in zip(paths, paths[1:]):
        if not _close(a.end, b.start):
            raise BasePointMismatch(f"paths do not meet: {a.end} vs {b.start}")
    k_parts = len(paths)
    ts = [np.array([0.0])]
    samples = [paths[0].samples[:1]]
    for j, p in enumerate(paths):
        ts.append((j + p.ts[1:]) / k_parts)
        samples.append(p.samples[1:])
    samples = np.concatenate(samples)
    is_loop = _close(samples[0], samples[-1])
    if is_loop:
        samples[-1] = samples[0]

    def sampler(t):
        t = np.clip(t, 0.0, 1.0)
        k = np.minimum((t * k_parts).astype(int), k_parts - 1)
        out = np.empty((len(t), paths[0].dim))
        for j, p in enumerate(paths):
            sel = k == j
            if sel.any():
                out[sel] = p.point_at(t[sel] * k_parts - j)
        return out

    return DiscretizedPath(samples, np.concatenate(ts), is_loop, sampler)


def reverse_path(path):
    inner = path.point_at
    return DiscretizedPath(path.samples[::-1].copy(), 1.0 - path.ts[::-1], path.is_loop,
                           lambda t: inner(1.0 - t))


def winding_number(path, point, plane):
    """Signed number of turns of ``path`` (projected on ``plane``) around ``point``."""
    uv = plane.project(path.samples) - np.asarray(point, dtype=float)
    ang = np.unwrap(np.arctan2(uv[:, 1], uv[:, 0]))
    return int(np.round((ang[-1] - ang[0]) / (2 * np.pi)))
