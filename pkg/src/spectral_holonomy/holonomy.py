"""Eigenvalue continuation along paths and the permutations it induces.

At every sample the spectrum is sorted by the labelling convention
(descending imaginary part, ties by ascending real part).  A step from
sample ``k`` to ``k+1`` is matched by the minimum-total-distance
assignment, and the step is only accepted when every eigenvalue moves less
than half the smaller spectral gap at its two ends.  Otherwise the step is
bisected on the true path geometry.

``matchings[k](a) = b`` means the eigenvalue labelled ``a`` at sample ``k``
continues to the one labelled ``b`` at sample ``k+1``.  Composing them around
a loop gives the loop permutation in base-point labels.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations

import numpy as np

from .errors import BasePointMismatch, NotALoop, OnDiscriminant, TrackingAmbiguous
from .paths import DiscretizedPath, concat_paths, reverse_path
from .permutation import Permutation, compose, conjugate, inverse, is_abelian, lambda_group
from .spectra import DEGENERACY_TOL, label_order, min_gap, spectra_many

__all__ = [
    "Bridge", "SpectralTrace", "TrackingOptions", "bridge_relabeling", "compose", "conjugate",
    "inverse", "is_abelian", "lambda_group", "loop_permutation", "measure", "pull_back", "relabel", "trace",
]


@dataclass(frozen=True)
class TrackingOptions:
    max_depth: int = 24
    safety: float = 0.5


@dataclass(frozen=True, eq=False)
class SpectralTrace:
    """Tracked spectra along a (refined) path.

    ``spectra[k]`` is sorted by the labelling convention at sample ``k``;
    ``sheets[k]`` follows the base-point labels along the continuation.
    ``step_index[k]`` is the step of the original discretisation that the
    refined step ``k`` belongs to.
    """

    path: object
    spectra: np.ndarray
    sheets: np.ndarray
    matchings: tuple
    refinement_depth: np.ndarray
    step_index: np.ndarray = field(repr=False)

    @property
    def n(self):
        return self.spectra.shape[1]

    def endpoint_map(self):
        """Composite of all step matchings: start labels to end labels."""
        total = Permutation.identity(self.n)
        for m in self.matchings:
            total = m * total
        return total


@lru_cache(maxsize=None)
def _all_permutations(n):
    return np.array(list(permutations(range(n))), dtype=np.intp)


def _match(cur, nxt):
    """Best assignment per step for stacked spectra ``cur``, ``nxt`` of shape (s, n)."""
    perms = _all_permutations(cur.shape[1])
    cost = np.zeros((cur.shape[0], len(perms)))
    for j in range(cur.shape[1]):
        cost += np.abs(cur[:, j, None] - nxt[:, perms[:, j]])
    best = perms[np.argmin(cost, axis=1)]
    moved = np.abs(cur - np.take_along_axis(nxt, best, axis=1)).max(axis=1)
    return best, moved


def _sorted_spectra(values, offset=0):
    gaps = min_gap(values)
    scale = np.maximum(1.0, np.abs(values).max(axis=1))
    bad = np.nonzero(gaps < DEGENERACY_TOL * scale)[0]
    if bad.size:
        k = int(bad[0])
        raise OnDiscriminant(f"sample {k + offset} lies on the discriminant set (eigenvalue gap {gaps[k]:.3g})",
                             index=k + offset)
    order = np.array([label_order(v) for v in values])
    return np.take_along_axis(values, order, axis=1), gaps


def trace(family, path, opts=None, spectrum_fn=None):
    """Continue the spectrum of ``family`` along ``path``.

    ``spectrum_fn(points) -> (m, n)`` replaces direct root finding, which is
    how the waveguide emulation feeds measured eigenvalues in.
    """
    opts = opts or TrackingOptions()
    if spectrum_fn is None:
        def spectrum_fn(pts):
            return spectra_many(family, pts)

    ts = list(path.ts)
    xs = list(path.samples)
    vals, gaps = _sorted_spectra(spectrum_fn(path.samples))
    vals, gaps = list(vals), list(gaps)

    # (left node, right node, depth, original step)
    pending = [(k, k + 1, 0, k) for k in range(len(ts) - 1)]
    accepted = []
    while pending:
        left = np.array([vals[a] for a, _, _, _ in pending])
        right = np.array([vals[b] for _, b, _, _ in pending])
        lim = opts.safety * np.minimum([gaps[a] for a, _, _, _ in pending], [gaps[b] for _, b, _, _ in pending])
        best, moved = _match(left, right)
        unsafe = []
        for (a, b, depth, step), perm, ok in zip(pending, best, moved < lim):
            if ok:
                accepted.append((ts[a], a, b, depth, step, perm))
            elif depth >= opts.max_depth:
                raise TrackingAmbiguous(
                    f"step {step} still unsafe after {depth} bisections near t={ts[a]:.12g}; "
                    "the path passes too close to the discriminant set",
                    index=step, t=ts[a])
            else:
                unsafe.append((a, b, depth, step))
        if not unsafe:
            break
        t_mid = np.array([(ts[a] + ts[b]) / 2 for a, b, _, _ in unsafe])
        x_mid = path.point_at(t_mid)
        try:
            v_mid, g_mid = _sorted_spectra(spectrum_fn(x_mid))
        except OnDiscriminant as e:
            step = unsafe[e.index][3]
            raise OnDiscriminant(f"refinement of step {step} hit the discriminant set at t={t_mid[e.index]:.12g}",
                                 index=step) from None
        pending = []
        for (a, b, depth, step), t, x, v, g in zip(unsafe, t_mid, x_mid, v_mid, g_mid):
            m = len(ts)
            ts.append(t)
            xs.append(x)
            vals.append(v)
            gaps.append(g)
            pending += [(a, m, depth + 1, step), (m, b, depth + 1, step)]

    accepted.sort(key=lambda r: r[0])
    nodes = [accepted[0][1]] + [r[2] for r in accepted]
    spectra = np.array([vals[k] for k in nodes])
    matchings = tuple(Permutation(tuple(r[5])) for r in accepted)

    sheets = np.empty_like(spectra)
    where = np.arange(spectra.shape[1])
    sheets[0] = spectra[0]
    for k, m in enumerate(matchings):
        where = np.array([m(j) for j in where])
        sheets[k + 1] = spectra[k + 1][where]

    refined = DiscretizedPath(np.array([xs[k] for k in nodes]), np.array([ts[k] for k in nodes]),
                              path.is_loop, path.point_at)
    return SpectralTrace(refined, spectra, sheets, matchings,
                         np.array([r[3] for r in accepted]), np.array([r[4] for r in accepted]))


def loop_permutation(t):
    if not t.path.is_loop:
        raise NotALoop("permutations are only defined for closed paths")
    return t.endpoint_map()


def measure(family, path, opts=None):
    """Shorthand: trace a loop and return its permutation."""
    return loop_permutation(trace(family, path, opts))


@dataclass(frozen=True, eq=False)
class Bridge:
    """Open path between two base points."""

    path: object

    @property
    def start(self):
        return self.path.start

    @property
    def end(self):
        return self.path.end


def pull_back(b, loop):
    """The loop ``b^-1 loop b`` based at ``b.start``."""
    if not np.allclose(loop.start, b.end, rtol=0, atol=1e-9 * max(1.0, float(np.abs(b.end).max()))):
        raise BasePointMismatch(f"loop is based at {loop.start}, bridge ends at {b.end}")
    if not np.any(b.path.samples != b.path.samples[0]):
        return loop
    return concat_paths(b.path, loop, reverse_path(b.path))


def bridge_relabeling(family, b, opts=None):
    """Map from labels at ``b.start`` to labels at ``b.end`` induced by tracing ``b``."""
    return trace(family, b.path, opts).endpoint_map()


def relabel(p, r):
    """Pull a permutation in primed labels back through relabelling ``r``: ``r^-1 p r``."""
    return conjugate(p, r)
