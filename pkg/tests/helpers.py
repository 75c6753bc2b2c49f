"""Random loop generators shared by the property and acceptance tests."""

import numpy as np

from spectral_holonomy.errors import NumericalError
from spectral_holonomy.family import parse_family
from spectral_holonomy.holonomy import measure
from spectral_holonomy.paths import Circle, Plane, Polyline, discretize


def random_loop(family, base, rng, scale=1.0):
    """A random circle or closed triangle through ``base``."""
    if rng.random() < 0.6:
        axes = tuple(rng.choice(family.params, size=2, replace=False))
        fixed = {p: base[k] for k, p in enumerate(family.params) if p not in axes}
        plane = Plane(family.params, axes, fixed)
        uv = plane.project(base)
        center = uv + rng.normal(size=2) * scale
        return Circle.through(plane, center, uv, "ccw" if rng.random() < 0.5 else "cw")
    p1, p2 = base + rng.normal(size=(2, len(base))) * scale
    return Polyline(np.array([base, p1, p2, base]))


def measured_loop(family, base, rng, min_samples=64, scale=1.0, tries=20):
    """Random loop whose trace succeeds, with its permutation."""
    for _ in range(tries):
        spec = random_loop(family, base, rng, scale)
        try:
            return spec, measure(family, discretize(spec, min_samples))
        except NumericalError:
            continue
    raise RuntimeError("no traceable random loop found")


def random_symmetric_family(rng, n=3):
    """Real symmetric A0 + x A1 + y A2 with random entries, as a parsed family."""
    mats = []
    for _ in range(3):
        a = rng.normal(size=(n, n))
        mats.append((a + a.T) / 2)
    entries = [[f"({float(mats[0][i, j])!r}) + x*({float(mats[1][i, j])!r}) + y*({float(mats[2][i, j])!r})"
                for j in range(n)]
               for i in range(n)]
    return parse_family({"n": n, "params": ["x", "y"], "entries": entries})
