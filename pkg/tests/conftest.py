import numpy as np
import pytest

from spectral_holonomy.cartography import PlaneSpec, refine_zeros, scan_plane
from spectral_holonomy.family import builtin
from spectral_holonomy.paths import Circle, Concat, Reverse


@pytest.fixture(scope="session")
def wg():
    return builtin("waveguide_T")


class Fig9:
    """Loops in the plane c = -0.9 built from scan-located degeneracies."""

    def __init__(self, family):
        self.family = family
        self.spec = PlaneSpec.for_family(family, ("re_z", "im_z"), {"c": -0.9},
                                         [[-0.01, 0.01], [-0.01, 0.01]], (101, 101))
        self.plane = self.spec.plane
        self.candidates = [c for c in refine_zeros(scan_plane(family, self.spec)) if c.refined]
        self.ep2, self.ep3 = (self.plane.project(c.location) for c in self.candidates)
        d = self.ep2 - self.ep3
        normal = np.array([d[1], -d[0]])
        mid = (self.ep2 + self.ep3) / 2
        self.base_uv = mid + 0.5 * normal
        self.base = self.plane.embed(self.base_uv)
        self.gamma1 = Circle.through(self.plane, self.ep2, self.base_uv)
        self.gamma2 = Circle.through(self.plane, self.ep3, self.base_uv)
        self.big = Circle.through(self.plane, mid - 0.5 * normal, self.base_uv)
        self.loops = {
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "gamma2_gamma1": Concat((self.gamma1, self.gamma2)),
            "gamma1_gamma2": Concat((self.gamma2, self.gamma1)),
            "big": self.big,
            "figure8": Concat((self.gamma2, Reverse(self.gamma1))),
        }


@pytest.fixture(scope="session")
def fig9(wg):
    return Fig9(wg)


class Fig6:
    """Scan of the plane re_z = 0 with refined candidates and junctions."""

    def __init__(self, family):
        from spectral_holonomy.cartography import locate_junctions

        self.spec = PlaneSpec.for_family(family, ("im_z", "c"), {"re_z": 0.0},
                                         [[-6.0, 2.0], [-2.0, 0.0]], (201, 201))
        self.field = scan_plane(family, self.spec, threads=4)
        self.candidates = refine_zeros(self.field)
        self.junctions = locate_junctions(self.field, self.candidates)


@pytest.fixture(scope="session")
def fig6(wg):
    return Fig6(wg)
