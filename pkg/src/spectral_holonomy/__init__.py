"""Spectral holonomy of non-Hermitian operator families.

Locate degeneracies through the discriminant, track eigenvalues around
based loops, and read off the permutation each loop induces.
"""

from .cartography import (
    DiscriminantField,
    EPCandidate,
    PlaneSpec,
    classify_ep,
    enclosing_radius,
    locate_junctions,
    refine_zeros,
    scan_plane,
    trace_line,
)
from .errors import HolonomyError, InputError, NumericalError
from .family import OperatorFamily, builtin, describe_builtins, load_family, parse_family, print_family
from .holonomy import (
    Bridge,
    SpectralTrace,
    TrackingOptions,
    bridge_relabeling,
    loop_permutation,
    measure,
    pull_back,
    relabel,
    trace,
)
from .paths import Circle, Concat, Perturbed, Plane, Polyline, Reverse, concat_paths, discretize, reverse_path
from .permutation import LambdaGroup, Permutation, compose, conjugate, inverse, is_abelian, lambda_group
from .spectra import char_poly, discriminant, eigenvalues, label, pt_classify, roots
from .waveguide import extract_eigenvalue, measure_spectrum, merging_path_measurement, propagate

__version__ = "0.1.0"
