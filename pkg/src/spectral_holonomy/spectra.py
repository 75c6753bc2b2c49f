"""Small dense complex spectra: characteristic polynomials, roots, discriminants.

Polynomials are monic and stored low-to-high: ``coeffs[k]`` multiplies
``lam**k`` and the leading 1 is implicit.  Batched variants take arrays with
a leading batch axis and are what the scanning and tracking code uses.
"""

from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np

from .errors import DegenerateSpectrum, NoConvergence, NotApplicable

EPS = np.finfo(float).eps
MAX_N = 8

# scale-relative tolerances, multiplied by max(1, spectral radius)
DEGENERACY_TOL = 1e-10
TIE_TOL = 1e-9
CLUSTER_TOL = 1e-7
REALITY_TOL = 1e-9
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class CharPoly:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return len(self.coeffs)

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=complex)
        val = np.ones_like(lam)
        for ck in self.coeffs[::-1]:
            val = val * lam + ck
        return val

    def derivative_coeffs(self):
        """Coefficients (high-to-low, not monic) of the derivative."""
        n = self.degree
        full = np.concatenate(([1.0 + 0j], self.coeffs[::-1]))
        return full[:-1] * np.arange(n, 0, -1)

    def highest_first(self):
        return np.concatenate(([1.0 + 0j], self.coeffs[::-1]))

    def __str__(self):
        terms = [f"lam^{self.degree}"]
        for k in range(self.degree - 1, -1, -1):
            c = self.coeffs[k]
            if c != 0:
                terms.append(f"({c.real:.6g}{c.imag:+.6g}j) lam^{k}")
        return " + ".join(terms)


class PTPhase(Enum):
    EXACT = "exact"
    BROKEN = "broken"
    NOT_SYMMETRIC = "not_symmetric"


@dataclass(frozen=True)
class PTReport:
    symmetric: bool
    phase: PTPhase
    max_violation: float


def _as_matrices(m):
    a = np.asarray(m, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    if a.shape[-1] > MAX_N:
        raise ValueError(f"matrix dimension {a.shape[-1]} exceeds {MAX_N}")
    return a


def char_poly_coeffs(mats, snap=True):
    """Faddeev-LeVerrier on a stack of matrices; returns (..., n) coefficients.

    With ``snap`` (the default), coefficients below the rounding floor of the
    recursion are set to exact zero, component-wise, so that nilpotent
    matrices with irrational entries give exactly ``lam**n``.
    """
    a = _as_matrices(mats)
    n = a.shape[-1]
    eye = np.eye(n, dtype=complex)
    coeffs = np.empty(a.shape[:-2] + (n,), dtype=complex)
    m = np.zeros_like(a)
    c_prev = np.ones(a.shape[:-2], dtype=complex)
    for k in range(1, n + 1):
        m = a @ m + c_prev[..., None, None] * eye
        ck = -np.trace(a @ m, axis1=-2, axis2=-1) / k
        coeffs[..., n - k] = ck
        c_prev = ck
    if not snap:
        return coeffs

    norm = np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))
    for k in range(1, n + 1):
        tol = 16 * k * EPS * norm ** k
        c = coeffs[..., n - k]
        re = np.where(np.abs(c.real) <= tol, 0.0, c.real)
        im = np.where(np.abs(c.imag) <= tol, 0.0, c.imag)
        coeffs[..., n - k] = re + 1j * im
    return coeffs


def char_poly(m):
    return CharPoly(char_poly_coeffs(m))


def _horner(coeffs, z):
    val = np.ones_like(z)
    for j in range(coeffs.shape[-1] - 1, -1, -1):
        val = val * z + coeffs[..., j, None]
    return val


def _horner_derivative(coeffs, z):
    n = coeffs.shape[-1]
    val = np.full_like(z, n)
    for j in range(n - 1, 0, -1):
        val = val * z + j * coeffs[..., j, None]
    return val


def _durand_kerner(c, max_iter=1000):
    m, n = c.shape
    if n == 1:
        return -c.copy()
    k = np.arange(n)
    mags = np.abs(c) ** (1.0 / (n - k))
    mags[:, 0] = (np.abs(c[:, 0]) / 2) ** (1.0 / n)
    bound = 2 * mags.max(axis=1)
    bound = np.where(bound > 0, bound, 1.0)
    z = 0.5 * bound[:, None] * np.exp(1j * (2 * np.pi * k / n + 0.4))[None, :]

    offdiag = ~np.eye(n, dtype=bool)
    active = np.arange(m)
    for _ in range(max_iter):
        if active.size == 0:
            break
        za = z[active]
        ca = c[active]
        diff = za[:, :, None] - za[:, None, :]
        diff = np.where(offdiag, diff, 1.0)
        # coincident iterates would stall the update; nudge them apart
        diff = np.where(diff == 0, 1e-300, diff)
        w = _horner(ca, za) / np.prod(diff, axis=2)
        za = za - w
        z[active] = za
        scale = np.maximum(1.0, np.abs(za).max(axis=1))
        done = np.abs(w).max(axis=1) <= 4 * EPS * scale
        active = active[~done]

    # one Newton polishing round, kept only where it lowers the residual
    p = _horner(c, z)
    dp = _horner_derivative(c, z)
    safe = np.abs(dp) > 0
    step = np.where(safe, p / np.where(safe, dp, 1.0), 0.0)
    z_new = z - step
    better = np.abs(_horner(c, z_new)) < np.abs(p)
    z = np.where(better, z_new, z)

    if active.size:
        resid = np.abs(_horner(c[active], z[active])).max(axis=1)
        limit = 1e-10 * np.maximum(1.0, np.abs(c[active]).max(axis=1))
        if np.any(resid > limit):
            raise NoConvergence(
                f"Durand-Kerner did not converge for {np.sum(resid > limit)} polynomial(s)"
            )
    return z


def roots_batch(coeffs):
    """Roots of a stack of monic polynomials, shape (m, n) -> (m, n)."""
    c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    m, n = c.shape
    out = np.zeros((m, n), dtype=complex)
    # exact zero low-order coefficients are exact zero roots
    zero_lead = np.cumprod(c == 0, axis=1).sum(axis=1)
    for k0 in np.unique(zero_lead):
        rows = np.nonzero(zero_lead == k0)[0]
        if k0 < n:
            out[rows, k0:] = _durand_kerner(c[rows, k0:])
    return out


def roots(p):
    """Roots of a monic :class:`CharPoly` (or coefficient sequence)."""
    coeffs = p.coeffs if isinstance(p, CharPoly) else np.asarray(p, dtype=complex)
    if len(coeffs) < 1:
        raise ValueError("polynomial degree must be at least 1")
    return roots_batch(coeffs[None, :])[0]


def cubic_discriminant(coeffs):
    """Closed form for lam^3 + a lam^2 + b lam + c, batched over leading axes."""
    c = np.asarray(coeffs, dtype=complex)
    c0, b, a = c[..., 0], c[..., 1], c[..., 2]
    return 18 * a * b * c0 - 4 * a ** 3 * c0 + a * a * b * b - 4 * b ** 3 - 27 * c0 * c0


def sylvester_matrix(p_high, q_high):
    """Sylvester matrix of two polynomials given highest-first, batched."""
    p_high = np.asarray(p_high, dtype=complex)
    q_high = np.asarray(q_high, dtype=complex)
    dp = p_high.shape[-1] - 1
    dq = q_high.shape[-1] - 1
    size = dp + dq
    s = np.zeros(p_high.shape[:-1] + (size, size), dtype=complex)
    for i in range(dq):
        s[..., i, i:i + dp + 1] = p_high
    for i in range(dp):
        s[..., dq + i, i:i + dq + 1] = q_high
    return s


def resultant_discriminant(coeffs):
    """Discriminant via the Sylvester resultant of p and p', any degree >= 2."""
    c = np.asarray(coeffs, dtype=complex)
    n = c.shape[-1]
    if n < 2:
        raise ValueError("discriminant needs degree >= 2")
    p_high = np.concatenate([np.ones(c.shape[:-1] + (1,), dtype=complex), c[..., ::-1]], axis=-1)
    q_high = p_high[..., :-1] * np.arange(n, 0, -1)
    res = np.linalg.det(sylvester_matrix(p_high, q_high))
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    return sign * res


def discriminant_batch(coeffs):
    c = np.asarray(coeffs, dtype=complex)
    n = c.shape[-1]
    if n == 2:
        return c[..., 1] ** 2 - 4 * c[..., 0]
    if n == 3:
        return cubic_discriminant(c)
    return resultant_discriminant(c)


def discriminant(p):
    coeffs = p.coeffs if isinstance(p, CharPoly) else np.asarray(p, dtype=complex)
    if len(coeffs) < 2:
        raise ValueError("discriminant needs degree >= 2")
    return complex(discriminant_batch(coeffs))


def coefficient_scale(coeffs):
    """Root-size scale max(1, max_k |c_k|^(1/(n-k))), batched."""
    c = np.asarray(coeffs, dtype=complex)
    n = c.shape[-1]
    k = np.arange(n)
    return np.maximum(1.0, (np.abs(c) ** (1.0 / (n - k))).max(axis=-1))


def spectral_scale(values):
    return max(1.0, float(np.max(np.abs(values))))


def min_gap(values):
    """Smallest pairwise distance along the last axis."""
    v = np.asarray(values)
    d = np.abs(v[..., :, None] - v[..., None, :])
    n = v.shape[-1]
    d[..., np.arange(n), np.arange(n)] = np.inf
    return d.min(axis=(-2, -1))


def root_clusters(values, scale=None):
    """Group root indices closer than the clustering tolerance (transitively)."""
    v = np.asarray(values, dtype=complex)
    if scale is None:
        scale = spectral_scale(v)
    tol = CLUSTER_TOL * scale
    parent = list(range(len(v)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in combinations(range(len(v)), 2):
        if abs(v[i] - v[j]) <= tol:
            parent[find(i)] = find(j)
    groups = {}
    for i in range(len(v)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def label_order(values):
    """Indices sorting a spectrum by descending Im, ties by ascending Re."""
    v = np.asarray(values, dtype=complex)
    scale = spectral_scale(v)
    if len(v) > 1 and min_gap(v) < DEGENERACY_TOL * scale:
        raise DegenerateSpectrum(
            f"eigenvalues closer than {DEGENERACY_TOL * scale:.3g}; point is on or near the discriminant set"
        )
    tie = TIE_TOL * scale
    order = sorted(range(len(v)), key=lambda i: (-v[i].imag, v[i].real))
    # imaginary parts within the tie tolerance form one group, sorted by real part
    out, group = [], [order[0]]
    for i in order[1:]:
        if abs(v[i].imag - v[group[-1]].imag) <= tie:
            group.append(i)
        else:
            out.extend(sorted(group, key=lambda j: (v[j].real, -v[j].imag)))
            group = [i]
    out.extend(sorted(group, key=lambda j: (v[j].real, -v[j].imag)))
    return np.array(out)


def label(values):
    v = np.asarray(values, dtype=complex)
    return v[label_order(v)]


def eigenvalues(family, x):
    return roots(char_poly(family.evaluate(x)))


def spectra_many(family, points):
    """Unordered spectra at a batch of parameter points, shape (m, n)."""
    mats = family.evaluate_many(points)
    return roots_batch(char_poly_coeffs(mats))


def pt_classify(family, x, parity=None):
    p = family.parity if parity is None else np.asarray(parity, dtype=complex)
    if p is None:
        raise NotApplicable("family declares no parity operator")
    m = family.evaluate(x)
    violation = float(np.max(np.abs(p @ m.conj() @ p - m)))
    scale = max(1.0, float(np.max(np.abs(m))))
    if violation > SYMMETRY_TOL * scale:
        return PTReport(False, PTPhase.NOT_SYMMETRIC, violation)
    # PT symmetric operators have real characteristic polynomials
    coeffs = char_poly_coeffs(m).real.astype(complex)
    vals = roots(coeffs)
    exact = np.all(np.abs(vals.imag) <= REALITY_TOL * spectral_scale(vals))
    return PTReport(True, PTPhase.EXACT if exact else PTPhase.BROKEN, violation)
