"""Emulated waveguide measurements.

Field amplitudes obey ``dE/dx = -i H E``.  A single eigenmode evolves as
``E(x) = exp(-i lam x) E(0)``, so fitting the logarithm of a simulated
profile against ``x`` recovers ``lam`` without root finding.  The merging
path measurement repeats this at every sample of a loop and hands the
measured spectra to the tracker.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InputError, PoorFit, StepTooLarge
from .holonomy import trace
from .spectra import char_poly_coeffs, roots_batch

ENERGY_DRIFT_LIMIT = 1e-2
FIT_DISCARD = 0.1
FIT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class FieldState:
    amplitudes: np.ndarray
    x: float


@dataclass(frozen=True, eq=False)
class PropagationRecord:
    """Sampled propagation: ``states[k]`` are the amplitudes at ``xs[k]``."""

    xs: np.ndarray
    states: np.ndarray
    operator: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.xs)

    def state(self, k):
        return FieldState(self.states[k].copy(), float(self.xs[k]))

    def rows(self):
        """Rows ``x, re E1, im E1, ...`` for export."""
        cols = [self.xs]
        for k in range(self.states.shape[1]):
            cols += [self.states[:, k].real, self.states[:, k].imag]
        return np.stack(cols, axis=1)


class Fit(NamedTuple):
    value: complex
    residual: float


def rk4_step_matrix(h, dx):
    """Propagator of one classical Runge-Kutta step for ``dE/dx = -i H E``.

    For a linear system the four stages collapse to the degree-4 Taylor
    polynomial of ``exp(-i H dx)``.
    """
    a = -1j * np.asarray(h, dtype=complex) * dx
    eye = np.eye(a.shape[-1], dtype=complex)
    a2 = a @ a
    return eye + a + a2 / 2 + a2 @ a / 6 + a2 @ a2 / 24


def propagate(h, e0, x_max, dx):
    """Integrate the field equations from 0 to ``x_max`` with step ``dx``.

    ``e0`` may be a :class:`FieldState`, a vector, or an (n, m) array of m
    initial fields propagated together (then ``states`` is (steps, n, m)).

    Every step is checked against two half steps.  If the field energies
    after one step and after two half steps differ by more than
    ``ENERGY_DRIFT_LIMIT`` (relative), the step does not resolve the gain
    and :class:`StepTooLarge` is raised.
    """
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    amps = e0.amplitudes if isinstance(e0, FieldState) else e0
    e = np.array(amps, dtype=complex)
    if not dx > 0 or not x_max >= dx:
        raise InputError(f"need 0 < dx <= x_max, got dx={dx}, x_max={x_max}")
    if e.shape[0] != h.shape[0]:
        raise InputError(f"field has {e.shape[0]} amplitudes, operator is {h.shape[0]}x{h.shape[1]}")
    steps = int(np.ceil(x_max / dx - 1e-9))
    dx = x_max / steps
    s = rk4_step_matrix(h, dx)
    half = rk4_step_matrix(h, dx / 2)
    s2 = half @ half
    out = np.empty((steps + 1,) + e.shape, dtype=complex)
    out[0] = e
    for k in range(steps):
        nxt = s @ e
        fine = np.sum(np.abs(s2 @ e) ** 2, axis=0)
        drift = np.max(np.abs(np.sum(np.abs(nxt) ** 2, axis=0) / fine - 1))
        if drift > ENERGY_DRIFT_LIMIT:
            # the per-step error scales like dx^5
            suggest = 0.5 * dx * (ENERGY_DRIFT_LIMIT / drift) ** 0.2
            raise StepTooLarge(
                f"step error changes the field energy by {drift:.3g} at x={(k + 1) * dx:.6g}; "
                f"reduce dx below {suggest:.3g}")
        e = nxt
        out[k + 1] = e
    return PropagationRecord(np.linspace(0.0, x_max, steps + 1), out, h)


def _log_profile(values):
    return np.log(np.abs(values)) + 1j * np.unwrap(np.angle(values))


def extract_eigenvalue(rec, component=None):
    """Fit ``log E_k(x) = log E_k(0) - i lam x`` over the record.

    The first 10% of samples are discarded.  ``component`` defaults to the
    channel with the largest initial amplitude.
    """
    states = rec.states
    if states.ndim != 2:
        raise InputError("extract from a single-field record")
    if component is None:
        component = int(np.argmax(np.abs(states[0])))
    start = int(FIT_DISCARD * len(rec.xs))
    xs = rec.xs[start:]
    vals = states[start:, component]
    if np.any(np.abs(vals) < np.finfo(float).tiny * 1e10):
        raise PoorFit(f"channel {component} amplitude underflows")
    logs = _log_profile(vals)
    design = np.stack([np.ones_like(xs), xs], axis=1)
    coef, *_ = np.linalg.lstsq(design.astype(complex), logs, rcond=None)
    resid = float(np.sqrt(np.mean(np.abs(design @ coef - logs) ** 2)))
    lam = 1j * coef[1]
    if resid > FIT_TOL:
        raise PoorFit(f"log-linear fit residual {resid:.3g} exceeds {FIT_TOL:g}; the seed is not a single mode")
    return Fit(complex(lam), resid)


def eigenmode(h, lam, iterations=3):
    """Approximate eigenvector for eigenvalue ``lam`` by shifted inverse iteration."""
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    scale = max(1.0, float(np.abs(lam)), float(np.abs(h).max()))
    shifted = h - (lam + 1e-10 * scale) * np.eye(n)
    v = np.ones(n, dtype=complex) + 0.1j * np.arange(n)
    for _ in range(iterations):
        v = np.linalg.solve(shifted, v)
        v = v / np.linalg.norm(v)
    return v


def auto_settings(values):
    """Propagation length and step for a spectrum ``values``.

    The length keeps ``|Im lam| x_max <= 30`` and limits the relative
    growth of the other modes; the step keeps the gain per step small so
    the fit sees a smooth profile.
    """
    im = np.abs(np.imag(values))
    spread = float(np.ptp(np.imag(values)))
    radius = max(1.0, float(np.abs(values).max()))
    x_max = min(10.0, 30.0 / max(im.max(), 1e-300), 8.0 / max(spread, 1e-300))
    dx = min(0.01, 0.05 / radius, 0.25 * ENERGY_DRIFT_LIMIT / max(im.max(), 1e-300), x_max / 200)
    return x_max, dx


def measure_spectrum(h, values=None, x_max=None, dx=None):
    """Eigenvalues of ``h`` obtained through simulated single-mode propagation."""
    h = np.asarray(h, dtype=complex)
    if values is None:
        values = roots_batch(char_poly_coeffs(h[None]))[0]
    auto_x, auto_dx = auto_settings(values)
    x_max = auto_x if x_max is None else x_max
    dx = auto_dx if dx is None else dx
    seeds = np.stack([eigenmode(h, lam) for lam in values], axis=1)
    rec = propagate(h, seeds, x_max, dx)
    out = np.empty(len(values), dtype=complex)
    for k in range(len(values)):
        single = PropagationRecord(rec.xs, rec.states[:, :, k], h)
        out[k] = extract_eigenvalue(single).value
    return out


def merging_path_measurement(family, loop, opts=None, x_max=None, dx=None):
    """Trace ``loop`` with eigenvalues measured by propagation at every sample."""
    def spectrum_fn(points):
        mats = family.evaluate_many(points)
        direct = roots_batch(char_poly_coeffs(mats))
        return np.array([measure_spectrum(m, v, x_max, dx) for m, v in zip(mats, direct)])

    return trace(family, loop, opts, spectrum_fn=spectrum_fn)
