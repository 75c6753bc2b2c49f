"""Acceptance criteria 1 to 11, each at its stated tolerance.

Every test prints one ``ACCEPTANCE <n> PASS|FAIL`` line (visible in
``pytest -v`` output) before asserting.
"""

import time

import numpy as np
import pytest
from helpers import measured_loop, random_symmetric_family
from scipy.linalg import expm

from spectral_holonomy.cartography import (
    PlaneSpec,
    classify_ep,
    enclosing_radius,
    locate_junctions,
    refine_zeros,
    scan_plane,
)
from spectral_holonomy.holonomy import Bridge, measure, pull_back, trace
from spectral_holonomy.paths import Circle, Concat, Plane, Polyline, concat_paths, discretize, random_perturbation, reverse_path
from spectral_holonomy.permutation import Permutation, compose, inverse, is_abelian, lambda_group
from spectral_holonomy.spectra import CharPoly, char_poly, cubic_discriminant, eigenvalues, resultant_discriminant, roots
from spectral_holonomy.waveguide import measure_spectrum, merging_path_measurement, propagate

FIG9_EXPECTED = {"gamma1": "(23)", "gamma2": "(132)", "gamma2_gamma1": "(13)",
                 "gamma1_gamma2": "(12)", "big": "(13)", "figure8": "(12)"}


@pytest.fixture
def verdict(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail
    return emit


def P(text):
    return Permutation.from_cycles(text, 3)


def test_criterion_01_triple_degeneracy(wg, verdict):
    t0 = time.perf_counter()
    points = [[0, 0, c] for c in (-1.0, -0.9, 0.0, 1.0)] + [[0, -4, -1]]
    worst = max(np.max(np.abs(eigenvalues(wg, x))) for x in points)
    dt = time.perf_counter() - t0
    verdict(1, worst < 1e-8, f"max |lambda| = {worst:.3g} (< 1e-8) in {dt * 1e3:.1f} ms")


def test_criterion_02_fig6_cartography(wg, verdict):
    t0 = time.perf_counter()
    spec = PlaneSpec.for_family(wg, ("im_z", "c"), {"re_z": 0.0}, [[-6.0, 2.0], [-2.0, 0.0]], (201, 201))
    field = scan_plane(wg, spec)
    cands = refine_zeros(field)
    refined = [c for c in cands + locate_junctions(field, cands) if c.refined]
    dt = time.perf_counter() - t0

    def nearest(target):
        return min(np.linalg.norm(spec.plane.project(c.location) - target) for c in refined)

    d1, d2 = nearest([0.0, -1.0]), nearest([-4.0, -1.0])
    curves = sum(c.kind == "curve" for c in refined)
    ok = d1 < 1e-3 and d2 < 1e-2 and curves > 0 and dt < 60
    verdict(2, ok, f"{curves} curve points; distance to (0,-1) {d1:.2g} (< 1e-3), "
                   f"to (-4,-1) {d2:.2g} (< 1e-2); {dt:.1f} s (< 60 s)")


def test_criterion_03_fig9_permutations(fig9, verdict):
    t0 = time.perf_counter()
    got = {name: str(measure(fig9.family, discretize(spec, 64))) for name, spec in fig9.loops.items()}
    dt = time.perf_counter() - t0
    base_shared = all(np.linalg.norm(spec.start - fig9.base) < 1e-12 for spec in fig9.loops.values())
    ok = got == FIG9_EXPECTED and base_shared
    verdict(3, ok, f"{got} in {dt:.2f} s")


def test_criterion_04_composition(wg, verdict):
    rng = np.random.default_rng(404)
    failures, nontrivial = 0, 0
    for _ in range(50):
        base = rng.uniform([-2, -3, -2], [2, 1, 1])
        s1, p1 = measured_loop(wg, base, rng, scale=0.8)
        s2, p2 = measured_loop(wg, base, rng, scale=0.8)
        p21 = measure(wg, discretize(Concat((s1, s2)), 64))
        failures += p21 != compose(p2, p1)
        nontrivial += not compose(p2, p1).is_identity()
    verdict(4, failures == 0, f"{failures} failures over 50 random pairs ({nontrivial} non-trivial products)")


def test_criterion_05_homotopy(fig9, verdict):
    rng = np.random.default_rng(505)
    axes = list(fig9.plane.indices)
    failures = 0
    for name, spec in fig9.loops.items():
        want = P(FIG9_EXPECTED[name])
        for _ in range(20):
            bent = random_perturbation(spec, rng, 3e-4, axes=axes)
            failures += measure(fig9.family, discretize(bent, 64)) != want
    verdict(5, failures == 0, f"{failures} failures over 6 loops x 20 perturbations")


def test_criterion_06_lambda_group(fig9, verdict):
    g1 = measure(fig9.family, discretize(fig9.gamma1, 64))
    g2 = measure(fig9.family, discretize(fig9.gamma2, 64))
    group = lambda_group([g1, g2])
    witness = group.commutation_witness()
    ok = group.order == 6 and not is_abelian(group) and witness is not None
    a, b = witness
    verdict(6, ok, f"generators {g1}, {g2}; order {group.order}; witness {a}*{b}={a * b} vs {b}*{a}={b * a}")


def test_criterion_07_real_spectrum(verdict):
    rng = np.random.default_rng(707)
    failures = 0
    for _ in range(100):
        fam = random_symmetric_family(rng)
        _, p = measured_loop(fam, rng.normal(size=2), rng)
        failures += not p.is_identity()
    verdict(7, failures == 0, f"{failures} non-identity permutations over 100 random loops")


def test_criterion_08_bridge_lemma(fig9, verdict):
    fam = fig9.family
    d = np.linalg.norm(fig9.ep2 - fig9.ep3)
    r = 0.3 * d
    e = fig9.plane.embed
    x1, x2 = fig9.ep2 + [-r, 0], fig9.ep2 + [r, 0]
    b = Bridge(discretize(Polyline(e(np.array([x1, fig9.ep2 + [-r, r], fig9.ep2 + [r, r], x2]))), 32))
    bt = Bridge(discretize(Polyline(e(np.array([x1, fig9.ep2 + [-r, -r], fig9.ep2 + [r, -r], x2]))), 32))
    loop = discretize(Circle.through(fig9.plane, (fig9.ep2 + fig9.ep3) / 2, x2), 64)
    p = measure(fam, pull_back(b, loop))
    pt = measure(fam, pull_back(bt, loop))
    q = measure(fam, concat_paths(bt.path, reverse_path(b.path)))
    ok = pt == inverse(q) * p * q
    verdict(8, ok, f"p_b = {p}, p_b~ = {pt}, q = {q}, q^-1 p_b q = {inverse(q) * p * q}")


def test_criterion_09_plane_dependent_degree(wg, verdict):
    t0 = time.perf_counter()
    loc = np.array([0.0, 0.0, -1.0])
    two = classify_ep(wg, loc, Plane(wg.params, ("re_z", "im_z"), {"c": -1.0}), 0.3)
    spec = PlaneSpec.for_family(wg, ("re_z", "c"), {"im_z": 0.1}, [[-1, 1], [-2, 0]], (201, 201))
    radius, _ = enclosing_radius(wg, spec, spec.plane.project(loc))
    three = classify_ep(wg, loc, spec, radius)
    dt = time.perf_counter() - t0
    ok = two.cycle_type() == (2,) and three.cycle_type() == (3,)
    verdict(9, ok, f"c=-1 probe {two}; Im z=0.1 probe (radius {radius:.4f}) {three}; {dt:.1f} s")


def test_criterion_10_waveguide_route(fig9, verdict):
    fam = fig9.family
    rng = np.random.default_rng(1010)
    worst = 0.0
    for _ in range(10):
        x = rng.uniform([-2, -3, -2], [2, 1, 1])
        direct = eigenvalues(fam, x)
        measured = measure_spectrum(fam.evaluate(x), direct)
        worst = max(worst, float(np.max(np.abs(measured - direct) / np.maximum(np.abs(direct), 1.0))))
    path = discretize(fig9.gamma2, 64)
    merged = merging_path_measurement(fam, path).endpoint_map()
    direct_perm = trace(fam, path).endpoint_map()
    ok = worst <= 1e-6 and merged == direct_perm == P("(132)")
    verdict(10, ok, f"worst relative error {worst:.2g} (<= 1e-6); merging path {merged}, direct {direct_perm}")


def test_criterion_11_numerics(verdict):
    rng = np.random.default_rng(1111)
    ratios = []
    for _ in range(10):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        h = a * (5 / np.linalg.norm(a, 2))
        e0 = rng.normal(size=3) + 1j * rng.normal(size=3)
        exact = expm(-1j * h) @ e0
        err = [np.linalg.norm(propagate(h, e0, 1.0, dx).states[-1] - exact) for dx in (0.02, 0.01)]
        ratios.append(err[0] / err[1])
    resid = 0.0
    disc_err = 0.0
    for _ in range(1000):
        c = rng.normal(size=3) + 1j * rng.normal(size=3)
        p = CharPoly(c)
        resid = max(resid, float(np.max(np.abs(p(roots(p))))))
        d1, d2 = cubic_discriminant(c), resultant_discriminant(c)
        disc_err = max(disc_err, abs(d1 - d2) / abs(d1))
    ok = all(abs(r - 16) <= 4 for r in ratios) and resid <= 1e-10 and disc_err <= 1e-9
    verdict(11, ok, f"error ratios {min(ratios):.2f}..{max(ratios):.2f} (16 +- 4); "
                    f"max |p(lambda)| {resid:.2g} (<= 1e-10); discriminant agreement {disc_err:.2g} (<= 1e-9)")
