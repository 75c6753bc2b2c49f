"""Command-line front end.

Subcommands: scan, trace, verify, classify, simulate, families.  Every run
writes its CSV outputs and a ``report.json`` into ``--out``.  Exit codes:
0 success, 1 verification mismatch, 2 configuration error, 3 numerical
failure.
"""

import argparse
import json
import sys
import time

import numpy as np

from . import report
from .cartography import PlaneSpec, classify_ep, enclosing_radius, locate_junctions, refine_zeros, scan_plane
from .config import (
    ConfigError,
    LocateMismatch,
    family_from,
    load_config,
    plane_from,
    plane_spec_from,
    require,
    resolve_geometry,
    tracking_from,
)
from .errors import InputError, NumericalError
from .family import describe_builtins
from .holonomy import trace
from .paths import discretize, random_perturbation
from .permutation import Permutation, is_abelian, lambda_group
from .spectra import eigenvalues, label
from .waveguide import auto_settings, eigenmode, extract_eigenvalue, merging_path_measurement, propagate

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


class Run:
    """Collects the run report and writes outputs under ``--out``."""

    def __init__(self, args, config):
        self.args = args
        self.config = config
        self.outputs = []
        self.permutations = {}
        self.warnings = []
        self.checks = []
        self.timings = {}
        self.extra = {}
        self._t0 = time.perf_counter()

    def log(self, msg):
        if not self.args.quiet:
            print(msg, file=sys.stderr)

    def say(self, msg):
        print(msg)

    def path(self, name):
        return f"{self.args.out}/{name}"

    def wrote(self, path):
        self.outputs.append(path)
        self.log(f"wrote {path}")

    def timed(self, key, fn, *a, **kw):
        t = time.perf_counter()
        out = fn(*a, **kw)
        self.timings[key] = round(time.perf_counter() - t, 6)
        return out

    def check(self, name, ok, **info):
        self.checks.append(dict(name=name, passed=bool(ok), **info))
        detail = " ".join(f"{k}={v}" for k, v in info.items())
        self.say(f"{'PASS' if ok else 'FAIL'} {name} {detail}".rstrip())

    def figure(self, fn, name, *a, **kw):
        if not self.args.figures:
            return
        self.wrote(fn(self.path(name), *a, **kw))

    def finish(self, code, error=None):
        self.timings["total"] = round(time.perf_counter() - self._t0, 6)
        doc = {
            "task": self.args.command,
            "inputs_digest": report.digest({"task": self.args.command, "config": self.config, "seed": self.args.seed}),
            "outputs": self.outputs,
            "permutations": self.permutations,
            "timings": self.timings,
            "warnings": self.warnings,
            "checks": self.checks,
            "exit_code": code,
        }
        doc.update(self.extra)
        if error is not None:
            doc["error"] = error
        report.write_json(self.path("report.json"), doc)
        return code


def _figures():
    from . import figures
    return figures


def cmd_scan(run, cfg):
    fam = family_from(cfg)
    doc = require(cfg, "scan", "config")
    spec = plane_spec_from(fam, doc, "scan")
    field = run.timed("scan", scan_plane, fam, spec, run.args.threads)
    run.wrote(report.write_field(run.path("field.csv"), field))
    cands = run.timed("refine", refine_zeros, field, doc.get("threshold"))
    if doc.get("junctions"):
        cands = cands + run.timed("junctions", locate_junctions, field, cands)
    run.wrote(report.write_json(run.path("candidates.json"), [c.as_dict(fam.params) for c in cands]))
    counts = {k: sum(c.kind == k for c in cands) for k in ("point", "curve", "junction")}
    run.say(f"candidates: {len(cands)} ({', '.join(f'{v} {k}' for k, v in counts.items())})")
    i, j = spec.plane.indices
    for c in cands:
        if c.kind != "curve":
            run.say(f"{c.kind} {spec.axes[0]}={c.location[i]:.10g} {spec.axes[1]}={c.location[j]:.10g} "
                    f"residual={c.residual:.3g}")
    run.extra["candidates"] = [c.as_dict(fam.params) for c in cands if c.kind != "curve"]
    run.figure(_figures().plot_field, "field.png", field, cands)
    return EXIT_OK


def _trace_loop(run, fam, geo, name, opts, min_samples):
    spec = geo.spec(name, f"loops.{name}")
    path = discretize(spec, min_samples)
    try:
        tr = trace(fam, path, opts)
    except NumericalError as e:
        e.args = (f"loop {name!r}: {e}",)
        raise
    perm = tr.endpoint_map()
    if path.is_loop:
        run.permutations[name] = str(perm)
    return tr, perm, path


def cmd_trace(run, cfg):
    fam = family_from(cfg)
    geo = resolve_geometry(fam, cfg, run.log)
    opts, min_samples = tracking_from(cfg)
    names = cfg.get("trace") or list(geo.loops)
    if not names:
        raise ConfigError("config defines no loops to trace")
    for name in names:
        tr, perm, path = run.timed(name, _trace_loop, run, fam, geo, name, opts, min_samples)
        run.wrote(report.write_trace(run.path(f"loci_{name}.csv"), tr, fam.params))
        run.figure(_figures().plot_loci, f"loci_{name}.png", tr, f"{name}: {perm}")
        run.say(f"{name}: {perm}" if path.is_loop else f"{name}: open path, label map {perm}")
    return EXIT_OK


def _parse_cycles(text, n, where):
    try:
        return Permutation.from_cycles(text, n)
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from None


def cmd_verify(run, cfg):
    fam = family_from(cfg)
    geo = resolve_geometry(fam, cfg, run.log)
    opts, min_samples = tracking_from(cfg)
    checks = require(cfg, "checks", "config")
    measured = {}

    def perm_of(name):
        if name not in measured:
            tr, perm, path = run.timed(name, _trace_loop, run, fam, geo, name, opts, min_samples)
            if not path.is_loop:
                raise ConfigError(f"loop {name!r} is not closed")
            measured[name] = perm
        return measured[name]

    rng = np.random.default_rng(run.args.seed)
    for k, chk in enumerate(checks):
        where = f"checks[{k}]"
        if "expect" in chk:
            name = require(chk, "loop", where)
            got, want = perm_of(name), _parse_cycles(chk["expect"], fam.n, where)
            run.check(name, got == want, measured=str(got), predicted=str(want))
        elif "product" in chk:
            name = require(chk, "loop", where)
            pred = Permutation.identity(fam.n)
            for factor in chk["product"]:
                base, _, power = factor.partition("^")
                p = perm_of(base)
                if power == "-1":
                    p = p.inverse()
                elif power:
                    raise ConfigError(f"{where}: factor {factor!r}: only ^-1 is supported")
                pred = pred * p
            got = perm_of(name)
            run.check(name, got == pred, measured=str(got), predicted=str(pred),
                      product=" ".join(chk["product"]))
        elif "group" in chk:
            g = chk["group"]
            gens = [perm_of(n) for n in require(g, "generators", where)]
            grp = lambda_group(gens, fam.n)
            witness = grp.commutation_witness()
            ok = True
            info = {"order": grp.order, "abelian": witness is None}
            if "order" in g:
                ok &= grp.order == int(g["order"])
            if "abelian" in g:
                ok &= (witness is None) == bool(g["abelian"])
            if witness is not None:
                info["witness"] = f"{witness[0]}*{witness[1]}={witness[0] * witness[1]}" \
                                  f" vs {witness[1]}*{witness[0]}={witness[1] * witness[0]}"
            run.extra.setdefault("groups", []).append(dict(info, generators=[str(p) for p in gens]))
            run.check("group", ok, **info)
        elif "perturb" in chk:
            p = chk["perturb"]
            count, amp = int(p.get("count", 20)), float(require(p, "amplitude", where))
            axes = list(geo.plane.indices)
            for name in require(p, "loops", where):
                want = perm_of(name)
                spec = geo.spec(name, f"loops.{name}")
                bad = 0
                for _ in range(count):
                    path = discretize(random_perturbation(spec, rng, amp, axes=axes), min_samples)
                    if trace(fam, path, opts).endpoint_map() != want:
                        bad += 1
                run.check(f"perturb:{name}", bad == 0, trials=count, failures=bad, expected=str(want))
        else:
            raise ConfigError(f"{where}: unknown check; use expect, product, group or perturb")
    return EXIT_OK if all(c["passed"] for c in run.checks) else EXIT_MISMATCH


def _classify_candidate(run, fam, doc):
    if "point" in doc:
        return fam.point(doc["point"]), [fam.point(o) for o in doc.get("others", [])]
    loc = require(doc, "locate", "candidate")
    spec = plane_spec_from(fam, loc, "candidate.locate")
    field = run.timed("locate", scan_plane, fam, spec, run.args.threads)
    cands = [c for c in refine_zeros(field, loc.get("threshold")) if c.refined]
    if loc.get("junctions"):
        cands = run.timed("junctions", locate_junctions, field, cands)
    if not cands:
        raise LocateMismatch("no refined candidate found for classification")
    near = np.asarray(require(doc, "near", "candidate"), dtype=float)
    best = min(cands, key=lambda c: np.linalg.norm(spec.plane.project(c.location) - near))
    return best.location, [c.location for c in cands if c is not best]


def cmd_classify(run, cfg):
    fam = family_from(cfg)
    opts, _ = tracking_from(cfg)
    loc, others = _classify_candidate(run, fam, require(cfg, "candidate", "config"))
    run.say("candidate " + " ".join(f"{p}={v:.10g}" for p, v in zip(fam.params, loc)))
    run.extra["candidate"] = {p: float(v) for p, v in zip(fam.params, loc)}
    for k, probe in enumerate(require(cfg, "probes", "config")):
        where = f"probes[{k}]"
        name = probe.get("name", f"probe{k}")
        plane = plane_from(fam, require(probe, "plane", where), f"{where}.plane")
        radius = require(probe, "radius", where)
        if isinstance(radius, dict):
            enc = require(radius, "enclose", f"{where}.radius")
            spec = plane_spec_from(fam, dict(enc, axes=list(plane.axes), fixed=plane.fixed), f"{where}.enclose")
            radius, found = enclosing_radius(fam, spec, plane.project(loc), float(enc.get("factor", 1.25)))
            run.log(f"{name}: derived radius {radius:.6g} from {len(found)} zero(s) in the plane")
        perm = run.timed(name, classify_ep, fam, loc, plane, float(radius), others, opts,
                         int(probe.get("min_samples", 128)))
        ctype = list(perm.cycle_type())
        run.permutations[name] = str(perm)
        info = {"permutation": str(perm), "cycle_type": ctype, "radius": float(radius)}
        if "expect" in probe:
            run.check(name, ctype == list(probe["expect"]), expected=list(probe["expect"]), **info)
        else:
            run.say(f"{name}: {perm} cycle type {ctype} radius {radius:.6g}")
    return EXIT_OK if all(c["passed"] for c in run.checks) else EXIT_MISMATCH


def cmd_simulate(run, cfg):
    fam = family_from(cfg)
    doc = require(cfg, "simulate", "config")
    if "loop" in doc:
        geo = resolve_geometry(fam, cfg, run.log)
        opts, min_samples = tracking_from(cfg)
        name = doc["loop"] if isinstance(doc["loop"], str) else "loop"
        path = discretize(geo.spec(doc["loop"], "simulate.loop"), min_samples)
        tr = run.timed("merging_path", merging_path_measurement, fam, path, opts, doc.get("x_max"), doc.get("dx"))
        perm = tr.endpoint_map()
        run.permutations[name] = str(perm)
        run.wrote(report.write_trace(run.path(f"measured_loci_{name}.csv"), tr, fam.params))
        run.figure(_figures().plot_loci, f"measured_loci_{name}.png", tr, f"{name} (measured): {perm}")
        if "expect" in doc:
            want = _parse_cycles(doc["expect"], fam.n, "simulate.expect")
            run.check(name, perm == want, measured=str(perm), predicted=str(want))
            return EXIT_OK if perm == want else EXIT_MISMATCH
        run.say(f"{name}: {perm}")
        return EXIT_OK

    x = fam.point(require(doc, "point", "simulate"))
    h = fam.evaluate(x)
    values = label(eigenvalues(fam, x))
    auto_x, auto_dx = auto_settings(values)
    x_max = float(doc.get("x_max", auto_x))
    dx = float(doc.get("dx", auto_dx))
    modes = doc.get("modes", "all")
    modes = range(1, fam.n + 1) if modes == "all" else [int(m) for m in modes]
    tol = float(doc.get("tolerance", 1e-6))
    for m in modes:
        if not 1 <= m <= fam.n:
            raise ConfigError(f"simulate.modes: label {m} outside 1..{fam.n}")
        lam = values[m - 1]
        rec = run.timed(f"mode{m}", propagate, h, eigenmode(h, lam), x_max, dx)
        run.wrote(report.write_propagation(run.path(f"propagation_mode{m}.csv"), rec))
        run.figure(_figures().plot_propagation, f"propagation_mode{m}.png", rec)
        fit = extract_eigenvalue(rec)
        err = abs(fit.value - lam) / max(abs(lam), 1.0)
        run.check(f"mode{m}", err <= tol, extracted=f"{fit.value:.12g}", direct=f"{complex(lam):.12g}",
                  rel_error=f"{err:.3g}")
    return EXIT_OK if all(c["passed"] for c in run.checks) else EXIT_MISMATCH


def cmd_families(run, cfg):
    info = describe_builtins()
    run.say(json.dumps(info, indent=2))
    run.extra["families"] = info
    return EXIT_OK


COMMANDS = {
    "scan": (cmd_scan, "scan a parameter plane for discriminant zeros"),
    "trace": (cmd_trace, "trace loops and print their permutations"),
    "verify": (cmd_verify, "measure loops and check composition, group and homotopy predictions"),
    "classify": (cmd_classify, "read the order of a degeneracy from probe circles"),
    "simulate": (cmd_simulate, "emulate waveguide propagation or a merging-path measurement"),
    "families": (cmd_families, "list the built-in operator families"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON job configuration")
    common.add_argument("--out", metavar="DIR", default="out", help="output directory (default: %(default)s)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised checks (default: %(default)s)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for plane scans")
    common.add_argument("--quiet", action="store_true", help="suppress progress messages")
    common.add_argument("--figures", action="store_true", help="also render PNG figures next to the CSV files")
    parser = argparse.ArgumentParser(prog="spectral-holonomy",
                                     description="Spectral holonomy of non-Hermitian operator families.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = {}
    run = None
    try:
        if args.command != "families":
            if not args.config:
                raise ConfigError(f"{args.command} needs --config PATH")
            cfg = load_config(args.config)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        run = Run(args, cfg)
        code = COMMANDS[args.command][0](run, cfg)
        return run.finish(code)
    except LocateMismatch as e:
        return _fail(run, args, cfg, EXIT_MISMATCH, f"mismatch: {e}")
    except InputError as e:
        return _fail(run, args, cfg, EXIT_CONFIG, f"configuration error: {e}")
    except NumericalError as e:
        return _fail(run, args, cfg, EXIT_NUMERICAL, f"numerical failure ({type(e).__name__}): {e}")


def _fail(run, args, cfg, code, message):
    print(f"spectral-holonomy {args.command}: {message}", file=sys.stderr)
    run = run or Run(args, cfg)
    try:
        return run.finish(code, message)
    except OSError:
        return code


if __name__ == "__main__":
    sys.exit(main())
