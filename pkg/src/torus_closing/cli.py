"""``torus-closing`` command-line interface.

Exit codes: 0 success, 2 bad input (map file or arguments), 3 numerical
failure, 4 map not supported in the given disk, 5 no orbit found,
6 disjointness failed, 7 verification failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time

import numpy as np

from . import __version__, kernels
from .checks import run_suite, supporting_disk
from .core import Disk, random_chain
from .errors import (
    DisjointnessFailed, DiskTooLarge, MapFileError, NotDiskSupported, TargetUnreachable,
)
from .invariants import FLUX_GRID, Loop, action_profile, flux_vector, is_exact, loop_area, loop_flux
from .mapfile import MapFile, load_map, map_digest, serialize_map
from .orbits import closing_scan, find_periodic_points
from .perturb import rationalize_flux
from .quadrature import GridSpec
from .report import SCHEMA, atomic_write, orbit_csv, rows_csv, to_json

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_SUPPORT, EXIT_NO_ORBIT, EXIT_DISJOINT, EXIT_VERIFY = (
    0, 2, 3, 4, 5, 6, 7)


class _Fail(Exception):
    def __init__(self, code, message, results=None):
        super().__init__(message)
        self.code = code
        self.results = results


def _disk_arg(mf, text):
    if text is None:
        if "U0" in mf.disks:
            return mf.disks["U0"]
        if mf.disks:
            return next(iter(mf.disks.values()))
        raise _Fail(EXIT_INPUT, "no --disk given and the map declares none")
    if text in mf.disks:
        return mf.disks[text]
    try:
        cx, cy, r = (float(v) for v in text.split(","))
    except ValueError:
        raise _Fail(EXIT_INPUT, f"--disk expects cx,cy,r or a declared disk name, got {text!r}")
    try:
        return Disk.make(cx, cy, r)
    except DiskTooLarge as exc:
        raise _Fail(EXIT_INPUT, str(exc))


def _disk_dict(d):
    return {"cx": d.center[0], "cy": d.center[1], "r": d.radius}


def _orbit_dict(r):
    return {"point": [r.point.x, r.point.y], "period": r.period, "lattice": list(r.lattice),
            "residual": r.residual, "multipliers": [list((m.real, m.imag)) for m in r.stable_multipliers]}


def cmd_flux(mf, args, ctx):
    fmap = mf.chain
    fv = flux_vector(fmap, ctx["grid"])
    return {
        "vx": fv.vx, "vy": fv.vy, "reduced": list(fv.reduced), "pairing": list(fv.pairing),
        "loop_area": {"a": loop_area(fmap, Loop.a()), "b": loop_area(fmap, Loop.b())},
        "loop_flux": {"a": loop_flux(fmap, Loop.a()), "b": loop_flux(fmap, Loop.b())},
        "exact": is_exact(fmap, ctx["grid"]),
    }


def cmd_action(mf, args, ctx):
    disk = _disk_arg(mf, args.disk)
    prof = action_profile(mf.chain, disk, radial_nodes=args.radial_nodes,
                          angular_nodes=args.angular_nodes)
    res = {"disk": _disk_dict(disk), "total": prof.total,
           "boundary_residual": prof.boundary_residual,
           "g_min": float(prof.values.min()), "g_max": float(prof.values.max())}
    if args.samples:
        rng = ctx["rng"]
        rho = disk.radius * np.sqrt(rng.uniform(0, 1, args.samples))
        th = rng.uniform(0, 2 * np.pi, args.samples)
        pts = np.column_stack([disk.center[0] + rho * np.cos(th), disk.center[1] + rho * np.sin(th)])
        g = prof.g(pts)
        ctx["csv"] = rows_csv(("x", "y", "g"), [(float(p[0]), float(p[1]), float(v))
                                                for p, v in zip(pts, g)])
    return res


def cmd_orbits(mf, args, ctx):
    region = None if args.disk == "torus" else _disk_arg(mf, args.disk)
    recs, diag = find_periodic_points(mf.chain, args.period, region=region,
                                      seeds_per_axis=args.seeds, tol=args.tol,
                                      max_iter=args.max_iter, return_diagnostics=True)
    ctx["csv"] = orbit_csv(recs)
    return {"region": None if region is None else _disk_dict(region), "period": args.period,
            "orbits": [_orbit_dict(r) for r in recs],
            "diagnostics": {"seeds": diag.seeds, "lattice_candidates": [list(z) for z in diag.candidates],
                            "singular": diag.singular, "unconverged": diag.unconverged,
                            "outside_region": diag.outside_region, "unverified": diag.unverified,
                            "duplicates": diag.duplicates, "best_residual": diag.best_residual}}


def _rationalization_dict(rat):
    return {"q": rat.q, "p": list(rat.p), "eps_used": list(rat.eps_used), "c0_size": rat.c0_size,
            "c1_size": rat.c1_size, "original_flux": list(rat.original_flux),
            "achieved_flux": list(rat.achieved_flux), "flux_residual": rat.flux_residual}


def cmd_rationalize(mf, args, ctx):
    rat = rationalize_flux(mf.chain, args.qmax, args.c0, grid=ctx["grid"])
    if args.emit:
        atomic_write(args.emit, serialize_map(MapFile(rat.perturbed, mf.disks, mf.bands)))
    res = _rationalization_dict(rat)
    res["perturbed_sha256"] = map_digest(rat.perturbed)
    return res


def cmd_scan(mf, args, ctx):
    disk = _disk_arg(mf, args.disk)
    rep = closing_scan(mf.chain, disk, q_max=args.qmax, c0_bound=args.c0, t_steps=args.tsteps,
                       seeds_per_axis=args.seeds, disks=args.disks, grid=ctx["grid"],
                       max_shrinks=args.max_shrinks)
    res = {
        "requested_disk": _disk_dict(disk), "disk_used": _disk_dict(rep.disk),
        "shrinks": rep.shrinks, "disjointness_ok": rep.disjointness_ok, "mode": rep.mode,
        "q": rep.q, "p": list(rep.p), "rationalization": rep.rationalization,
        "action_slope": rep.action_slope, "action_certificate": rep.action_certificate,
        "t_star": rep.t_star, "orbit": None if rep.orbit is None else _orbit_dict(rep.orbit),
        "orbits_at_t_star": rep.orbits_found, "t_grid": rep.t_grid,
        "best_residuals": rep.best_residuals,
    }
    if rep.orbit is not None:
        ctx["csv"] = orbit_csv([rep.orbit])
    else:
        raise _Fail(EXIT_NO_ORBIT, f"no period-{rep.q} orbit found on {len(rep.t_grid)} t values", res)
    return res


def cmd_verify(mf, args, ctx):
    checks = run_suite(mf.chain, mf.disks, ctx["rng"], grid=ctx["grid"])
    found = supporting_disk(mf.chain, mf.disks)
    res = {"checks": [c.as_dict() for c in checks],
           "action_disk": None if found is None else found[0],
           "passed": all(c.passed for c in checks)}
    if not res["passed"]:
        bad = ", ".join(c.name for c in checks if not c.passed)
        raise _Fail(EXIT_VERIFY, f"failed: {bad}", res)
    return res


COMMANDS = {"flux": cmd_flux, "action": cmd_action, "orbits": cmd_orbits, "scan": cmd_scan,
            "rationalize": cmd_rationalize, "verify": cmd_verify}


def _globals(parser, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g = parser.add_argument_group("global options")
    g.add_argument("--grid", type=int, default=d(FLUX_GRID.n),
                   help=f"trapezoid points per axis for flux integrals (default {FLUX_GRID.n})")
    g.add_argument("--seed", type=int, default=d(0), help="seed for all randomness (default 0)")
    g.add_argument("--json-out", metavar="PATH", default=d(None), help="write the JSON report here")
    g.add_argument("--csv-out", metavar="PATH", default=d(None), help="write the CSV table here")
    g.add_argument("--timings", action="store_true", default=d(False),
                   help="include wall-clock timings (makes reports non-reproducible)")
    g.add_argument("-v", "--verbose", action="count", default=d(0))


def build_parser():
    p = argparse.ArgumentParser(prog="torus-closing",
                                description="Flux, action and periodic orbits of torus maps.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _globals(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        _globals(sp, suppress=True)
        if name == "verify":
            sp.add_argument("mapfile", nargs="?", help="map file or builtin:NAME")
            sp.add_argument("--random-depth", type=int, default=None, metavar="N",
                            help="verify a random N-deep chain drawn from --seed instead")
        else:
            sp.add_argument("mapfile", help="map file or builtin:NAME")
        return sp

    add("flux", "flux vector, loop fluxes and exactness")
    sp = add("action", "action function and total action on a disk")
    sp.add_argument("--disk", help="cx,cy,r or a disk name declared in the map file")
    sp.add_argument("--samples", type=int, default=0, help="random g samples for the CSV output")
    sp.add_argument("--radial-nodes", type=int, default=96)
    sp.add_argument("--angular-nodes", type=int, default=128)
    sp = add("orbits", "periodic points of a given period")
    sp.add_argument("--period", "-q", type=int, required=True)
    sp.add_argument("--disk", default="torus", help="cx,cy,r, a declared name, or 'torus'")
    sp.add_argument("--seeds", type=int, default=64, help="seeds per axis")
    sp.add_argument("--tol", type=float, default=1e-11)
    sp.add_argument("--max-iter", type=int, default=40)
    sp = add("scan", "closing scan: rationalize, twist, search for a periodic orbit")
    sp.add_argument("--disk", help="target disk U0 (cx,cy,r or declared name)")
    sp.add_argument("--qmax", type=int, default=20)
    sp.add_argument("--tsteps", type=int, default=200)
    sp.add_argument("--c0", type=float, default=0.05)
    sp.add_argument("--seeds", type=int, default=64)
    sp.add_argument("--disks", choices=("single", "all"), default="single")
    sp.add_argument("--max-shrinks", type=int, default=6,
                    help="halvings of the disk allowed while seeking disjoint preimages")
    sp = add("rationalize", "shear the map to a rational flux vector")
    sp.add_argument("--qmax", type=int, default=20)
    sp.add_argument("--c0", type=float, default=0.05)
    sp.add_argument("--emit", metavar="PATH", help="write the perturbed map file here")
    add("verify", "run the invariant suite")
    return p


def _load(args):
    if args.command == "verify" and args.random_depth is not None:
        if args.random_depth < 1:
            raise _Fail(EXIT_INPUT, "--random-depth must be positive")
        rng = np.random.default_rng(args.seed)
        chain = random_chain(rng, args.random_depth)
        return MapFile(chain, source=f"random:depth={args.random_depth}:seed={args.seed}")
    if not args.mapfile:
        raise _Fail(EXIT_INPUT, "a map file (or --random-depth) is required")
    try:
        return load_map(args.mapfile)
    except OSError as exc:
        raise _Fail(EXIT_INPUT, f"cannot read {args.mapfile}: {exc.strerror}")
    except MapFileError as exc:
        raise _Fail(EXIT_INPUT, f"{args.mapfile}: {exc}")


def _params(args):
    skip = {"command", "json_out", "csv_out", "timings", "verbose", "mapfile"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        grid = GridSpec(args.grid)
    except ValueError as exc:
        parser.error(str(exc))

    ctx = {"grid": grid, "rng": np.random.default_rng(args.seed), "csv": None}
    report = {"schema": SCHEMA, "command": args.command, "parameters": _params(args),
              "map": None, "status": "ok", "error": None, "results": None}
    code = EXIT_OK
    t0 = time.perf_counter()
    try:
        mf = _load(args)
        report["map"] = {"source": mf.source, "sha256": mf.digest, "generators": len(mf.chain),
                         "disks": {k: _disk_dict(d) for k, d in mf.disks.items()}}
        # seeded streams must not depend on how the map was obtained
        if args.command == "verify" and args.random_depth is not None:
            ctx["rng"] = np.random.default_rng([args.seed, 1])
        report["results"] = COMMANDS[args.command](mf, args, ctx)
    except _Fail as exc:
        code, report["results"] = exc.code, exc.results
        report["error"] = {"exit_code": exc.code, "message": str(exc)}
    except NotDiskSupported as exc:
        code, report["error"] = EXIT_SUPPORT, {"exit_code": EXIT_SUPPORT, "message": str(exc)}
    except DisjointnessFailed as exc:
        code, report["error"] = EXIT_DISJOINT, {"exit_code": EXIT_DISJOINT, "message": str(exc)}
    except (DiskTooLarge, MapFileError) as exc:
        code, report["error"] = EXIT_INPUT, {"exit_code": EXIT_INPUT, "message": str(exc)}
    except (TargetUnreachable, ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        code, report["error"] = EXIT_NUMERIC, {"exit_code": EXIT_NUMERIC,
                                               "message": f"{type(exc).__name__}: {exc}"}
    if code:
        report["status"] = "error"
    if args.timings:
        report["timings"] = {"total_s": time.perf_counter() - t0, "backend": kernels.BACKEND}

    text = to_json(report)
    if args.json_out:
        atomic_write(args.json_out, text)
    else:
        sys.stdout.write(text)
    if args.csv_out and ctx["csv"] is not None:
        atomic_write(args.csv_out, ctx["csv"])
    if code:
        print(f"torus-closing {args.command}: {report['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
