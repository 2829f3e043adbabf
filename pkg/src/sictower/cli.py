"""Command-line driver.

Exit codes: 0 success or aligned, 1 valid negative result (not aligned, not
converged, check failed), 2 invalid input, 3 internal error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import alignment, frames, mub, numtheory, symmetry
from .fileformat import FiducialFormatError, digest, read_fiducial, write_fiducial
from .report import dumps, envelope, run_alignment_pipeline
from .sic_engine import default_tolerance, find_fiducial, sic_verify

EXIT_OK, EXIT_NEGATIVE, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2, 3
TOL_ENV = "SICTOWER_TOL"

log = logging.getLogger("sictower")


class InvalidInput(Exception):
    pass


def default_alignment_tol() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return alignment.TOL
    try:
        return float(raw)
    except ValueError:
        raise InvalidInput(f"{TOL_ENV}={raw!r} is not a number") from None


def _emit(report: dict, out: str | None) -> None:
    text = dumps(report)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path: str):
    try:
        return read_fiducial(path)
    except FiducialFormatError as exc:
        raise InvalidInput(str(exc)) from None


# --- subcommands -------------------------------------------------------------

def cmd_find(args) -> int:
    if args.dim < 2:
        raise InvalidInput(f"--dim must be at least 2, got {args.dim}")
    if args.seeds < 1:
        raise InvalidInput("--seeds must be positive")
    tol = args.tolerance if args.tolerance is not None else default_tolerance(args.dim)
    if args.aligned_to:
        small = _load(args.aligned_to)
        if small.dim * (small.dim - 2) != args.dim:
            raise InvalidInput(f"--aligned-to has dimension {small.dim}; "
                               f"{args.dim} is not {small.dim}({small.dim}-2)")
        fid, rep = alignment.search_aligned(small, seed=args.seed, attempts=args.seeds)
        fid = rep.fiducial
        residual = sic_verify(fid).residual
        fid.metadata.update(residual=residual, alignment=rep.verdict)
        ok = rep.verdict == "aligned" and residual <= tol
    else:
        best = None
        for s in range(args.seed, args.seed + args.seeds):
            r = find_fiducial(args.dim, seed=s, tolerance=tol,
                              restrict_zauner=args.restrict_zauner, subspace="all")
            if best is None or r.residual < best.residual:
                best = r
            if r.converged:
                break
        fid, residual, ok = best.fiducial, best.residual, best.converged
    fid.metadata["source"] = f"sictower find --dim {args.dim}"
    write_fiducial(args.output, fid)
    print(f"dim={args.dim} residual={residual:.3e} converged={ok} -> {args.output}")
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_verify(args) -> int:
    f = _load(args.file)
    v = sic_verify(f, args.tolerance)
    rep = envelope("verify", {"file": {"path": args.file, "sha256": digest(args.file)}},
                   {"verify": vars(v)}, "SIC" if v.passed else "not a SIC")
    _emit(rep, args.output)
    return EXIT_OK if v.passed else EXIT_NEGATIVE


def cmd_align(args) -> int:
    small, big = _load(args.small), _load(args.big)
    d, N = small.dim, big.dim
    if d < 4 or N != d * (d - 2):
        raise InvalidInput(f"dimensions ({d}, {N}) do not satisfy N = d(d-2) with d >= 4")
    tol = args.tolerance if args.tolerance is not None else default_alignment_tol()
    res = run_alignment_pipeline(small, big, tol)
    inputs = {"small": {"path": args.small, "sha256": digest(args.small), "dim": d},
              "big": {"path": args.big, "sha256": digest(args.big), "dim": N},
              "tolerance": tol}
    results = dict(res.results)
    if args.plots:
        from .plots import render_report_figures
        fd = res.figures_data
        files = render_report_figures(args.plots, fd.get("theta"), fd.get("Theta"),
                                      fd.get("schmidt"), fd.get("etf_singular"))
        results["figures"] = [os.path.basename(p) for p in files]
    results["stage_failures"] = res.stage_failures
    _emit(envelope("align", inputs, results, res.verdict), args.output)
    print(f"verdict: {res.verdict}", file=sys.stderr)
    if res.stage_failures:
        return EXIT_INTERNAL
    return EXIT_OK if res.verdict == "aligned" else EXIT_NEGATIVE


def cmd_tower(args) -> int:
    try:
        steps = numtheory.tower(args.start, args.rungs)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from None
    dims = [s.d for s in steps]
    D = {s.discriminant for s in steps}
    if args.json:
        _emit(envelope("tower", {"start": args.start, "rungs": args.rungs},
                       {"dimensions": dims, "discriminants": [s.discriminant for s in steps]},
                       "invariant" if len(D) == 1 else "varies"), None)
    else:
        print(" -> ".join(map(str, dims)) + f"   D={steps[0].discriminant}")
    return EXIT_OK


def cmd_mub(args) -> int:
    if args.wootters:
        p = args.wootters
        try:
            m = mub.mub_from_wootters(p)
        except ValueError as exc:
            raise InvalidInput(str(exc)) from None
        res = mub.mub_verify(m)
        results = {"route": "wootters", **res.to_dict(), **m.to_dict()}
        inputs = {"p": p}
    else:
        if not args.file:
            raise InvalidInput("give a fiducial file or --wootters P")
        f = _load(args.file)
        d = numtheory.tower_root(f.dim)
        if d is None or d % 2 == 0 or not numtheory.is_prime(d - 2):
            raise InvalidInput(f"dimension {f.dim} is not p(p+2) with p an odd prime")
        m, W = mub.mub_from_aligned_sic(f, d)
        res = mub.mub_verify(m)
        _, inter = mub.intertwiner(W, mub.wootters_projectors(d - 2))
        results = {"route": "aligned SIC", **res.to_dict(), **m.to_dict(),
                   "projectors": mub.projector_residuals(W, d - 2),
                   "intertwiner_residual": inter}
        inputs = {"file": {"path": args.file, "sha256": digest(args.file)}}
    ok = res.passed()
    _emit(envelope("mub", inputs, results, "MUB" if ok else "not MUB"), args.output)
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_symmetry(args) -> int:
    f = _load(args.file)
    r = symmetry.stabilizer_order(f, exhaustive=True if args.exhaustive else None)
    _emit(envelope("symmetry", {"file": {"path": args.file, "sha256": digest(args.file)}},
                   {"symmetry": r.to_dict()},
                   "lower bound" if r.lower_bound else "exact"), args.output)
    return EXIT_OK


def cmd_etf(args) -> int:
    big = _load(args.big)
    d = numtheory.tower_root(big.dim)
    if d is None:
        raise InvalidInput(f"dimension {big.dim} is not d(d-2)")
    results = {f"stride_{s}": frames.certify_subset(big, s).to_dict() for s in (d - 2, d)}
    if args.small:
        from .sic_engine import overlap_table
        small = _load(args.small)
        if small.dim != d:
            raise InvalidInput(f"--small must have dimension {d}")
        results["simplex"] = frames.simplex_probe(overlap_table(small), big).to_dict()
    ok = all(results[f"stride_{s}"]["passed"] for s in (d - 2, d))
    _emit(envelope("etf", {"big": {"path": args.big, "sha256": digest(args.big)}},
                   results, "certified" if ok else "not certified"), args.output)
    return EXIT_OK if ok else EXIT_NEGATIVE


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sictower",
                                 description="SIC fiducials, alignment and dimension towers")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("find", help="numerically search for a SIC fiducial")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--seeds", type=int, default=8, help="number of seeds to try")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--restrict-zauner", action="store_true")
    p.add_argument("--aligned-to", metavar="FILE",
                   help="search for a fiducial aligned to this one (dim must be d(d-2))")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_find)

    p = sub.add_parser("verify", help="check the SIC property of a fiducial file")
    p.add_argument("file")
    p.add_argument("--tolerance", type=float)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("align", help="full alignment pipeline and report")
    p.add_argument("small")
    p.add_argument("big")
    p.add_argument("--tolerance", type=float)
    p.add_argument("-o", "--output")
    p.add_argument("--plots", metavar="DIR", help="also write PNG figures to DIR")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("tower", help="list a dimension tower and its discriminant")
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--rungs", type=int, default=3)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_tower)

    p = sub.add_parser("mub", help="MUB from an aligned SIC or the phase-point route")
    p.add_argument("file", nargs="?")
    p.add_argument("--wootters", type=int, metavar="P")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_mub)

    p = sub.add_parser("symmetry", help="stabilizer order in the extended Clifford group")
    p.add_argument("file")
    p.add_argument("--exhaustive", action="store_true",
                   help="enumerate SL(2, Z_d) even above the default size limit")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_symmetry)

    p = sub.add_parser("etf", help="certify the embedded equiangular tight frames")
    p.add_argument("big")
    p.add_argument("--small", help="small fiducial, enables the simplex probe")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_etf)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception:  # noqa: BLE001
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
