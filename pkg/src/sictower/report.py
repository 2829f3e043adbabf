"""JSON run reports and the end-to-end alignment pipeline."""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from importlib import metadata

import numpy as np

from . import alignment, entangle, frames, mub, symmetry
from .numtheory import is_prime
from .sic_engine import CentringError, Fiducial, centre_fiducial, sic_verify

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1"
TIMESTAMP_FIELD = "generated_at"


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover
        return "0+unknown"


def _plain(obj):
    """json default hook for numpy scalars and arrays."""
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, default=_plain) + "\n"


def envelope(command: str, inputs: dict, results: dict, verdict: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": tool_version(),
        "command": command,
        TIMESTAMP_FIELD: time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "inputs": inputs,
        "results": results,
        "verdict": verdict,
    }


@dataclass
class PipelineResult:
    results: dict
    verdict: str
    stage_failures: list
    figures_data: dict = field(default_factory=dict)


def _stage(results: dict, failures: list, name: str, fn):
    try:
        out = fn()
    except Exception as exc:  # recorded with the stage name, never swallowed silently
        log.exception("stage %s failed", name)
        results[name] = {"error": f"{type(exc).__name__}: {exc}"}
        failures.append(name)
        return None
    return out


def _failed(entry) -> bool:
    return isinstance(entry, dict) and entry.get("passed") is False


def run_alignment_pipeline(small: Fiducial, big: Fiducial, tol: float) -> PipelineResult:
    """verify -> centre -> align -> theorem checks -> ETFs -> MUB -> symmetry."""
    d, N = small.dim, big.dim
    results: dict = {}
    failures: list = []
    fig: dict = {}

    vs, vb = sic_verify(small), sic_verify(big)
    results["verify"] = {"small": vars(vs), "big": vars(vb)}
    if not (vs.passed and vb.passed):
        return PipelineResult(results, "not a SIC", failures)

    if d % 2:
        try:
            small_c, wit = centre_fiducial(small, tol)
            results["centre"] = {"shift": list(wit.shift),
                                 "zauner": wit.zauner.as_array().tolist(),
                                 "eigen_residual": wit.eigen_residual}
            small = small_c
        except CentringError as exc:
            results["centre"] = {"error": str(exc)}
    else:
        results["centre"] = {"skipped": "even d"}

    rep = alignment.align(small, big, tol)
    results["alignment"] = rep.to_dict()
    fig.update(theta=rep.theta, Theta=rep.Theta)
    aligned = rep.verdict == "aligned"
    Psi0 = rep.fiducial

    skipped = {"skipped": "even d"} if d % 2 == 0 else (
        None if aligned else {"skipped": "not aligned"})
    theorem_keys = ("theorem1", "theorem2", "theorem3", "theorem5", "projectors",
                    "multiplets")
    if skipped:
        for k in theorem_keys:
            results[k] = dict(skipped)
    else:
        t1 = _stage(results, failures, "theorem1", lambda: entangle.check_theorem1(Psi0, d, tol))
        if t1:
            results["theorem1"] = t1.to_dict()
            view = entangle.tensor_view(Psi0, d)
            fig["schmidt"] = entangle.schmidt_spectrum(view)
            results["theorem1"]["schmidt_spectrum"] = [float(x) for x in fig["schmidt"]]
            results["theorem1"]["reduced_density_cross_check"] = float(max(
                np.abs(entangle.reduced_density(view, k)
                       - entangle.reduced_density_from_overlaps(Psi0, d, k)).max()
                for k in (d, d - 2)))
        t2 = _stage(results, failures, "theorem2",
                    lambda: entangle.check_theorem2(Psi0, rep.theta, rep.M, d, tol))
        if t2:
            results["theorem2"] = t2.to_dict()
        if is_prime(d - 2):
            def theorem3():
                mset, W = mub.mub_from_aligned_sic(Psi0, d)
                res = mub.mub_verify(mset)
                _, inter = mub.intertwiner(W, mub.wootters_projectors(d - 2))
                return {**res.to_dict(), **mset.to_dict(),
                        "projectors": mub.projector_residuals(W, d - 2),
                        "intertwiner_residual": inter, "passed": res.passed()}
            r3 = _stage(results, failures, "theorem3", theorem3)
            if r3:
                results["theorem3"] = r3
        else:
            results["theorem3"] = {"skipped": f"{d - 2} is not prime"}
        pp = _stage(results, failures, "projectors",
                    lambda: frames.build_projectors(Psi0, rep.theta, rep.M))
        if pp:
            results["projectors"] = pp.to_dict()
            results["projectors"]["passed"] = bool(
                (pp.rank1, pp.rank2) == (d * (d - 1) // 2, (d - 1) * (d - 2) // 2)
                and max(pp.idempotency) <= tol and pp.commutator <= tol
                and all(abs(w - 1) <= tol for w in pp.fiducial_weight)
                and (pp.tensor_residual is None or max(pp.tensor_residual) <= tol))
            mp = _stage(results, failures, "multiplets", lambda: frames.orbit_multiplets(Psi0, pp))
            if mp:
                results["multiplets"] = mp.to_dict()
                results["multiplets"]["passed"] = bool(
                    (mp.count1, mp.count2) == ((d - 2) ** 2, d * d)
                    and mp.each_vector_in_exactly_one)
        t5 = _stage(results, failures, "theorem5", lambda: symmetry.check_theorem5(Psi0, d, tol))
        if t5:
            results["theorem5"] = t5.to_dict()

    def etfs():
        out = {}
        for s in (d - 2, d):
            out[f"stride_{s}"] = frames.certify_subset(Psi0, s).to_dict()
        return out
    etf = _stage(results, failures, "etf", etfs)
    if etf:
        results["etf"] = etf
        fig["etf_singular"] = {k: v["singular_values"] for k, v in etf.items()}
    sp = _stage(results, failures, "simplex", lambda: frames.simplex_probe(rep.theta, Psi0))
    if sp:
        results["simplex"] = sp.to_dict()

    def orders():
        a = symmetry.stabilizer_order(small)
        b = symmetry.stabilizer_order(Psi0)
        return {"small": a.to_dict(), "big": b.to_dict(),
                "order_ratio": b.unitary_order / a.unitary_order if a.unitary_order else None}
    so = _stage(results, failures, "symmetry", orders)
    if so:
        results["symmetry"] = so

    checks_ok = not any(_failed(results.get(k)) for k in theorem_keys) \
        and all(v["passed"] for v in (etf or {}).values())
    if not aligned:
        verdict = rep.verdict
    elif failures or not checks_ok:
        verdict = "aligned, checks failed"
    else:
        verdict = "aligned"
    return PipelineResult(results, verdict, failures, fig)
