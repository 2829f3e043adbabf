"""Plain-text fiducial files.

Layout::

    # label: 5a
    # source: optimizer d=5 seed=1
    # residual: 2.5e-16
    5
    0.43516257744467 0.0
    ...

Comment lines ``# key: value`` carry metadata, the first other line is the
dimension, then one ``real imag`` pair per component.  Writing uses 17
significant digits so doubles round-trip exactly.
"""
from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from .sic_engine import Fiducial


class FiducialFormatError(ValueError):
    pass


def parse_fiducial(text: str, name: str = "<string>") -> Fiducial:
    meta: dict[str, str] = {}
    rows: list[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, val = line[1:].partition(":")
            if sep:
                meta[key.strip()] = val.strip()
            continue
        rows.append(line)
    if not rows:
        raise FiducialFormatError(f"{name}: no dimension line")
    try:
        dim = int(rows[0])
    except ValueError:
        raise FiducialFormatError(f"{name}: bad dimension line {rows[0]!r}") from None
    body = rows[1:]
    if dim < 1 or len(body) != dim:
        raise FiducialFormatError(
            f"{name}: declared dimension {dim} but found {len(body)} components")
    comps = np.empty(dim, dtype=complex)
    for k, line in enumerate(body):
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise FiducialFormatError(f"{name}: component {k} needs 'real imag', got {line!r}")
        try:
            comps[k] = complex(float(parts[0]), float(parts[1]))
        except ValueError:
            raise FiducialFormatError(f"{name}: component {k} is not numeric") from None
    if not np.all(np.isfinite(comps)) or np.linalg.norm(comps) == 0:
        raise FiducialFormatError(f"{name}: vector is zero or not finite")
    label = meta.pop("label", "")
    centring = meta.pop("centring", "unknown")
    try:
        return Fiducial(comps, label=label, centring=centring, metadata=meta)
    except ValueError as exc:
        raise FiducialFormatError(f"{name}: {exc}") from None


def read_fiducial(path: str | Path) -> Fiducial:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise FiducialFormatError(f"cannot read {p}: {exc}") from None
    return parse_fiducial(text, str(p))


def format_fiducial(f: Fiducial) -> str:
    lines = []
    if f.label:
        lines.append(f"# label: {f.label}")
    if f.centring != "unknown":
        lines.append(f"# centring: {f.centring}")
    for key in sorted(f.metadata):
        lines.append(f"# {key}: {f.metadata[key]}")
    lines.append(str(f.dim))
    lines += [f"{z.real:.17g} {z.imag:.17g}" for z in f.components]
    return "\n".join(lines) + "\n"


def write_fiducial(path: str | Path, f: Fiducial) -> None:
    Path(path).write_text(format_fiducial(f))


def digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
