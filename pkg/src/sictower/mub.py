"""Complete sets of mutually unbiased bases in odd prime dimension p.

Two routes build the same (p+1) p rank-one projectors W^{(z,a)}, one per
affine line of Z_p^2:

* directly, W = (1/p) sum over the line of displaced parities;
* from an aligned SIC in dimension p(p+2), as a partial trace over C^(p+2)
  of an affine combination of SIC projectors along the line.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .entangle import tensor_view
from .heisenberg import displaced_parity, displacement
from .numtheory import CrtSplit, is_prime
from .sic_engine import Fiducial

INF = None  # slope of the vertical lines i = a
RANK_ONE_TOL = 1e-7


@dataclass(frozen=True)
class AffineLine:
    z: int | None
    a: int
    points: tuple

    @property
    def slope(self) -> str:
        return "inf" if self.z is None else str(self.z)


def _check_prime(p: int) -> None:
    if p % 2 == 0 or not is_prime(p):
        raise ValueError(f"MUB construction needs an odd prime, got {p}")


def affine_lines(p: int) -> list[AffineLine]:
    """All p(p+1) lines j = z i + a, then the vertical lines i = a."""
    out = []
    for z in list(range(p)) + [INF]:
        for a in range(p):
            if z is INF:
                pts = tuple((a, j) for j in range(p))
            else:
                pts = tuple((i, (z * i + a) % p) for i in range(p))
            out.append(AffineLine(z, a, pts))
    return out


def phase_point_operators(p: int) -> np.ndarray:
    """P_{i,j} = D_{i,j} P D_{-i,-j}, indexed [i, j]."""
    _check_prime(p)
    ops = np.empty((p, p, p, p), dtype=complex)
    for i in range(p):
        for j in range(p):
            ops[i, j] = displaced_parity(p, (i, j))
    return ops


def wootters_projectors(p: int) -> dict[tuple, np.ndarray]:
    """W^{(z,a)} = (1/p) sum_{(i,j) on the line} P_{i,j}, keyed by (z, a)."""
    ops = phase_point_operators(p)
    return {(L.z, L.a): sum(ops[i, j] for i, j in L.points) / p
            for L in affine_lines(p)}


@dataclass
class MubSet:
    p: int
    bases: list  # p+1 arrays, columns are the basis vectors
    top_eigenvalues: list = field(default_factory=list)
    flagged: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"p": self.p, "n_bases": len(self.bases),
                "top_eigenvalue_min": min(self.top_eigenvalues, default=None),
                "top_eigenvalue_max": max(self.top_eigenvalues, default=None),
                "flagged_lines": [list(map(str, k)) for k in self.flagged]}


def _bases_from_projectors(p: int, W: dict) -> MubSet:
    bases, tops, flagged = [], [], []
    for z in list(range(p)) + [INF]:
        cols = []
        for a in range(p):
            w, v = np.linalg.eigh((W[z, a] + W[z, a].conj().T) / 2)
            tops.append(float(w[-1]))
            if abs(w[-1] - 1) > RANK_ONE_TOL:
                flagged.append(("inf" if z is None else z, a))
            cols.append(v[:, -1])
        bases.append(np.column_stack(cols))
    return MubSet(p, bases, tops, flagged)


def theorem3_projectors(f: Fiducial, d: int) -> dict[tuple, np.ndarray]:
    """W^{(z,a)} = Tr_d[((d-1)/(d-2)) sum_line |Psi_{d kappa x, d y}><.| - (1/d) 1_N].

    A point (x, y) of Z_p^2 is sent to the index (d kappa x, d y) of Z_N^2,
    where 1 (x) D_{x,y} acts on the CRT tensor factors.
    """
    p = d - 2
    _check_prime(p)
    N = d * p
    split = CrtSplit.for_tower(d)
    kappa = split.kappa
    psi = f.components
    # reduced states Tr_d |Psi_q><Psi_q| for every point of the plane
    red = {}
    for x in range(p):
        for y in range(p):
            q = ((d * kappa * x) % N, (d * y) % N)
            A = tensor_view(displacement(N, q) @ psi, d).matrix
            red[x, y] = A.T @ A.conj()
    c = (d - 1) / (d - 2)
    # Tr_d of (1/d) 1_N is the identity on C^p
    return {(L.z, L.a): c * sum(red[pt] for pt in L.points) - np.eye(p)
            for L in affine_lines(p)}


def mub_from_aligned_sic(f: Fiducial, d: int) -> tuple[MubSet, dict]:
    W = theorem3_projectors(f, d)
    return _bases_from_projectors(d - 2, W), W


def mub_from_wootters(p: int) -> MubSet:
    return _bases_from_projectors(p, wootters_projectors(p))


@dataclass
class MubResidual:
    orthonormality: float
    unbiasedness: float
    n_bases: int

    def passed(self, ortho_tol: float = 1e-9, unbiased_tol: float = 1e-7) -> bool:
        return self.orthonormality <= ortho_tol and self.unbiasedness <= unbiased_tol

    def to_dict(self) -> dict:
        return {"orthonormality": self.orthonormality,
                "unbiasedness": self.unbiasedness, "n_bases": self.n_bases,
                "orthonormality_tolerance": 1e-9, "unbiasedness_tolerance": 1e-7}


def mub_verify(m: MubSet) -> MubResidual:
    p = m.p
    ortho = max(float(np.abs(B.conj().T @ B - np.eye(p)).max()) for B in m.bases)
    unb = 0.0
    for k, B in enumerate(m.bases):
        for C in m.bases[k + 1:]:
            unb = max(unb, float(np.abs(np.abs(B.conj().T @ C) ** 2 - 1 / p).max()))
    return MubResidual(ortho, unb, len(m.bases))


def projector_residuals(W: dict, p: int) -> dict:
    """Rank-one, resolution and cross-trace residuals of a projector family."""
    proj = max(float(np.abs(w @ w - w).max()) for w in W.values())
    herm = max(float(np.abs(w - w.conj().T).max()) for w in W.values())
    tr = max(abs(np.trace(w) - 1) for w in W.values())
    slopes = list(range(p)) + [INF]
    res = max(float(np.abs(sum(W[z, a] for a in range(p)) - np.eye(p)).max())
              for z in slopes)
    cross = 0.0
    for (z, a), w in W.items():
        for (z2, _), w2 in W.items():
            if z != z2:
                cross = max(cross, float(abs(abs(np.trace(w @ w2)) - 1 / p)))
    return {"idempotency": proj, "hermiticity": herm, "trace": float(tr),
            "resolution": res, "cross_trace": cross}


def intertwiner(W_a: dict, W_b: dict) -> tuple[np.ndarray, float]:
    """Unitary V with V W_a V^dag ~ W_b for every key, and the fit residual.

    Solved as the null vector of the linear map V -> (V W_a - W_b V)
    over all keys, then projected to the nearest unitary.
    """
    p = next(iter(W_a.values())).shape[0]
    I = np.eye(p)
    # row-major vec: vec(V A) = (1 (x) A^T) vec V, vec(B V) = (B (x) 1) vec V
    L = np.vstack([np.kron(I, W_a[k].T) - np.kron(W_b[k], I) for k in W_a])
    _, _, vh = np.linalg.svd(L)
    V = vh[-1].conj().reshape(p, p)
    u, _, wh = np.linalg.svd(V)
    V = u @ wh
    res = max(float(np.abs(V @ W_a[k] @ V.conj().T - W_b[k]).max()) for k in W_a)
    return V, res
