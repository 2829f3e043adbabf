"""Equiangular tight frames embedded in aligned SICs.

Covers ETF parameter arithmetic, the two strided subsets of an aligned SIC
in dimension N = d(d-2), their certification (rank, equiangularity,
tightness), the projectors onto their spans and the orbits of those
projectors under displacement, and a probe for embedded regular simplices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

from .entangle import theorem2_matrix
from .heisenberg import (
    crt_permutation, displacement, displacement_stack, generalized_parity, parity,
)
from .numtheory import CrtSplit, tower_root
from .sic_engine import Fiducial, OverlapTable

RANK_RTOL = 1e-8
ETF_TOL = 1e-8


@dataclass(frozen=True)
class EtfParams:
    m: int
    n: int

    def __post_init__(self):
        if not (1 <= self.m <= self.n <= self.m * self.m):
            raise ValueError(f"ETF parameters need m <= n <= m^2, got ({self.m}, {self.n})")

    @property
    def coherence_sq(self) -> Fraction:
        """(n - m) / (m (n - 1)); zero for an orthonormal basis."""
        if self.n == 1:
            return Fraction(0)
        return Fraction(self.n - self.m, self.m * (self.n - 1))


def etf_families(d: int) -> list[EtfParams]:
    """The four ETF parameter pairs sharing coherence 1/(d-1)^2."""
    if d < 4:
        raise ValueError(f"ETF families need d >= 4, got {d}")
    return [
        EtfParams(d * (d - 2), d * d * (d - 2) ** 2),
        EtfParams(d * (d - 1) // 2, d * d),
        EtfParams((d - 1) * (d - 2) // 2, (d - 2) ** 2),
        EtfParams(d - 1, d),
    ]


def _infer_small_dim(N: int) -> int:
    d = tower_root(N)
    if d is None:
        raise ValueError(f"dimension {N} is not d(d-2)")
    return d


def subset_indices(N: int, stride: int) -> list[tuple[int, int]]:
    d = _infer_small_dim(N)
    if stride not in (d, d - 2):
        raise ValueError(f"stride must be {d} or {d - 2}, got {stride}")
    k = N // stride
    return [(stride * i, stride * j) for i in range(k) for j in range(k)]


def extract_subset(sic_big: Fiducial, stride: int) -> list[np.ndarray]:
    """Vectors D_{stride i, stride j} |Psi_0>."""
    N = sic_big.dim
    psi = sic_big.components
    return [displacement(N, p) @ psi for p in subset_indices(N, stride)]


@dataclass
class EtfCertificate:
    params: EtfParams
    indices: list
    gram: np.ndarray = field(repr=False)
    rank: int
    singular_values: list
    equiangularity_residual: float
    tightness_residual: float
    coherence_sq_from_gram: float
    passed: bool

    def to_dict(self) -> dict:
        return {"m": self.params.m, "n": self.params.n,
                "coherence_sq": str(self.params.coherence_sq),
                "indices": [list(p) for p in self.indices],
                "rank": self.rank, "singular_values": self.singular_values,
                "equiangularity_residual": self.equiangularity_residual,
                "tightness_residual": self.tightness_residual,
                "coherence_sq_from_gram": self.coherence_sq_from_gram,
                "passed": self.passed, "tolerance": ETF_TOL}


def certify_etf(vectors, expected: EtfParams, indices=None,
                tol: float = ETF_TOL) -> EtfCertificate:
    V = np.column_stack([np.asarray(v, dtype=complex) for v in vectors])
    n = V.shape[1]
    G = V.conj().T @ V
    s = np.linalg.svd(V, compute_uv=False)
    rank = int(np.sum(s > RANK_RTOL * s[0]))
    off = ~np.eye(n, dtype=bool)
    absq = np.abs(G[off]) ** 2
    target = float(expected.coherence_sq)
    eq = float(np.abs(absq - target).max()) if n > 1 else 0.0
    # tightness: the frame operator restricted to its span is (n/m) times a projector
    S = V @ V.conj().T
    U = np.linalg.svd(V, full_matrices=False)[0]
    Pi = U[:, :rank] @ U[:, :rank].conj().T
    tight = float(np.abs(S - (n / expected.m) * Pi).max())
    # (n - m) / (m (n - 1)) recomputed from Tr S^2 = sum |G|^2
    coh = float((absq.sum() / (n * (n - 1)))) if n > 1 else 0.0
    passed = rank == expected.m and n == expected.n and eq <= tol and tight <= tol
    return EtfCertificate(expected, list(indices or range(n)), G, rank,
                          [float(x) for x in s], eq, tight, coh, passed)


def certify_subset(sic_big: Fiducial, stride: int) -> EtfCertificate:
    N = sic_big.dim
    d = _infer_small_dim(N)
    fam = etf_families(d)
    params = fam[1] if stride == d - 2 else fam[2]
    return certify_etf(extract_subset(sic_big, stride), params,
                       subset_indices(N, stride))


@dataclass
class ProjectorPair:
    Pi1: np.ndarray = field(repr=False)
    Pi2: np.ndarray = field(repr=False)
    rank1: int
    rank2: int
    idempotency: tuple[float, float]
    fiducial_weight: tuple[float, float]
    commutator: float
    tensor_residual: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        return {"rank_Pi1": self.rank1, "rank_Pi2": self.rank2,
                "idempotency": list(self.idempotency),
                "fiducial_weight": list(self.fiducial_weight),
                "commutator": self.commutator,
                "tensor_residual": None if self.tensor_residual is None
                else list(self.tensor_residual),
                "tolerance": ETF_TOL}


def build_projectors(sic_big: Fiducial, theta: OverlapTable | None = None, M=None) -> ProjectorPair:
    """Pi1 = ((d-1)/(2d)) sum |Psi_{(d-2)p}><.|, Pi2 = ((d-1)/(2(d-2))) sum |Psi_{dp}><.|.

    When the small table ``theta`` and the alignment matrix ``M`` are given,
    both are also compared against their tensor-factor forms
    1 (x) (1 + P)/2 and (1 - P_theta)/2 (x) 1.
    """
    N = sic_big.dim
    d = _infer_small_dim(N)
    if d % 2 == 0:
        raise ValueError("projector construction is restricted to odd d")
    psi = sic_big.components

    def frame_op(stride):
        W = np.column_stack(extract_subset(sic_big, stride))
        return W @ W.conj().T

    Pi1 = (d - 1) / (2 * d) * frame_op(d - 2)
    Pi2 = (d - 1) / (2 * (d - 2)) * frame_op(d)
    idem = (float(np.abs(Pi1 @ Pi1 - Pi1).max()), float(np.abs(Pi2 @ Pi2 - Pi2).max()))
    weight = (float((psi.conj() @ Pi1 @ psi).real), float((psi.conj() @ Pi2 @ psi).real))
    comm = float(np.abs(Pi1 @ Pi2 - Pi2 @ Pi1).max())
    ranks = tuple(int(np.linalg.matrix_rank(P, tol=RANK_RTOL * np.linalg.norm(P, 2)))
                  for P in (Pi1, Pi2))
    tens = None
    if theta is not None and M is not None:
        Q = crt_permutation(CrtSplit.for_tower(d))
        n = d - 2
        T1 = np.kron(np.eye(d), (np.eye(n) + parity(n)) / 2)
        Pt = generalized_parity(theta, theorem2_matrix(M, d))
        T2 = np.kron((np.eye(d) - Pt) / 2, np.eye(n))
        tens = (float(np.abs(Q.T @ T1 @ Q - Pi1).max()),
                float(np.abs(Q.T @ T2 @ Q - Pi2).max()))
    return ProjectorPair(Pi1, Pi2, ranks[0], ranks[1], idem, weight, comm, tens)


@dataclass
class MultipletReport:
    count1: int
    count2: int
    membership1: list  # per SIC vector: number of Pi1-type subspaces containing it
    membership2: list

    @property
    def each_vector_in_exactly_one(self) -> bool:
        return all(c == 1 for c in self.membership1) and all(c == 1 for c in self.membership2)

    def to_dict(self) -> dict:
        return {"count_Pi1": self.count1, "count_Pi2": self.count2,
                "each_vector_in_exactly_one": self.each_vector_in_exactly_one}


def _distinct(ops, sep: float = 1e-4) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for P in ops:
        if all(np.linalg.norm(P - R, 2) > sep for R in out):
            out.append(P)
    return out


def orbit_multiplets(sic_big: Fiducial, pair: ProjectorPair | None = None,
                     sep: float = 1e-4) -> MultipletReport:
    N = sic_big.dim
    pair = pair or build_projectors(sic_big)
    Ds = displacement_stack(N).reshape(N * N, N, N)
    psi = sic_big.components
    sic = np.einsum("krs,s->kr", Ds, psi)  # all N^2 SIC vectors

    def orbit(P):
        conj = np.einsum("krs,st,kut->kru", Ds, P, Ds.conj())
        return _distinct(conj, sep)

    out = []
    for P in (pair.Pi1, pair.Pi2):
        projs = orbit(P)
        w = np.einsum("kr,mrs,ks->km", sic.conj(), np.array(projs), sic).real
        out.append((len(projs), [int(x) for x in np.sum(np.abs(w - 1) < 1e-6, axis=1)]))
    return MultipletReport(out[0][0], out[1][0], out[0][1], out[1][1])


@dataclass
class SimplexProbe:
    real_phase_count: int
    real_indices: list
    max_real_over_displacements: int
    certificate: EtfCertificate | None
    generator: tuple[int, int] | None

    @property
    def simplex_found(self) -> bool:
        return self.certificate is not None and self.certificate.passed

    def to_dict(self) -> dict:
        return {"real_phase_count": self.real_phase_count,
                "real_indices": [list(p) for p in self.real_indices],
                "max_real_over_displacements": self.max_real_over_displacements,
                "simplex_found": self.simplex_found,
                "generator": None if self.generator is None else list(self.generator),
                "certificate": None if self.certificate is None else self.certificate.to_dict()}


def real_phases(theta: OverlapTable, tol: float = 1e-8) -> list[tuple[int, int]]:
    d = theta.dim
    return [(i, j) for i in range(d) for j in range(d)
            if (i, j) != (0, 0) and abs(theta.phases[i, j].imag) <= tol]


def _cyclic_generators(d: int):
    """One generator per cyclic subgroup of order d in Z_d^2."""
    seen = set()
    for a in range(d):
        for b in range(d):
            if gcd(gcd(a, b), d) != 1:
                continue
            sub = frozenset(((k * a) % d, (k * b) % d) for k in range(d))
            if sub not in seen:
                seen.add(sub)
                yield (a, b), sorted(sub)


def simplex_probe(theta: OverlapTable, sic_big: Fiducial, tol: float = 1e-8) -> SimplexProbe:
    """Count real phases in the small table and look for a (d-1, d) simplex.

    Candidate vertex sets are cyclic subgroups of order d inside the
    stride-(d-2) index grid (translates give unitarily equivalent Grams), plus
    the whole stride-d grid when it has exactly d points.
    """
    d = theta.dim
    N = sic_big.dim
    if N != d * (d - 2):
        raise ValueError(f"dimensions ({d}, {N}) do not satisfy N = d(d-2)")
    reals = real_phases(theta, tol)
    max_real = max(len(real_phases(theta.displaced(q), tol)) for q in np.ndindex(d, d))
    params = EtfParams(d - 1, d)
    psi = sic_big.components
    candidates = [(g, [((d - 2) * i, (d - 2) * j) for i, j in sub])
                  for g, sub in _cyclic_generators(d)]
    stride_d = subset_indices(N, d)
    if len(stride_d) == d:
        candidates.append((None, stride_d))
    for g, idx in candidates:
        cert = certify_etf([displacement(N, p) @ psi for p in idx], params, idx, tol)
        if cert.passed:
            return SimplexProbe(len(reals), reals, max_real, cert, g)
    return SimplexProbe(len(reals), reals, max_real, None, None)
