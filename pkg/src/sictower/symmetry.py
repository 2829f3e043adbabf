"""Stabilizers of SIC fiducials in the (extended) Clifford group.

A symplectic class F stabilizes the SIC projector |psi><psi| when some
displaced Clifford unitary D_q U_F maps psi to itself up to phase.  Because
the SIC vectors D_q psi are pairwise distinct projectors, each F contributes
at most one q, so the stabilizer order is the number of classes F with a
witness.  Anti-unitary elements are tested as D_q U_G K with K complex
conjugation and F = G J, J = diag(1, -1).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .heisenberg import (
    SymplecticMatrix, all_overlaps, clifford_unitary, crt_permutation,
    displacement, parity, sl2, twirl_unitary, zauner_matrices,
)
from .numtheory import CrtSplit
from .sic_engine import Fiducial, eigenspaces

FIX_TOL = 1e-8
MAX_EXHAUSTIVE_DIM = 15
J_FLIP = (1, 0, 0, -1)


@dataclass(frozen=True)
class Witness:
    F: SymplecticMatrix  # class mod d; det -1 for anti-unitary elements
    shift: tuple[int, int]
    antiunitary: bool
    residual: float


@dataclass
class SymmetryReport:
    dim: int
    unitary_order: int
    extended_order: int
    witnesses: list
    zauner_flavor: str | None
    subspace_flag: str | None
    lower_bound: bool = False
    closed: bool = True
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim, "unitary_order": self.unitary_order,
            "extended_order": self.extended_order,
            "witnesses": [{"F": w.F.as_array().tolist(), "shift": list(w.shift),
                           "antiunitary": w.antiunitary, "residual": w.residual}
                          for w in self.witnesses],
            "zauner_flavor": self.zauner_flavor, "subspace_flag": self.subspace_flag,
            "lower_bound": self.lower_bound, "closed_under_composition": self.closed,
            "tolerance": FIX_TOL, "notes": self.notes,
        }


def _classes(d: int, sample: int | None, rng):
    """Pairs (class mod d, lift for unitary construction) over SL(2, Z_d)."""
    if d % 2:
        it = ((F, F) for F in sl2(d))
    else:
        seen = set()

        def lifts():
            for G in sl2(2 * d):
                c = G.reduce(d)
                if c not in seen:
                    seen.add(c)
                    yield c, G
        it = lifts()
    items = list(it)
    if sample is not None and sample < len(items):
        pick = rng.choice(len(items), size=sample, replace=False)
        items = [items[k] for k in sorted(pick)]
    return items


def _unitary(d: int, G: SymplecticMatrix) -> np.ndarray:
    if d % 2:
        return clifford_unitary(d, G, check=False)
    return twirl_unitary(d, G)


def _witness(psi: np.ndarray, phi: np.ndarray, tol: float):
    """q with |<psi| D_q |phi>| = 1, if any."""
    c = np.abs(all_overlaps(psi, phi))
    k = np.unravel_index(int(np.argmax(c)), c.shape)
    res = float(1 - c[k])
    if res <= tol:
        return (int(k[0]), int(k[1])), res
    return None


def _zauner_flavor(d: int, F: SymplecticMatrix) -> str:
    Fz = zauner_matrices(d)[0]
    if d % 9 != 3:
        return "z"
    for S in sl2(d):
        if S @ F @ S.inverse() == Fz:
            return "z"
    return "a"


def _closed(witnesses, d: int) -> bool:
    keys = {(w.F, w.antiunitary) for w in witnesses}
    for a, b in itertools.product(witnesses, repeat=2):
        if (a.F @ b.F, a.antiunitary != b.antiunitary) not in keys:
            return False
    return True


def stabilizer_order(f: Fiducial, tol: float = FIX_TOL, exhaustive: bool | None = None,
                     sample: int = 400, seed: int = 0) -> SymmetryReport:
    """Count unitary and anti-unitary Clifford classes fixing |psi><psi|.

    Full enumeration for d <= 15 (or when ``exhaustive`` is set); otherwise a
    random sample of classes, with the result marked as a lower bound.
    """
    d = f.dim
    psi = f.components
    full = d <= MAX_EXHAUSTIVE_DIM if exhaustive is None else exhaustive
    rng = np.random.default_rng(seed)
    classes = _classes(d, None if full else sample, rng)
    m = 2 * d if d % 2 == 0 else d
    Jm = SymplecticMatrix(*J_FLIP, m)
    witnesses = []
    for c, G in classes:
        U = _unitary(d, G)
        w = _witness(psi, U @ psi, tol)
        if w:
            witnesses.append(Witness(c, w[0], False, w[1]))
        # anti-unitary D_q U_G K has symplectic part G J
        w = _witness(psi, U @ psi.conj(), tol)
        if w:
            witnesses.append(Witness((G @ Jm).reduce(d), w[0], True, w[1]))
    nu = sum(not w.antiunitary for w in witnesses)
    notes = []
    flavor = subspace = None
    for w in witnesses:
        F = w.F
        if not w.antiunitary and F.trace == (d - 1) % d and F != SymplecticMatrix.identity(d):
            flavor = _zauner_flavor(d, F) if d >= 4 else "z"
            subspace = _subspace_flag(psi, w, d)
            break
    if flavor is None:
        notes.append("no order-3 trace -1 element in the stabilizer")
    return SymmetryReport(d, nu, len(witnesses), witnesses, flavor, subspace,
                          lower_bound=not full,
                          closed=_closed(witnesses, d) if full else True, notes=notes)


def _subspace_flag(psi: np.ndarray, w: Witness, d: int) -> str:
    lift = w.F if d % 2 else _lift(w.F, d)
    V = displacement(d, w.shift) @ _unitary(d, lift)
    spaces = eigenspaces(V)
    dims = [B.shape[1] for _, B in spaces]
    for _, B in spaces:
        if np.linalg.norm(B.conj().T @ psi) > 1 - 1e-6:
            k = B.shape[1]
            if k == max(dims):
                return "largest"
            if k == min(dims):
                return "smallest"
            return "middle"
    return "none"


def _lift(F: SymplecticMatrix, d: int) -> SymplecticMatrix:
    for G in sl2(2 * d):
        if G.reduce(d) == F:
            return G
    raise ValueError(f"no lift of {F} to SL(2, Z_{2 * d})")


@dataclass
class Theorem5Check:
    F_b: SymplecticMatrix
    fixed_residual: float
    tensor_residual: float
    permutation_residual: float
    permutation_order: int
    passed: bool
    permutation: list = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return {"F_b": self.F_b.as_array().tolist(),
                "fixed_residual": self.fixed_residual,
                "tensor_residual": self.tensor_residual,
                "permutation_residual": self.permutation_residual,
                "permutation_order": self.permutation_order,
                "passed": self.passed, "tolerance": FIX_TOL}


def check_theorem5(f: Fiducial, d: int, tol: float = FIX_TOL) -> Theorem5Check:
    """U_b for F_b = diag(1-d, 1-d) mod N fixes Psi_0 and permutes the SIC."""
    if d % 2 == 0:
        raise ValueError("the U_b check is restricted to odd d")
    N = d * (d - 2)
    if f.dim != N:
        raise ValueError(f"expected dimension {N}, got {f.dim}")
    Fb = SymplecticMatrix(1 - d, 0, 0, 1 - d, N)
    Ub = clifford_unitary(N, Fb)
    Q = crt_permutation(CrtSplit.for_tower(d))
    T = Q.T @ np.kron(np.eye(d), parity(d - 2)) @ Q
    ph = np.vdot(T.reshape(-1), Ub.reshape(-1)) / N
    tens = float(np.abs(Ub - ph * T).max())
    psi = f.components
    fixed = float(1 - abs(np.vdot(psi, Ub @ psi)))
    perm = []
    worst = 0.0
    for p in np.ndindex(N, N):
        img = Fb.apply(p)
        a = displacement(N, img) @ psi
        b = Ub @ displacement(N, p) @ psi
        worst = max(worst, float(1 - abs(np.vdot(a, b))))
        perm.append(img[0] * N + img[1])
    perm = np.array(perm)
    order = 1
    cur = perm.copy()
    ident = np.arange(N * N)
    while not np.array_equal(cur, ident):
        cur = perm[cur]
        order += 1
    passed = fixed <= tol and worst <= tol and tens <= tol and order == 2
    return Theorem5Check(Fb, fixed, tens, worst, order, passed, perm.tolist())
