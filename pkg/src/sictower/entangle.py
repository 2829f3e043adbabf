"""Tensor-product view of an aligned fiducial and its reduced states.

For odd d, C^N with N = d(d-2) splits as C^d (x) C^(d-2) through the CRT
basis map |r> -> |r mod d> (x) |r mod (d-2)>.  Reduced density matrices are
computed two ways: a partial trace of the reshaped vector, and an expansion
in displacement operators of the factor whose coefficients are overlaps of
the big fiducial.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .heisenberg import (
    SymplecticMatrix, all_overlaps, crt_permutation, displaced_parity,
    displacement_stack, generalized_parity, parity,
)
from .numtheory import CrtSplit, inv, tower_root
from .sic_engine import Fiducial, OverlapTable


@dataclass
class TensorView:
    d: int
    split: CrtSplit
    vector: np.ndarray  # Q psi, Kronecker ordering over (Z_d, Z_{d-2})
    matrix: np.ndarray  # d x (d-2) coefficient matrix

    @property
    def N(self) -> int:
        return self.split.N

    def to_vector(self) -> np.ndarray:
        """Undo the CRT reordering."""
        return crt_permutation(self.split).T @ self.matrix.reshape(-1)


def tensor_view(f: Fiducial | np.ndarray, d: int | None = None) -> TensorView:
    psi = np.asarray(getattr(f, "components", f), dtype=complex)
    N = psi.shape[0]
    if d is None:
        d = tower_root(N) or 0
    if d * (d - 2) != N:
        raise ValueError(f"dimension {N} is not d(d-2) for d={d}")
    split = CrtSplit.for_tower(d)
    v = crt_permutation(split) @ psi
    return TensorView(d, split, v, v.reshape(split.n1, split.n2))


def reduced_density(view: TensorView, keep: int) -> np.ndarray:
    """Reduced state on the factor of dimension ``keep`` (d or d-2)."""
    A = view.matrix
    if keep == view.split.n1:
        return A @ A.conj().T
    if keep == view.split.n2:
        return A.T @ A.conj()
    raise ValueError(f"no tensor factor of dimension {keep}")


def reduced_density_from_overlaps(f: Fiducial | np.ndarray, d: int, keep: int) -> np.ndarray:
    """rho = (1/n) sum_p <Psi| 1 (x) D_{-p} |Psi> D_p on the kept factor of size n.

    The operator 1 (x) D_p (or D_p (x) 1) is a single displacement of the big
    space, so the coefficients are read off the overlap table of Psi.
    """
    psi = np.asarray(getattr(f, "components", f), dtype=complex)
    split = CrtSplit.for_tower(d)
    n1, n2, N = split.n1, split.n2, split.N
    c = all_overlaps(psi)
    if keep == n2:
        n, a_lift, b_lift = n2, n1 * inv(n1, n2), n1
    elif keep == n1:
        n, a_lift, b_lift = n1, n2 * inv(n2, n1), n2
    else:
        raise ValueError(f"no tensor factor of dimension {keep}")
    Ds = displacement_stack(n)
    a = np.arange(n)
    A, B = np.meshgrid(a, a, indexing="ij")
    coef = c[(-A * a_lift) % N, (-B * b_lift) % N]
    return np.einsum("ab,abrs->rs", coef, Ds) / n


def schmidt_spectrum(view: TensorView) -> np.ndarray:
    """Squared Schmidt coefficients, descending."""
    s = np.linalg.svd(view.matrix, compute_uv=False)
    return s ** 2


@dataclass
class TheoremCheck:
    name: str
    residual: float
    passed: bool
    tolerance: float
    rank: int
    eigenvalues: list
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "residual": self.residual,
                "passed": self.passed, "tolerance": self.tolerance,
                "rank": self.rank, "eigenvalues": self.eigenvalues,
                "details": self.details}


def _spectrum(rho: np.ndarray, tol: float = 1e-8):
    ev = np.sort(np.linalg.eigvalsh((rho + rho.conj().T) / 2))[::-1]
    return int(np.sum(ev > tol)), [float(x) for x in ev]


def check_theorem1(f: Fiducial, d: int, tol: float = 1e-8) -> TheoremCheck:
    """rho on the (d-2) factor against (1 + P)/(d-1).

    Also reports the best displaced-parity match (1 + D_p P D_p^dag)/(d-1),
    which locates the parity centre when the input is not suitably chosen.
    """
    view = tensor_view(f, d)
    n = d - 2
    rho = reduced_density(view, n)
    expected = (np.eye(n) + parity(n)) / (d - 1)
    res = float(np.abs(rho - expected).max())
    best = min(
        ((float(np.abs(rho - (np.eye(n) + displaced_parity(n, p)) / (d - 1)).max()), p)
         for p in np.ndindex(n, n)), key=lambda t: t[0])
    rank, ev = _spectrum(rho)
    return TheoremCheck("theorem1", res, res <= tol, tol, rank, ev,
                        {"best_displaced_parity": [int(x) for x in best[1]],
                         "best_displaced_residual": best[0]})


def theorem2_matrix(M: SymplecticMatrix, d: int) -> SymplecticMatrix:
    """M' = M diag(-1/2, 1) mod d."""
    return M.reduce(d) @ SymplecticMatrix(-inv(2, d), 0, 0, 1, d)


def check_theorem2(f: Fiducial, theta: OverlapTable, M: SymplecticMatrix, d: int,
                   tol: float = 1e-8) -> TheoremCheck:
    """rho on the d factor against (1 - P_theta)/(d-1), P_theta built with M'."""
    view = tensor_view(f, d)
    rho = reduced_density(view, d)
    Mp = theorem2_matrix(M, d)
    P = generalized_parity(theta, Mp)
    expected = (np.eye(d) - P) / (d - 1)
    res = float(np.abs(rho - expected).max())
    rank, ev = _spectrum(rho)
    herm = float(np.abs(P - P.conj().T).max())
    invol = float(np.abs(P @ P - np.eye(d)).max())
    return TheoremCheck("theorem2", res, res <= tol, tol, rank, ev,
                        {"M_prime": Mp.as_array().tolist(),
                         "P_theta_hermiticity": herm,
                         "P_theta_involution": invol,
                         "P_theta_trace": float(np.trace(P).real),
                         "P_theta_spectrum": [float(x) for x in np.sort(
                             np.linalg.eigvalsh((P + P.conj().T) / 2))[::-1]]})
