"""Weyl-Heisenberg displacement operators and the Clifford group.

Conventions: ``tau = -exp(i pi / d)``, ``omega = tau**2`` and

    (D_{i,j})_{r,s} = tau**(i*j + 2*j*s) * delta(r, s + i)

so that ``D_p D_q = tau**<p,q> D_{p+q}`` with ``<p,q> = k*j - l*i`` for
``p = (i, j)``, ``q = (k, l)``.  For odd ``d`` tau is a ``d``-th root of
unity and indices live in Z_d.  For even ``d`` tau has order ``2d`` and
indices may be taken modulo ``2d``; the Clifford machinery below is exact
for odd ``d`` and uses twirling for even ``d``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import gcd

import numpy as np

from .numtheory import CrtSplit, inv

ATOL = 1e-10


class NotSymplecticError(ValueError):
    pass


def roots(d: int) -> tuple[complex, complex]:
    """(tau, omega) for odd ``d``."""
    if d < 3 or d % 2 == 0:
        raise ValueError(f"roots() is defined here for odd d >= 3, got {d}")
    tau = -np.exp(1j * np.pi / d)
    return tau, tau * tau


def _tau_pow(d: int, k):
    """tau**k with the exponent reduced modulo the order of tau."""
    order = d if d % 2 else 2 * d
    k = np.asarray(k) % order
    # tau**k = (-1)**k exp(i pi k / d)
    return np.where(k % 2, -1.0, 1.0) * np.exp(1j * np.pi * k / d)


def index_modulus(d: int) -> int:
    """Modulus in which displacement labels are well defined."""
    return d if d % 2 else 2 * d


def displacement(d: int, p) -> np.ndarray:
    i, j = (int(x) for x in p)
    s = np.arange(d)
    out = np.zeros((d, d), dtype=complex)
    out[(s + i) % d, s] = _tau_pow(d, i * j + 2 * j * s)
    return out


@lru_cache(maxsize=None)
def displacement_stack(d: int) -> np.ndarray:
    """All ``D_{i,j}``, ``0 <= i, j < d``, as an array indexed ``[i, j, r, s]``."""
    out = np.empty((d, d, d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            out[i, j] = displacement(d, (i, j))
    out.setflags(write=False)
    return out


def symplectic_form(p, q, d: int) -> int:
    """<p, q> = k j - l i (mod d)."""
    (i, j), (k, l) = p, q
    return (k * j - l * i) % d


def all_overlaps(psi: np.ndarray, phi: np.ndarray | None = None) -> np.ndarray:
    """``<psi|D_{i,j}|phi>`` for all ``i, j`` as a ``d x d`` array (``phi`` defaults to ``psi``).

    Uses ``(D_{i,j} psi)_r = tau**(i j + 2 j (r - i)) psi_{r-i}`` and one FFT
    per shift, so the cost is O(d^2 log d).
    """
    psi = np.asarray(psi, dtype=complex)
    phi = psi if phi is None else np.asarray(phi, dtype=complex)
    d = psi.shape[0]
    r = np.arange(d)
    # a[i, r] = conj(psi_r) phi_{r - i}
    shifted = np.stack([np.roll(phi, i) for i in range(d)])
    a = np.conj(psi)[None, :] * shifted
    if d % 2:
        # tau**(2 j r) = omega**(j r); sum_r a[i, r] omega**(j r) = d * ifft
        s = np.fft.ifft(a, axis=1) * d
        i = r[:, None]
        j = r[None, :]
        return s * _tau_pow(d, -i * j)
    # even d: tau**(2 j (r - i) + i j) with tau of order 2d
    i = r[:, None, None]
    j = r[None, :, None]
    rr = r[None, None, :]
    ph = _tau_pow(d, i * j + 2 * j * (rr - i))
    return np.einsum("ir,ijr->ij", a, ph)


@dataclass(frozen=True)
class SymplecticMatrix:
    """2x2 integer matrix [[alpha, beta], [gamma, delta]] modulo ``modulus``."""

    alpha: int
    beta: int
    gamma: int
    delta: int
    modulus: int

    def __post_init__(self):
        m = self.modulus
        for name in ("alpha", "beta", "gamma", "delta"):
            object.__setattr__(self, name, getattr(self, name) % m)

    @classmethod
    def from_array(cls, a, modulus: int) -> "SymplecticMatrix":
        a = np.asarray(a)
        return cls(int(a[0, 0]), int(a[0, 1]), int(a[1, 0]), int(a[1, 1]), modulus)

    @classmethod
    def identity(cls, modulus: int) -> "SymplecticMatrix":
        return cls(1, 0, 0, 1, modulus)

    @property
    def det(self) -> int:
        return (self.alpha * self.delta - self.beta * self.gamma) % self.modulus

    @property
    def trace(self) -> int:
        return (self.alpha + self.delta) % self.modulus

    def as_array(self) -> np.ndarray:
        return np.array([[self.alpha, self.beta], [self.gamma, self.delta]])

    def apply(self, p) -> tuple[int, int]:
        i, j = p
        m = self.modulus
        return ((self.alpha * i + self.beta * j) % m,
                (self.gamma * i + self.delta * j) % m)

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        if other.modulus != self.modulus:
            raise ValueError("modulus mismatch")
        return SymplecticMatrix.from_array(self.as_array() @ other.as_array(),
                                           self.modulus)

    def __pow__(self, k: int) -> "SymplecticMatrix":
        out = SymplecticMatrix.identity(self.modulus)
        for _ in range(k):
            out = out @ self
        return out

    def inverse(self) -> "SymplecticMatrix":
        di = inv(self.det, self.modulus)
        return SymplecticMatrix(di * self.delta, -di * self.beta,
                                -di * self.gamma, di * self.alpha, self.modulus)

    def reduce(self, modulus: int) -> "SymplecticMatrix":
        return SymplecticMatrix(self.alpha, self.beta, self.gamma, self.delta,
                                modulus)

    def __str__(self):
        return f"[[{self.alpha},{self.beta}],[{self.gamma},{self.delta}]] mod {self.modulus}"


def sl2(d: int):
    """Iterate over SL(2, Z_d)."""
    rng = range(d)
    for a, b, c in itertools.product(rng, rng, rng):
        # solve a*dd - b*c = 1 for dd
        for dd in rng:
            if (a * dd - b * c) % d == 1:
                yield SymplecticMatrix(a, b, c, dd, d)


def gl2_det(d: int, dets=(1, -1)):
    """Iterate over 2x2 matrices mod d whose determinant lies in ``dets``."""
    targets = {x % d for x in dets}
    rng = range(d)
    for a, b, c, dd in itertools.product(rng, rng, rng, rng):
        if (a * dd - b * c) % d in targets:
            yield SymplecticMatrix(a, b, c, dd, d)


def _fix_phase(u: np.ndarray) -> np.ndarray:
    """Make the first nonzero entry of column 0 real positive."""
    col = u[:, 0]
    k = int(np.argmax(np.abs(col) > 1e-9))
    ph = col[k] / abs(col[k])
    return u / ph


def _metaplectic(d: int, F: SymplecticMatrix) -> np.ndarray:
    """U_F for odd d and invertible beta."""
    bi = inv(F.beta, d)
    r = np.arange(d)[:, None]
    s = np.arange(d)[None, :]
    expo = bi * (F.delta * r * r - 2 * r * s + F.alpha * s * s)
    return _tau_pow(d, expo) / np.sqrt(d)


def _split_beta(F: SymplecticMatrix) -> tuple[SymplecticMatrix, SymplecticMatrix]:
    """F = G @ H with both factors having invertible beta."""
    d = F.modulus
    units = [x for x in range(1, d) if gcd(x, d) == 1]
    for x in units:
        # H = [[1, x], [0, 1]], G = F H^-1 = [[a, b - a x], [c, d - c x]]
        H = SymplecticMatrix(1, x, 0, 1, d)
        G = F @ H.inverse()
        if gcd(G.beta, d) == 1:
            return G, H
    for H in sl2(d):
        if gcd(H.beta, d) != 1:
            continue
        G = F @ H.inverse()
        if gcd(G.beta, d) == 1:
            return G, H
    raise RuntimeError(f"no invertible-beta factorization for {F}")


def covariance_error(d: int, U: np.ndarray, F: SymplecticMatrix) -> float:
    """max_p || U D_p U^dag - D_{Fp} || over all p in Z_d^2."""
    Ds = displacement_stack(d)
    conj = np.einsum("ab,ijbc,dc->ijad", U, Ds, U.conj(), optimize=True)
    idx = np.arange(d)
    I, J = np.meshgrid(idx, idx, indexing="ij")
    Fi = (F.alpha * I + F.beta * J) % d
    Fj = (F.gamma * I + F.delta * J) % d
    return float(np.abs(conj - Ds[Fi, Fj]).max())


def clifford_unitary(d: int, F: SymplecticMatrix, check: bool = True) -> np.ndarray:
    """Unitary U_F with ``U_F D_p U_F^dag = D_{Fp}`` (odd d)."""
    if d % 2 == 0:
        raise ValueError("clifford_unitary is restricted to odd d; use twirl_unitary")
    if F.modulus != d:
        F = F.reduce(d)
    if F.det != 1:
        raise NotSymplecticError(f"det {F} = {F.det}, expected 1")
    if F == SymplecticMatrix.identity(d):
        U = np.eye(d, dtype=complex)
    elif gcd(F.beta, d) == 1:
        U = _metaplectic(d, F)
    else:
        G, H = _split_beta(F)
        U = _metaplectic(d, G) @ _metaplectic(d, H)
    U = _fix_phase(U)
    if check:
        err = covariance_error(d, U, F)
        assert err < ATOL, f"covariance fails for {F}: {err:.2e}"
    return U


def twirl_unitary(d: int, F) -> np.ndarray:
    """U_F from ``sum_p D_{Fp} A D_p^dag = d Tr(U_F^dag A) U_F``.

    Works for any d; for even d ``F`` must be given modulo ``2d``.  Used as an
    independent route to the Clifford unitaries.
    """
    m = index_modulus(d)
    if not isinstance(F, SymplecticMatrix):
        F = SymplecticMatrix.from_array(F, m)
    if F.modulus != m:
        F = F.reduce(m)
    for a in range(d):
        A = np.zeros((d, d), dtype=complex)
        A[a, 0] = 1.0
        acc = np.zeros((d, d), dtype=complex)
        for i in range(d):
            for j in range(d):
                acc += displacement(d, F.apply((i, j))) @ A @ displacement(d, (i, j)).conj().T
        nrm = np.linalg.norm(acc, 2)
        if nrm > 1e-6:
            return _fix_phase(acc / nrm)
    raise RuntimeError("twirl vanished on every probe operator")


def zauner_matrices(d: int) -> list[SymplecticMatrix]:
    """F_z, plus F_a when d = 3 mod 9."""
    if d < 4:
        raise ValueError(f"Zauner matrices need d >= 4, got {d}")
    out = [SymplecticMatrix(0, d - 1, 1, -1, d)]
    if d % 9 == 3:
        k = (d - 3) // 9
        out.append(SymplecticMatrix(1, 3, 3 * k, d - 2, d))
    return out


def parity(d: int) -> np.ndarray:
    """The basis permutation |r> -> |-r mod d> (odd d)."""
    if d % 2 == 0:
        raise ValueError("parity() is restricted to odd d")
    P = np.zeros((d, d), dtype=complex)
    r = np.arange(d)
    P[(-r) % d, r] = 1.0
    return P


def parity_expansion(d: int) -> np.ndarray:
    """(1/d) sum_p D_{-p}, the operator-basis expansion of the parity."""
    Ds = displacement_stack(d)
    return Ds.sum(axis=(0, 1)) / d  # sum over -p equals sum over p


def displaced_parity(d: int, p) -> np.ndarray:
    """Phase point operator D_p P D_{-p}."""
    D = displacement(d, p)
    return D @ parity(d) @ D.conj().T


def generalized_parity(theta, Mprime: SymplecticMatrix) -> np.ndarray:
    """P_theta = (1/d) sum_p D_{-p} exp(2 i theta_{M' p}).

    ``theta`` is a ``d x d`` array of unit-modulus overlap phases (an
    ``OverlapTable.phases``) or an object with a ``phases`` attribute.
    """
    phases = np.asarray(getattr(theta, "phases", theta))
    d = phases.shape[0]
    if d % 2 == 0:
        raise ValueError("generalized parity is restricted to odd d")
    if Mprime.modulus != d:
        Mprime = Mprime.reduce(d)
    if Mprime.det not in {2 % d, (-2) % d} and (
            inv(Mprime.det, d) not in {2 % d, (-2) % d}):
        raise ValueError(f"det M' must be +-2 or +-1/2 mod {d}, got {Mprime.det}")
    Ds = displacement_stack(d)
    idx = np.arange(d)
    I, J = np.meshgrid(idx, idx, indexing="ij")
    Mi = (Mprime.alpha * I + Mprime.beta * J) % d
    Mj = (Mprime.gamma * I + Mprime.delta * J) % d
    w = phases[Mi, Mj] ** 2
    # D_{-p} for p = (i, j) lives at stack index (-i, -j)
    Dm = Ds[(-I) % d, (-J) % d]
    return np.einsum("ij,ijab->ab", w, Dm) / d


def crt_factor_displacement(N: int, p, split: CrtSplit):
    """Indices (H p mod n1, H' p mod n2) with D^(N)_p = D^(n1) (x) D^(n2)."""
    if N % 2 == 0:
        raise ValueError("CRT factorization needs odd N")
    if split.N != N:
        raise ValueError(f"split {split.n1}x{split.n2} does not match N={N}")
    i, j = p
    k1, k2 = split.inv_n2_mod_n1.value, split.inv_n1_mod_n2.value
    return ((i % split.n1, (k1 * j) % split.n1),
            (i % split.n2, (k2 * j) % split.n2))


def crt_factor_clifford(N: int, F: SymplecticMatrix, split: CrtSplit):
    """Factor matrices H F H^-1 reduced modulo n1 and n2."""
    if N % 2 == 0:
        raise ValueError("CRT factorization needs odd N")
    if split.N != N:
        raise ValueError(f"split {split.n1}x{split.n2} does not match N={N}")
    out = []
    for n, k in ((split.n1, split.inv_n2_mod_n1.value),
                 (split.n2, split.inv_n1_mod_n2.value)):
        ki = inv(k, n)
        out.append(SymplecticMatrix(F.alpha, ki * F.beta, k * F.gamma,
                                    F.delta, n))
    return tuple(out)


def crt_permutation(split: CrtSplit) -> np.ndarray:
    """Q with Q |r> = |r1> (x) |r2> in Kronecker ordering."""
    N = split.N
    Q = np.zeros((N, N))
    r = np.arange(N)
    Q[(r % split.n1) * split.n2 + (r % split.n2), r] = 1.0
    return Q


def fixed_displacements(F: SymplecticMatrix) -> list[tuple[int, int]]:
    """Labels q with F q = q; these D_q commute with U_F up to phase."""
    m = F.modulus
    return [(i, j) for i in range(m) for j in range(m) if F.apply((i, j)) == (i, j)]
