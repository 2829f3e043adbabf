"""Exact modular arithmetic: square-free parts, tower steps, inverses and CRT.

Every residue carries its modulus explicitly so that arithmetic modulo ``d``
and modulo ``d - 2`` can never be mixed by accident.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd, isqrt


class NotInvertibleError(ArithmeticError):
    """Raised when a residue has no multiplicative inverse."""


@dataclass(frozen=True)
class Residue:
    value: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError(f"modulus must be positive, got {self.modulus}")
        object.__setattr__(self, "value", self.value % self.modulus)

    def _check(self, other: "Residue") -> None:
        if other.modulus != self.modulus:
            raise ValueError(
                f"modulus mismatch: {self.modulus} vs {other.modulus}")

    def __add__(self, other: "Residue") -> "Residue":
        self._check(other)
        return Residue(self.value + other.value, self.modulus)

    def __sub__(self, other: "Residue") -> "Residue":
        self._check(other)
        return Residue(self.value - other.value, self.modulus)

    def __mul__(self, other: "Residue") -> "Residue":
        self._check(other)
        return Residue(self.value * other.value, self.modulus)

    def __neg__(self) -> "Residue":
        return Residue(-self.value, self.modulus)

    def __int__(self) -> int:
        return self.value


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division."""
    if n < 1:
        raise ValueError(f"cannot factorize {n}")
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n) == {n: 1}


def squarefree_part(n: int) -> int:
    """Product of the primes dividing ``n`` to an odd power."""
    out = 1
    for p, e in factorize(n).items():
        if e % 2:
            out *= p
    return out


def discriminant(d: int) -> int:
    """Square-free part of (d+1)(d-3)."""
    if d < 4:
        raise ValueError(f"discriminant needs d >= 4, got {d}")
    return squarefree_part((d + 1) * (d - 3))


@dataclass(frozen=True)
class TowerStep:
    d: int
    next: int
    discriminant: int


def next_rung(d: int) -> TowerStep:
    if d < 4:
        raise ValueError(f"tower rungs start at d >= 4, got {d}")
    n = d * (d - 2)
    D = discriminant(d)
    # (N+1)(N-3) = (d-1)^2 (d+1)(d-3), so the square-free parts agree
    assert discriminant(n) == D
    return TowerStep(d=d, next=n, discriminant=D)


def tower(start: int, rungs: int) -> list[TowerStep]:
    """``rungs`` dimensions starting at ``start``; the last step's ``next`` is one past."""
    steps = []
    d = start
    for _ in range(rungs):
        step = next_rung(d)
        steps.append(step)
        d = step.next
    return steps


def tower_root(N: int) -> int | None:
    """The d with d(d-2) = N, or None."""
    if N < 0:
        return None
    d = 1 + isqrt(N + 1)
    return d if d * (d - 2) == N else None


def egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def mod_inverse(a: Residue) -> Residue:
    g, x, _ = egcd(a.value, a.modulus)
    if g != 1:
        raise NotInvertibleError(
            f"{a.value} has no inverse modulo {a.modulus} (gcd {g})")
    return Residue(x, a.modulus)


def inv(a: int, m: int) -> int:
    """Plain-integer shortcut for ``mod_inverse``."""
    return mod_inverse(Residue(a, m)).value


@dataclass(frozen=True)
class CrtSplit:
    n1: int
    n2: int
    inv_n2_mod_n1: Residue
    inv_n1_mod_n2: Residue

    @classmethod
    def of(cls, n1: int, n2: int) -> "CrtSplit":
        if gcd(n1, n2) != 1:
            raise ValueError(f"moduli {n1} and {n2} are not coprime")
        return cls(n1, n2, mod_inverse(Residue(n2, n1)),
                   mod_inverse(Residue(n1, n2)))

    @classmethod
    def for_tower(cls, d: int) -> "CrtSplit":
        """The split N = d(d-2) -> (d, d-2) for odd d."""
        if d % 2 == 0 or d < 5:
            raise ValueError(f"tower splitting needs odd d >= 5, got {d}")
        return cls.of(d, d - 2)

    @property
    def N(self) -> int:
        return self.n1 * self.n2

    @property
    def kappa(self) -> int | None:
        """(d-1)/2 when the split is (d, d-2), otherwise None."""
        if self.n1 - self.n2 == 2 and self.n1 % 2:
            return (self.n1 - 1) // 2
        return None


def crt_split(r: Residue, split: CrtSplit) -> tuple[Residue, Residue]:
    if r.modulus != split.N:
        raise ValueError(f"expected a residue modulo {split.N}, got {r.modulus}")
    return Residue(r.value, split.n1), Residue(r.value, split.n2)


def crt_combine(r1: Residue, r2: Residue, split: CrtSplit) -> Residue:
    if r1.modulus != split.n1 or r2.modulus != split.n2:
        raise ValueError("residues do not match the split moduli")
    value = (r1.value * split.n2 * split.inv_n2_mod_n1.value
             + r2.value * split.n1 * split.inv_n1_mod_n2.value)
    return Residue(value, split.N)


def crt_index(split: CrtSplit):
    """Array ``idx`` with ``idx[r1, r2]`` the combined residue."""
    import numpy as np

    r1 = np.arange(split.n1)[:, None]
    r2 = np.arange(split.n2)[None, :]
    return (r1 * split.n2 * split.inv_n2_mod_n1.value
            + r2 * split.n1 * split.inv_n1_mod_n2.value) % split.N
