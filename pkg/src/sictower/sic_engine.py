"""SIC fiducials: verification, overlap phases, numerical search and centring."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import schur
from scipy.optimize import least_squares, minimize

from .heisenberg import (
    SymplecticMatrix, all_overlaps, clifford_unitary, displacement,
    displacement_stack, fixed_displacements, sl2, zauner_matrices,
)

log = logging.getLogger(__name__)

CENTRING_STATES = ("unknown", "centred", "displaced")


class NotASicError(ValueError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CentringError(RuntimeError):
    pass


def default_tolerance(d: int) -> float:
    """Residual tolerance ladder for double-precision fiducials."""
    return 1e-12 if d < 15 else 1e-10


@dataclass
class Fiducial:
    components: np.ndarray
    label: str = ""
    centring: str = "unknown"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.components, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("fiducial vector is zero")
        if abs(n - 1) > 1e-12:
            v = v / n
        self.components = v
        if self.centring not in CENTRING_STATES:
            raise ValueError(f"unknown centring state {self.centring!r}")

    @property
    def dim(self) -> int:
        return self.components.shape[0]

    def displaced(self, q) -> "Fiducial":
        """D_q applied to the fiducial (another vector of the same SIC)."""
        v = displacement(self.dim, q) @ self.components
        state = "displaced" if tuple(q) != (0, 0) else self.centring
        return replace(self, components=v, centring=state,
                       metadata=dict(self.metadata))

    def conjugated(self) -> "Fiducial":
        return replace(self, components=self.components.conj(),
                       metadata=dict(self.metadata))


@dataclass
class SicVerification:
    dim: int
    residual: float
    identity_residual: float
    tolerance: float
    passed: bool


@dataclass
class OverlapTable:
    """exp(i theta_p) = sqrt(d+1) <psi|D_p|psi>, with the p = 0 entry set to 1."""

    dim: int
    phases: np.ndarray
    residual: float

    def displaced(self, q) -> "OverlapTable":
        """Table of the fiducial D_q psi: entries pick up omega**<p,q>."""
        d = self.dim
        k, l = q
        I, J = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
        w = np.exp(2j * np.pi * ((k * J - l * I) % d) / d)
        return OverlapTable(d, self.phases * w, self.residual)

    def conjugated(self) -> "OverlapTable":
        """Table of the complex-conjugate fiducial.

        For odd d, conj(D_{i,j}) = D_{i,-j}, so the table is conj(phases[i, -j]).
        For even d the same identity holds with j taken mod 2d, which only
        changes the sign of some entries; we compute it directly instead.
        """
        d = self.dim
        if d % 2:
            J = (-np.arange(d)) % d
            return OverlapTable(d, self.phases[:, J].conj(), self.residual)
        raise ValueError("use overlap_table(fiducial.conjugated()) for even d")


def sic_residuals(psi: np.ndarray) -> np.ndarray:
    """|<psi|D_p psi>|^2 - 1/(d+1) for all p, with p = 0 zeroed."""
    d = psi.shape[0]
    r = np.abs(all_overlaps(psi)) ** 2 - 1.0 / (d + 1)
    r[0, 0] = 0.0
    return r


def sic_verify(f: Fiducial, tolerance: float | None = None) -> SicVerification:
    d = f.dim
    if d < 2:
        raise ValueError("dimension must be at least 2")
    tol = default_tolerance(d) if tolerance is None else tolerance
    psi = f.components
    res = float(np.abs(sic_residuals(psi)).max())
    # the displacement orbit of any unit vector resolves d * identity
    # (irreducibility); kept as a consistency check of the operator stack
    orbit = displacement_stack(d).reshape(d * d, d, d) @ psi
    frame = orbit.T @ orbit.conj()
    id_res = float(np.linalg.norm(frame - d * np.eye(d), 2))
    return SicVerification(d, res, id_res, tol, res <= tol and id_res <= 1e-9)


def overlap_table(f: Fiducial, tolerance: float | None = None) -> OverlapTable:
    v = sic_verify(f, tolerance)
    if not v.passed:
        raise NotASicError(f"not a SIC fiducial: residual {v.residual:.3e}",
                           v.residual)
    d = f.dim
    phases = np.sqrt(d + 1) * all_overlaps(f.components)
    phases[0, 0] = 1.0
    return OverlapTable(d, phases, v.residual)


# --- eigenspaces -----------------------------------------------------------

def eigenspaces(U: np.ndarray, tol: float = 1e-6):
    """Orthonormal eigenspaces of a normal matrix as (eigenvalue, basis) pairs."""
    T, Z = schur(U, output="complex")
    ev = np.diag(T)
    groups: list[tuple[complex, list[int]]] = []
    for k, e in enumerate(ev):
        for g in groups:
            if abs(g[0] - e) < tol:
                g[1].append(k)
                break
        else:
            groups.append((e, [k]))
    out = []
    for e, ks in groups:
        q, _ = np.linalg.qr(Z[:, ks])
        out.append((complex(e), q))
    return out


def joint_eigenspaces(unitaries):
    """Common eigenspaces of commuting unitaries: list of (eigenvalues, basis)."""
    d = unitaries[0].shape[0]
    spaces = [((), np.eye(d, dtype=complex))]
    for U in unitaries:
        refined = []
        for lab, B in spaces:
            for e, q in eigenspaces(B.conj().T @ U @ B):
                refined.append((lab + (e,), B @ q))
        spaces = refined
    return sorted(spaces, key=lambda s: -s[1].shape[1])


def zauner_unitary(d: int, which: str = "z") -> np.ndarray:
    mats = zauner_matrices(d)
    if which == "z":
        F = mats[0]
    elif which == "a":
        if len(mats) < 2:
            raise ValueError(f"F_a exists only for d = 3 mod 9, got d={d}")
        F = mats[1]
    else:
        raise ValueError(f"unknown Zauner flavour {which!r}")
    if d % 2:
        return clifford_unitary(d, F)
    from .heisenberg import twirl_unitary
    return twirl_unitary(d, even_zauner(d))


def even_zauner(d: int) -> SymplecticMatrix:
    """Order-3 Zauner matrix modulo 2d for even d."""
    return SymplecticMatrix(0, d - 1, d + 1, d - 1, 2 * d)


def zauner_project(d: int, which: str = "z"):
    """Three Zauner subspaces as (eigenvalue, orthonormal basis), largest first."""
    if d < 4:
        raise ValueError("Zauner subspaces need d >= 4")
    return joint_eigenspaces([zauner_unitary(d, which)])


# --- search ----------------------------------------------------------------

class _Objective:
    """Sum over p != 0 of (|<phi|D_p|phi>|^2 - 1/(d+1))^2 with phi = Bz/|Bz|."""

    def __init__(self, d: int, basis: np.ndarray):
        self.d = d
        self.B = basis
        self.k = basis.shape[1]
        self.Ds = displacement_stack(d).reshape(d * d, d, d)
        self.DsH = np.conj(np.transpose(self.Ds, (0, 2, 1)))
        self.target = 1.0 / (d + 1)

    def vector(self, x):
        z = x[: self.k] + 1j * x[self.k:]
        psi = self.B @ z
        return psi / np.linalg.norm(psi), np.linalg.norm(psi)

    def residuals(self, x, jac=False):
        phi, n = self.vector(x)
        Dphi = self.Ds @ phi
        c = Dphi @ phi.conj()
        r = (np.abs(c) ** 2 - self.target)[1:]
        if not jac:
            return r
        DHphi = self.DsH @ phi
        h = c.conj()[:, None] * Dphi + c[:, None] * DHphi
        h = (h - np.outer(h @ phi.conj(), phi)) / n
        g = h @ self.B.conj()
        J = 2 * np.hstack([g.real, g.imag])
        return r, J[1:]

    def value_and_grad(self, x):
        r, J = self.residuals(x, jac=True)
        return float(r @ r), 2 * (r @ J)


@dataclass
class SearchResult:
    fiducial: Fiducial | None
    residual: float
    converged: bool
    seed: int
    attempts: int
    subspace_dim: int


def _search_once(obj: _Objective, rng, max_iters: int):
    x0 = rng.normal(size=2 * obj.k)
    res = minimize(obj.value_and_grad, x0, jac=True, method="L-BFGS-B",
                   options=dict(maxiter=max_iters, ftol=1e-22, gtol=1e-15))
    x = res.x
    if obj.d * obj.d - 1 >= 2 * obj.k:
        # Levenberg-Marquardt polish: quadratic convergence near a zero
        ls = least_squares(obj.residuals, x, jac=lambda y: obj.residuals(y, True)[1],
                           method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                           max_nfev=200 * (2 * obj.k + 1))
        x = ls.x
    phi, _ = obj.vector(x)
    return phi, float(np.abs(sic_residuals(phi)).max())


def find_fiducial(d: int, seed: int = 0, max_iters: int = 3000,
                  tolerance: float | None = None, restarts: int = 20,
                  restrict_zauner: bool = False, symmetries=None,
                  subspace: str = "largest") -> SearchResult:
    """Search for a SIC fiducial by minimizing the squared overlap deviations.

    Parameters
    ----------
    restrict_zauner : bool
        Search inside Zauner eigenspaces of U_{F_z} instead of all of C^d.
    symmetries : list of ndarray, optional
        Extra commuting unitaries; the search runs inside their joint
        eigenspaces with the Zauner unitary (if requested).
    subspace : {"largest", "all"}
        Whether to try only the largest invariant subspace or every one,
        largest first.

    Not converging is a normal outcome: ``converged`` is False and the best
    vector found is still returned with its residual.
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    tol = default_tolerance(d) if tolerance is None else tolerance
    unitaries = list(symmetries or [])
    if restrict_zauner:
        unitaries.insert(0, zauner_unitary(d))
    if unitaries:
        spaces = [B for _, B in joint_eigenspaces(unitaries)]
        if subspace == "largest":
            spaces = [B for B in spaces if B.shape[1] == spaces[0].shape[1]]
    else:
        spaces = [np.eye(d, dtype=complex)]

    rng = np.random.default_rng(seed)
    best = (None, np.inf, 0)
    attempts = 0
    for _ in range(restarts):
        for B in spaces:
            attempts += 1
            phi, res = _search_once(_Objective(d, B), rng, max_iters)
            log.debug("d=%d subspace=%d attempt=%d residual=%.3e",
                      d, B.shape[1], attempts, res)
            if res < best[1]:
                best = (phi, res, B.shape[1])
            if res <= tol:
                break
        if best[1] <= tol:
            break
    phi, res, k = best
    label = f"optimizer d={d} seed={seed}"
    centring = "centred" if restrict_zauner else "unknown"
    fid = Fiducial(phi, label=label, centring=centring,
                   metadata={"residual": res, "seed": seed}) if phi is not None else None
    return SearchResult(fid, res, res <= tol, seed, attempts, k)


# --- centring --------------------------------------------------------------

def _eig_residual(U: np.ndarray, v: np.ndarray) -> float:
    w = U @ v
    return float(np.linalg.norm(w - (v.conj() @ w) * v))


def _normalize_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


@dataclass
class CentringWitness:
    shift: tuple[int, int]
    conjugator: SymplecticMatrix | None
    zauner: SymplecticMatrix
    eigen_residual: float


def centre_fiducial(f: Fiducial, tol: float = 1e-8):
    """Move ``f`` to a SIC vector that is an eigenvector of U_{F_z}.

    Tries the d^2 displaced Zauner unitaries ``D_q U_{F_z} D_{-q}`` first.  If
    none stabilizes ``f``, tries the conjugates ``U_S U_{F_z} U_S^dag`` of the
    same class and maps the fiducial back with ``U_S^dag D_{-q}``.

    Returns ``(centred Fiducial, CentringWitness)``.
    """
    d = f.dim
    if d % 2 == 0:
        raise ValueError("centring is implemented for odd d")
    v = f.components
    Fz = zauner_matrices(d)[0]
    Uz = clifford_unitary(d, Fz)
    cands = [(None, None, Fz, Uz)]
    seen = {Fz}
    for S in sl2(d):
        G = S @ Fz @ S.inverse()
        if G in seen:
            continue
        seen.add(G)
        US = clifford_unitary(d, S, check=False)
        cands.append((S, US, G, US @ Uz @ US.conj().T))
    for S, US, G, UG in cands:
        for q in np.ndindex(d, d):
            w = displacement(d, q).conj().T @ v
            err = _eig_residual(UG, w)
            if err <= tol:
                if US is not None:
                    w = US.conj().T @ w
                    err = _eig_residual(Uz, w)
                out = replace(f, components=_normalize_phase(w), centring="centred",
                              metadata=dict(f.metadata))
                return out, CentringWitness(tuple(int(x) for x in q), S, G, err)
    raise CentringError("no displaced Zauner unitary stabilizes this fiducial")


def centred_triplet(f: Fiducial) -> list[Fiducial]:
    """SIC vectors D_q f for the displacements q fixed by F_z (3 when 3 | d)."""
    Fz = zauner_matrices(f.dim)[0]
    return [f.displaced(q) for q in fixed_displacements(Fz)]


@dataclass
class StrongCentring:
    fiducial: Fiducial
    shift: tuple[int, int]
    residual: float
    candidates: list
    ties: int


def strongly_centre(f: Fiducial, partner: OverlapTable, tol: float = 1e-8) -> StrongCentring:
    """Pick the member of the centred triplet that passes check_observation1.

    ``partner`` is the overlap table in the smaller dimension d with
    ``f.dim == d (d - 2)``.  This is an operational surrogate for strong
    centring, reported as "operationally strongly centred".
    """
    from .alignment import check_observation1

    N, d = f.dim, partner.dim
    if N % 3:
        return StrongCentring(f, (0, 0), float("nan"), [], 0)
    Fz = zauner_matrices(N)[0]
    table = overlap_table(f, tolerance=default_tolerance(N))
    cands = []
    for q in fixed_displacements(Fz):
        r = check_observation1(table.displaced(q), d).residual
        cands.append((r, q))
    cands.sort()
    passing = [c for c in cands if c[0] <= tol]
    if not passing:
        raise CentringError(
            f"no centred candidate passes the stride-d phase test (best {cands[0][0]:.2e});"
            " not aligned or wrong orbit")
    r, q = passing[0]
    out = f.displaced(q)
    out.centring = "centred"
    out.metadata["strong_centring"] = "operationally strongly centred"
    return StrongCentring(out, tuple(int(x) for x in q), r, cands, len(passing) - 1)
