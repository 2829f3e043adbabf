import itertools

import numpy as np
import pytest

from sictower.mub import (
    MubSet, affine_lines, intertwiner, mub_from_aligned_sic, mub_from_wootters,
    mub_verify, phase_point_operators, projector_residuals, wootters_projectors,
)
from sictower.heisenberg import parity


@pytest.mark.parametrize("p", [3, 5])
def test_affine_plane_axioms(p):
    lines = affine_lines(p)
    assert len(lines) == p * (p + 1)
    assert all(len(set(L.points)) == p for L in lines)
    pts = list(itertools.product(range(p), repeat=2))
    for a, b in itertools.combinations(pts, 2):
        assert sum(a in L.points and b in L.points for L in lines) == 1


def test_vertical_lines():
    L = [L for L in affine_lines(3) if L.z is None]
    assert len(L) == 3 and L[1].points == ((1, 0), (1, 1), (1, 2))
    assert L[1].slope == "inf"


def test_phase_point_operators_p3():
    ops = phase_point_operators(3)
    assert np.allclose(ops[0, 0], parity(3))
    flat = ops.reshape(9, 3, 3)
    for A in flat:
        assert np.allclose(A, A.conj().T) and np.allclose(A @ A, np.eye(3))
        assert np.isclose(np.trace(A), 1)
    # P_x P_y is proportional to D_{2(x-y)}, traceless unless x = y
    table = np.einsum("xab,yba->xy", flat, flat)
    assert np.allclose(table, 3 * np.eye(9))


@pytest.mark.parametrize("p", [4, 9, 2])
def test_composite_or_even_rejected(p):
    with pytest.raises(ValueError):
        phase_point_operators(p)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_wootters_route(p):
    W = wootters_projectors(p)
    assert len(W) == p * (p + 1)
    res = projector_residuals(W, p)
    assert all(v < 1e-9 for v in res.values())
    m = mub_from_wootters(p)
    assert len(m.bases) == p + 1
    assert mub_verify(m).passed()


def test_standard_and_fourier_are_unbiased():
    F = np.exp(2j * np.pi * np.outer(range(3), range(3)) / 3) / np.sqrt(3)
    r = mub_verify(MubSet(3, [np.eye(3), F]))
    assert r.orthonormality < 1e-12 and r.unbiasedness < 1e-12


def test_rotated_basis_fails():
    c, s = np.cos(0.3), np.sin(0.3)
    R = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    r = mub_verify(MubSet(3, [np.eye(3), R]))
    assert r.unbiasedness > 0.1


def test_theorem3_p3(aligned15):
    f, _ = aligned15
    m, W = mub_from_aligned_sic(f, 5)
    r = mub_verify(m)
    assert r.n_bases == 4
    assert r.orthonormality <= 1e-9 and r.unbiasedness <= 1e-7
    assert not m.flagged
    V, res = intertwiner(W, wootters_projectors(3))
    assert res < 1e-8
    # the two routes agree up to a global phase
    assert np.allclose(np.abs(V), np.eye(3), atol=1e-8)


def test_theorem3_rejects_composite(aligned15):
    with pytest.raises(ValueError):
        mub_from_aligned_sic(aligned15[0], 11)


def test_partial_trace_identity(aligned15):
    from sictower.entangle import reduced_density, tensor_view
    from sictower.heisenberg import crt_permutation, displaced_parity, displacement
    from sictower.numtheory import CrtSplit
    f, _ = aligned15
    Q = crt_permutation(CrtSplit.for_tower(5))
    for p in itertools.product(range(3), repeat=2):
        U = Q.T @ np.kron(np.eye(5), displacement(3, p)) @ Q
        rho = reduced_density(tensor_view(U @ f.components, 5), 3)
        assert np.abs(rho - (np.eye(3) + displaced_parity(3, p)) / 4).max() < 1e-8
