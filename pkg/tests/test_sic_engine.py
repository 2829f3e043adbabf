import numpy as np
import pytest

from sictower.heisenberg import clifford_unitary, displacement, zauner_matrices
from sictower.sic_engine import (
    CentringError, Fiducial, NotASicError, OverlapTable, _Objective, centre_fiducial,
    centred_triplet, default_tolerance, find_fiducial, overlap_table, sic_residuals,
    sic_verify, strongly_centre, zauner_project,
)


def tetrahedral_fiducial():
    # qubit SIC: Bloch vector (1, 1, 1)/sqrt(3)
    t = np.arccos(1 / np.sqrt(3))
    return np.array([np.cos(t / 2), np.exp(1j * np.pi / 4) * np.sin(t / 2)])


def test_known_qubit_sic_passes():
    v = sic_verify(Fiducial(tetrahedral_fiducial()))
    assert v.passed and v.residual < 1e-14


def test_known_qutrit_sic_passes():
    # (0, 1, -1)/sqrt(2) generates a SIC in d=3
    v = sic_verify(Fiducial(np.array([0, 1, -1]) / np.sqrt(2)))
    assert v.passed and v.residual < 1e-14


def test_basis_vector_fails_d2():
    # D_{0,1} fixes |0> so |<0|D_{0,1}|0>|^2 = 1 and the residual is 1 - 1/3
    v = sic_verify(Fiducial(np.array([1.0, 0.0])))
    assert not v.passed
    assert v.residual == pytest.approx(2 / 3)


def test_identity_resolution_holds_for_any_unit_vector():
    rng = np.random.default_rng(0)
    f = Fiducial(rng.normal(size=6) + 1j * rng.normal(size=6))
    assert sic_verify(f).identity_residual < 1e-12


def test_fiducial_normalizes_and_rejects_zero():
    f = Fiducial(np.array([3.0, 4.0]))
    assert np.isclose(np.linalg.norm(f.components), 1)
    with pytest.raises(ValueError):
        Fiducial(np.zeros(3))
    with pytest.raises(ValueError):
        Fiducial(np.ones(3), centring="bogus")


@pytest.mark.parametrize("d", [4, 5, 7])
def test_find_fiducial(d):
    r = find_fiducial(d, seed=0)
    assert r.converged
    assert sic_verify(r.fiducial).residual <= 1e-12


def test_find_fiducial_rejects_d1():
    with pytest.raises(ValueError):
        find_fiducial(1)


def test_objective_gradient_matches_finite_difference():
    rng = np.random.default_rng(2)
    obj = _Objective(5, np.eye(5, dtype=complex))
    x = rng.normal(size=2 * obj.k)
    f0, g = obj.value_and_grad(x)
    h = 1e-6
    for k in range(0, len(x), 3):
        e = np.zeros_like(x)
        e[k] = h
        fd = (obj.value_and_grad(x + e)[0] - obj.value_and_grad(x - e)[0]) / (2 * h)
        assert fd == pytest.approx(g[k], rel=1e-4, abs=1e-8)
    assert f0 >= 0


def test_objective_zero_on_sic(fid5):
    assert np.abs(sic_residuals(fid5.components)).max() < 1e-12


def test_overlap_table_properties(fid5):
    T = overlap_table(fid5)
    assert T.phases[0, 0] == 1
    assert np.abs(np.abs(T.phases) - 1).max() < 1e-8
    # D_p^dag = D_{-p} gives phases[-p] = conj(phases[p]) for odd d
    d = 5
    for i in range(d):
        for j in range(d):
            assert np.isclose(T.phases[(-i) % d, (-j) % d], np.conj(T.phases[i, j]))


def test_overlap_table_rejects_non_sic():
    with pytest.raises(NotASicError) as exc:
        overlap_table(Fiducial(np.array([1.0, 0, 0, 0, 0])))
    assert exc.value.residual > 0.5


@pytest.mark.parametrize("q", [(1, 0), (2, 3), (4, 4)])
def test_displaced_table_picks_up_omega(fid5, q):
    direct = overlap_table(fid5.displaced(q))
    assert np.abs(direct.phases - overlap_table(fid5).displaced(q).phases).max() < 1e-10


def test_conjugated_table(fid5):
    direct = overlap_table(fid5.conjugated())
    assert np.abs(direct.phases - overlap_table(fid5).conjugated().phases).max() < 1e-10
    with pytest.raises(ValueError):
        OverlapTable(4, np.ones((4, 4)), 0.0).conjugated()


@pytest.mark.parametrize("d", range(4, 31))
def test_zauner_subspaces_sum_to_d(d):
    dims = [B.shape[1] for _, B in zauner_project(d)]
    assert sum(dims) == d and len(dims) == 3


def test_zauner_subspaces_d5():
    spaces = zauner_project(5)
    assert sorted(B.shape[1] for _, B in spaces) == [1, 2, 2]
    for _, B in spaces:
        assert np.allclose(B.conj().T @ B, np.eye(B.shape[1]), atol=1e-12)


def test_restricted_search_d15():
    r = find_fiducial(15, seed=0, restrict_zauner=True)
    assert r.converged and r.residual <= 1e-10


def test_centre_fiducial(fid5):
    # already centred input: q = 0
    out, w = centre_fiducial(fid5)
    assert w.shift == (0, 0)
    # displaced input comes back to an eigenvector of U_{F_z}
    Uz = clifford_unitary(5, zauner_matrices(5)[0])
    for q in [(1, 2), (3, 0)]:
        out, w = centre_fiducial(fid5.displaced(q))
        v = out.components
        assert np.linalg.norm(Uz @ v - (v.conj() @ Uz @ v) * v) < 1e-8
        assert out.centring == "centred"


def test_centre_unrestricted_output():
    f = find_fiducial(5, seed=0).fiducial
    out, w = centre_fiducial(f)
    assert w.eigen_residual <= 1e-8


def test_centre_rejects_non_symmetric():
    rng = np.random.default_rng(0)
    with pytest.raises(CentringError):
        centre_fiducial(Fiducial(rng.normal(size=5) + 1j * rng.normal(size=5)))


def test_centred_triplet_when_3_divides(aligned15):
    f, _ = aligned15
    assert len(centred_triplet(f)) == 3


def test_strongly_centre(aligned15, fid5):
    f, rep = aligned15
    # move to a different member of the triplet; strong centring must find the right one
    moved = f.displaced((5, 10))
    sc = strongly_centre(moved, rep.theta)
    assert sc.residual <= 1e-8
    passing = [c for c in sc.candidates if c[0] <= 1e-8]
    assert len(passing) == 1
    # the other two members carry cube roots of unity at stride d
    bad = [c for c in sc.candidates if c[0] > 1e-8]
    assert all(c[0] == pytest.approx(np.sqrt(3), abs=1e-6) for c in bad)


def test_strongly_centre_noop_without_3(fid4):
    from sictower.sic_engine import overlap_table as ot
    f = find_fiducial(8, seed=0).fiducial
    assert strongly_centre(f, ot(fid4)).fiducial is f


def test_default_tolerance_ladder():
    assert default_tolerance(5) == 1e-12
    assert default_tolerance(15) == 1e-10
