import numpy as np
import pytest

from sictower.heisenberg import SymplecticMatrix, all_overlaps, sl2
from sictower.sic_engine import centre_fiducial, find_fiducial
from sictower.symmetry import check_theorem5, stabilizer_order


def test_order_5a(fid5):
    r = stabilizer_order(fid5)
    assert r.unitary_order == 3
    assert r.zauner_flavor == "z"
    assert r.closed and not r.lower_bound


def test_order_5a_by_overlap_invariance(fid5):
    # independent route for a centred fiducial: F stabilizes iff c_{Fp} = c_p
    c, _ = centre_fiducial(fid5)
    tab = all_overlaps(c.components)
    count = 0
    for F in sl2(5):
        if all(np.isclose(tab[F.apply(p)], tab[p]) for p in np.ndindex(5, 5)):
            count += 1
    assert count == stabilizer_order(fid5).unitary_order


def test_order_4a_extended(fid4):
    r = stabilizer_order(fid4)
    assert r.extended_order == 6
    assert r.unitary_order == 3
    assert r.extended_order % r.unitary_order == 0


def test_order_15_doubles(fid5, aligned15):
    f, _ = aligned15
    small, big = stabilizer_order(fid5), stabilizer_order(f)
    assert big.unitary_order == 6
    assert big.unitary_order == 2 * small.unitary_order
    assert big.closed


def test_zauner_element_present(aligned15):
    r = stabilizer_order(aligned15[0])
    assert r.zauner_flavor is not None
    assert r.subspace_flag in ("largest", "smallest", "middle")


def test_sampling_mode_marks_lower_bound(fid5):
    r = stabilizer_order(fid5, exhaustive=False, sample=30)
    assert r.lower_bound
    assert r.unitary_order <= 3


def test_theorem5(aligned15):
    f, _ = aligned15
    t = check_theorem5(f, 5)
    assert t.F_b == SymplecticMatrix(11, 0, 0, 11, 15)
    assert t.fixed_residual <= 1e-8
    assert t.tensor_residual <= 1e-8
    assert t.permutation_residual <= 1e-8
    assert t.permutation_order == 2
    assert len(t.permutation) == 225 and t.passed


def test_theorem5_fails_off_orbit(aligned15):
    f, _ = aligned15
    t = check_theorem5(f.displaced((1, 0)), 5)
    assert not t.passed and t.fixed_residual > 1e-3


def test_theorem5_guards(aligned15):
    with pytest.raises(ValueError):
        check_theorem5(aligned15[0], 4)
    with pytest.raises(ValueError):
        check_theorem5(find_fiducial(5).fiducial, 5)
