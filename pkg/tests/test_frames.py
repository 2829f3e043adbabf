from fractions import Fraction

import numpy as np
import pytest

from sictower.frames import (
    EtfParams, build_projectors, certify_etf, certify_subset, etf_families,
    extract_subset, orbit_multiplets, real_phases, simplex_probe,
)
from sictower.sic_engine import centre_fiducial, find_fiducial, overlap_table
from sictower.symmetry import stabilizer_order


def test_families_d5():
    fam = etf_families(5)
    assert [(e.m, e.n) for e in fam] == [(15, 225), (10, 25), (6, 9), (4, 5)]
    assert all(e.coherence_sq == Fraction(1, 16) for e in fam)


def test_families_d4():
    assert [(e.m, e.n) for e in etf_families(4)] == [(8, 64), (6, 16), (3, 4), (3, 4)]


@pytest.mark.parametrize("d", range(4, 20))
def test_family_coherence_is_one_over_d_minus_1_squared(d):
    assert all(e.coherence_sq == Fraction(1, (d - 1) ** 2) for e in etf_families(d))


def test_params_bounds():
    with pytest.raises(ValueError):
        EtfParams(3, 10)
    with pytest.raises(ValueError):
        etf_families(3)


def test_extract_subset_counts(aligned15):
    f, _ = aligned15
    a, b = extract_subset(f, 3), extract_subset(f, 5)
    assert len(a) == 25 and len(b) == 9
    assert np.allclose(a[0], f.components) and np.allclose(b[0], f.components)
    with pytest.raises(ValueError):
        extract_subset(f, 4)


def test_certify_strided_subsets(aligned15):
    f, _ = aligned15
    c3, c5 = certify_subset(f, 3), certify_subset(f, 5)
    assert (c3.rank, c5.rank) == (10, 6)
    assert c3.passed and c5.passed
    # coherence recomputed from the Gram matrix
    assert c3.coherence_sq_from_gram == pytest.approx(1 / 16)
    # non-trivial linear dependencies
    assert c3.params.n > c3.rank and c5.params.n > c5.rank


def test_orthonormal_basis_is_a_degenerate_etf():
    vecs = list(np.eye(4))
    assert certify_etf(vecs, EtfParams(4, 4)).passed
    bad = certify_etf(vecs, EtfParams(3, 4))
    assert not bad.passed and bad.rank == 4


def test_random_vectors_fail():
    rng = np.random.default_rng(0)
    vecs = [v / np.linalg.norm(v) for v in rng.normal(size=(5, 4))]
    assert not certify_etf(vecs, EtfParams(4, 5)).passed


def test_projectors(aligned15):
    f, rep = aligned15
    pp = build_projectors(f, rep.theta, rep.M)
    assert (pp.rank1, pp.rank2) == (10, 6)
    assert max(pp.idempotency) <= 1e-8
    assert np.allclose(pp.fiducial_weight, 1, atol=1e-8)
    assert pp.commutator <= 1e-8
    assert max(pp.tensor_residual) <= 1e-8


def test_projectors_need_odd_d(aligned8):
    with pytest.raises(ValueError):
        build_projectors(aligned8[0])


def test_multiplets(aligned15):
    f, rep = aligned15
    m = orbit_multiplets(f)
    assert (m.count1, m.count2) == (9, 25)
    assert m.each_vector_in_exactly_one


def test_simplex_d4(aligned8):
    f, rep = aligned8
    sp = simplex_probe(rep.theta, f)
    assert sp.real_phase_count == 3
    assert sp.simplex_found
    assert sp.certificate.rank == 3


def test_real_phases_5a(fid5):
    assert real_phases(overlap_table(fid5)) == []


def test_real_phases_7b():
    # an anti-unitary symmetric d=7 fiducial carries d-1 = 6 real phases
    for seed in range(10):
        f = find_fiducial(7, seed=seed).fiducial
        if stabilizer_order(f).extended_order == 6:
            c, _ = centre_fiducial(f)
            T = overlap_table(c)
            counts = [len(real_phases(T.displaced(q))) for q in np.ndindex(7, 7)]
            assert max(counts) == 6
            return
    pytest.skip("no extended-symmetric d=7 fiducial among the seeds")
