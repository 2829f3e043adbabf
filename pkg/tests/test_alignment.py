import numpy as np
import pytest

from sictower.alignment import (
    DimensionMismatch, align, check_observation1, check_observation2,
    observation1_prediction, phase_subset,
)
from sictower.sic_engine import find_fiducial, overlap_table
from sictower.symmetry import stabilizer_order


def test_observation1_prediction_even_sign_pattern():
    # -(-1)^((i+1)(j+1)) for i, j in Z_2
    assert observation1_prediction(4).real.tolist() == [[1, -1], [-1, -1]]
    assert np.all(observation1_prediction(5) == 1)


def test_phase_subset_is_exact_slice(aligned15):
    _, rep = aligned15
    view = phase_subset(rep.Theta, 5)
    assert view.values.shape == (3, 3)
    assert view.values[1, 2] == rep.Theta.phases[5, 10]
    with pytest.raises(ValueError):
        phase_subset(rep.Theta, 4)


def test_observation1_odd(aligned15):
    _, rep = aligned15
    ob = check_observation1(rep.Theta, 5)
    assert ob.residual <= 1e-8
    assert np.all(np.abs(ob.values - 1) < 1e-8)
    assert ob.values[0, 0] == 1


def test_observation1_detects_wrong_vector(aligned15):
    _, rep = aligned15
    # a displacement that is not a multiple of d-2 introduces roots of unity
    assert check_observation1(rep.Theta.displaced((1, 0)), 5).residual > 0.5


def test_observation2_odd(aligned15):
    _, rep = aligned15
    ob = check_observation2(rep.Theta, rep.theta)
    assert ob.residual <= 1e-8
    assert ob.M is not None and ob.M.det in (1, 4)


def test_observation2_zero_index_excluded(aligned15):
    _, rep = aligned15
    # Theta_00 = 1 while -exp(2 i theta_00) = -1; the residual must not see it
    assert check_observation2(rep.Theta, rep.theta).residual < 1e-8


def test_dimension_mismatch(fid5):
    f7 = find_fiducial(7).fiducial
    with pytest.raises(DimensionMismatch):
        align(fid5, f7)
    with pytest.raises(DimensionMismatch):
        check_observation1(overlap_table(f7), 5)


def test_align_report_fields(aligned15):
    _, rep = aligned15
    assert rep.verdict == "aligned"
    assert rep.parity_of_d == "odd"
    assert rep.M is not None
    d = rep.to_dict()
    assert d["det_M"] in (1, 4)
    assert len(d["minimizers"]) >= 1


def test_minimizers_closed_under_small_symmetries(fid5, aligned15):
    _, rep = aligned15
    mins = set(rep.minimizers)
    sym = [w.F for w in stabilizer_order(fid5).witnesses if not w.antiunitary]
    assert len(sym) == 3
    assert all(m @ s in mins for m in mins for s in sym)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_verdict_invariant_under_displacement(fid5, aligned15, seed):
    f, _ = aligned15
    rng = np.random.default_rng(seed)
    q = tuple(int(x) for x in rng.integers(0, 15, 2))
    qs = tuple(int(x) for x in rng.integers(0, 5, 2))
    assert align(fid5.displaced(qs), f.displaced(q)).verdict == "aligned"


def test_even_pair(aligned8):
    _, rep = aligned8
    assert rep.parity_of_d == "even"
    assert rep.obs1_residual <= 1e-8 and rep.obs2_residual <= 1e-8
    assert rep.sign_pattern == [[1, -1], [-1, -1]]
    assert rep.M.det in (1, 3)


def test_unaligned_orbit_reports_not_aligned(fid4):
    # most unrestricted 8-dimensional SICs sit in an orbit that fails the stride-d phase test
    verdicts = []
    for seed in range(6):
        r = find_fiducial(8, seed=seed)
        if r.converged:
            verdicts.append(align(fid4, r.fiducial).verdict)
    assert "not aligned" in verdicts
