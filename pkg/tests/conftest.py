"""Shared fiducials, computed once per session."""
import pytest

from sictower.alignment import search_aligned
from sictower.sic_engine import find_fiducial


@pytest.fixture(scope="session")
def fid5():
    # 5a: searched inside the Zauner eigenspaces
    r = find_fiducial(5, seed=1, restrict_zauner=True, subspace="all")
    assert r.converged
    return r.fiducial


@pytest.fixture(scope="session")
def fid4():
    r = find_fiducial(4, seed=0)
    assert r.converged
    return r.fiducial


@pytest.fixture(scope="session")
def aligned15(fid5):
    """(fiducial, report) for an aligned 15-dimensional SIC."""
    _, rep = search_aligned(fid5)
    assert rep.verdict == "aligned"
    return rep.fiducial, rep


@pytest.fixture(scope="session")
def aligned8(fid4):
    _, rep = search_aligned(fid4, attempts=30)
    assert rep.verdict == "aligned"
    return rep.fiducial, rep
