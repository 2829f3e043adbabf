import pytest
from hypothesis import given, strategies as st
from math import gcd

from sictower.numtheory import (
    CrtSplit, NotInvertibleError, Residue, crt_combine, crt_index, crt_split,
    discriminant, factorize, inv, is_prime, mod_inverse, next_rung, squarefree_part,
    tower, tower_root,
)


@pytest.mark.parametrize("n, expected", [(1, {}), (12, {2: 2, 3: 1}), (97, {97: 1}),
                                         (1155, {3: 1, 5: 1, 7: 1, 11: 1})])
def test_factorize(n, expected):
    assert factorize(n) == expected


@pytest.mark.parametrize("n, sf", [(1, 1), (12, 3), (72, 2), (48, 3), (30, 30)])
def test_squarefree_part(n, sf):
    assert squarefree_part(n) == sf


@pytest.mark.parametrize("d, D", [(4, 5), (5, 3), (7, 2), (8, 5), (15, 3), (35, 2)])
def test_discriminant(d, D):
    assert discriminant(d) == D


def test_discriminant_needs_d_at_least_4():
    with pytest.raises(ValueError):
        discriminant(3)


@pytest.mark.parametrize("start, dims, D", [(7, [7, 35, 1155], 2), (5, [5, 15, 195], 3),
                                            (4, [4, 8, 48], 5)])
def test_tower(start, dims, D):
    steps = tower(start, 3)
    assert [s.d for s in steps] == dims
    assert {s.discriminant for s in steps} == {D}
    assert steps[-1].next == dims[-1] * (dims[-1] - 2)


@given(st.integers(4, 400))
def test_discriminant_constant_along_rung(d):
    step = next_rung(d)
    assert discriminant(step.next) == step.discriminant


def test_next_rung_rejects_small():
    with pytest.raises(ValueError):
        next_rung(3)


@given(st.integers(1, 10**6), st.integers(2, 10**4))
def test_inverse(a, m):
    if gcd(a, m) == 1:
        assert (a * inv(a, m)) % m == 1
    else:
        with pytest.raises(NotInvertibleError):
            mod_inverse(Residue(a, m))


def test_residue_arithmetic_checks_modulus():
    assert (Residue(4, 7) + Residue(5, 7)).value == 2
    assert (Residue(3, 7) * Residue(5, 7)).value == 1
    assert (-Residue(3, 7)).value == 4
    with pytest.raises(ValueError):
        Residue(1, 5) + Residue(1, 7)


@given(st.sampled_from([(5, 3), (7, 5), (9, 7), (11, 9), (4, 9)]), st.integers(-10**6, 10**6))
def test_crt_round_trip(pair, r):
    split = CrtSplit.of(*pair)
    a, b = crt_split(Residue(r, split.N), split)
    assert crt_combine(a, b, split).value == r % split.N


def test_crt_index_is_a_bijection():
    split = CrtSplit.for_tower(7)
    idx = crt_index(split)
    assert sorted(idx.reshape(-1).tolist()) == list(range(35))
    assert idx[3 % 7, 3 % 5] == 3


def test_crt_rejects_non_coprime():
    with pytest.raises(ValueError):
        CrtSplit.of(4, 6)
    with pytest.raises(ValueError):
        CrtSplit.for_tower(6)


@pytest.mark.parametrize("d", [5, 7, 9, 11])
def test_kappa_is_shared_inverse(d):
    split = CrtSplit.for_tower(d)
    k = split.kappa
    assert k == split.inv_n2_mod_n1.value == split.inv_n1_mod_n2.value


def test_tower_root():
    assert tower_root(15) == 5
    assert tower_root(8) == 4
    assert tower_root(21) is None


def test_is_prime():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]
