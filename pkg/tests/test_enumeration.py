import pytest
from hypothesis import given, strategies as st

from ultracoarse.enumeration import pair, pair_tuple, rank, unpair, unpair_tuple, unrank
from ultracoarse.errors import InvalidInput


def test_pairing_is_a_bijection_on_an_initial_segment():
    seen = {pair(a, b) for a in range(40) for b in range(40 - a)}
    assert seen == set(range(len(seen)))


@given(st.integers(0, 10**12))
def test_unpair_inverts_pair(z):
    assert pair(*unpair(z)) == z


@given(st.lists(st.integers(0, 500), min_size=0, max_size=5))
def test_tuple_pairing_round_trip(values):
    assert unpair_tuple(pair_tuple(values), len(values)) == tuple(values)


radices = st.lists(st.one_of(st.none(), st.integers(1, 6)), min_size=0, max_size=5)


@given(radices, st.data())
def test_rank_round_trip(rs, data):
    coords = [data.draw(st.integers(0, (r or 30) - 1)) for r in rs]
    assert unrank(rank(coords, rs), rs) == tuple(coords)


def test_finite_radices_are_mixed_radix():
    rs = [2, 3]
    assert [unrank(i, rs) for i in range(6)] == [
        (0, 0), (1, 0), (0, 1), (1, 1), (0, 2), (1, 2)]


def test_rejections():
    with pytest.raises(InvalidInput):
        rank([3], [3])
    with pytest.raises(InvalidInput):
        rank([0, 1], [2])
    with pytest.raises(InvalidInput):
        unrank(-1, [None])
    with pytest.raises(InvalidInput):
        unrank(6, [2, 3])
    with pytest.raises(InvalidInput):
        unpair_tuple(4, 0)
