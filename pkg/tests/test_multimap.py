import json
import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from ultracoarse.errors import InvalidInput, SizeCapError
from ultracoarse.multimap import (Certificate, MultiMap, check_coarse_embedding,
                                  check_coarse_equivalence, compose, from_map_pair, identity,
                                  inverse, modulus_table, oscillation, oscillation_bruteforce,
                                  oscillation_witness, set_diameter)
from ultracoarse.space import FiniteUltraSpace, random_ultrametric

TWO = FiniteUltraSpace("pq", [[0, 5], [5, 0]])


def collapse(Q4):
    return MultiMap(Q4, TWO, [("a", "p"), ("b", "p"), ("c", "q"), ("d", "q")])


def test_explicit_queries(Q4):
    phi = collapse(Q4)
    assert phi.image("a") == {"p"} and phi.preimage("q") == {"c", "d"}
    assert phi.image_of(["a", "c"]) == {"p", "q"}
    assert phi.member("b", "p") and not phi.member("b", "q")
    assert phi.witness("q") == "c"
    with pytest.raises(InvalidInput):
        MultiMap(Q4, TWO, [("z", "p")])
    with pytest.raises(InvalidInput):
        MultiMap(Q4, TWO, [("a", "z")])


def test_collapse_moduli(Q4):
    phi = collapse(Q4)
    assert [w for _, w in modulus_table(phi, [0, 1, 2])] == [0, 0, 5]
    assert oscillation(inverse(phi), 5) == 2 and oscillation(inverse(phi), 4) == 1
    assert oscillation_witness(phi, 2) in {("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"),
                                           ("c", "a"), ("c", "b"), ("d", "a"), ("d", "b")}
    assert oscillation_witness(phi, 1) is None
    with pytest.raises(InvalidInput):
        oscillation(phi, -1)


def test_set_diameter(Q4):
    assert set_diameter(Q4, []) == 0
    assert set_diameter(Q4, ["a", "b"]) == 1
    assert set_diameter(Q4, ["a", "b", "d"]) == 2


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_oscillation_matches_both_oracles(seed):
    rng = random.Random(seed)
    X = random_ultrametric(rng, rng.randint(1, 7))
    Y = random_ultrametric(rng, rng.randint(1, 7))
    phi = MultiMap(X, Y, [(x, y) for x in X.points for y in Y.points if rng.random() < 0.3])
    for e in X.values:
        fast = oscillation(phi, e)
        assert fast == oscillation_bruteforce(phi, e) == oracles.oscillation(phi.pairs, X, Y, e)
        w = oscillation_witness(phi, e)
        if w is not None:
            x1, x2 = w
            assert X.distance(x1, x2) <= e
            assert set_diameter(Y, phi.image(x1) | phi.image(x2)) == fast


def test_bruteforce_cap():
    big = random_ultrametric(random.Random(0), 21)
    with pytest.raises(SizeCapError):
        oscillation_bruteforce(identity(big), 1)


def test_algebra(rng):
    for _ in range(30):
        X, Y, Z = (random_ultrametric(rng, rng.randint(1, 6)) for _ in range(3))
        phi = MultiMap(X, Y, [(x, y) for x in X.points for y in Y.points if rng.random() < 0.4])
        psi = MultiMap(Y, Z, [(y, z) for y in Y.points for z in Z.points if rng.random() < 0.4])
        assert compose(identity(Y), phi) == phi == compose(phi, identity(X))
        assert inverse(inverse(phi)) == phi
        assert inverse(compose(psi, phi)) == compose(inverse(phi), inverse(psi))
    with pytest.raises(InvalidInput):
        compose(identity(Z), identity(X)) if X != Z else compose(identity(TWO), identity(X))


def test_certificates(Q4):
    phi = collapse(Q4)
    cert = check_coarse_equivalence(phi, [0, 1, 2, 5])
    assert cert.ok and cert.total and cert.surjective
    assert cert.bound_violations(0, 0) == [("forward", 2, 5), ("backward", 0, 1)]
    data = cert.to_json()
    assert data["kind"] == "equivalence" and data["forward"][2] == ["2", "5"]
    assert len(data["pairs"]) == 4 and data["domain"] == ["a", "b", "c", "d"]
    json.dumps(data)
    partial = MultiMap(Q4, TWO, [("a", "p")])
    cert = check_coarse_equivalence(partial, [0])
    assert not cert.ok and set(cert.uncovered_source) == {"b", "c", "d"}
    assert cert.uncovered_target == ["q"]
    assert check_coarse_embedding(partial, [0]).surjective is None


def test_json_round_trip(Q4):
    phi = collapse(Q4)
    assert MultiMap.from_json(phi.to_json(), Q4, TWO) == phi
    with pytest.raises(InvalidInput):
        MultiMap.from_json({"pairs": [["a", "nowhere"]]}, Q4, TWO)
    with pytest.raises(InvalidInput):
        MultiMap.from_json({}, Q4, TWO)


def test_from_map_pair(Q4):
    f = {"a": "p", "b": "p", "c": "q", "d": "q"}
    g = {"p": "a", "q": "d"}
    phi, (dx, dy) = from_map_pair(f, g, Q4, TWO)
    assert (dx, dy) == (1, 0)
    assert phi.pairs >= {("a", "p"), ("d", "q")}
    with pytest.raises(InvalidInput):
        from_map_pair({"a": "p"}, g, Q4, TWO)


def test_lazy_relations_and_materialization():
    X = random_ultrametric(random.Random(3), 6)
    lazy = MultiMap.lazy(X, X, lambda x: {x, (x + 1) % 6}, domain=[0, 1],
                         witness=lambda y: y)
    with pytest.raises(InvalidInput):
        lazy.pairs
    with pytest.raises(InvalidInput):
        lazy.preimage(0)
    m = lazy.materialize(codomain=[4])
    assert set(m.source.points) == {0, 1, 4}
    assert m.pairs == {(0, 0), (0, 1), (1, 1), (1, 2), (4, 4), (4, 5)}
    inv = inverse(lazy)
    assert inv.lazy and inv.image(3) == {3}
    twice = compose(lazy, lazy)
    assert twice.image(0) == {0, 1, 2}
    with pytest.raises(InvalidInput):
        MultiMap.lazy(X, X, lambda x: {x}, complete=False)
    rep = MultiMap.lazy(X, X, lambda x: {x}, domain=[0], complete=False,
                        member=lambda x, y: X.distance(x, y) <= 0 or y == 5, witness=lambda y: y)
    assert rep.member(0, 5) and rep.materialize(codomain=[5]).member(0, 5)


def test_lazy_equality_is_identity():
    X = random_ultrametric(random.Random(3), 2)
    a = MultiMap.lazy(X, X, lambda x: {x})
    assert a == a and a != MultiMap.lazy(X, X, lambda x: {x})
