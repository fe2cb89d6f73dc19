import random
import threading

import pytest
from hypothesis import given, settings, strategies as st

from ultracoarse.cardinal import Aleph, CardinalSeq, Constant, Finite
from ultracoarse.errors import FiniteDegreeError, HypothesisError, InvalidInput
from ultracoarse.enumeration import unpair
from ultracoarse.morphism import (Complement, Composed, Evens, FiniteSet, Naturals, Odds,
                                  PairingColumn, Pin, Plateau, TowerMap, boundary_multimap,
                                  build_embedding, build_immersion, build_trapezium_immersion,
                                  check_level_map, classify_map, identity_map, preimage_witness)
from ultracoarse.multimap import check_coarse_embedding, oscillation
from ultracoarse.tower import ExplicitTower, LazyTower, NodeRef

BINARY = LazyTower(CardinalSeq.constant(2))
TERNARY = LazyTower(CardinalSeq.constant(3))
BAIRE = LazyTower(CardinalSeq.constant(Aleph(0)))


def small_tower():
    return ExplicitTower([["a", "b", "c"], ["p", "q"], ["t"]],
                         {"a": "p", "b": "p", "c": "q", "p": "t", "q": "t"})


def test_level_map_checks():
    check_level_map(lambda n: 2 * n, 5)
    with pytest.raises(InvalidInput):
        check_level_map(lambda n: 3 - n, 3)
    with pytest.raises(InvalidInput):
        check_level_map([0, 1].__getitem__, 4)


def test_explicit_classification():
    T = small_tower()
    assert classify_map(identity_map(T)).kind == "isomorphism"
    squash = {"a": "a", "b": "a", "c": "c", "p": "p", "q": "q", "t": "t"}
    assert classify_map(TowerMap(T, T, None, mapping=squash)).kind == "immersion"
    far = {"a": "a", "b": "b", "c": "a", "p": "p", "q": "q", "t": "t"}
    got = classify_map(TowerMap(T, T, None, mapping=far))
    assert got.kind == "neither" and "covering pair" in got.reason
    mislevel = dict(squash, a="p")
    assert classify_map(TowerMap(T, T, None, mapping=mislevel)).kind == "neither"
    with pytest.raises(InvalidInput):
        TowerMap(T, T, None)
    with pytest.raises(InvalidInput):
        classify_map(identity_map(BINARY))


def test_explicit_embedding_into_a_wider_tower():
    S = BINARY.truncate(3, 2)
    T = TERNARY.truncate(3, 3)
    phi = build_embedding(S, T)
    assert classify_map(phi).kind == "embedding"
    rel = boundary_multimap(phi).materialize()
    assert all(oscillation(rel, k) <= k for k in range(4))
    with pytest.raises(HypothesisError):
        build_embedding(T, S)


def test_lazy_embedding_with_a_level_map():
    phi = build_embedding(TERNARY, BINARY, f=lambda n: 2 * n)
    nodes = [x for lv in TERNARY.cone(4, 3) for x in lv]
    assert classify_map(phi, nodes).kind == "embedding"
    assert all(phi(x).level == 2 * x.level for x in nodes)
    with pytest.raises(HypothesisError) as err:
        build_embedding(TERNARY, BINARY)
    assert err.value.level == 0
    with pytest.raises(InvalidInput):
        build_embedding(BINARY, TERNARY.truncate(2, 3))


def test_boundary_map_of_a_coarsening_level_map():
    phi = build_embedding(BINARY, BINARY, f=lambda n: n + 1)
    rel = boundary_multimap(phi, BINARY.cone(3, 2)[0])
    x = NodeRef(0, (1, 1))
    assert not rel.complete
    assert rel.member(x, NodeRef(0, (1, 0, 1, 1))) or rel.member(x, NodeRef(0, (0, 1, 1)))
    cert = check_coarse_embedding(rel.materialize(), range(4))
    assert cert.ok and not cert.bound_violations(1, 1)


@pytest.mark.parametrize("index", [Naturals(), Evens(), Odds(), PairingColumn(3),
                                   FiniteSet([2, 5, 9]), Complement(Evens()),
                                   Complement(FiniteSet([0, 4])),
                                   Composed(Complement(Evens()), PairingColumn(1))])
def test_index_sets_enumerate_increasingly(index):
    top = 3 if not index.infinite else 40
    members = [index.member(p) for p in range(top)]
    assert members == sorted(set(members))
    assert all(index.position(m) == p for p, m in enumerate(members))
    assert all(index.count_le(m) == p + 1 for p, m in enumerate(members))
    outside = [t for t in range(max(members)) if t not in members]
    assert all(index.position(t) is None and t not in index for t in outside)


def test_pairing_column_is_a_column():
    assert all(unpair(PairingColumn(2).member(p)) == (2, p) for p in range(10))


def test_trapezium_hypotheses():
    with pytest.raises(FiniteDegreeError):
        build_trapezium_immersion(BINARY, BINARY, Plateau(BINARY.zero(2), Evens()),
                                  BINARY.zero(1))
    with pytest.raises(HypothesisError):
        build_trapezium_immersion(BAIRE, BAIRE, Plateau(BAIRE.zero(2), Evens()), BAIRE.zero(0))
    first = build_trapezium_immersion(BAIRE, BAIRE, Plateau(BAIRE.zero(1), Evens()),
                                      BAIRE.zero(0))
    good_pin = Pin(0, Plateau(BAIRE.zero(1), Evens()), 0, first)
    build_trapezium_immersion(BAIRE, BAIRE, Plateau(BAIRE.zero(2), Evens()),
                              BAIRE.zero(1), good_pin)
    bad_pin = Pin(0, Plateau(BAIRE.zero(1), Evens()), 1, first)
    with pytest.raises(HypothesisError):
        build_trapezium_immersion(BAIRE, BAIRE, Plateau(BAIRE.zero(2), Evens()),
                                  BAIRE.zero(1), bad_pin)


def test_trapezium_body_and_round_trip():
    phi = build_trapezium_immersion(BAIRE, BAIRE, Plateau(BAIRE.zero(3), Odds()),
                                    BAIRE.zero(2))
    assert phi.contains(NodeRef(0, (4, 0, 1))) and not phi.contains(NodeRef(0, (4, 0, 2)))
    assert phi(NodeRef(2, (1,))) == BAIRE.zero(2)
    rng = random.Random(2)
    for _ in range(100):
        s = NodeRef(rng.randint(0, 2), tuple(rng.randrange(12) for _ in range(rng.randint(0, 2))))
        s = BAIRE.node(s.level, s.address[:2 - s.level])
        t = phi.preimage_witness(s)
        assert phi.contains(t) and phi(t) == s


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 3), st.lists(st.integers(0, 30), max_size=5))
def test_immersion_witnesses_round_trip(level, addr):
    phi = build_immersion(BAIRE, BAIRE)
    s = BAIRE.node(level, addr)
    assert phi(preimage_witness(phi, s)) == s


def test_immersion_classifies_and_stays_coherent():
    phi = build_immersion(BAIRE, BAIRE)
    rng = random.Random(4)
    nodes = set()
    for _ in range(80):
        x = BAIRE.node(0, [rng.randrange(6) for _ in range(rng.randint(0, 4))])
        nodes.update(BAIRE.ancestor(x, k) for k in range(6))
        nodes.update(BAIRE.children(BAIRE.up(x), 4))
    assert classify_map(phi, sorted(nodes)).kind == "immersion"
    before = {x: phi(x) for x in nodes}
    twin = build_immersion(BAIRE, BAIRE)
    out = {}
    threads = [threading.Thread(target=lambda xs: out.update({x: twin(x) for x in xs}),
                                args=(sorted(nodes)[i::3],)) for i in range(3)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert out == before
    assert "expanded_depth" in phi.to_json()


def test_immersion_refuses_finite_and_large_degrees():
    with pytest.raises(FiniteDegreeError) as err:
        build_immersion(BINARY, BAIRE)
    assert err.value.level == 0
    mixed = LazyTower(CardinalSeq((Aleph(0), Finite(4)), Constant(Aleph(0))))
    with pytest.raises(FiniteDegreeError) as err:
        build_immersion(BAIRE, mixed)
    assert err.value.level == 1
    with pytest.raises(HypothesisError):
        build_immersion(LazyTower(CardinalSeq.constant(Aleph(1))), BAIRE)
    with pytest.raises(InvalidInput):
        build_immersion(BAIRE.truncate(2, 2), BAIRE)


def test_preimage_witness_needs_support():
    with pytest.raises(InvalidInput):
        preimage_witness(build_embedding(BINARY, TERNARY), BINARY.zero(0))
    assert preimage_witness(identity_map(BAIRE), BAIRE.zero(3)) == BAIRE.zero(3)
