"""Small worked cases with hand-checkable answers, one per behavior."""
import pytest

from ultracoarse.cardinal import Aleph, CardinalSeq, Finite
from ultracoarse.morphism import TowerMap, boundary_multimap, classify_map
from ultracoarse.multimap import (MultiMap, check_coarse_embedding, compose, from_map_pair,
                                  identity, inverse, oscillation)
from ultracoarse.space import (FiniteUltraSpace, SequenceSpace, ball, cov, group_chain_space,
                               is_isometrically_homogeneous, min_cover_bruteforce, truncate,
                               strip, validate)
from ultracoarse.tower import (ExplicitTower, LazyTower, NodeRef, boundary_space,
                               canonical_tower, level_subtower, validate_tower)

ORIGIN = ()  # the all-zero point of the binary cube


def test_triangle_with_sides_1_2_4_is_not_ultrametric():
    X = FiniteUltraSpace("xyz", [[0, 1, 4], [1, 0, 2], [4, 2, 0]])
    report = validate(X)
    assert not report and report.violations[0][0] == "strong-triangle"
    assert validate(FiniteUltraSpace(["p"], [[0]]))


def test_balls_of_q4(Q4):
    assert ball(Q4, "a", 0) == {"a"}
    assert ball(Q4, "a", 2) == set("abcd")


def test_cube_covers(C3):
    assert cov(C3, ORIGIN, 1, 3) == 4
    assert min_cover_bruteforce(C3, ORIGIN, 2, 3) == 2
    assert min_cover_bruteforce(C3, ORIGIN, 2, 2) == 1
    assert all(cov(C3, ORIGIN, e, d) == 1 for e in (1, 2, 3) for d in (1, 2, 3) if d <= e)


def test_truncations():
    B = truncate(group_chain_space(CardinalSeq.constant(Aleph(0))), 1, 5)
    assert len(B) == 5 and set(B.values) == {0, 1}
    assert len(truncate(group_chain_space(CardinalSeq.constant(Aleph(0))), 1, 1)) == 1
    assert len(truncate(group_chain_space(CardinalSeq.constant(1)), 4, 9)) == 1


def test_homogeneity_examples(Q4, C3):
    assert is_isometrically_homogeneous(C3) and is_isometrically_homogeneous(Q4)


def test_lazy_meets_and_degrees():
    T = LazyTower(CardinalSeq.constant(2))
    assert T.meet(NodeRef(0, (1,)), NodeRef(0, ())) == NodeRef(1, ())
    assert T.deg(T.zero(3), 1) == Finite(4) and T.deg(T.zero(3), 3) == Finite(1)
    assert T.deg_bounds(1, 3) == (Finite(4), Finite(4))
    assert T.deg_bounds(2, 2) == (Finite(1), Finite(1))


def test_canonical_towers(Q4, C3):
    T, cmap = canonical_tower(Q4, [1, 2])
    assert [len(lv) for lv in T.levels] == [2, 1]
    assert T.meet(*T.levels[0]) == T.top
    B = boundary_space(T)
    assert len(B) == 2 and B.distance(*B.points) == 1
    single, _ = canonical_tower(FiniteUltraSpace(["p"], [[0]]), [1])
    assert single.nodes == ["0:0"]
    full, _ = canonical_tower(C3, [1, 2, 3])
    assert [len(lv) for lv in full.levels] == [4, 2, 1]
    leaves, _ = canonical_tower(C3, [0, 1, 2, 3])
    assert [len(lv) for lv in leaves.levels] == [8, 4, 2, 1]
    assert validate_tower(leaves).is_homogeneous


def test_lazy_truncation_matches_the_canonical_tower():
    for degrees, depth, cap in ((CardinalSeq.constant(2), 3, 2),
                                (CardinalSeq.constant(Aleph(0)), 2, 3)):
        lazy = LazyTower(degrees).truncate(depth, cap)
        X = truncate(group_chain_space(degrees), depth, cap)
        canon, cmap = canonical_tower(X, list(range(depth + 1)))
        assert [len(lv) for lv in lazy.levels] == [len(lv) for lv in canon.levels]
        for x in X.points:
            for y in X.points:
                lx, ly = str(NodeRef(0, x)), str(NodeRef(0, y))
                assert lazy.boundary_distance(lx, ly) == canon.boundary_distance(cmap[x], cmap[y])


def test_level_subtower_of_binary_depth_4():
    T = LazyTower(CardinalSeq.constant(2)).truncate(4, 2)
    sub, ident = level_subtower(T, [0, 2, 4])
    assert sub.deg_bounds(0, 1) == (Finite(4), Finite(4))
    assert sub.deg_bounds(1, 2) == (Finite(4), Finite(4))
    cert = check_coarse_embedding(ident, range(5))
    assert cert.ok and all(w <= 2 * s for s, w in cert.forward)
    same, _ = level_subtower(T, range(5))
    assert same == T


def test_multimap_examples(Q4):
    P = FiniteUltraSpace("pq", [[0, 5], [5, 0]])
    U = FiniteUltraSpace("uv", [[0, 1], [1, 0]])
    phi = MultiMap(Q4, P, [("a", "p")])
    psi = MultiMap(P, U, [("p", "u"), ("p", "v")])
    assert compose(psi, phi).pairs == {("a", "u"), ("a", "v")}
    assert compose(MultiMap(P, U, [("q", "u")]), phi).pairs == frozenset()
    assert inverse(MultiMap(Q4, P, [])).pairs == frozenset()
    assert inverse(identity(Q4)) == identity(Q4)
    assert oscillation(identity(Q4), 1) == 1
    const = MultiMap(Q4, P, [(x, "p") for x in Q4.points])
    assert all(oscillation(const, e) == 0 for e in (0, 1, 2))


def test_map_pairs(C3):
    assert from_map_pair(lambda x: x, lambda y: y, C3, C3)[1] == (0, 0)
    # quotient of the cube by its 1-balls: drop the first coordinate
    quotient = sorted({strip(x[1:]) for x in C3.points})
    Y = FiniteUltraSpace.from_function(
        quotient, lambda a, b: 0 if a == b else SequenceSpace.distance(a, b) + 1)
    f = lambda x: strip(x[1:])
    g = lambda a: strip((0,) + a)
    _, (dx, dy) = from_map_pair(f, g, C3, Y)
    assert len(Y) == 4 and dx <= 2 and dy == 0
    A = FiniteUltraSpace("ab", [[0, 7], [7, 0]])
    B = FiniteUltraSpace("cd", [[0, 7], [7, 0]])
    assert from_map_pair(lambda x: "c", lambda y: "a", A, B)[1] == (7, 7)


def test_sibling_collapse_is_an_immersion():
    T = ExplicitTower([["x", "y"], ["t"]], {"x": "t", "y": "t"})
    phi = TowerMap(T, T, None, mapping={"x": "x", "y": "x", "t": "t"})
    assert classify_map(phi).kind == "immersion"
    rel = boundary_multimap(phi).materialize()
    assert rel.image("x") == rel.image("y") == {"x"}
    assert len(inverse(rel).image("x")) == 2
