import pytest

from ultracoarse.cardinal import Aleph, CardinalSeq, Constant, Finite, UnboundedFinite
from ultracoarse.classify import (BOUNDED_GEOMETRY_CITATION, CovProfile, canonical_inverse,
                                  canonical_map, classify_pair, coarse_embedding_pipeline,
                                  coarse_equivalence_pipeline, homogeneous_model, invariants,
                                  select_levels_embedding, select_levels_equivalence)
from ultracoarse.errors import (DegenerateClassError, HypothesisError, InsufficientDepth,
                                InvalidInput)
from ultracoarse.space import FiniteUltraSpace, SequenceSpace, random_ultrametric
from ultracoarse.tower import LazyTower, LevelSequence, NodeRef

import oracles


def space(value, prefix=()):
    return SequenceSpace(CardinalSeq(tuple(prefix), Constant(value)))


CANTOR, TERNARY, BAIRE = space(Finite(2)), space(Finite(3)), space(Aleph(0))
POINT = space(Finite(1))


@pytest.mark.parametrize("degrees,expected", [
    (CardinalSeq.constant(1), Finite(2)),
    (CardinalSeq.constant(2), Aleph(0)),
    (CardinalSeq.constant(Aleph(0)), Aleph(1)),
    (CardinalSeq.constant(Aleph(3)), Aleph(4)),
    (CardinalSeq((Finite(5), Finite(7)), Constant(Finite(1))), Finite(2)),
    (CardinalSeq((Aleph(2),), Constant(Finite(1))), Finite(2)),
    (CardinalSeq((Finite(1), Aleph(0)), Constant(Finite(2))), Aleph(0)),
    (CardinalSeq((Finite(3),), UnboundedFinite()), Aleph(0)),
])
def test_closed_form_invariants_agree_with_a_window_oracle(degrees, expected):
    pair = invariants(SequenceSpace(degrees))
    assert pair.flat == pair.sharp == expected
    assert oracles.window_invariant(degrees) == expected


def test_witness_scale_is_the_least_attaining_index():
    pair = invariants(SequenceSpace(CardinalSeq((Aleph(1), Aleph(0)), Constant(Finite(2)))))
    assert pair.sharp == Aleph(0) and pair.witness_sharp == 2


def test_finite_space_invariants(Q4, rng):
    assert invariants(Q4).to_json() == ["2", "2"]
    assert invariants(FiniteUltraSpace([], [])).to_json() == ["0", "0"]
    for _ in range(20):
        pair = invariants(random_ultrametric(rng, rng.randint(1, 8)))
        assert pair.flat <= pair.sharp <= Finite(2)


def test_profiles():
    prof = CovProfile.from_degrees(CardinalSeq.constant(3))
    assert prof.entry(1, 3) == (Finite(9), Finite(9))
    with pytest.raises(InvalidInput):
        invariants(CovProfile("probe"))
    with pytest.raises(InvalidInput):
        CovProfile.from_space(object())


def test_embedding_levels():
    E, D = select_levels_embedding(CANTOR, TERNARY)
    assert E.head(4) == D.head(4) == [0, 1, 2, 3]
    E, D = select_levels_embedding(TERNARY, CANTOR)
    assert E.head(4) == [0, 1, 2, 3] and D.head(4) == [0, 2, 4, 6]
    with pytest.raises(HypothesisError) as err:
        select_levels_embedding(BAIRE, CANTOR)
    assert not isinstance(err.value, InsufficientDepth)
    # the hypothesis holds but a 2^20 block is out of reach in two steps
    huge = space(Finite(2**20))
    with pytest.raises(InsufficientDepth):
        select_levels_embedding(huge, CANTOR, depth=2)


def test_equivalence_levels():
    E, D = select_levels_equivalence(BAIRE, BAIRE)
    assert E.head(4) == D.head(4) == [0, 1, 2, 3]
    gappy = space(Aleph(0), prefix=(Finite(2), Finite(2), Aleph(0), Finite(3)))
    E, D = select_levels_equivalence(BAIRE, gappy)
    X, Y = CovProfile.from_degrees(BAIRE.degrees), CovProfile.from_degrees(gappy.degrees)
    for n in range(6):
        assert X.entry(E[n], E[n + 1])[0] <= Y.entry(D[n], D[n + 1])[0]
        assert Y.entry(D[n], D[n + 1])[0] <= X.entry(E[n + 1], E[n + 2])[0]
        assert Y.entry(D[n], D[n + 1])[0] == Aleph(0)
    with pytest.raises(HypothesisError):
        select_levels_equivalence(CANTOR, BAIRE)
    # 2-ary against 3-ary: the interleaved steps must keep growing, so no
    # arithmetic tail exists and the bounded search gives up
    with pytest.raises(InsufficientDepth):
        select_levels_equivalence(CANTOR, TERNARY)


def test_canonical_maps_are_mutually_inverse():
    T = LazyTower(BAIRE.degrees, LevelSequence((2, 3), 1))
    fwd, back = canonical_map(BAIRE, T), canonical_inverse(T, BAIRE)
    x = (4, 0, 7, 1)
    (leaf,) = fwd.image(x)
    assert leaf == NodeRef(0, (7, 1))
    assert back.member(leaf, x) and back.member(leaf, (9, 9, 7, 1))
    assert not back.member(leaf, (0, 0, 7, 2))
    assert fwd.witness(leaf) == (0, 0, 7, 1)


def test_embedding_pipeline_certificates():
    v = coarse_embedding_pipeline(CANTOR, TERNARY)
    assert v.relation == "X-embeds-in-Y" and v.constructive and v.certificate.ok
    assert not v.certificate.bound_violations(0, 0)
    same = coarse_embedding_pipeline(BAIRE, BAIRE)
    assert same.certificate.ok
    refused = coarse_embedding_pipeline(BAIRE, CANTOR)
    assert refused.relation == "undecided-here" and refused.certificate is None
    bounded = coarse_embedding_pipeline(POINT, CANTOR)
    assert bounded.certificate.ok and bounded.constructive


def test_equivalence_pipeline_routes():
    baire = coarse_equivalence_pipeline(BAIRE, BAIRE, depth=6)
    assert baire.constructive and baire.certificate.ok and baire.certificate.surjective
    cantor = coarse_equivalence_pipeline(CANTOR, TERNARY)
    assert (cantor.relation, cantor.constructive, cantor.citation) == (
        "equivalent", False, BOUNDED_GEOMETRY_CITATION)
    apart = coarse_equivalence_pipeline(CANTOR, BAIRE)
    assert apart.relation == "undecided-here"
    big = coarse_equivalence_pipeline(space(Aleph(1)), space(Aleph(1)))
    assert big.relation == "equivalent" and not big.constructive
    pts = coarse_equivalence_pipeline(POINT, space(Finite(1), prefix=(Finite(4),)))
    assert pts.constructive and pts.certificate.ok


def test_pipeline_output_is_seed_stable():
    a = coarse_equivalence_pipeline(BAIRE, BAIRE, seed=5).to_json()
    b = coarse_equivalence_pipeline(BAIRE, BAIRE, seed=5).to_json()
    assert a == b


@pytest.mark.parametrize("kappa,first", [(Aleph(0), Finite(1)), (Aleph(1), Aleph(0)),
                                         (Aleph(2), Aleph(1)), (Finite(2), Finite(1))])
def test_homogeneous_models(kappa, first):
    model, pair = homogeneous_model(kappa)
    assert model.degrees[0] == first
    assert (pair.flat, pair.sharp) == (kappa, kappa)


def test_homogeneous_model_refusals():
    for k in (0, 1):
        with pytest.raises(DegenerateClassError):
            homogeneous_model(k)
    with pytest.raises(HypothesisError):
        homogeneous_model(5)


def test_classify_pair(Q4):
    assert classify_pair(CANTOR, TERNARY).relation == "equivalent"
    assert classify_pair(CANTOR, BAIRE).relation == "not-equivalent"
    assert classify_pair(BAIRE, BAIRE).relation == "equivalent"
    assert classify_pair(Q4, POINT).relation == "equivalent"
    lopsided = FiniteUltraSpace("abc", [[0, 1, 2], [1, 0, 2], [2, 2, 0]])
    with pytest.raises(InvalidInput):
        classify_pair(lopsided, Q4)
