"""Capacity invariants, level selection, certificate pipelines and the model.

Two profiles back the invariants.  A *degree* profile (sequence spaces)
is evaluated in closed form: ``cov`` between integer scales ``m < n`` is
the product of the degrees ``d_{m+1} ... d_n``.  A *table* profile
(finite spaces) lists ``min_x`` and ``max_x`` of ``cov`` over the realized
distances.  The invariants are

    sharp = min_eps sup_delta (sup_x cov)^+      flat = min_eps sup_delta (min_x cov)^+
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .cardinal import (OMEGA, ONE, ZERO, Aleph, Cardinal, CardinalSeq, Constant, Finite,
                       UnboundedFinite, cofinal_ladder, parse, product, product_of,
                       successor)
from .errors import (DegenerateClassError, FiniteDegreeError, HypothesisError,
                     InsufficientDepth, InvalidInput)
from .morphism import boundary_multimap, build_embedding, build_immersion
from .multimap import (Certificate, MultiMap, check_coarse_embedding,
                       check_coarse_equivalence, compose)
from .space import FiniteUltraSpace, SequenceSpace, is_isometrically_homogeneous, strip
from .tower import LazyTower, LevelSequence, NodeRef, TowerBoundary

Space = Union[FiniteUltraSpace, SequenceSpace]

BOUNDED_GEOMETRY_CITATION = "[BZ] Thm 5"
EQUAL_INVARIANTS = "equal capacity invariants imply coarse equivalence"
EMBEDDING_CRITERION = "sharp(X) <= flat(Y) implies a coarse embedding of X into Y"
IMMERSION_ROUTE = "level selection, tower immersion and canonical maps"
EMBEDDING_ROUTE = "level selection, tower embedding and canonical maps"
BOUNDED_ROUTE = "bounded spaces: every relation with full domain and range"
EMPTY_ROUTE = "empty spaces"
HOMOGENEOUS_CLASSES = "homogeneous spaces are classified by the sharp invariant"


# -- profiles ----------------------------------------------------------------

@dataclass(frozen=True)
class CovProfile:
    """Covering numbers between scales, in closed form or as a finite table.

    ``backing`` is ``"degrees"``, ``"table"`` or ``"probe"`` (a black-box
    oracle; accepted for bookkeeping but refused by :func:`invariants`).
    """

    backing: str
    degrees: Optional[CardinalSeq] = None
    scales: tuple = ()
    table: tuple = ()  # table[i][j] = (min_x, max_x) of cov between scales i, j

    @classmethod
    def from_degrees(cls, degrees: CardinalSeq) -> "CovProfile":
        for j in range(degrees.stable_from + 1):
            if degrees[j] < ONE:
                raise InvalidInput("degree sequences must be at least 1 everywhere")
        return cls("degrees", degrees)

    @classmethod
    def from_space(cls, X: Space) -> "CovProfile":
        if isinstance(X, SequenceSpace):
            return cls.from_degrees(X.degrees)
        if isinstance(X, FiniteUltraSpace):
            if not len(X):
                return cls("table")
            cov = X._cov
            k = len(X.values)
            rows = tuple(tuple((Finite(min(cov[x][i][j] for x in range(len(X)))),
                                Finite(max(cov[x][i][j] for x in range(len(X)))))
                               for j in range(k)) for i in range(k))
            return cls("table", scales=X.values, table=rows)
        raise InvalidInput(f"no covering profile for {type(X).__name__}")

    @property
    def empty(self) -> bool:
        return self.backing == "table" and not self.scales

    def entry(self, m: int, n: int) -> tuple[Cardinal, Cardinal]:
        """(min, sup) of ``cov`` from scale index ``m`` up to ``n``."""
        if self.backing == "degrees":
            if n < m:
                return ONE, ONE
            p = product_of(self.degrees[j] for j in range(m, n))
            return p, p
        if self.backing == "table":
            return self.table[m][n]
        raise InvalidInput("probe-backed profiles have no closed form")


def profile(X: Space) -> CovProfile:
    return CovProfile.from_space(X)


@dataclass(frozen=True)
class InvariantPair:
    flat: Cardinal
    sharp: Cardinal
    witness_flat: Optional[int] = None
    witness_sharp: Optional[int] = None

    def to_json(self) -> list:
        return [str(self.flat), str(self.sharp)]

    @property
    def homogeneous_like(self) -> bool:
        return self.flat == self.sharp


def _tail_sup(degrees: CardinalSeq, m: int) -> Cardinal:
    """``sup_n (d_{m+1} ... d_n)^+`` for a closed-form degree sequence."""
    rest = list(degrees.prefix[m:])
    tail = degrees.tail
    alephs = [c.n for c in rest if c.infinite]
    if isinstance(tail, Constant) and tail.value.infinite:
        alephs.append(tail.value.n)
    if alephs:
        # products reach the largest aleph and stay there
        return Aleph(max(alephs) + 1)
    if isinstance(tail, UnboundedFinite) or tail.value > ONE:
        # finite products grow without bound
        return OMEGA
    return successor(product_of(rest))


def _table_sup(prof: CovProfile, i: int, col: int) -> Cardinal:
    k = len(prof.scales)
    return max(successor(prof.table[i][j][col]) for j in range(k))


def invariants(prof: Union[CovProfile, Space]) -> InvariantPair:
    """Flat and sharp invariants with the least scale attaining each outer min.

    The empty space is its own class and gets ``(0, 0)``.
    """
    if not isinstance(prof, CovProfile):
        prof = profile(prof)
    if prof.backing == "probe":
        raise InvalidInput("invariants need a closed-form or tabulated profile")
    if prof.backing == "degrees":
        vals = [_tail_sup(prof.degrees, m) for m in range(len(prof.degrees.prefix) + 1)]
        best = min(vals)
        w = vals.index(best)
        return InvariantPair(best, best, w, w)
    if prof.empty:
        return InvariantPair(ZERO, ZERO)
    out = []
    for col in (0, 1):
        vals = [_table_sup(prof, i, col) for i in range(len(prof.scales))]
        best = min(vals)
        out.append((best, vals.index(best)))
    (flat, wf), (sharp, ws) = out
    return InvariantPair(flat, sharp, wf, ws)


# -- level selection ---------------------------------------------------------

def _degree_profile(p) -> CovProfile:
    if not isinstance(p, CovProfile):
        p = profile(p)
    if p.backing != "degrees":
        raise InvalidInput("level selection works on degree-backed profiles")
    return p


def _block(p: CovProfile, lo: int, hi: int) -> Cardinal:
    return p.entry(lo, hi)[0]


def _settle(levels: list[int], depth: int, what: str) -> LevelSequence:
    """Close a simulated level list into an arithmetic tail, if it has settled."""
    steps = [b - a for a, b in zip(levels, levels[1:])]
    tail = steps[-depth:]
    if len(set(tail)) != 1:
        raise InsufficientDepth(f"{what} steps {tail} do not settle within the search depth")
    # keep the shortest prefix after which the step is constant
    cut = len(levels) - 1
    while cut > 1 and levels[cut] - levels[cut - 1] == tail[0]:
        cut -= 1
    return LevelSequence(tuple(levels[:cut + 1]), tail[0])


def _next_level(p: CovProfile, start: int, need: Cardinal, depth: int) -> Optional[int]:
    for D in range(start + 1, start + depth + 1):
        if _block(p, start, D) >= need:
            return D
    return None


def _horizon(*profiles: CovProfile) -> int:
    return max(len(p.degrees.prefix) for p in profiles) + 1


def select_levels_embedding(X, Y, depth: int = 6) -> tuple[LevelSequence, LevelSequence]:
    """Levels ``E`` (from the sharp witness of X) and ``D`` (from 0) with
    ``cov_X(E_n, E_{n+1}) <= cov_Y(D_n, D_{n+1})`` at every ``n``."""
    px, py = _degree_profile(X), _degree_profile(Y)
    ix, iy = invariants(px), invariants(py)
    holds = ix.sharp <= iy.flat
    E0 = ix.witness_sharp
    E = [E0]
    D = [0]
    rounds = _horizon(px, py) + 2 * depth + 2
    for n in range(rounds):
        E.append(E0 + n + 1)
        need = _block(px, E[n], E[n + 1])
        nxt = _next_level(py, D[n], need, depth)
        if nxt is None:
            msg = (f"no level within {depth} steps of {D[n]} carries {need} branches "
                   f"(sharp(X)={ix.sharp}, flat(Y)={iy.flat})")
            if holds:
                raise InsufficientDepth(msg, citation=EMBEDDING_CRITERION, level=n)
            raise HypothesisError(msg, citation=EMBEDDING_CRITERION, level=n)
        D.append(nxt)
    if not holds:
        raise HypothesisError(f"sharp(X)={ix.sharp} exceeds flat(Y)={iy.flat}",
                              citation=EMBEDDING_CRITERION)
    return _settle(E, depth, "source"), _settle(D, depth, "target")


def select_levels_equivalence(X, Y, depth: int = 6) -> tuple[LevelSequence, LevelSequence]:
    """Interleaved levels with both covering inequalities at every ``n``:
    ``cov_X(E_n, E_{n+1}) <= cov_Y(D_n, D_{n+1}) <= cov_X(E_{n+1}, E_{n+2})``."""
    px, py = _degree_profile(X), _degree_profile(Y)
    ix, iy = invariants(px), invariants(py)
    if not (ix.flat == ix.sharp == iy.flat == iy.sharp):
        raise HypothesisError(
            f"invariants differ: X {ix.to_json()}, Y {iy.to_json()}", citation=EQUAL_INVARIANTS)
    kappa = ix.sharp
    floor = OMEGA if kappa >= Aleph(1) else ONE
    E0, D0 = ix.witness_sharp, iy.witness_sharp
    E1 = _next_level(px, E0, floor, depth)
    if E1 is None:
        raise InsufficientDepth(f"no level within {depth} steps of {E0} carries {floor} branches",
                                citation=EQUAL_INVARIANTS, level=0)
    E, D = [E0, E1], [D0]
    rounds = _horizon(px, py) + 2 * depth + 2
    for n in range(rounds):
        need = max(_block(px, E[n], E[n + 1]), floor)
        nxt = _next_level(py, D[n], need, depth)
        if nxt is None:
            raise InsufficientDepth(f"target: no level within {depth} steps of {D[n]} "
                                    f"carries {need} branches", citation=EQUAL_INVARIANTS, level=n)
        D.append(nxt)
        need = _block(py, D[n], D[n + 1])
        nxt = _next_level(px, E[n + 1], need, depth)
        if nxt is None:
            raise InsufficientDepth(f"source: no level within {depth} steps of {E[n + 1]} "
                                    f"carries {need} branches", citation=EQUAL_INVARIANTS,
                                    level=n + 1)
        E.append(nxt)
    return _settle(E, depth, "source"), _settle(D, depth, "target")


# -- canonical maps between sequence spaces and tower boundaries -------------

def canonical_map(X: SequenceSpace, T: LazyTower) -> MultiMap:
    """Lazy map sending a sequence to the leaf (base level ``E_0``) containing it."""
    e0 = T.levels[0]

    def leaf(x):
        return (NodeRef(0, strip(x[e0:])),)

    def rep(t: NodeRef):
        return strip((0,) * e0 + tuple(t.address))

    return MultiMap.lazy(X, TowerBoundary(T), leaf, witness=rep)


def canonical_inverse(T: LazyTower, Y: SequenceSpace) -> MultiMap:
    """Inverse of :func:`canonical_map`: a leaf goes to every sequence inside it."""
    d0 = T.levels[0]

    def rep(t: NodeRef):
        return (strip((0,) * d0 + tuple(t.address)),)

    def member(t: NodeRef, y) -> bool:
        return strip(y[d0:]) == t.address

    def leaf(y):
        return NodeRef(0, strip(y[d0:]))

    return MultiMap.lazy(TowerBoundary(T), Y, rep, witness=leaf, member=member,
                         complete=False)


def _sample_points(X: SequenceSpace, rng: random.Random, count: int, top: int,
                   cap: int) -> list:
    pts = [X.basepoint]
    for _ in range(count):
        pts.append(X.sample(rng, rng.randint(0, top), cap))
    return list(dict.fromkeys(pts))


def _scales(rel: MultiMap) -> list[int]:
    top = max(rel.source.diameter, rel.target.diameter)
    return list(range(0, int(top) + 1))


# -- verdicts ----------------------------------------------------------------

@dataclass
class Verdict:
    relation: str
    constructive: bool
    citation: str
    certificate: Optional[Certificate] = None
    invariants: dict = field(default_factory=dict)
    detail: str = ""
    levels: Optional[tuple] = None

    def to_json(self) -> dict:
        out = {"relation": self.relation, "constructive": self.constructive,
               "citation": self.citation,
               "certificate": self.certificate.to_json() if self.certificate else None,
               "invariants": {k: v.to_json() for k, v in self.invariants.items()}}
        if self.detail:
            out["detail"] = self.detail
        if self.levels is not None:
            out["levels"] = {"X": self.levels[0].to_json(), "Y": self.levels[1].to_json()}
        return out


def _bounded(pair: InvariantPair) -> bool:
    return pair.sharp <= Finite(2)


def _basepoint(X: Space):
    return X.basepoint if isinstance(X, SequenceSpace) else X.points[0]


def _sample(X: Space, rng: random.Random, count: int, top: int, cap: int) -> list:
    if isinstance(X, FiniteUltraSpace):
        return list(X.points)
    return _sample_points(X, rng, count, top, cap)


def _all_pairs(X: Space, Y: Space, rng, count, depth, cap, kind: str) -> Certificate:
    yb = _basepoint(Y)
    xb = _basepoint(X)
    rel = MultiMap.lazy(X, Y, lambda x: (yb,), _sample(X, rng, count, depth, cap),
                        witness=lambda y: xb, member=lambda x, y: True, complete=False)
    cod = _sample(Y, rng, count, depth, cap) if kind == "equivalence" else ()
    finite = rel.materialize(codomain=cod)
    check = check_coarse_equivalence if kind == "equivalence" else check_coarse_embedding
    return check(finite, _scales(finite))


def coarse_embedding_pipeline(X: Space, Y: Space, depth: int = 6, seed: int = 0,
                              sample: int = 48, cap: int = 3) -> Verdict:
    """Coarse embedding of X into Y when ``sharp(X) <= flat(Y)``, with certificate."""
    ix, iy = invariants(X), invariants(Y)
    inv = {"X": ix, "Y": iy}
    if not ix.sharp <= iy.flat:
        return Verdict("undecided-here", False, EMBEDDING_CRITERION, None, inv,
                       f"sharp(X)={ix.sharp} exceeds flat(Y)={iy.flat}")
    rng = random.Random(seed)
    if ix.sharp == ZERO:
        empty = MultiMap(X, X, ()) if isinstance(X, FiniteUltraSpace) else None
        cert = check_coarse_embedding(empty, []) if empty is not None else None
        return Verdict("X-embeds-in-Y", True, EMPTY_ROUTE, cert, inv)
    if _bounded(ix):
        cert = _all_pairs(X, Y, rng, sample, depth, cap, "embedding")
        return Verdict("X-embeds-in-Y", True, BOUNDED_ROUTE, cert, inv)
    E, D = select_levels_embedding(X, Y, depth)
    TX, TY = LazyTower(X.degrees, E), LazyTower(Y.degrees, D)
    phi = build_embedding(TX, TY)
    rel = compose(canonical_inverse(TY, Y), compose(boundary_multimap(phi), canonical_map(X, TX)))
    xs = _sample_points(X, rng, sample, E[depth], cap)
    finite = rel.materialize(domain=xs)
    cert = check_coarse_embedding(finite, _scales(finite))
    return Verdict("X-embeds-in-Y", True, EMBEDDING_ROUTE, cert, inv, levels=(E, D))


def _all_countable(T: LazyTower) -> bool:
    return all(T.degree(n) == OMEGA for n in range(1, T.stable_from + 2))


def coarse_equivalence_pipeline(X: Space, Y: Space, depth: int = 6, seed: int = 0,
                                sample: int = 48, cap: int = 3) -> Verdict:
    """Coarse equivalence when all four invariants agree.

    Bounded and empty classes get trivial certificates, the countable class
    (finite degrees) a decision without construction, the class of the
    first uncountable cardinal an immersion-based certificate, and higher
    classes a decision only.
    """
    ix, iy = invariants(X), invariants(Y)
    inv = {"X": ix, "Y": iy}
    if not (ix.flat == ix.sharp == iy.flat == iy.sharp):
        return Verdict("undecided-here", False, EQUAL_INVARIANTS, None, inv,
                       f"invariants differ: X {ix.to_json()} vs Y {iy.to_json()}")
    kappa = ix.sharp
    rng = random.Random(seed)
    if kappa == ZERO:
        cert = check_coarse_equivalence(MultiMap(X, Y, ()), [])
        return Verdict("equivalent", True, EMPTY_ROUTE, cert, inv)
    if kappa <= Finite(2):
        cert = _all_pairs(X, Y, rng, sample, depth, cap, "equivalence")
        return Verdict("equivalent", True, BOUNDED_ROUTE, cert, inv)
    if kappa == OMEGA:
        return Verdict("equivalent", False, BOUNDED_GEOMETRY_CITATION, None, inv,
                       "finite-degree immersion is not constructed here")
    if not (isinstance(X, SequenceSpace) and isinstance(Y, SequenceSpace)):
        return Verdict("equivalent", False, EQUAL_INVARIANTS, None, inv)
    E, D = select_levels_equivalence(X, Y, depth)
    TX, TY = LazyTower(X.degrees, E), LazyTower(Y.degrees, D)
    if not (_all_countable(TX) and _all_countable(TY)):
        return Verdict("equivalent", False, EQUAL_INVARIANTS, None, inv,
                       "degrees above countable cannot be enumerated", levels=(E, D))
    phi = build_immersion(TX, TY)
    rel = compose(canonical_inverse(TY, Y), compose(boundary_multimap(phi), canonical_map(X, TX)))
    xs = _sample_points(X, rng, sample, E[depth], cap)
    ys = _sample_points(Y, rng, sample, D[depth], cap)
    finite = rel.materialize(domain=xs, codomain=ys)
    cert = check_coarse_equivalence(finite, _scales(finite))
    return Verdict("equivalent", True, IMMERSION_ROUTE, cert, inv, levels=(E, D))


# -- homogeneous models and classification -----------------------------------

def homogeneous_model(kappa) -> tuple[SequenceSpace, InvariantPair]:
    """Sequence space with ``flat = sharp = kappa``.

    Finite targets: 2 is the bounded class (degrees all 1); 0 and 1 are
    degenerate labels and anything from 3 up is not attained by any space.
    """
    kappa = parse(kappa)
    if kappa.finite:
        if kappa.n <= 1:
            raise DegenerateClassError(f"{kappa} is not the invariant of a nonempty space")
        if kappa.n > 2:
            raise HypothesisError(f"no space has finite invariant {kappa}: finite products "
                                  "either stay 1 (value 2) or grow (countable value)")
        degrees = CardinalSeq.constant(ONE, nondecreasing=True)
    else:
        degrees = cofinal_ladder(kappa)
    model = SequenceSpace(degrees)
    pair = invariants(model)
    if (pair.flat, pair.sharp) != (kappa, kappa):
        raise AssertionError(f"model invariants {pair} differ from {kappa}")
    return model, pair


def _require_homogeneous(X: Space) -> None:
    if isinstance(X, SequenceSpace):
        return
    if isinstance(X, FiniteUltraSpace):
        if not is_isometrically_homogeneous(X):
            raise InvalidInput("space is not isometrically homogeneous; "
                               "use the embedding or equivalence pipelines instead")
        return
    raise InvalidInput(f"cannot classify {type(X).__name__}")


def classify_pair(X: Space, Y: Space, depth: int = 6, seed: int = 0) -> Verdict:
    """For homogeneous spaces: equivalent exactly when the sharp invariants agree."""
    _require_homogeneous(X)
    _require_homogeneous(Y)
    ix, iy = invariants(X), invariants(Y)
    if ix.sharp != iy.sharp:
        return Verdict("not-equivalent", False, HOMOGENEOUS_CLASSES, None,
                       {"X": ix, "Y": iy}, f"sharp(X)={ix.sharp} differs from sharp(Y)={iy.sharp}")
    verdict = coarse_equivalence_pipeline(X, Y, depth, seed)
    if verdict.relation != "equivalent":
        verdict.relation = "equivalent"
        verdict.citation = HOMOGENEOUS_CLASSES
    return verdict
