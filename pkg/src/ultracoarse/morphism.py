"""Tower morphisms: classification, boundary multi-maps, and two builders.

:func:`build_embedding` assigns children injectively, top-down.
:func:`build_immersion` assembles a surjective immersion between towers
whose degrees are all countably infinite, as an increasing union of
*trapezium immersions*: maps from the lower cone of a plateau (a set of
siblings) onto the lower cone of a single node, collapsing the plateau.

Countably infinite sets of children are handled through index sets of
naturals (:class:`IndexSet`) and Cantor pairing, so every assignment is
deterministic and the lazy maps can be memoized safely.
"""
from __future__ import annotations

import threading
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

from .cardinal import OMEGA, Cardinal
from .enumeration import pair, unpair, unrank
from .errors import FiniteDegreeError, HypothesisError, InvalidInput
from .multimap import MultiMap
from .tower import (ExplicitTower, LazyTower, LevelSequence, NodeRef, TowerBoundary,
                    _radix, validate_tower)

Tower = Union[ExplicitTower, LazyTower]

EMBEDDING_CITATION = "tower embedding degree condition"
IMMERSION_CITATION = "tower immersion degree chain"


# -- level maps --------------------------------------------------------------

def _level_function(level_map) -> Callable[[int], int]:
    if level_map is None:
        return lambda n: n
    if isinstance(level_map, LevelSequence):
        return level_map.__getitem__
    if isinstance(level_map, dict):
        return lambda n: level_map[n]
    if isinstance(level_map, (list, tuple)):
        return lambda n: level_map[n]
    if callable(level_map):
        return level_map
    raise InvalidInput(f"unsupported level map {level_map!r}")


def check_level_map(f: Callable[[int], int], upto: int) -> None:
    try:
        vals = [f(n) for n in range(upto + 1)]
    except (IndexError, KeyError) as exc:
        raise InvalidInput(f"level map undefined below level {upto}") from exc
    if vals and vals[0] < 0:
        raise InvalidInput("level map takes a negative value")
    for n in range(upto):
        if vals[n + 1] <= vals[n]:
            raise InvalidInput(f"level map is not strictly increasing at level {n}")


# -- maps --------------------------------------------------------------------

class TowerMap:
    """A map of nodes together with its level map.

    Explicit maps hold a table; lazy maps hold a deterministic function whose
    results are memoized under a lock (first evaluation wins).
    """

    def __init__(self, source: Tower, target: Tower, level_map=None,
                 mapping: Optional[dict] = None, func: Optional[Callable] = None):
        if (mapping is None) == (func is None):
            raise InvalidInput("give exactly one of a mapping table or a node function")
        self.source, self.target = source, target
        self.level_map = level_map
        self.f = _level_function(level_map)
        self.mapping = dict(mapping) if mapping is not None else None
        self._func = func
        self._memo: dict = {}
        self._lock = threading.Lock()

    @property
    def lazy(self) -> bool:
        return self.mapping is None

    def __call__(self, x):
        if self.mapping is not None:
            try:
                return self.mapping[x]
            except KeyError:
                raise InvalidInput(f"node {x!r} is outside the map's domain") from None
        got = self._memo.get(x)
        if got is None:
            val = self._func(x)
            with self._lock:
                got = self._memo.setdefault(x, val)
        return got

    def evaluated(self) -> dict:
        if self.mapping is not None:
            return dict(self.mapping)
        with self._lock:
            return dict(self._memo)

    def to_json(self) -> dict:
        table = self.evaluated()
        if self.mapping is not None:
            top = self.source.depth
        else:
            top = max((self.source.level(x) for x in table), default=0)
        key = lambda x: (self.source.level(x), str(x))
        out = {"level_map": [[n, self.f(n)] for n in range(top + 1)],
               "mapping": {str(x): str(table[x]) for x in sorted(table, key=key)}}
        if self.lazy:
            out["expanded_depth"] = getattr(self, "expanded_depth", top)
        return out


@dataclass
class MapClass:
    """Result of :func:`classify_map`; ``witness`` explains a failure."""

    kind: str
    witness: Optional[tuple] = None
    checked: int = 0
    sampled: bool = False
    reason: str = ""

    def __str__(self) -> str:
        return self.kind


def classify_map(phi: TowerMap, sample: Optional[Iterable] = None) -> MapClass:
    """Decide isomorphism / embedding / immersion / neither on a node sample.

    Explicit sources default to all nodes.  Lazy maps are judged on the
    sample only and never reported as isomorphisms.
    """
    S, T = phi.source, phi.target
    if sample is None:
        if phi.lazy:
            raise InvalidInput("a lazy tower map needs an explicit node sample")
        sample = S.nodes
    nodes = list(dict.fromkeys(sample))
    top = max((S.level(x) for x in nodes), default=0)
    check_level_map(phi.f, top + 1 if phi.lazy else top)
    sampled = phi.lazy
    img = {}
    for x in nodes:
        y = phi(x)
        img[x] = y
        if not T.contains(y) or T.level(y) != phi.f(S.level(x)):
            return MapClass("neither", (x, y), len(nodes), sampled,
                            "image level disagrees with the level map")
    for x in nodes:
        p = S.parent(x)
        if p is None:
            continue
        if T.ancestor(img[x], phi.f(S.level(p))) != phi(p):
            return MapClass("neither", (x, p), len(nodes), sampled,
                            "not monotone on a covering pair")
    fibers: dict = {}
    for x in nodes:
        fibers.setdefault(img[x], []).append(x)
    collisions = [xs for xs in fibers.values() if len(xs) > 1]
    if not collisions:
        if not phi.lazy and _is_onto(phi, img):
            return MapClass("isomorphism", None, len(nodes), sampled)
        return MapClass("embedding", None, len(nodes), sampled)
    for xs in collisions:
        base = xs[0]
        for other in xs[1:]:
            m = S.meet(base, other)
            if m is None or S.level(m) > S.level(base) + 1:
                return MapClass("neither", (base, other), len(nodes), sampled,
                                "equal images whose meet is more than one level up")
    return MapClass("immersion", None, len(nodes), sampled)


def _is_onto(phi: TowerMap, img: dict) -> bool:
    S, T = phi.source, phi.target
    if not isinstance(T, ExplicitTower) or S.depth != T.depth:
        return False
    if any(phi.f(n) != n for n in range(S.depth + 1)):
        return False
    return len(set(img.values())) == len(T.nodes)


def identity_map(T: Tower) -> TowerMap:
    if isinstance(T, ExplicitTower):
        return TowerMap(T, T, None, mapping={x: x for x in T.nodes})
    phi = TowerMap(T, T, None, func=lambda x: x)
    phi.preimage_witness = lambda s: s
    return phi


# -- boundary multi-maps -----------------------------------------------------

def _require_pruned(T: Tower) -> None:
    if isinstance(T, ExplicitTower) and not validate_tower(T).is_pruned:
        raise InvalidInput("boundary maps need pruned towers")


def boundary_multimap(phi: TowerMap, domain: Iterable = ()) -> MultiMap:
    """Leaf-level relation: a branch goes to the branches through its image.

    With ``level_map(0) == 0`` every leaf has a single image leaf.  Otherwise
    the image is the set of leaves below ``phi(leaf)``: listed in full for
    explicit targets, by a representative plus a membership test for lazy
    ones.
    """
    S, T = phi.source, phi.target
    _require_pruned(S)
    _require_pruned(T)
    base = phi.f(0)
    if isinstance(S, ExplicitTower) and not domain:
        domain = S.levels[0]
    member = None
    complete = True
    if base == 0:
        def func(x):
            return (phi(x),)
    elif isinstance(T, ExplicitTower):
        def func(x):
            return T.below(phi(x), 0)
    else:
        complete = False

        def func(x):
            return (_descendant(T, phi(x), 0, 0),)

        def member(x, y):
            return T.ancestor(y, base) == phi(x)

    witness = None
    pw = getattr(phi, "preimage_witness", None)
    if pw is not None:
        def witness(y):
            return pw(T.ancestor(y, base) if base else y)
    elif not phi.lazy:
        back: dict = {}
        for x in S.levels[0]:
            for y in func(x):
                back.setdefault(y, x)

        def witness(y):
            try:
                return back[y]
            except KeyError:
                raise InvalidInput(f"leaf {y!r} is not reached by the map") from None
    return MultiMap.lazy(TowerBoundary(S), TowerBoundary(T), func, domain,
                         witness=witness, member=member, complete=complete)


# -- embeddings --------------------------------------------------------------

def _descendant(T: Tower, u, level: int, i: int):
    """The ``i``-th node below ``u`` at ``level`` in canonical order."""
    if isinstance(T, LazyTower):
        lo, hi = T.levels[level], T.levels[T.level(u)]
        radices = [_radix(T.base_degree(j)) for j in range(lo + 1, hi + 1)]
        block = unrank(i, radices)
        addr = list(block) + list(u.address)
        while addr and addr[-1] == 0:
            addr.pop()
        return NodeRef(level, tuple(addr))
    below = sorted(T.below(u, level), key=T.order_key)
    return below[i]


def _interval_degree(T: Tower, lo: int, hi: int, which: int) -> Cardinal:
    return T.deg_bounds(lo, hi)[which]


def check_embedding_degrees(S: Tower, T: Tower, f, levels: int) -> None:
    """``Deg_S(lam, lam+1) <= deg_T(f(lam), f(lam+1))`` for ``lam < levels``."""
    for lam in range(levels):
        need = _interval_degree(S, lam, lam + 1, 1)
        have = _interval_degree(T, f(lam), f(lam + 1), 0)
        if need > have:
            raise HypothesisError(
                f"degree condition fails at level {lam}: {need} children in the source "
                f"but only {have} below the image", citation=EMBEDDING_CITATION, level=lam)


def build_embedding(S: Tower, T: Tower, f=None, check_levels: int = 16) -> TowerMap:
    """Injective level-preserving map ``S -> T`` with level map ``f``.

    Children of each node are sent, in canonical order, to the descendants
    of its image at the image level.  For lazy sources the degree condition
    is checked on the first ``check_levels`` levels (past the stable part
    of both degree sequences the condition repeats).
    """
    F = _level_function(f)
    if isinstance(S, LazyTower) and isinstance(T, ExplicitTower):
        raise InvalidInput("an infinite tower cannot embed into a finite truncation")
    if isinstance(S, ExplicitTower):
        check_level_map(F, S.depth)
        if isinstance(T, ExplicitTower) and F(S.depth) > T.depth:
            raise InvalidInput(f"level map sends the top level past depth {T.depth}")
        check_embedding_degrees(S, T, F, S.depth)
        top = S.levels[-1][0]
        if isinstance(T, ExplicitTower):
            start = sorted(T.levels[F(S.depth)], key=T.order_key)[0]
        else:
            start = T.zero(F(S.depth))
        table = {top: start}
        for lev in range(S.depth, 0, -1):
            for x in S.levels[lev]:
                for i, c in enumerate(S.children[x]):
                    table[c] = _descendant(T, table[x], F(lev - 1), i)
        return TowerMap(S, T, f, mapping=table)

    levels = max(S.stable_from, T.stable_from) + check_levels
    check_level_map(F, levels)
    check_embedding_degrees(S, T, F, levels)

    def func(x: NodeRef) -> NodeRef:
        coords = S.tower_coords(x)
        top = x.level + len(coords)
        u = T.zero(F(top))
        for k in range(top, x.level, -1):
            u = _descendant(T, u, F(k - 1), coords[k - x.level - 1])
        return u

    phi = TowerMap(S, T, f, func=func)
    return phi


# -- index sets --------------------------------------------------------------

class IndexSet:
    """A set of naturals enumerated increasingly by ``member``."""

    infinite = True
    coinfinite = True

    def member(self, pos: int) -> int:  # pragma: no cover - abstract
        raise NotImplementedError

    def position(self, t: int) -> Optional[int]:  # pragma: no cover - abstract
        raise NotImplementedError

    def count_le(self, t: int) -> int:
        """Number of members ``<= t`` (binary search over positions)."""
        if t < 0:
            return 0
        lo, hi = 0, 1
        while self._has(hi - 1) and self.member(hi - 1) <= t:
            lo, hi = hi, hi * 2
        # members at positions < lo are <= t; position hi-1 is > t or absent
        while lo < hi:
            mid = (lo + hi) // 2
            if self._has(mid) and self.member(mid) <= t:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def _has(self, pos: int) -> bool:
        return True

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and vars(self) == vars(other)

    def __hash__(self) -> int:
        return hash((type(self).__name__, tuple(sorted(vars(self).items()))))

    def __contains__(self, t: int) -> bool:
        return self.position(t) is not None


class Naturals(IndexSet):
    coinfinite = False

    def member(self, pos):
        return pos

    def position(self, t):
        return t if t >= 0 else None

    def __repr__(self):
        return "Naturals()"


class Evens(IndexSet):
    def member(self, pos):
        return 2 * pos

    def position(self, t):
        return t // 2 if t >= 0 and t % 2 == 0 else None

    def __repr__(self):
        return "Evens()"


class Odds(IndexSet):
    def member(self, pos):
        return 2 * pos + 1

    def position(self, t):
        return (t - 1) // 2 if t >= 0 and t % 2 == 1 else None

    def __repr__(self):
        return "Odds()"


@dataclass(frozen=True)
class PairingColumn(IndexSet):
    """``{pair(r, s) : s in N}``."""

    r: int

    def member(self, pos):
        return pair(self.r, pos)

    def position(self, t):
        if t < 0:
            return None
        a, b = unpair(t)
        return b if a == self.r else None


class FiniteSet(IndexSet):
    infinite = False

    def __init__(self, values: Iterable[int]):
        self.values = tuple(sorted(set(values)))

    def member(self, pos):
        return self.values[pos]

    def _has(self, pos):
        return pos < len(self.values)

    def position(self, t):
        i = bisect_left(self.values, t)
        return i if i < len(self.values) and self.values[i] == t else None

    def count_le(self, t):
        return bisect_right(self.values, t)

    def __repr__(self):
        return f"FiniteSet({list(self.values)})"


class Complement(IndexSet):
    """Naturals outside ``base``."""

    def __init__(self, base: IndexSet):
        self.base = base
        self.infinite = base.coinfinite
        self.coinfinite = base.infinite

    def member(self, pos):
        # least t with (t + 1 - base.count_le(t)) == pos + 1
        lo, hi = pos, max(2 * pos + 1, 1)
        while hi + 1 - self.base.count_le(hi) < pos + 1:
            lo, hi = hi, hi * 2
        while lo < hi:
            mid = (lo + hi) // 2
            if mid + 1 - self.base.count_le(mid) >= pos + 1:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def position(self, t):
        if t < 0 or self.base.position(t) is not None:
            return None
        return t - self.base.count_le(t)

    def __repr__(self):
        return f"Complement({self.base!r})"


class Composed(IndexSet):
    """``outer.member(inner.member(pos))``: a subset of ``outer``."""

    def __init__(self, outer: IndexSet, inner: IndexSet):
        self.outer, self.inner = outer, inner
        self.infinite = inner.infinite and outer.infinite

    def member(self, pos):
        return self.outer.member(self.inner.member(pos))

    def position(self, t):
        q = self.outer.position(t)
        return None if q is None else self.inner.position(q)

    def __repr__(self):
        return f"Composed({self.outer!r}, {self.inner!r})"


@dataclass(frozen=True)
class Plateau:
    """Children ``vertex.child(I.member(pos))`` of ``vertex``; they sit one level below it."""

    vertex: NodeRef
    index: IndexSet

    @property
    def level(self) -> int:
        return self.vertex.level - 1


@dataclass(frozen=True)
class Pin:
    """Prescribes the map below the plateau element at ``position``.

    ``sub`` is a plateau under that element, ``v`` the child index of ``w``
    it must collapse onto, and ``psi`` the map already fixed on ``sub``.
    """

    position: int
    sub: Plateau
    v: int
    psi: "TrapeziumImmersion"


# -- trapezium immersions ----------------------------------------------------

def _require_countable(T: LazyTower, n: int, role: str) -> None:
    d = T.degree(n)
    if d.finite:
        raise FiniteDegreeError(
            f"{role} degree at level {n - 1} is finite ({d}); the infinite-degree immersion "
            "needs countably infinite degrees; use the decision-only classification for "
            "finite-degree spaces", citation=IMMERSION_CITATION, level=n - 1)
    if d != OMEGA:
        raise HypothesisError(
            f"{role} degree at level {n - 1} is {d}: children beyond countably many cannot be "
            "enumerated", citation=IMMERSION_CITATION, level=n - 1)


class TrapeziumImmersion(TowerMap):
    """Map from the lower cone of ``plateau`` (in ``T``) onto the lower cone of ``w`` (in ``S``).

    The plateau collapses onto ``w``.  Below it, the child with index ``t``
    of the plateau element at position ``pos`` lies in piece
    ``pair(pos, r)`` at position ``s``, where ``(r, s) = unpair(t)``; piece
    ``n`` is sent to the ``n``-th child of ``w`` (skipping the pinned child)
    and the construction repeats inside each piece.  At level 0 the
    plateau is simply sent to the leaf ``w``.
    """

    def __init__(self, T: LazyTower, S: LazyTower, plateau: Plateau, w: NodeRef,
                 pin: Optional[Pin] = None):
        super().__init__(T, S, None, func=self._evaluate)
        k = plateau.level
        if k < 0 or w.level != k:
            raise HypothesisError(f"plateau level {k} differs from the target level {w.level}",
                                  citation=IMMERSION_CITATION, level=k)
        if not (T.contains(plateau.vertex) and S.contains(w)):
            raise InvalidInput("plateau vertex or target node is not in its tower")
        if k >= 1:
            if not plateau.index.infinite:
                raise HypothesisError("a plateau above level 0 must be infinite",
                                      citation=IMMERSION_CITATION, level=k)
            for n in range(1, k + 2):
                _require_countable(T, n, "source")
            for n in range(1, k + 1):
                _require_countable(S, n, "target")
        if pin is not None:
            if k < 1:
                raise HypothesisError("a pin needs a plateau above level 0",
                                      citation=IMMERSION_CITATION, level=k)
            anchor = T.child(plateau.vertex, plateau.index.member(pin.position))
            if pin.sub.vertex != anchor:
                raise HypothesisError("pinned sub-plateau does not hang from the pinned element",
                                      citation=IMMERSION_CITATION, level=k)
            if not pin.sub.index.coinfinite:
                raise HypothesisError("pinned sub-plateau must leave infinitely many children out",
                                      citation=IMMERSION_CITATION, level=k)
            if pin.psi.w != S.child(w, pin.v) or pin.psi.plateau != pin.sub:
                raise HypothesisError("pinned map does not cover the pinned child",
                                      citation=IMMERSION_CITATION, level=k)
        self.plateau, self.w, self.pin = plateau, w, pin
        self.k = k

    # which plateau element is above x, and at what position
    def _locate(self, x: NodeRef):
        T, P = self.source, self.plateau
        if x.level > self.k or T.ancestor(x, P.vertex.level) != P.vertex:
            raise InvalidInput(f"{x} is outside the trapezium body")
        a = T.ancestor(x, self.k)
        pos = P.index.position(T.child_index(a))
        if pos is None:
            raise InvalidInput(f"{x} is outside the trapezium body")
        return pos

    def contains(self, x: NodeRef) -> bool:
        try:
            self._locate(x)
        except InvalidInput:
            return False
        return True

    def _evaluate(self, x: NodeRef) -> NodeRef:
        T, S = self.source, self.target
        pos = self._locate(x)
        if x.level == self.k:
            return self.w
        coords = T.tower_coords(x)
        # coords[j - x.level - 1] is the child index at level j - 1 below level j
        c = lambda j: coords[j - x.level - 1] if j - x.level - 1 < len(coords) else 0
        t = c(self.k)
        pin = self.pin
        if pin is not None and pos == pin.position:
            if pin.sub.index.position(t) is not None:
                return pin.psi(x)
            j = Complement(pin.sub.index).position(t)
            r, s = unpair(j)
        else:
            r, s = unpair(t)
        n = pair(pos, r)
        if pin is not None and n >= pin.v:
            n += 1
        u = S.child(self.w, n)
        for lev in range(self.k - 1, x.level, -1):
            r, s2 = unpair(c(lev))
            u = S.child(u, pair(s, r))
            s = s2
        return u

    def preimage_witness(self, s: NodeRef) -> NodeRef:
        """Some ``t`` in the trapezium body with ``phi(t) == s``."""
        T, S, P = self.source, self.target, self.plateau
        if s.level > self.k or S.ancestor(s, self.k) != self.w:
            raise InvalidInput(f"{s} is outside the lower cone of the target node")
        if s.level == self.k:
            return T.child(P.vertex, P.index.member(0))
        coords = S.tower_coords(s)
        c = lambda j: coords[j - s.level - 1] if j - s.level - 1 < len(coords) else 0
        n = c(self.k)
        pin = self.pin
        if pin is not None:
            if n == pin.v:
                return pin.psi.preimage_witness(s)
            if n > pin.v:
                n -= 1
        pos, r = unpair(n)
        vertex = T.child(P.vertex, P.index.member(pos))
        if pin is not None and pos == pin.position:
            piece: IndexSet = Composed(Complement(pin.sub.index), PairingColumn(r))
        else:
            piece = PairingColumn(r)
        for lev in range(self.k - 1, s.level, -1):
            p, r = unpair(c(lev))
            vertex = T.child(vertex, piece.member(p))
            piece = PairingColumn(r)
        return T.child(vertex, piece.member(0))


def build_trapezium_immersion(T: LazyTower, S: LazyTower, plateau: Plateau, w: NodeRef,
                              pin: Optional[Pin] = None) -> TrapeziumImmersion:
    """Admissible immersion of the trapezium under ``plateau`` onto ``down(w)``."""
    return TrapeziumImmersion(T, S, plateau, w, pin)


class Immersion(TowerMap):
    """Surjective immersion ``T -> S`` built level by level along the zero spines.

    Stage ``k`` is a trapezium immersion of the even children of the spine
    node at level ``k + 1`` onto the spine node at level ``k`` of ``S``,
    pinned to stage ``k - 1`` below the spine.  Stages are created on
    demand; later stages never change earlier values.
    """

    def __init__(self, T: LazyTower, S: LazyTower):
        super().__init__(T, S, None, func=self._evaluate)
        self._stages: list[TrapeziumImmersion] = []
        self._stage_lock = threading.Lock()

    @property
    def expanded_depth(self) -> int:
        return len(self._stages) - 1

    def stage(self, k: int) -> TrapeziumImmersion:
        with self._stage_lock:
            while len(self._stages) <= k:
                j = len(self._stages)
                T, S = self.source, self.target
                plateau = Plateau(T.zero(j + 1), Evens())
                pin = None
                if j > 0:
                    pin = Pin(0, Plateau(T.zero(j), Evens()), 0, self._stages[j - 1])
                self._stages.append(TrapeziumImmersion(T, S, plateau, S.zero(j), pin))
            return self._stages[k]

    def stage_for(self, x: NodeRef) -> int:
        """Least ``k`` whose trapezium body contains ``x``."""
        coords = self.source.tower_coords(x)
        k = max(x.level, x.level + len(coords) - 1)
        idx = k + 1 - x.level - 1
        c = coords[idx] if 0 <= idx < len(coords) else 0
        return k if c % 2 == 0 else k + 1

    def _evaluate(self, x: NodeRef) -> NodeRef:
        return self.stage(self.stage_for(x))(x)

    def preimage_witness(self, s: NodeRef) -> NodeRef:
        k = max(s.level, s.level + len(self.target.tower_coords(s)))
        return self.stage(k).preimage_witness(s)


def check_immersion_degrees(T: LazyTower, S: LazyTower) -> None:
    """All degrees of both towers must be exactly countably infinite."""
    for tower, role in ((T, "source"), (S, "target")):
        for n in range(1, tower.stable_from + 2):
            _require_countable(tower, n, role)


def build_immersion(T: LazyTower, S: LazyTower) -> Immersion:
    """Lazy surjective tower immersion ``T -> S`` with identity level map."""
    if not (isinstance(T, LazyTower) and isinstance(S, LazyTower)):
        raise InvalidInput("the immersion builder works on lazy towers")
    check_immersion_degrees(T, S)
    return Immersion(T, S)


def preimage_witness(phi: TowerMap, s):
    fn = getattr(phi, "preimage_witness", None)
    if fn is None:
        raise InvalidInput("this map carries no preimage witness")
    return fn(s)
