"""Multi-maps (relations) between spaces and their oscillation calculus.

An explicit :class:`MultiMap` stores a finite set of pairs between two
:class:`~ultracoarse.space.FiniteUltraSpace` objects.  A lazy one wraps a
deterministic point-to-set function on arbitrary space handles (anything
with a ``distance`` method) together with a finite sampling domain; every
numeric question about a lazy map is answered on its materialization.

Lazy images may be *representative*: ``image(x)`` then lists some of the
related points and ``member(x, y)`` decides the full relation.  This is how
the inverse of a canonical map (whose fibers can be infinite) is carried.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Optional, Sequence

from . import kernels
from .errors import InvalidInput, SizeCapError
from .space import FiniteUltraSpace, exact, format_rational, subspace


def _same_space(a, b) -> bool:
    return a is b or a == b


class MultiMap:
    """A relation ``Phi`` between ``source`` and ``target``."""

    def __init__(self, source: FiniteUltraSpace, target: FiniteUltraSpace,
                 pairs: Iterable[tuple] = ()):
        self.source, self.target = source, target
        self.lazy = False
        fwd: dict = {}
        bwd: dict = {}
        for x, y in pairs:
            if not source.contains(x):
                raise InvalidInput(f"pair ({x!r}, {y!r}): {x!r} is not a source point")
            if not target.contains(y):
                raise InvalidInput(f"pair ({x!r}, {y!r}): {y!r} is not a target point")
            fwd.setdefault(x, set()).add(y)
            bwd.setdefault(y, set()).add(x)
        self._fwd = {x: frozenset(v) for x, v in fwd.items()}
        self._bwd = {y: frozenset(v) for y, v in bwd.items()}

    # -- lazy construction ---------------------------------------------------

    @classmethod
    def lazy(cls, source, target, func: Callable, domain: Iterable = (),
             witness: Optional[Callable] = None, member: Optional[Callable] = None,
             complete: bool = True) -> "MultiMap":
        """Relation given by ``func(x)``.

        ``witness(y)`` returns some ``x`` related to ``y`` (needed for inverses
        and surjectivity checks).  When ``complete`` is false, ``func`` only
        returns representatives and ``member`` must decide the relation.
        """
        if not complete and member is None:
            raise InvalidInput("a lazy relation with representative images needs a member test")
        self = cls.__new__(cls)
        self.source, self.target = source, target
        self.lazy = True
        self._func = func
        self.domain = tuple(dict.fromkeys(domain))
        self._witness = witness
        self._member = member
        self.complete = complete
        self._memo: dict = {}
        self._lock = threading.Lock()
        return self

    def __repr__(self) -> str:
        if self.lazy:
            return f"MultiMap(lazy, domain={len(self.domain)})"
        return f"MultiMap({sum(len(v) for v in self._fwd.values())} pairs)"

    # -- queries -------------------------------------------------------------

    @property
    def pairs(self) -> frozenset:
        if self.lazy:
            raise InvalidInput("a lazy relation has no finite pair set; materialize it first")
        return frozenset((x, y) for x, ys in self._fwd.items() for y in ys)

    def image(self, x) -> frozenset:
        if not self.lazy:
            return self._fwd.get(x, frozenset())
        got = self._memo.get(x)
        if got is None:
            val = frozenset(self._func(x))
            with self._lock:
                got = self._memo.setdefault(x, val)
        return got

    def image_of(self, xs: Iterable) -> frozenset:
        out: set = set()
        for x in xs:
            out |= self.image(x)
        return frozenset(out)

    def preimage(self, y) -> frozenset:
        if self.lazy:
            raise InvalidInput("preimages of a lazy relation are only available through its witness")
        return self._bwd.get(y, frozenset())

    def member(self, x, y) -> bool:
        if not self.lazy or self.complete:
            return y in self.image(x)
        return y in self.image(x) or bool(self._member(x, y))

    def witness(self, y):
        if not self.lazy:
            pre = self._bwd.get(y)
            if not pre:
                raise InvalidInput(f"{y!r} has no preimage")
            return min(pre, key=self.source.position)
        if self._witness is None:
            raise InvalidInput("this lazy relation carries no preimage witness")
        return self._witness(y)

    @property
    def has_witness(self) -> bool:
        return not self.lazy or self._witness is not None

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiMap):
            return NotImplemented
        if self.lazy or other.lazy:
            return self is other
        return (self.source == other.source and self.target == other.target
                and self.pairs == other.pairs)

    __hash__ = object.__hash__

    # -- materialization -----------------------------------------------------

    def materialize(self, domain: Optional[Iterable] = None,
                    codomain: Iterable = ()) -> "MultiMap":
        """Explicit restriction to a finite domain and codomain.

        Witnesses of the ``codomain`` points join the domain, images of the
        domain join the codomain, and the pairs are the relation restricted
        to the resulting finite product.
        """
        if not self.lazy:
            return self
        dom = list(dict.fromkeys(self.domain if domain is None else domain))
        cod = list(dict.fromkeys(codomain))
        if cod:
            if self._witness is None:
                raise InvalidInput("covering a codomain sample needs a preimage witness")
            dom = list(dict.fromkeys(dom + [self._witness(y) for y in cod]))
        images = {x: self.image(x) for x in dom}
        tgt = list(dict.fromkeys(cod + [y for x in dom for y in sorted(images[x], key=repr)]))
        pairs = {(x, y) for x in dom for y in images[x]}
        if not self.complete:
            pairs |= {(x, y) for x in dom for y in tgt if self._member(x, y)}
        return MultiMap(subspace(self.source, dom), subspace(self.target, tgt), pairs)

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        enc_s, enc_t = self.source.encode_point, self.target.encode_point
        order = sorted(self.pairs, key=lambda p: (self.source.position(p[0]),
                                                  self.target.position(p[1])))
        return {"pairs": [[enc_s(x), enc_t(y)] for x, y in order]}

    @classmethod
    def from_json(cls, data: dict, source: FiniteUltraSpace,
                  target: FiniteUltraSpace) -> "MultiMap":
        try:
            raw = data["pairs"]
            pairs = [(source.decode_point(x), target.decode_point(y)) for x, y in raw]
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidInput):
                raise
            raise InvalidInput(f"malformed relation JSON: {exc}") from exc
        return cls(source, target, pairs)


def identity(X: FiniteUltraSpace) -> MultiMap:
    return MultiMap(X, X, [(p, p) for p in X.points])


def inverse(phi: MultiMap) -> MultiMap:
    """Transposed relation.

    A lazy relation can only be inverted through its witness; the result is
    again lazy, with the witness as representative image.
    """
    if not phi.lazy:
        return MultiMap(phi.target, phi.source, [(y, x) for x, y in phi.pairs])
    if not phi.has_witness:
        raise InvalidInput("inverting a lazy relation needs a preimage witness")

    def first(x):
        ys = phi.image(x)
        if not ys:
            raise InvalidInput(f"{x!r} has an empty image")
        return min(ys, key=repr)

    dom = list(dict.fromkeys(y for x in phi.domain for y in phi.image(x)))
    return MultiMap.lazy(phi.target, phi.source, lambda y: (phi.witness(y),), dom,
                         witness=first, member=lambda y, x: phi.member(x, y),
                         complete=False)


def compose(psi: MultiMap, phi: MultiMap) -> MultiMap:
    """``psi o phi``: pairs ``(x, z)`` with ``(x, y)`` in phi and ``(y, z)`` in psi."""
    if not _same_space(phi.target, psi.source):
        raise InvalidInput("compose: the target of the inner map is not the source of the outer map")
    if not phi.lazy and not psi.lazy:
        return MultiMap(phi.source, psi.target,
                        [(x, z) for x, y in phi.pairs for z in psi.image(y)])
    if phi.lazy and not phi.complete:
        raise InvalidInput("compose: the inner relation must have complete images")

    def func(x):
        return psi.image_of(phi.image(x))

    def member(x, z):
        return any(psi.member(y, z) for y in phi.image(x))

    witness = None
    if phi.has_witness and psi.has_witness:
        def witness(z):
            return phi.witness(psi.witness(z))

    domain = phi.domain if phi.lazy else phi.source.points
    complete = not psi.lazy or psi.complete
    return MultiMap.lazy(phi.source, psi.target, func, domain, witness=witness,
                         member=None if complete else member, complete=complete)


def _finite(phi: MultiMap) -> MultiMap:
    return phi.materialize() if phi.lazy else phi


def set_diameter(space: FiniteUltraSpace, pts: Iterable):
    """Diameter of a finite subset; ``diam`` of the empty set is 0.

    In an ultrametric space the diameter is attained at any fixed anchor.
    """
    it = iter(pts)
    anchor = next(it, None)
    if anchor is None:
        return 0
    row = space.dist[space.position(anchor)]
    return max((row[space.position(p)] for p in it), default=0)


def oscillation(phi: MultiMap, eps):
    """``sup diam Phi(A)`` over ``A`` with ``diam A <= eps``, via the eps-balls."""
    phi = _finite(phi)
    eps = exact(eps)
    if eps < 0:
        raise InvalidInput("oscillation scale must be non-negative")
    S = phi.source
    if not len(S):
        return 0
    labels = kernels.ball_labels(S.ranks, S.threshold(eps))
    groups: dict = {}
    for i, p in enumerate(S.points):
        groups.setdefault(labels[i], set()).update(phi.image(p))
    return max((set_diameter(phi.target, g) for g in groups.values()), default=0)


def oscillation_witness(phi: MultiMap, eps):
    """Source pair ``(x1, x2)`` within ``eps`` whose images realize the oscillation.

    Returns ``None`` when the oscillation is 0.
    """
    phi = _finite(phi)
    S, Y = phi.source, phi.target
    value = oscillation(phi, eps)
    if value == 0:
        return None
    labels = kernels.ball_labels(S.ranks, S.threshold(exact(eps)))
    groups: dict = {}
    for i, p in enumerate(S.points):
        groups.setdefault(labels[i], []).append(p)
    for members in groups.values():
        sources = {y: x for x in members for y in phi.image(x)}
        if set_diameter(Y, sources) == value:
            anchor = next(iter(sources))
            far = max(sources, key=lambda y: Y.distance(anchor, y))
            return sources[anchor], sources[far]
    return None


def oscillation_bruteforce(phi: MultiMap, eps):
    """Supremum over every source subset of diameter <= eps (exponential)."""
    phi = _finite(phi)
    S, Y = phi.source, phi.target
    if len(S) > 20:
        raise SizeCapError(f"subset enumeration is capped at 20 source points, got {len(S)}")
    eps = exact(eps)
    if eps < 0:
        raise InvalidInput("oscillation scale must be non-negative")
    masks = [sum(1 << Y.position(y) for y in phi.image(p)) for p in S.points]
    best = kernels.subset_oscillation(S.ranks, S.threshold(eps), masks, Y.ranks)
    return Y.values[best] if len(Y) else 0


def modulus_table(phi: MultiMap, scales: Sequence) -> list[tuple]:
    return [(exact(s), oscillation(phi, s)) for s in scales]


@dataclass
class Certificate:
    """Outcome of a coarse-embedding or coarse-equivalence check.

    ``forward`` and ``backward`` are modulus tables ``(eps, omega)`` of the
    relation and of its inverse.  ``sampled`` is true when the relation was
    a lazy one materialized on a finite domain.
    """

    kind: str
    relation: MultiMap
    total: bool
    uncovered_source: list
    forward: list
    backward: list
    surjective: Optional[bool] = None
    uncovered_target: list = field(default_factory=list)
    sampled: bool = False

    @property
    def ok(self) -> bool:
        return self.total and self.surjective is not False

    def bound_violations(self, forward_slack=0, backward_slack=0) -> list:
        """Scales where ``omega(k) > k + slack`` in either table."""
        out = [("forward", s, w) for s, w in self.forward if w > s + forward_slack]
        out += [("backward", s, w) for s, w in self.backward if w > s + backward_slack]
        return out

    def to_json(self) -> dict:
        rel = self.relation
        table = lambda t: [[format_rational(s), format_rational(w)] for s, w in t]
        out = {
            "kind": self.kind,
            "total": self.total,
            "uncovered_source": [rel.source.encode_point(p) for p in self.uncovered_source],
            "forward": table(self.forward),
            "backward": table(self.backward),
            "sampled": self.sampled,
            "domain": [rel.source.encode_point(p) for p in rel.source.points],
            "codomain": [rel.target.encode_point(p) for p in rel.target.points],
        }
        if self.surjective is not None:
            out["surjective"] = self.surjective
            out["uncovered_target"] = [rel.target.encode_point(p) for p in self.uncovered_target]
        out.update(rel.to_json())
        return out


def check_coarse_embedding(phi: MultiMap, scales: Sequence) -> Certificate:
    """Totality plus modulus tables of ``Phi`` and ``Phi^-1`` over ``scales``.

    Failures are reported in the certificate (``ok`` false, uncovered points
    listed) rather than raised.
    """
    sampled = phi.lazy
    rel = _finite(phi)
    missing = [p for p in rel.source.points if not rel.image(p)]
    inv = inverse(rel)
    return Certificate("embedding", rel, not missing, missing,
                       modulus_table(rel, scales), modulus_table(inv, scales),
                       sampled=sampled)


def check_coarse_equivalence(phi: MultiMap, scales: Sequence) -> Certificate:
    cert = check_coarse_embedding(phi, scales)
    rel = cert.relation
    unreached = [y for y in rel.target.points if not rel.preimage(y)]
    cert.kind = "equivalence"
    cert.surjective = not unreached
    cert.uncovered_target = unreached
    return cert


def from_map_pair(f, g, X: FiniteUltraSpace, Y: FiniteUltraSpace):
    """Relation ``graph(f) + graph(g)^-1`` and the displacements of ``g.f`` and ``f.g``."""
    fa = f if callable(f) else f.get
    ga = g if callable(g) else g.get
    fx = {x: fa(x) for x in X.points}
    gy = {y: ga(y) for y in Y.points}
    for name, table, dom, cod in (("f", fx, X, Y), ("g", gy, Y, X)):
        bad = [p for p, v in table.items() if v is None or not cod.contains(v)]
        if bad:
            raise InvalidInput(f"{name} is not a total map into its codomain at {bad[0]!r}")
    pairs = [(x, fx[x]) for x in X.points] + [(gy[y], y) for y in Y.points]
    disp_x = max((X.distance(x, gy[fx[x]]) for x in X.points), default=0)
    disp_y = max((Y.distance(y, fx[gy[y]]) for y in Y.points), default=0)
    return MultiMap(X, Y, pairs), (disp_x, disp_y)
