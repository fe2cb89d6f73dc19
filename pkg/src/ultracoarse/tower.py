"""Towers: explicit finite truncations and lazy homogeneous towers.

Levels are 0-based with 0 the bottom.  An :class:`ExplicitTower` is a
rooted tree stored leaves-up with a single top node; a :class:`LazyTower`
is the infinite homogeneous tower of a degree sequence, optionally
restricted to a selection of base levels.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as cartesian
from typing import Hashable, Iterable, Optional, Sequence, Union

from .cardinal import Cardinal, CardinalSeq, Finite, ONE, ZERO, product_of
from .enumeration import Radix, rank, unrank
from .errors import InvalidInput
from .space import FiniteUltraSpace, ball, exact, format_rational, strip


@dataclass(frozen=True, order=True)
class NodeRef:
    """Lazy-tower node: a level and the base coordinates above that level."""

    level: int
    address: tuple[int, ...] = ()

    def __str__(self) -> str:
        return f"{self.level}:{','.join(map(str, self.address))}"


@dataclass(frozen=True)
class LevelSequence:
    """Strictly increasing base levels ``E[0] < E[1] < ...`` in closed form.

    ``E[n] = prefix[n]`` inside the prefix and grows by ``step`` after it.
    """

    prefix: tuple[int, ...] = (0,)
    step: int = 1

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(v) for v in self.prefix))
        if not self.prefix or self.step < 1 or self.prefix[0] < 0:
            raise InvalidInput("level sequence needs a nonempty prefix and a positive step")
        if any(b <= a for a, b in zip(self.prefix, self.prefix[1:])):
            raise InvalidInput(f"levels must strictly increase: {self.prefix}")

    @classmethod
    def of(cls, levels: Sequence[int], step: Optional[int] = None) -> "LevelSequence":
        levels = tuple(levels)
        if step is None:
            step = levels[-1] - levels[-2] if len(levels) > 1 else 1
        return cls(levels, step)

    def __getitem__(self, n: int) -> int:
        if n < len(self.prefix):
            return self.prefix[n]
        return self.prefix[-1] + (n - len(self.prefix) + 1) * self.step

    def head(self, count: int) -> list[int]:
        return [self[n] for n in range(count)]

    def index_at_least(self, base: int) -> int:
        for n, v in enumerate(self.prefix):
            if v >= base:
                return n
        extra = -(-(base - self.prefix[-1]) // self.step)
        return len(self.prefix) - 1 + extra

    def compose(self, inner: "LevelSequence") -> "LevelSequence":
        """Levels ``self[inner[n]]``."""
        n = len(inner.prefix)
        while inner[n - 1] < len(self.prefix):
            n += 1
        return LevelSequence(tuple(self[inner[k]] for k in range(n)), self.step * inner.step)

    @property
    def is_identity(self) -> bool:
        return self[0] == 0 and self.step == 1 and all(v == i for i, v in enumerate(self.prefix))

    def to_json(self) -> dict:
        return {"prefix": list(self.prefix), "step": self.step}

    @classmethod
    def from_json(cls, data) -> "LevelSequence":
        if isinstance(data, list):
            return cls.of(data)
        return cls(tuple(data["prefix"]), int(data.get("step", 1)))


IDENTITY_LEVELS = LevelSequence()


def _radix(c: Cardinal) -> Radix:
    return None if c.infinite else c.n


class LazyTower:
    """Homogeneous tower of a degree sequence.

    Base level ``j >= 1`` nodes have ``degrees[j-1]`` children.  With a level
    selection ``E`` the tower keeps only base levels ``E[0], E[1], ...``;
    tower level ``n`` is base level ``E[n]``.  A node at tower level ``n`` is
    addressed by the finitely supported base coordinates ``x_j`` for
    ``j > E[n]``; its children are ranked by :func:`enumeration.rank` over
    the block of coordinates ``E[n-1] < j <= E[n]``.
    """

    def __init__(self, degrees: CardinalSeq, levels: LevelSequence = IDENTITY_LEVELS):
        for j in range(degrees.stable_from + 1):
            if degrees[j] < ONE:
                raise InvalidInput("tower degrees must be at least 1")
        self.degrees = degrees
        self.levels = levels

    def __repr__(self) -> str:
        return f"LazyTower({self.degrees.to_json()}, levels={self.levels.to_json()})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, LazyTower) and self.degrees == other.degrees
                and self.levels == other.levels)

    def __hash__(self) -> int:
        return hash((self.degrees, self.levels))

    is_pruned = True
    is_homogeneous = True

    def base_degree(self, j: int) -> Cardinal:
        return self.degrees[j - 1]

    def width(self, n: int) -> int:
        return self.levels[n] - self.levels[n - 1]

    def radices(self, n: int) -> list[Radix]:
        lo, hi = self.levels[n - 1], self.levels[n]
        return [_radix(self.base_degree(j)) for j in range(lo + 1, hi + 1)]

    def degree(self, n: int) -> Cardinal:
        """Uniform number of children of a level-``n`` node (``n >= 1``)."""
        if n <= 0:
            return ZERO
        lo, hi = self.levels[n - 1], self.levels[n]
        return product_of(self.base_degree(j) for j in range(lo + 1, hi + 1))

    @property
    def stable_from(self) -> int:
        """First tower level from which degrees follow the tail rule alone."""
        n = max(len(self.levels.prefix), 1)
        while self.levels[n - 1] + 1 <= self.degrees.stable_from:
            n += 1
        return n

    def zero(self, n: int) -> NodeRef:
        return NodeRef(n, ())

    def node(self, level: int, address: Sequence[int] = ()) -> NodeRef:
        ref = NodeRef(level, strip(address))
        if not self.contains(ref):
            raise InvalidInput(f"{ref} is not a node of {self!r}")
        return ref

    def contains(self, x: NodeRef) -> bool:
        if x.level < 0:
            return False
        base = self.levels[x.level]
        for off, c in enumerate(x.address):
            deg = self.base_degree(base + 1 + off)
            if c < 0 or (deg.finite and c >= deg.n):
                return False
        return True

    def level(self, x: NodeRef) -> int:
        return x.level

    def parent(self, x: NodeRef) -> NodeRef:
        return self.up(x)

    def up(self, x: NodeRef) -> NodeRef:
        return NodeRef(x.level + 1, x.address[self.width(x.level + 1):])

    def ancestor(self, x: NodeRef, level: int) -> NodeRef:
        if level < x.level:
            raise InvalidInput(f"level {level} is below {x}")
        drop = self.levels[level] - self.levels[x.level]
        return NodeRef(level, x.address[drop:])

    def child(self, x: NodeRef, i: int) -> NodeRef:
        if x.level <= 0:
            raise InvalidInput("level-0 nodes have no children")
        block = unrank(i, self.radices(x.level))
        return NodeRef(x.level - 1, strip(block + x.address))

    def child_index(self, x: NodeRef) -> int:
        w = self.width(x.level + 1)
        block = tuple(x.address[:w]) + (0,) * max(0, w - len(x.address))
        return rank(block, self.radices(x.level + 1))

    def children(self, x: NodeRef, cap: Optional[int] = None) -> list[NodeRef]:
        """Children with every base coordinate below ``cap`` (all when finite and uncapped)."""
        if x.level <= 0:
            return []
        lo, hi = self.levels[x.level - 1], self.levels[x.level]
        ranges = []
        for j in range(lo + 1, hi + 1):
            deg = self.base_degree(j)
            if deg.infinite and cap is None:
                raise InvalidInput("infinite degree: pass an alphabet cap")
            size = deg.n if deg.finite else cap
            ranges.append(range(min(size, cap) if cap is not None else size))
        out = []
        for block in cartesian(*ranges):
            out.append(NodeRef(x.level - 1, strip(tuple(block) + x.address)))
        return sorted(out, key=self.child_index)

    def tower_coords(self, x: NodeRef) -> tuple[int, ...]:
        """Child indices ``c_{n+1}, c_{n+2}, ...`` locating ``x`` below the zero spine."""
        out = []
        addr, n = x.address, x.level
        while addr:
            w = self.width(n + 1)
            block = tuple(addr[:w]) + (0,) * max(0, w - len(addr))
            out.append(rank(block, self.radices(n + 1)))
            addr, n = addr[w:], n + 1
        return strip(out)

    def from_tower_coords(self, level: int, coords: Sequence[int]) -> NodeRef:
        base: list[int] = []
        for k, c in enumerate(coords):
            base.extend(unrank(c, self.radices(level + 1 + k)))
        return NodeRef(level, strip(base))

    def meet(self, x: NodeRef, y: NodeRef) -> NodeRef:
        m = max(x.level, y.level)
        a, b = self.ancestor(x, m), self.ancestor(y, m)
        if a == b:
            return a
        n = max(len(a.address), len(b.address))
        pa = a.address + (0,) * (n - len(a.address))
        pb = b.address + (0,) * (n - len(b.address))
        top = max(i for i in range(n) if pa[i] != pb[i])
        base = self.levels[m] + 1 + top
        return self.ancestor(a, self.levels.index_at_least(base))

    def deg(self, x: NodeRef, lam: int) -> Cardinal:
        if lam > x.level or lam < 0:
            raise InvalidInput(f"level {lam} is not at or below {x}")
        return product_of(self.degree(j) for j in range(lam + 1, x.level + 1))

    def deg_bounds(self, lam: int, l: int) -> tuple[Cardinal, Cardinal]:
        if lam > l:
            raise InvalidInput("deg_bounds needs lam <= l")
        p = self.deg(self.zero(l), lam)
        return p, p

    def subtower(self, levels: Union[LevelSequence, Sequence[int]]) -> "LazyTower":
        if not isinstance(levels, LevelSequence):
            levels = LevelSequence.of(levels)
        return LazyTower(self.degrees, self.levels.compose(levels))

    def boundary_distance(self, x: NodeRef, y: NodeRef) -> int:
        return 0 if x == y else self.meet(x, y).level

    def node_id(self, x: NodeRef) -> str:
        return str(x)

    def cone(self, depth: int, cap: int) -> list[list[NodeRef]]:
        """Nodes below the zero node at ``depth`` with base coordinates below ``cap``, by level."""
        levels: list[list[NodeRef]] = [[] for _ in range(depth + 1)]
        levels[depth] = [self.zero(depth)]
        for n in range(depth, 0, -1):
            for x in levels[n]:
                levels[n - 1].extend(self.children(x, cap))
        return levels

    def truncate(self, depth: int, cap: int) -> "ExplicitTower":
        """Explicit lower cone of the zero node at ``depth``, base coordinates below ``cap``."""
        levels = self.cone(depth, cap)
        up = {str(c): str(self.up(c)) for lv in levels[:-1] for c in lv}
        return ExplicitTower([[str(x) for x in lv] for lv in levels], up)

    def encode_node(self, x: NodeRef):
        return [x.level, list(x.address)]

    def decode_node(self, raw) -> NodeRef:
        return self.node(int(raw[0]), raw[1])


@dataclass
class TowerReport:
    is_tower: bool
    is_pruned: bool
    is_homogeneous: bool
    failures: list = field(default_factory=list)


class ExplicitTower:
    """Finite tower: ``levels[i]`` lists the node ids at level ``i``.

    ``up`` maps every non-top node to the node directly above it.  Only
    referential integrity is enforced here; :func:`validate_tower` checks
    the tower axioms.
    """

    def __init__(self, levels: Sequence[Sequence[Hashable]], up: dict, labels: Optional[dict] = None):
        self.levels = tuple(tuple(lv) for lv in levels)
        if not self.levels:
            raise InvalidInput("a tower needs at least one level")
        self.level_of: dict = {}
        for i, lv in enumerate(self.levels):
            for v in lv:
                if v in self.level_of:
                    raise InvalidInput(f"node {v!r} listed twice")
                self.level_of[v] = i
        for c, p in up.items():
            if c not in self.level_of or p not in self.level_of:
                raise InvalidInput(f"up-link {c!r} -> {p!r} names an unknown node")
        self.up = dict(up)
        self.children: dict = {v: [] for v in self.level_of}
        for lv in self.levels:
            for v in lv:
                if v in self.up:
                    self.children[self.up[v]].append(v)
        self.labels = dict(labels or {})
        self._slot = {v: i for lv in self.levels for i, v in enumerate(lv)}

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def __repr__(self) -> str:
        return f"ExplicitTower(depth={self.depth}, nodes={len(self.level_of)})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, ExplicitTower) and self.levels == other.levels
                and self.up == other.up)

    @property
    def top(self):
        return self.levels[-1][0] if len(self.levels[-1]) == 1 else None

    @property
    def nodes(self) -> list:
        return [v for lv in self.levels for v in lv]

    def level(self, x) -> int:
        try:
            return self.level_of[x]
        except KeyError:
            raise InvalidInput(f"unknown node {x!r}") from None

    def parent(self, x):
        return self.up.get(x)

    def contains(self, x) -> bool:
        return x in self.level_of

    def order_key(self, x) -> tuple:
        lev = self.level_of[x]
        return (lev, self._slot[x])

    def ancestor(self, x, level: int):
        while self.level_of[x] < level:
            if x not in self.up:
                return None
            x = self.up[x]
        return x

    def meet(self, x, y):
        for v in (x, y):
            if v not in self.level_of:
                raise InvalidInput(f"unknown node {v!r}")
        m = max(self.level_of[x], self.level_of[y])
        a, b = self.ancestor(x, m), self.ancestor(y, m)
        while a is not None and b is not None and a != b:
            a, b = self.up.get(a), self.up.get(b)
        return a if a == b else None

    def below(self, x, lam: int) -> list:
        frontier = [x]
        for _ in range(self.level_of[x] - lam):
            frontier = [c for v in frontier for c in self.children[v]]
        return frontier

    def deg(self, x, lam: int) -> Cardinal:
        if x not in self.level_of:
            raise InvalidInput(f"unknown node {x!r}")
        if lam > self.level_of[x] or lam < 0:
            raise InvalidInput(f"level {lam} is not at or below {x!r}")
        return Finite(len(self.below(x, lam)))

    def deg_bounds(self, lam: int, l: int) -> tuple[Cardinal, Cardinal]:
        if lam > l or l > self.depth:
            raise InvalidInput(f"bad level pair ({lam}, {l}) for depth {self.depth}")
        if not self.levels[l]:
            raise InvalidInput(f"level {l} is empty")
        ds = [self.deg(x, lam) for x in self.levels[l]]
        return min(ds), max(ds)

    def boundary_distance(self, x, y) -> int:
        return 0 if x == y else self.level_of[self.meet(x, y)]

    def to_json(self) -> dict:
        out = {"depth": self.depth, "levels": [list(lv) for lv in self.levels],
               "up": dict(self.up)}
        if self.labels:
            out["labels"] = self.labels
        return out

    @classmethod
    def from_json(cls, data: dict) -> "ExplicitTower":
        try:
            tower = cls(data["levels"], data.get("up", {}), data.get("labels"))
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed tower JSON: {exc}") from exc
        if "depth" in data and data["depth"] != tower.depth:
            raise InvalidInput(f"depth {data['depth']} disagrees with {len(tower.levels)} levels")
        return tower


Tower = Union[ExplicitTower, LazyTower]


def meet(T: Tower, x, y):
    return T.meet(x, y)


def deg(T: Tower, x, lam: int) -> Cardinal:
    return T.deg(x, lam)


def deg_bounds(T: Tower, lam: int, l: int) -> tuple[Cardinal, Cardinal]:
    return T.deg_bounds(lam, l)


def validate_tower(T: ExplicitTower) -> TowerReport:
    fails = []
    top = T.levels[-1]
    if len(top) != 1:
        fails.append(f"level {T.depth} has {len(top)} nodes, expected a single top")
    for v, lev in T.level_of.items():
        if lev == T.depth:
            if v in T.up:
                fails.append(f"top-level node {v!r} has an up-link")
            continue
        p = T.up.get(v)
        if p is None:
            fails.append(f"node {v!r} has no up-link")
        elif T.level_of[p] != lev + 1:
            fails.append(f"up-link {v!r} -> {p!r} skips levels")
    is_tower = not fails
    pruned = all(T.children[v] for lv in T.levels[1:] for v in lv)
    if not pruned:
        fails.extend(f"node {v!r} at level {i + 1} has no node below it"
                     for i, lv in enumerate(T.levels[1:]) for v in lv if not T.children[v])
    homogeneous = is_tower and all(
        len(set(T.deg(x, lam) for x in T.levels[l])) <= 1
        for l in range(T.depth + 1) for lam in range(l + 1))
    return TowerReport(is_tower, pruned, homogeneous, fails)


def boundary_space(T: Tower, leaves: Optional[Iterable] = None) -> FiniteUltraSpace:
    """Level-0 nodes with ``rho(x, y)`` = level of ``x ^ y``.

    Explicit towers use all leaves; lazy towers need a finite ``leaves`` sample.
    """
    if isinstance(T, LazyTower):
        if leaves is None:
            raise InvalidInput("a lazy tower boundary needs a finite sample of leaves")
        pts = list(dict.fromkeys(leaves))
        return FiniteUltraSpace.from_function(pts, T.boundary_distance)
    if not validate_tower(T).is_pruned:
        raise InvalidInput("boundary of an unpruned tower is not identified with its leaves")
    pts = list(T.levels[0]) if leaves is None else list(dict.fromkeys(leaves))
    return FiniteUltraSpace.from_function(pts, T.boundary_distance)


class TowerBoundary:
    """Metric handle on the boundary of a tower (branches = leaves)."""

    def __init__(self, tower: Tower):
        self.tower = tower

    def __eq__(self, other) -> bool:
        return isinstance(other, TowerBoundary) and self.tower == other.tower

    def __hash__(self) -> int:
        return hash(("boundary", id(self.tower) if isinstance(self.tower, ExplicitTower)
                     else hash(self.tower)))

    def distance(self, x, y) -> int:
        return self.tower.boundary_distance(x, y)

    def contains(self, x) -> bool:
        if isinstance(self.tower, LazyTower):
            return isinstance(x, NodeRef) and x.level == 0 and self.tower.contains(x)
        return self.tower.level_of.get(x) == 0

    def encode_point(self, x):
        return list(x.address) if isinstance(x, NodeRef) else x

    def decode_point(self, raw):
        if isinstance(self.tower, LazyTower):
            return self.tower.node(0, raw)
        return raw


def canonical_tower(X: FiniteUltraSpace, L: Sequence) -> tuple[ExplicitTower, dict]:
    """Tower of closed ``L[i]``-balls ordered by inclusion, and the canonical map.

    ``L`` must be strictly increasing, non-negative, with ``L[-1] >= diam X``.
    A leading ``0`` makes the leaves the points themselves.
    """
    L = [exact(r) for r in L]
    if not L:
        raise InvalidInput("level list is empty")
    if L[0] < 0 or any(b <= a for a, b in zip(L, L[1:])):
        raise InvalidInput("levels must be non-negative and strictly increasing")
    if len(X) and L[-1] < X.diameter:
        raise InvalidInput(f"top radius {L[-1]} is below the diameter {X.diameter}")
    levels, labels, owner = [], {}, []
    for i, r in enumerate(L):
        seen: dict = {}
        for p in X.points:
            if p in (owner[i] if len(owner) > i else {}):
                continue
            B = ball(X, p, r)
            key = frozenset(B)
            if key not in seen:
                nid = f"{i}:{len(seen)}"
                seen[key] = nid
                labels[nid] = {"ball": [X.encode_point(q) for q in X.points if q in B],
                               "radius": format_rational(r)}
        owner.append({q: nid for key, nid in seen.items() for q in key})
        levels.append(list(seen.values()))
    up = {}
    for i in range(len(L) - 1):
        for p, nid in owner[i].items():
            up[nid] = owner[i + 1][p]
    cmap = {p: owner[0][p] for p in X.points}
    return ExplicitTower(levels, up, labels), cmap


def level_subtower(T: Tower, L):
    """Restrict ``T`` to the levels ``L`` and return the boundary identity.

    For explicit towers ``L`` is a set of levels that must contain 0 and the
    top; the identity multi-map goes from the subtower boundary to the
    boundary of ``T``.
    """
    from .multimap import MultiMap

    if isinstance(T, LazyTower):
        seq = L if isinstance(L, LevelSequence) else LevelSequence.of(sorted(L))
        if seq[0] != 0:
            raise InvalidInput("level subtower must keep level 0 to identify boundaries")
        sub = T.subtower(seq)
        ident = MultiMap.lazy(TowerBoundary(sub), TowerBoundary(T), lambda x: (x,),
                              witness=lambda y: y)
        return sub, ident
    chosen = sorted(set(L))
    if not chosen or chosen[0] != 0:
        raise InvalidInput("level subtower must keep level 0 to identify boundaries")
    if chosen[-1] != T.depth or any(l < 0 or l > T.depth for l in chosen):
        raise InvalidInput(f"levels {chosen} are not cofinal in 0..{T.depth}")
    levels = [list(T.levels[l]) for l in chosen]
    up = {}
    for k in range(len(chosen) - 1):
        for v in T.levels[chosen[k]]:
            up[v] = T.ancestor(v, chosen[k + 1])
    labels = {v: T.labels[v] for lv in levels for v in lv if v in T.labels}
    sub = ExplicitTower(levels, up, labels)
    leaves = list(T.levels[0])
    ident = MultiMap(boundary_space(sub), boundary_space(T), [(x, x) for x in leaves])
    return sub, ident


def to_dot(T: ExplicitTower, name: str = "tower") -> str:
    lines = [f"digraph {name} {{", "  rankdir=BT;", '  node [shape=circle, fontsize=10];']
    for i, lv in enumerate(T.levels):
        ids = " ".join(f'"{v}";' for v in lv)
        lines.append(f"  {{ rank=same; {ids} }}  // level {i}")
    for lv in T.levels:
        for v in lv:
            if v in T.up:
                lines.append(f'  "{v}" -> "{T.up[v]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
