"""Finite ultrametric spaces with exact distances, and sequence spaces.

Distances are ints or :class:`fractions.Fraction`; floats are refused.
Ball and covering questions are answered on the integer *rank matrix*
(distance values replaced by their index among the sorted distinct
values), which preserves every comparison and feeds the kernels.
"""
from __future__ import annotations

import random
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product as cartesian
from numbers import Rational
from typing import Hashable, Iterable, Optional, Sequence

from . import kernels
from .cardinal import CardinalSeq, Cardinal, ONE
from .errors import InvalidInput, SizeCapError

NOT_LARGE = "not large"

Point = Hashable


def exact(value) -> Rational:
    """Coerce to an exact rational; integral values come back as int."""
    if isinstance(value, bool):
        raise InvalidInput(f"not a distance: {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        q = value
    elif isinstance(value, str):
        try:
            q = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInput(f"not an exact rational: {value!r}") from exc
    else:
        raise InvalidInput(f"distances must be exact rationals, got {type(value).__name__}")
    return q.numerator if q.denominator == 1 else q


def format_rational(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class FiniteUltraSpace:
    """A finite point set with an exact distance matrix.

    Construction only checks shapes; call :func:`validate` to check the
    ultrametric axioms.
    """

    def __init__(self, points: Sequence[Point], dist: Sequence[Sequence]):
        self.points = tuple(points)
        n = len(self.points)
        if len(set(self.points)) != n:
            raise InvalidInput("duplicate point identifiers")
        if len(dist) != n or any(len(row) != n for row in dist):
            raise InvalidInput(f"distance matrix shape does not match {n} points")
        self.dist = tuple(tuple(exact(v) for v in row) for row in dist)
        self.index = {p: i for i, p in enumerate(self.points)}

    @classmethod
    def from_function(cls, points: Iterable[Point], metric) -> "FiniteUltraSpace":
        pts = list(points)
        return cls(pts, [[metric(a, b) for b in pts] for a in pts])

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return f"FiniteUltraSpace({len(self)} points)"

    def __eq__(self, other) -> bool:
        return (isinstance(other, FiniteUltraSpace) and self.points == other.points
                and self.dist == other.dist)

    def __hash__(self) -> int:
        return hash((self.points, self.dist))

    def position(self, x: Point) -> int:
        try:
            return self.index[x]
        except KeyError:
            raise InvalidInput(f"unknown point {x!r}") from None

    def distance(self, x: Point, y: Point):
        return self.dist[self.position(x)][self.position(y)]

    d = distance

    def contains(self, x: Point) -> bool:
        return x in self.index

    @cached_property
    def values(self) -> tuple:
        """Sorted distinct distance values, 0 first when the space is nonempty."""
        return tuple(sorted({v for row in self.dist for v in row}))

    @cached_property
    def ranks(self) -> list[list[int]]:
        pos = {v: i for i, v in enumerate(self.values)}
        return [[pos[v] for v in row] for row in self.dist]

    @cached_property
    def _cov(self):
        return kernels.cov_table(self.ranks, max(len(self.values) - 1, 0))

    def threshold(self, r) -> int:
        """Rank threshold of the closed radius ``r`` (``-1``: nothing fits)."""
        return bisect_right(self.values, exact(r)) - 1

    @property
    def diameter(self):
        return self.values[-1] if self.points else 0

    def realized_distances(self, positive: bool = True) -> tuple:
        return tuple(v for v in self.values if v > 0) if positive else self.values

    def encode_point(self, x):
        return x if isinstance(x, str) else str(x)

    def decode_point(self, raw):
        if raw in self.index:
            return raw
        for p in self.points:
            if str(p) == raw:
                return p
        raise InvalidInput(f"unknown point {raw!r}")

    def to_json(self) -> dict:
        return {"points": [self.encode_point(p) for p in self.points],
                "dist": [[format_rational(v) for v in row] for row in self.dist]}

    @classmethod
    def from_json(cls, data: dict) -> "FiniteUltraSpace":
        try:
            return cls(list(data["points"]), data["dist"])
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed space JSON: {exc}") from exc


@dataclass
class ValidationReport:
    valid: bool
    violations: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.valid


def validate(space: FiniteUltraSpace) -> ValidationReport:
    pts, D = space.points, space.dist
    n = len(pts)
    bad = []
    for i in range(n):
        if D[i][i] != 0:
            bad.append(("nonzero-diagonal", (pts[i],)))
        for j in range(n):
            if D[i][j] < 0:
                bad.append(("negative", (pts[i], pts[j])))
            if D[i][j] != D[j][i] and i < j:
                bad.append(("asymmetric", (pts[i], pts[j])))
            if i != j and D[i][j] == 0:
                bad.append(("zero-distance", (pts[i], pts[j])))
    for i in range(n):
        for j in range(n):
            dij = D[i][j]
            for k in range(n):
                if D[i][k] > max(dij, D[j][k]):
                    bad.append(("strong-triangle", (pts[i], pts[j], pts[k])))
    return ValidationReport(not bad, bad)


def _check_radius(r):
    r = exact(r)
    if r < 0:
        raise InvalidInput(f"radius must be non-negative, got {r}")
    return r


def ball(space: FiniteUltraSpace, x: Point, r) -> frozenset:
    i = space.position(x)
    r = _check_radius(r)
    return frozenset(p for p, v in zip(space.points, space.dist[i]) if v <= r)


def cov(space: FiniteUltraSpace, x: Point, eps, delta) -> int:
    """Least number of closed eps-balls covering the closed delta-ball at x.

    In an ultrametric space two eps-balls are equal or disjoint, so this is
    the number of distinct eps-balls met by the delta-ball.  Radius 0 is
    accepted (closed 0-balls are singletons).
    """
    i = space.position(x)
    e = space.threshold(_check_radius(eps))
    d = space.threshold(_check_radius(delta))
    return space._cov[i][e][d]


def min_cover_bruteforce(space: FiniteUltraSpace, x: Point, eps, delta) -> int:
    """Exhaustive minimum over all center sets; independent oracle for :func:`cov`."""
    if len(space) > 12:
        raise SizeCapError(f"brute-force cover is capped at 12 points, got {len(space)}")
    i = space.position(x)
    e = space.threshold(_check_radius(eps))
    d = space.threshold(_check_radius(delta))
    return kernels.min_cover(space.ranks, i, e, d)


def large_subset_radius(space: FiniteUltraSpace, L: Iterable[Point]):
    """Least eps such that eps-balls around ``L`` cover the space."""
    idx = [space.position(p) for p in L]
    if not space.points:
        return 0
    if not idx:
        return NOT_LARGE
    return max(min(space.dist[i][j] for j in idx) for i in range(len(space)))


def is_isometrically_homogeneous(space: FiniteUltraSpace) -> bool:
    n = len(space)
    if n > 8:
        raise SizeCapError(f"isometry search is capped at 8 points, got {n}")
    if n <= 1:
        return True
    D = space.dist

    def extend(image: list, used: list) -> bool:
        i = len(image)
        if i == n:
            return True
        for c in range(n):
            if used[c]:
                continue
            if all(D[i][j] == D[c][image[j]] for j in range(i)):
                image.append(c)
                used[c] = True
                if extend(image, used):
                    return True
                image.pop()
                used[c] = False
        return False

    # isometries form a group: homogeneous iff the orbit of point 0 is everything
    for y in range(n):
        used = [False] * n
        used[y] = True
        if not extend([y], used):
            return False
    return True


def subspace(handle, points: Iterable[Point]) -> FiniteUltraSpace:
    """Materialize finitely many points of any space with a ``distance`` method."""
    seen, pts = set(), []
    for p in points:
        if p not in seen:
            seen.add(p)
            pts.append(p)
    out = FiniteUltraSpace.from_function(pts, handle.distance)
    if not isinstance(handle, FiniteUltraSpace) and hasattr(handle, "encode_point"):
        # keep the parent's point encoding so certificates stay readable
        out.encode_point = handle.encode_point

        def decode(raw):
            p = handle.decode_point(raw)
            if not out.contains(p):
                raise InvalidInput(f"unknown point {raw!r}")
            return p
        out.decode_point = decode
    return out


# -- sequence spaces ---------------------------------------------------------

def strip(seq: Sequence[int]) -> tuple[int, ...]:
    out = list(seq)
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


class SequenceSpace:
    """Finitely supported sequences ``(x_1, x_2, ...)`` with ``x_n < degree(n)``.

    ``d(x, y)`` is the least ``n`` such that ``x_m == y_m`` for all ``m > n``.
    Points are stored as tuples with trailing zeros removed; the empty tuple
    is the basepoint.
    """

    def __init__(self, degrees: CardinalSeq):
        for j in range(degrees.stable_from + 1):
            if degrees[j] < ONE:
                raise InvalidInput(f"alphabet size at coordinate {j + 1} is zero")
        self.degrees = degrees

    def __repr__(self) -> str:
        return f"SequenceSpace({self.degrees.to_json()})"

    def __eq__(self, other) -> bool:
        return isinstance(other, SequenceSpace) and self.degrees == other.degrees

    def __hash__(self) -> int:
        return hash(self.degrees)

    def degree(self, n: int) -> Cardinal:
        """Alphabet size of coordinate ``n`` (1-based)."""
        return self.degrees[n - 1]

    basepoint: tuple = ()

    def contains(self, x: Sequence[int]) -> bool:
        for n, c in enumerate(x, start=1):
            if not isinstance(c, int) or c < 0:
                return False
            deg = self.degree(n)
            if deg.finite and c >= deg.n:
                return False
        return True

    def point(self, x: Sequence[int]) -> tuple[int, ...]:
        p = strip(x)
        if not self.contains(p):
            raise InvalidInput(f"{list(x)} is not a point of {self!r}")
        return p

    @staticmethod
    def distance(x: Sequence[int], y: Sequence[int]) -> int:
        n = max(len(x), len(y))
        for j in range(n, 0, -1):
            a = x[j - 1] if j <= len(x) else 0
            b = y[j - 1] if j <= len(y) else 0
            if a != b:
                return j
        return 0

    d = distance

    def alphabet(self, n: int, cap: int) -> int:
        deg = self.degree(n)
        return cap if deg.infinite else min(deg.n, cap)

    def sample(self, rng: random.Random, support: int, cap: int) -> tuple[int, ...]:
        return strip(rng.randrange(self.alphabet(j, cap)) for j in range(1, support + 1))

    def encode_point(self, x):
        return list(x)

    def decode_point(self, raw):
        if not isinstance(raw, list):
            raise InvalidInput(f"sequence points are JSON lists, got {raw!r}")
        return self.point(raw)

    def to_json(self) -> dict:
        return {"degrees": self.degrees.to_json()}


def group_chain_space(degrees: CardinalSeq) -> SequenceSpace:
    """Sequence-space model of a union of groups ``G_0 < G_1 < ...`` with
    ``|G_n / G_{n-1}| = degrees[n-1]`` and ``d(x, y) = min{n : x^-1 y in G_n}``."""
    if isinstance(degrees, dict):
        degrees = CardinalSeq.from_json(degrees)
    return SequenceSpace(degrees)


def truncate(space: SequenceSpace, level: int, alphabet_cap: int) -> FiniteUltraSpace:
    if level < 1 or alphabet_cap < 1:
        raise InvalidInput("level and alphabet cap must be at least 1")
    ranges = [range(space.alphabet(j, alphabet_cap)) for j in range(1, level + 1)]
    pts = sorted({strip(c) for c in cartesian(*ranges)}, key=lambda p: (len(p), p[::-1]))
    return FiniteUltraSpace.from_function(pts, SequenceSpace.distance)


def load_space(data: dict):
    """Decode either a finite space or a degree sequence (sequence space)."""
    if "points" in data:
        return FiniteUltraSpace.from_json(data)
    if "degrees" in data:
        return SequenceSpace(CardinalSeq.from_json(data["degrees"]))
    if "tail" in data:
        return SequenceSpace(CardinalSeq.from_json(data))
    raise InvalidInput("space JSON needs 'points'/'dist' or a degree sequence")


def random_ultrametric(rng: random.Random, n: int, max_distance: int = 8) -> FiniteUltraSpace:
    """Random ultrametric on points ``0..n-1`` with integer distances.

    Clusters are merged agglomeratively at increasing heights drawn from
    ``1..max_distance``; the distance of two points is the height at which
    their clusters first merge (the leaf-to-root structure of a random tree).
    """
    if n < 0 or max_distance < 1:
        raise InvalidInput("need n >= 0 and a positive distance bound")
    clusters = [[i] for i in range(n)]
    D = [[0] * n for _ in range(n)]
    heights = sorted(rng.sample(range(1, max_distance + 1), min(max_distance, max(n - 1, 0))))
    for k, h in enumerate(heights):
        if len(clusters) == 1:
            break
        last = k == len(heights) - 1
        size = len(clusters) if last else rng.randint(2, len(clusters))
        rng.shuffle(clusters)
        merged, rest = clusters[:size], clusters[size:]
        for a in range(len(merged)):
            for b in range(a + 1, len(merged)):
                for x in merged[a]:
                    for y in merged[b]:
                        D[x][y] = D[y][x] = h
        clusters = [sum(merged, [])] + rest
    return FiniteUltraSpace(list(range(n)), D)
