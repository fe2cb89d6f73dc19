"""Bijections between naturals and tuples of naturals.

Child indices of tower nodes are naturals; a block of coordinates with a
mix of finite and countably infinite alphabets is ranked by a mixed radix
on the finite part combined with iterated Cantor pairing on the infinite
part.  Aleph alphabets of higher index are enumerated through naturals as
well: only countably many of their members are ever addressed.
"""
from __future__ import annotations

from math import isqrt
from typing import Optional, Sequence

from .errors import InvalidInput

Radix = Optional[int]  # None: countably many symbols are addressable


def pair(a: int, b: int) -> int:
    s = a + b
    return s * (s + 1) // 2 + b


def unpair(z: int) -> tuple[int, int]:
    w = (isqrt(8 * z + 1) - 1) // 2
    b = z - w * (w + 1) // 2
    return w - b, b


def pair_tuple(values: Sequence[int]) -> int:
    """Bijection N^m -> N for m >= 1 (and the only 0-tuple -> 0)."""
    if not values:
        return 0
    out = values[-1]
    for v in reversed(values[:-1]):
        out = pair(v, out)
    return out


def unpair_tuple(z: int, m: int) -> tuple[int, ...]:
    if m == 0:
        if z != 0:
            raise InvalidInput("the empty tuple has rank 0 only")
        return ()
    out = []
    for _ in range(m - 1):
        a, z = unpair(z)
        out.append(a)
    out.append(z)
    return tuple(out)


def rank(coords: Sequence[int], radices: Sequence[Radix]) -> int:
    if len(coords) != len(radices):
        raise InvalidInput("coordinate/radix length mismatch")
    finite_value, scale, infinite = 0, 1, []
    for c, r in zip(coords, radices):
        if c < 0:
            raise InvalidInput(f"negative coordinate {c}")
        if r is None:
            infinite.append(c)
        else:
            if c >= r:
                raise InvalidInput(f"coordinate {c} outside alphabet of size {r}")
            finite_value += c * scale
            scale *= r
    return scale * pair_tuple(infinite) + finite_value


def unrank(index: int, radices: Sequence[Radix]) -> tuple[int, ...]:
    if index < 0:
        raise InvalidInput(f"negative index {index}")
    scale = 1
    for r in radices:
        if r is not None:
            scale *= r
    high, low = divmod(index, scale)
    n_inf = sum(r is None for r in radices)
    infinite = list(unpair_tuple(high, n_inf)) if n_inf else []
    if not n_inf and high:
        raise InvalidInput(f"index {index} outside a block of size {scale}")
    out = []
    for r in radices:
        if r is None:
            out.append(infinite.pop(0))
        else:
            low, c = divmod(low, r)
            out.append(c)
    return tuple(out)
