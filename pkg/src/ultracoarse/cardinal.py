"""Symbolic cardinals: the naturals followed by the alephs.

Only ``Finite(n)`` and ``Aleph(k)`` exist in this universe.  Sequences of
cardinals are kept in closed form (:class:`CardinalSeq`) so that suprema
are exact instead of being guessed from finitely many probes.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Union

from .errors import DegenerateClassError, InvalidInput


@total_ordering
@dataclass(frozen=True)
class Cardinal:
    """A finite cardinal ``n`` or the aleph ``aleph_n``."""

    n: int
    infinite: bool = False

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 0:
            raise InvalidInput(f"cardinal index must be a natural number, got {self.n!r}")

    def __lt__(self, other: "Cardinal") -> bool:
        if not isinstance(other, Cardinal):
            return NotImplemented
        return (self.infinite, self.n) < (other.infinite, other.n)

    @property
    def finite(self) -> bool:
        return not self.infinite

    def __str__(self) -> str:
        return f"aleph{self.n}" if self.infinite else str(self.n)

    def __repr__(self) -> str:
        return f"Aleph({self.n})" if self.infinite else f"Finite({self.n})"


def Finite(n: int) -> Cardinal:
    return Cardinal(n, False)


def Aleph(k: int) -> Cardinal:
    return Cardinal(k, True)


OMEGA = Aleph(0)
ZERO = Finite(0)
ONE = Finite(1)


def successor(c: Cardinal) -> Cardinal:
    return Cardinal(c.n + 1, c.infinite)


def product(a: Cardinal, b: Cardinal) -> Cardinal:
    if a == ZERO or b == ZERO:
        return ZERO
    if a.finite and b.finite:
        return Finite(a.n * b.n)
    return max(a, b)


def product_of(values: Iterable[Cardinal]) -> Cardinal:
    out = ONE
    for v in values:
        out = product(out, v)
    return out


_TEXT = re.compile(r"^(?:aleph(\d+)|(\d+))$")


def parse(text: Union[str, int, Cardinal]) -> Cardinal:
    """Decode ``"3"``, ``3`` or ``"aleph1"``."""
    if isinstance(text, Cardinal):
        return text
    if isinstance(text, bool):
        raise InvalidInput(f"not a cardinal: {text!r}")
    if isinstance(text, int):
        return Finite(text)
    m = _TEXT.match(str(text).strip().lower().replace("ℵ", "aleph").replace("omega", "aleph0"))
    if not m:
        raise InvalidInput(f"not a cardinal: {text!r}")
    return Aleph(int(m.group(1))) if m.group(1) is not None else Finite(int(m.group(2)))


# Tails of closed-form sequences.

@dataclass(frozen=True)
class Constant:
    value: Cardinal


@dataclass(frozen=True)
class UnboundedFinite:
    """Strictly increasing finite tail; ``n -> Finite(prefix_max + j + 1)``."""


Tail = Union[Constant, UnboundedFinite]


@dataclass(frozen=True)
class CardinalSeq:
    """A total function N -> Cardinal given by a finite prefix and a tail rule.

    Index ``i`` (0-based) returns ``prefix[i]`` inside the prefix.  Past the
    prefix a ``Constant`` tail repeats its value and an ``UnboundedFinite``
    tail returns ``Finite(m + j + 1)`` where ``m`` is the largest finite
    prefix value (0 for an empty prefix) and ``j`` the offset past the prefix.
    """

    prefix: tuple[Cardinal, ...] = ()
    tail: Tail = Constant(ONE)
    nondecreasing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(parse(v) for v in self.prefix))
        if isinstance(self.tail, Constant):
            object.__setattr__(self, "tail", Constant(parse(self.tail.value)))
        elif not isinstance(self.tail, UnboundedFinite):
            raise InvalidInput(f"unknown tail rule {self.tail!r}")
        if self.nondecreasing:
            bad = self.first_descent()
            if bad is not None:
                raise InvalidInput(f"sequence declared non-decreasing but drops at index {bad}")

    @classmethod
    def constant(cls, value, nondecreasing: bool = False) -> "CardinalSeq":
        return cls((), Constant(parse(value)), nondecreasing)

    def _finite_prefix_max(self) -> int:
        return max((c.n for c in self.prefix if c.finite), default=0)

    def __getitem__(self, i: int) -> Cardinal:
        if i < 0:
            raise IndexError(i)
        if i < len(self.prefix):
            return self.prefix[i]
        if isinstance(self.tail, Constant):
            return self.tail.value
        return Finite(self._finite_prefix_max() + (i - len(self.prefix)) + 1)

    def first_descent(self):
        """Index ``i`` with ``self[i] > self[i+1]``, or None if monotone."""
        if isinstance(self.tail, UnboundedFinite) and any(c.infinite for c in self.prefix):
            return max(i for i, c in enumerate(self.prefix) if c.infinite)
        # past prefix + 1 the tail is monotone on its own
        for i in range(len(self.prefix) + 1):
            if self[i] > self[i + 1]:
                return i
        return None

    @property
    def stable_from(self) -> int:
        """Index from which the tail rule alone determines the values."""
        return len(self.prefix)

    def map_values(self, fn) -> list[Cardinal]:
        return [fn(c) for c in self.prefix]

    def to_json(self) -> dict:
        if isinstance(self.tail, Constant):
            tail = {"kind": "constant", "value": str(self.tail.value)}
        else:
            tail = {"kind": "unbounded_finite"}
        return {"prefix": [str(c) for c in self.prefix], "tail": tail}

    @classmethod
    def from_json(cls, data: dict, nondecreasing: bool = False) -> "CardinalSeq":
        try:
            prefix = tuple(parse(v) for v in data.get("prefix", []))
            tail = data["tail"]
            if tail["kind"] == "constant":
                t: Tail = Constant(parse(tail["value"]))
            elif tail["kind"] == "unbounded_finite":
                t = UnboundedFinite()
            else:
                raise InvalidInput(f"unknown tail kind {tail['kind']!r}")
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed cardinal sequence: {exc}") from exc
        return cls(prefix, t, nondecreasing)


def sup(seq: CardinalSeq) -> Cardinal:
    """Least upper bound of a closed-form sequence."""
    if seq.nondecreasing and seq.first_descent() is not None:
        raise InvalidInput("sup requires a non-decreasing sequence")
    prefix_sup = max(seq.prefix, default=ZERO)
    if isinstance(seq.tail, Constant):
        return max(prefix_sup, seq.tail.value)
    return max(OMEGA, prefix_sup)


def sup_of(values: Iterable[Cardinal]) -> Cardinal:
    """Supremum of a finite family; the empty family has sup 0."""
    return max(values, default=ZERO)


def cofinal_ladder(kappa: Cardinal) -> CardinalSeq:
    """Non-decreasing non-zero ``(k_n)`` with ``sup successor(k_n) == kappa``."""
    kappa = parse(kappa)
    if kappa.finite and kappa.n <= 1:
        raise DegenerateClassError(
            f"{kappa!r} is a degenerate class (empty or bounded) and has no ladder")
    if kappa.finite:
        return CardinalSeq.constant(Finite(kappa.n - 1), nondecreasing=True)
    if kappa.n == 0:
        return CardinalSeq((), UnboundedFinite(), nondecreasing=True)
    return CardinalSeq.constant(Aleph(kappa.n - 1), nondecreasing=True)


def successor_seq(seq: CardinalSeq) -> CardinalSeq:
    """The sequence ``n -> successor(seq[n])`` in closed form."""
    prefix = tuple(successor(c) for c in seq.prefix)
    if isinstance(seq.tail, Constant):
        return CardinalSeq(prefix, Constant(successor(seq.tail.value)))
    # finite values shift by one, still strictly increasing and unbounded
    return CardinalSeq(prefix, UnboundedFinite())
