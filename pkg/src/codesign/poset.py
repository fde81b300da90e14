"""Products of extended-nonnegative-real chains and antichains of minimal points.

Points are plain tuples of floats. A :class:`PosetDescriptor` fixes the
dimension, per-coordinate direction (``+1`` increasing, ``-1`` reversed) and
optional names/units. Upper sets are represented by the :class:`Antichain` of
their minimal elements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

Point = tuple[float, ...]

INCREASING = 1
DECREASING = -1


@dataclass(frozen=True)
class PosetDescriptor:
    dimension: int
    directions: tuple[int, ...] = ()
    names: tuple[str, ...] = ()
    units: tuple[str, ...] = ()

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("poset dimension must be positive")
        if not self.directions:
            object.__setattr__(self, "directions", (INCREASING,) * self.dimension)
        if len(self.directions) != self.dimension:
            raise ValueError("one direction per coordinate is required")
        if any(d not in (INCREASING, DECREASING) for d in self.directions):
            raise ValueError("directions must be +1 or -1")
        if self.names and len(self.names) != self.dimension:
            raise ValueError("names must match dimension")
        if self.units and len(self.units) != self.dimension:
            raise ValueError("units must match dimension")

    @classmethod
    def chains(cls, names: Sequence[str], units: Sequence[str] | None = None) -> "PosetDescriptor":
        """Product of increasing chains, one per name."""
        return cls(len(names), (INCREASING,) * len(names), tuple(names),
                   tuple(units) if units else ())

    def opposite(self) -> "PosetDescriptor":
        return PosetDescriptor(self.dimension, tuple(-d for d in self.directions),
                               self.names, self.units)

    def product(self, other: "PosetDescriptor") -> "PosetDescriptor":
        names = self.names + other.names if self.names and other.names else ()
        units = self.units + other.units if self.units and other.units else ()
        return PosetDescriptor(self.dimension + other.dimension,
                               self.directions + other.directions, names, units)

    def order_key(self) -> tuple[int, tuple[int, ...]]:
        """What must agree for two descriptors to be composable (labels ignored)."""
        return self.dimension, self.directions

    def compatible(self, other: "PosetDescriptor") -> bool:
        return self.order_key() == other.order_key()

    def check(self, x: Sequence[float]) -> Point:
        """Validate ``x`` against this poset and return it as a float tuple."""
        if len(x) != self.dimension:
            raise ValueError(f"point {tuple(x)!r} has {len(x)} coordinates, expected {self.dimension}")
        p = tuple(float(v) for v in x)
        for v in p:
            if math.isnan(v) or v == -math.inf:
                raise ValueError(f"invalid coordinate {v!r} in {p!r}")
        return p

    def top(self) -> Point:
        return tuple(math.inf if d == INCREASING else 0.0 for d in self.directions)

    def bottom(self) -> Point:
        return tuple(0.0 if d == INCREASING else math.inf for d in self.directions)


def _leq(directions: tuple[int, ...], a: Point, b: Point) -> bool:
    for d, x, y in zip(directions, a, b):
        if d == INCREASING:
            if x > y:
                return False
        elif x < y:
            return False
    return True


def leq(desc: PosetDescriptor, a: Sequence[float], b: Sequence[float]) -> bool:
    """``a <= b`` in the product order given by ``desc``."""
    return _leq(desc.directions, desc.check(a), desc.check(b))


def join(desc: PosetDescriptor, a: Point, b: Point) -> Point:
    """Component-wise least upper bound."""
    return tuple(max(x, y) if d == INCREASING else min(x, y)
                 for d, x, y in zip(desc.directions, a, b))


def minimal_elements(desc: PosetDescriptor, points: Iterable[Point]) -> tuple[Point, ...]:
    """Minimal elements of a finite point set, deduplicated, in sorted order."""
    # sorting by a direction-adjusted key puts every dominator before what it dominates
    key = lambda p: tuple(v if d == INCREASING else -v for d, v in zip(desc.directions, p))
    out: list[Point] = []
    for p in sorted(set(points), key=key):
        if not any(_leq(desc.directions, m, p) for m in out):
            out.append(p)
    return tuple(out)


@dataclass(frozen=True)
class Antichain:
    """Finite antichain; stands for the upper set it generates.

    The empty antichain is the empty upper set (nothing is feasible).
    """

    descriptor: PosetDescriptor
    points: tuple[Point, ...] = field(default=())

    def __post_init__(self):
        pts = tuple(self.descriptor.check(p) for p in self.points)
        object.__setattr__(self, "points", minimal_elements(self.descriptor, pts))

    @classmethod
    def empty(cls, desc: PosetDescriptor) -> "Antichain":
        return cls(desc, ())

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __bool__(self) -> bool:
        return bool(self.points)

    def __contains__(self, x) -> bool:
        # membership of the represented upper set, not of the point list
        return antichain_dominates(self, x)

    def same_set(self, other: "Antichain", tol: float = 0.0) -> bool:
        """Equality of generated upper sets, optionally up to ``tol`` relative per coordinate."""
        if len(self) != len(other):
            return False
        if tol == 0.0:
            return set(self.points) == set(other.points)
        return all(any(_close(p, q, tol) for q in other.points) for p in self.points)


def _close(p: Point, q: Point, tol: float) -> bool:
    for a, b in zip(p, q):
        if math.isinf(a) or math.isinf(b):
            if a != b:
                return False
        elif abs(a - b) > tol * max(1.0, abs(a), abs(b)):
            return False
    return True


def _check_same(a: Antichain, b: Antichain) -> None:
    if not a.descriptor.compatible(b.descriptor):
        raise ValueError("antichains live in different posets")


def antichain_insert(ac: Antichain, x: Sequence[float]) -> Antichain:
    p = ac.descriptor.check(x)
    dirs = ac.descriptor.directions
    if any(_leq(dirs, m, p) for m in ac.points):
        return ac
    kept = tuple(m for m in ac.points if not _leq(dirs, p, m))
    return Antichain(ac.descriptor, kept + (p,))


def antichain_dominates(ac: Antichain, x: Sequence[float]) -> bool:
    """True iff ``x`` lies in the upper set generated by ``ac``."""
    p = ac.descriptor.check(x)
    dirs = ac.descriptor.directions
    return any(_leq(dirs, m, p) for m in ac.points)


def antichain_union(a: Antichain, b: Antichain) -> Antichain:
    _check_same(a, b)
    return Antichain(a.descriptor, a.points + b.points)


def antichain_intersection(a: Antichain, b: Antichain) -> Antichain:
    _check_same(a, b)
    desc = a.descriptor
    return Antichain(desc, tuple(join(desc, p, q) for p in a.points for q in b.points))
