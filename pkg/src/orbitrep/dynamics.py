"""The map x -> beta*x + alpha (mod 1): partition, branches, addresses, itineraries.

Two membership conventions live side by side here.

* Symbolic questions (addresses, itineraries, cylinders) use *open* intervals.
  A point on a partition endpoint has no address and raises
  :class:`~orbitrep.errors.BoundaryHit`.
* Branch bookkeeping for the map itself uses the half-open cells
  ``[c_{k-1}, c_k[``, which is exactly what reduction mod 1 does: the
  breakpoint ``c_k`` is sent to 0 by branch ``k+1``.  :meth:`BranchStructure.branch_index`,
  :meth:`BranchStructure.image_contains` and :func:`branch_inverse` follow
  this convention, which keeps every point of ``[0, 1[`` inside exactly one
  branch.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import Sequence, Union

from orbitrep.errors import ApproxIndeterminate, BoundaryHit, DomainError
from orbitrep.numeric import (
    Rational,
    Scalar,
    ScalarLike,
    as_scalar,
    mod1,
    render,
    same_field,
    scalar_floor,
)

ZERO = Rational(0)
ONE = Rational(1)


@dataclass(frozen=True)
class Interval:
    """Interval with exact endpoints ``left < right``; open unless stated otherwise."""

    left: Scalar
    right: Scalar

    def contains(self, x: ScalarLike) -> bool:
        return self.left < x < self.right

    def contains_halfopen(self, x: ScalarLike) -> bool:
        return self.left <= x < self.right

    @property
    def length(self) -> Scalar:
        return self.right - self.left

    def intersect(self, other: Interval) -> Interval | None:
        lo = self.left if self.left >= other.left else other.left
        hi = self.right if self.right <= other.right else other.right
        return Interval(lo, hi) if lo < hi else None

    def __contains__(self, other: Interval) -> bool:
        return self.left <= other.left and other.right <= self.right

    def to_json(self) -> list[str]:
        return [render(self.left), render(self.right)]

    def __str__(self):
        return f"]{render(self.left)}, {render(self.right)}["


@dataclass(frozen=True)
class MapSpec:
    beta: Scalar
    alpha: Scalar

    def __post_init__(self):
        object.__setattr__(self, "beta", as_scalar(self.beta))
        object.__setattr__(self, "alpha", as_scalar(self.alpha))
        try:
            ok = self.beta >= 1 and ZERO <= self.alpha < 1
        except ApproxIndeterminate as exc:
            raise DomainError(f"parameters too close to the admissible boundary: {exc}") from exc
        if not ok:
            raise DomainError(f"need beta >= 1 and 0 <= alpha < 1, got beta={self.beta}, alpha={self.alpha}")

    @property
    def field(self) -> int | None:
        return same_field(self.beta, self.alpha)

    @property
    def exact(self) -> bool:
        return self.field is not None

    def to_json(self) -> dict:
        return {"beta": render(self.beta), "alpha": render(self.alpha)}


@dataclass(frozen=True, eq=False)
class BranchStructure:
    """Monotonicity data of ``f`` (or of a refinement of its partition).

    ``breakpoints`` are the interior cut points; ``intervals[k]`` is the open
    cell between consecutive cut points; on that cell ``f(x) = beta*x + alpha
    - offsets[k]`` and ``images[k]`` is the image of the cell.  For a refined
    structure ``parents[k]`` names the monotonicity branch (0-based) that
    contains cell ``k``.
    """

    spec: MapSpec
    breakpoints: tuple[Scalar, ...]
    intervals: tuple[Interval, ...]
    offsets: tuple[int, ...]
    images: tuple[Interval, ...]
    parents: tuple[int, ...]
    refined: bool = False
    _inv_beta: Scalar = field(default=None, repr=False)
    _fwd_shift: tuple = field(default=(), repr=False)
    _inv_shift: tuple = field(default=(), repr=False)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "_inv_beta", ONE / self.spec.beta)
        set_(self, "_fwd_shift", tuple(self.spec.alpha - o for o in self.offsets))
        set_(self, "_inv_shift", tuple(o - self.spec.alpha for o in self.offsets))

    @property
    def n(self) -> int:
        return len(self.intervals)

    def branch_index(self, x: Scalar) -> int:
        """1-based index of the half-open cell ``[c_{k-1}, c_k[`` holding ``x``."""
        return bisect_right(self.breakpoints, x) + 1

    def image_contains(self, k: int, y: Scalar) -> bool:
        return self.images[k - 1].contains_halfopen(y)

    def forward(self, k: int, x: Scalar) -> Scalar:
        return self.spec.beta * x + self._fwd_shift[k - 1]

    def inverse(self, k: int, y: Scalar) -> Scalar:
        return (y + self._inv_shift[k - 1]) * self._inv_beta

    def cut_points(self) -> tuple[Scalar, ...]:
        return (ZERO, *self.breakpoints, ONE)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "breakpoints": [render(c) for c in self.breakpoints],
            "intervals": [iv.to_json() for iv in self.intervals],
            "offsets": list(self.offsets),
            "images": [iv.to_json() for iv in self.images],
        }


Partition = Union[BranchStructure, Sequence[Interval]]


def _build_structure(spec: MapSpec, cuts: Sequence[Scalar], parent_cuts: Sequence[Scalar],
                     parent_offsets: Sequence[int], refined: bool) -> BranchStructure:
    points = (ZERO, *cuts, ONE)
    intervals, offsets, images, parents = [], [], [], []
    same = tuple(cuts) == tuple(parent_cuts) if refined else True
    for idx, (left, right) in enumerate(zip(points, points[1:])):
        # unrefined cells are their own parents; this also avoids ordering approximate cuts
        k = idx if same else bisect_right(parent_cuts, left)
        o = parent_offsets[k]
        intervals.append(Interval(left, right))
        offsets.append(o)
        parents.append(k)
        lo = spec.beta * left + spec.alpha - o
        hi = spec.beta * right + spec.alpha - o
        images.append(Interval(lo, hi))
    return BranchStructure(spec, tuple(cuts), tuple(intervals), tuple(offsets),
                           tuple(images), tuple(parents), refined)


def branch_structure(spec: MapSpec) -> BranchStructure:
    """Breakpoints ``(k - alpha)/beta`` for integers ``alpha < k < beta + alpha``."""
    top = spec.beta + spec.alpha
    fl = scalar_floor(top)
    k_max = fl - 1 if top == fl else fl
    breakpoints = tuple((k - spec.alpha) / spec.beta for k in range(1, k_max + 1))
    offsets = tuple(range(k_max + 1))
    return _build_structure(spec, breakpoints, breakpoints, offsets, refined=False)


def refine_structure(bs: BranchStructure, points: Sequence[Scalar]) -> BranchStructure:
    """Split the cells of ``bs`` at the extra interior ``points``."""
    base = branch_structure(bs.spec) if bs.refined else bs
    cuts = list(bs.breakpoints)
    for p in points:
        p = as_scalar(p)
        if not ZERO < p < ONE:
            continue
        i = bisect_left(cuts, p)
        if i < len(cuts) and cuts[i] == p:
            continue
        cuts.insert(i, p)
    if len(cuts) == len(bs.breakpoints):
        return bs
    return _build_structure(bs.spec, cuts, base.breakpoints, base.offsets, refined=True)


def integer_part_branch_count(spec: MapSpec) -> int:
    """Branch count from the integer part of beta (valid when beta + alpha <= [beta] + 1)."""
    fl = scalar_floor(spec.beta)
    if spec.alpha == 0 and spec.beta == fl:
        return fl
    return fl + 1


def apply_map(spec: MapSpec, x: ScalarLike) -> Scalar:
    x = as_scalar(x)
    if not ZERO <= x <= ONE:
        raise DomainError(f"x={x} outside [0, 1]")
    return mod1(spec.beta * x + spec.alpha)


def branch_inverse(bs: BranchStructure, k: int, y: ScalarLike) -> Scalar | None:
    """Preimage of ``y`` under branch ``k``, or None when ``y`` is not in its image."""
    if not 1 <= k <= bs.n:
        raise DomainError(f"branch {k} out of range 1..{bs.n}")
    y = as_scalar(y)
    if not bs.image_contains(k, y):
        return None
    return bs.inverse(k, y)


# -- addresses and itineraries -------------------------------------------------

def _as_intervals(partition: Partition) -> Sequence[Interval]:
    return partition.intervals if isinstance(partition, BranchStructure) else partition


def partition_from_points(points: Sequence[ScalarLike]) -> list[Interval]:
    """Open cells of ]0, 1[ cut at the given interior points."""
    cuts = sorted({as_scalar(p) for p in points if ZERO < as_scalar(p) < ONE})
    pts = [ZERO, *cuts, ONE]
    return [Interval(a, b) for a, b in zip(pts, pts[1:])]


def address(partition: Partition, x: ScalarLike) -> int:
    """1-based symbol of the open cell containing ``x``; BoundaryHit on endpoints."""
    x = as_scalar(x)
    cells = _as_intervals(partition)
    i = bisect_right(cells, x, key=lambda iv: iv.left) - 1
    if i < 0 or x == cells[i].left or not x < cells[i].right:
        raise BoundaryHit(x)
    return i + 1


def _lateral_address(cells: Sequence[Interval], x: Scalar, side: str) -> int:
    if side == "+":
        i = bisect_right(cells, x, key=lambda iv: iv.left) - 1
    else:
        i = bisect_left(cells, x, key=lambda iv: iv.right)
    if not 0 <= i < len(cells):
        raise DomainError(f"no cell on the {side} side of {x}")
    return i + 1


@dataclass(frozen=True)
class ItineraryRecord:
    symbols: tuple[int, ...]
    length: int
    periodicity: tuple[int, int] | None
    points: tuple[Scalar, ...] = ()
    branches: tuple[int, ...] = ()
    label: str | None = None

    def to_json(self) -> dict:
        out = {
            "symbols": list(self.symbols),
            "length": self.length,
            "periodicity": list(self.periodicity) if self.periodicity else None,
            "points": [render(p) for p in self.points],
        }
        if self.label is not None:
            out = {"label": self.label, **out}
        return out


def _period_of(points: Sequence[Scalar]) -> tuple[int, int] | None:
    from orbitrep.symbolic import detect_period

    if not all(p.is_exact for p in points):
        return None
    return detect_period(points)


def itinerary(spec: MapSpec, x: ScalarLike, length: int, partition: Partition | None = None) -> ItineraryRecord:
    """Addresses of ``x, f(x), ..., f^{length-1}(x)``.

    Raises BoundaryHit (with ``step``) when an iterate lands on a partition
    endpoint, i.e. when ``x`` is outside the itinerary domain.
    """
    if length < 1:
        raise DomainError("length must be at least 1")
    cells = _as_intervals(partition if partition is not None else branch_structure(spec))
    x = as_scalar(x)
    points, symbols = [], []
    for j in range(length):
        if j:
            x = apply_map(spec, x)
        points.append(x)
        try:
            symbols.append(address(cells, x))
        except BoundaryHit as exc:
            raise BoundaryHit(x, step=j) from exc
    return ItineraryRecord(tuple(symbols), length, _period_of(points), tuple(points))


def lateral_itinerary(spec: MapSpec, x: ScalarLike, side: str, length: int,
                      partition: Partition | None = None, bs: BranchStructure | None = None,
                      label: str | None = None) -> ItineraryRecord:
    """Itinerary of the one-sided point ``x+`` or ``x-``.

    Whenever the orbit sits on an endpoint the cell on ``side`` is used, and
    the branch formula of that cell is applied without reducing mod 1, so the
    orbit of ``1-`` may stay at 1.  Increasing branches keep the side fixed.
    """
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    if not spec.exact:
        raise DomainError("lateral itineraries need exact parameters")
    bs = bs or branch_structure(spec)
    cells = _as_intervals(partition if partition is not None else bs)
    x = as_scalar(x)
    points, symbols, branches = [], [], []
    for j in range(length):
        points.append(x)
        symbols.append(_lateral_address(cells, x, side))
        k = _lateral_address(bs.intervals, x, side)
        branches.append(k)
        x = bs.forward(k, x)
    return ItineraryRecord(tuple(symbols), length, _period_of(points), tuple(points),
                           tuple(branches), label)


def kneading_data(spec: MapSpec, length: int, partition: Partition | None = None) -> list[ItineraryRecord]:
    """Itineraries of ``f(c_j+)`` and ``f(c_j-)`` for every breakpoint, then of ``0+`` and ``1-``."""
    if not spec.exact:
        raise DomainError("kneading data needs exact parameters")
    bs = branch_structure(spec)
    records = []
    for j, c in enumerate(bs.breakpoints, start=1):
        right = bs.forward(j + 1, c)
        left = bs.forward(j, c)
        records.append(lateral_itinerary(spec, right, "+", length, partition, bs, label=f"f(c{j}+)"))
        records.append(lateral_itinerary(spec, left, "-", length, partition, bs, label=f"f(c{j}-)"))
    records.append(lateral_itinerary(spec, ZERO, "+", length, partition, bs, label="0"))
    records.append(lateral_itinerary(spec, ONE, "-", length, partition, bs, label="1"))
    return records
