"""Words, cylinders, periodicity and Markov partitions of linear mod 1 maps."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

from orbitrep.dynamics import (
    ONE,
    ZERO,
    BranchStructure,
    Interval,
    MapSpec,
    Partition,
    branch_structure,
    lateral_itinerary,
    refine_structure,
)
from orbitrep.errors import ApproxIndeterminate, DomainError, RangeError, ResourceLimit
from orbitrep.numeric import QuadSurd, Rational, Scalar, ScalarLike, as_scalar, render

Word = tuple[int, ...]

#: Digits fed to :func:`alpha_from_periodic` are the branch offsets ``o_k``
#: (equivalently the 0-based addresses) along the right-sided orbit of 0.
#: Frozen after the grid-search roundtrip in the test-suite: the 1-based
#: address convention overshoots every reconstruction by exactly 1.
PERIODIC_DIGIT_CONVENTION = "offset"

DEFAULT_WORD_CAP = 1_000_000


def as_structure(spec: MapSpec, partition: Partition | None = None) -> BranchStructure:
    """Branch structure whose cells are the given partition.

    A plain list of intervals is accepted when it refines the monotonicity
    partition; cylinders of coarser partitions need not be intervals.
    """
    base = branch_structure(spec)
    if partition is None:
        return base
    if isinstance(partition, BranchStructure):
        return partition
    cells = list(partition)
    if not cells or cells[0].left != ZERO or cells[-1].right != ONE:
        raise DomainError("partition must cover ]0, 1[")
    cuts = [iv.right for iv in cells[:-1]]
    for a, b in zip(cells, cells[1:]):
        if a.right != b.left:
            raise DomainError("partition cells must be contiguous and ordered")
    missing = [c for c in base.breakpoints if c not in cuts]
    if missing:
        raise DomainError("partition must refine the monotonicity partition "
                          f"(missing breakpoint {render(missing[0])})")
    return refine_structure(base, cuts)


def _check_word(w: Sequence[int], m: int) -> Word:
    w = tuple(int(s) for s in w)
    if not w:
        raise DomainError("words are nonempty")
    for s in w:
        if not 1 <= s <= m:
            raise DomainError(f"symbol {s} outside alphabet 1..{m}")
    return w


def _image(bs: BranchStructure, k: int, iv: Interval) -> Interval:
    spec = bs.spec
    o = bs.offsets[k - 1]
    return Interval(spec.beta * iv.left + spec.alpha - o, spec.beta * iv.right + spec.alpha - o)


def cylinder_interval(spec: MapSpec, w: Sequence[int], partition: Partition | None = None) -> Interval | None:
    """Open interval of points whose itinerary starts with ``w``; None if empty.

    Computed by pulling the last cell back through the inverse branches.
    """
    bs = as_structure(spec, partition)
    w = _check_word(w, bs.n)
    cyl: Interval | None = bs.intervals[w[-1] - 1]
    for s in reversed(w[:-1]):
        o = bs.offsets[s - 1]
        pulled = Interval((cyl.left + (o - spec.alpha)) / spec.beta,
                          (cyl.right + (o - spec.alpha)) / spec.beta)
        cyl = pulled.intersect(bs.intervals[s - 1])
        if cyl is None:
            return None
    return cyl


def admissible_words(spec: MapSpec, k: int, partition: Partition | None = None,
                     cap: int = DEFAULT_WORD_CAP) -> list[Word]:
    """All words of length ``k`` with nonempty cylinder, in lexicographic order.

    Enumeration walks forward: for each admissible word it keeps the image of
    its cylinder under ``f^{|w|-1}``, which sits in the last cell, and extends
    by every cell that image meets.
    """
    if k < 1:
        raise DomainError("k must be at least 1")
    bs = as_structure(spec, partition)
    level: list[tuple[Word, Interval]] = [((a + 1,), iv) for a, iv in enumerate(bs.intervals)]
    for _ in range(k - 1):
        nxt = []
        for w, end in level:
            img = _image(bs, w[-1], end)
            for a, cell in enumerate(bs.intervals):
                piece = img.intersect(cell)
                if piece is not None:
                    nxt.append((w + (a + 1,), piece))
        if len(nxt) > cap:
            raise ResourceLimit(f"more than {cap} admissible words", partial=[w for w, _ in nxt])
        level = nxt
    return [w for w, _ in level]


def detect_period(points: Sequence[Scalar]) -> tuple[int, int] | None:
    """Least ``(preperiod, period)`` with ``points[p] == points[p+q]``, if any."""
    seen: dict[Scalar, int] = {}
    for j, p in enumerate(points):
        if not p.is_exact:
            raise DomainError("periodicity detection needs exact points")
        i = seen.get(p)
        if i is not None:
            return i, j - i
        seen[p] = j
    return None


def alpha_from_periodic(beta: ScalarLike, digits: Sequence[int]) -> Scalar:
    """Translation parameter of a map whose orbit of 0 returns after ``len(digits)`` steps.

    ``alpha = (x_l + x_{l-1} b + ... + x_1 b^{l-1}) / (1 + b + ... + b^{l-1})``
    """
    beta = as_scalar(beta)
    if not digits:
        raise DomainError("need at least one digit")
    num: Scalar = Rational(0)
    den: Scalar = Rational(0)
    for xi in digits:  # Horner: x_1 carries the highest power
        num = num * beta + int(xi)
        den = den * beta + 1
    alpha = num / den
    if not ZERO <= alpha < ONE:
        raise RangeError(f"digits {list(digits)} give alpha={render(alpha)} outside [0, 1[")
    return alpha


def periodic_zero_digits(spec: MapSpec, horizon: int, convention: str = PERIODIC_DIGIT_CONVENTION,
                         bs: BranchStructure | None = None) -> list[int] | None:
    """Digits of the right-sided orbit of 0 when it returns to 0 within ``horizon`` steps."""
    bs = bs or branch_structure(spec)
    rec = lateral_itinerary(spec, ZERO, "+", horizon + 1, bs=bs)
    if rec.periodicity is None or rec.periodicity[0] != 0:
        return None
    q = rec.periodicity[1]
    if convention == "offset":
        return [bs.offsets[k - 1] for k in rec.branches[:q]]
    if convention == "address":
        return list(rec.symbols[:q])
    raise ValueError(f"unknown digit convention {convention!r}")


class MarkovVerdict(enum.Enum):
    YES = "yes"
    NO = "no"
    NO_WITHIN_HORIZON = "no_within_horizon"
    INDETERMINATE = "indeterminate"


@dataclass
class MarkovReport:
    verdict: MarkovVerdict
    horizon: int
    boundary_orbit: list[Scalar] = field(default_factory=list)
    refined: BranchStructure | None = None
    transition_matrix: list[list[int]] | None = None
    certificate: str | None = None
    alpha_formula_check: dict | None = None
    orbit_periods: dict[str, list[int] | None] = field(default_factory=dict)
    markov_property_holds: bool | None = None

    @property
    def is_markov(self) -> bool:
        return self.verdict is MarkovVerdict.YES

    def to_json(self) -> dict:
        return {
            "is_markov": self.verdict.value,
            "horizon": self.horizon,
            "certificate": self.certificate,
            "orbit_periods": self.orbit_periods,
            "boundary_orbit": [render(p) for p in self.boundary_orbit],
            "refined_partition": [iv.to_json() for iv in self.refined.intervals] if self.refined else None,
            "markov_property_holds": self.markov_property_holds,
            "transition_matrix": self.transition_matrix,
            "alpha_formula_check": self.alpha_formula_check,
        }


def _alpha_not_in_beta_field(spec: MapSpec) -> bool:
    return isinstance(spec.beta, Rational) and isinstance(spec.alpha, QuadSurd)


def markov_analysis(spec: MapSpec, horizon: int) -> MarkovReport:
    """Look for a finite Markov partition generated by the boundary orbits.

    The right-sided orbit of 0 and the left-sided orbit of 1 are followed for
    ``horizon`` steps (every breakpoint maps to ``0+`` or ``1-``).  If both
    recur, the partition cut at all boundary-orbit points is checked for the
    Markov property and its 0-1 transition matrix is returned.
    """
    if not spec.exact:
        raise ApproxIndeterminate("Markov detection needs exact parameters")
    if horizon < 1:
        raise DomainError("horizon must be at least 1")
    bs = branch_structure(spec)
    orbits = {
        "0+": lateral_itinerary(spec, ZERO, "+", horizon + 1, bs=bs),
        "1-": lateral_itinerary(spec, ONE, "-", horizon + 1, bs=bs),
    }
    report = MarkovReport(MarkovVerdict.NO_WITHIN_HORIZON, horizon)
    report.orbit_periods = {k: list(r.periodicity) if r.periodicity else None for k, r in orbits.items()}

    digits = periodic_zero_digits(spec, horizon, bs=bs)
    if digits is not None:
        rebuilt = alpha_from_periodic(spec.beta, digits)
        report.alpha_formula_check = {
            "digits": digits,
            "convention": PERIODIC_DIGIT_CONVENTION,
            "reconstructed_alpha": render(rebuilt),
            "match": rebuilt == spec.alpha,
        }

    if any(r.periodicity is None for r in orbits.values()):
        if _alpha_not_in_beta_field(spec):
            report.verdict = MarkovVerdict.NO
            report.certificate = "alpha_not_in_Q(beta)"
        return report

    pts = set(bs.breakpoints)
    for r in orbits.values():
        pts.update(r.points)
    interior = sorted(p for p in pts if ZERO < p < ONE)
    report.boundary_orbit = sorted(pts)
    refined = refine_structure(bs, interior)
    report.refined = refined

    ends = set(refined.cut_points())
    holds = all(img.left in ends and img.right in ends for img in refined.images)
    report.markov_property_holds = holds
    report.transition_matrix = [
        [1 if cell in img else 0 for cell in refined.intervals] for img in refined.images
    ]
    report.verdict = MarkovVerdict.YES if holds else MarkovVerdict.NO_WITHIN_HORIZON
    return report
