"""Truncated generalized orbits and orbit equivalence.

The generalized orbit of ``x0`` is every ``y`` with ``f^n(x0) == f^m(y)``.  It
is infinite, so :func:`generalized_orbit` keeps ``F`` forward steps and
``P`` levels of inverse branches above each forward point.  Points live in
``[0, 1[`` and are deduplicated by exact equality only.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np

from orbitrep.dynamics import ONE, ZERO, BranchStructure, MapSpec, apply_map, branch_structure
from orbitrep.errors import BasisMismatch, DomainError
from orbitrep.numeric import Scalar, ScalarLike, as_scalar, render
from orbitrep.symbolic import detect_period

NOT_IN_IMAGE = -1
TRUNCATED = -2


@dataclass(eq=False)
class OrbitBasis:
    """Indexed finite set of orbit points; index ``i`` is the basis vector ``|points[i]>``.

    Besides the points this carries, per point, the index of ``f(y)`` and the
    index of each branch preimage (``NOT_IN_IMAGE`` or ``TRUNCATED`` when
    there is none in the basis); the operator layer is built from these tables.
    """

    spec: MapSpec
    points: tuple[Scalar, ...]
    provenance: tuple[tuple[int, int], ...]
    root: Scalar
    params: tuple[int, int, int]
    truncated: bool = False
    bs: BranchStructure = field(default=None, repr=False)
    kind: str = "orbit"

    def __post_init__(self):
        if self.bs is None:
            self.bs = branch_structure(self.spec)
        self.index = {p: i for i, p in enumerate(self.points)}
        if len(self.index) != len(self.points):
            raise DomainError("basis points must be distinct")

    def __len__(self):
        return len(self.points)

    def __contains__(self, y) -> bool:
        return as_scalar(y) in self.index

    def tables(self, bs: BranchStructure | None = None) -> "BranchTables":
        """Branch, image and preimage indices of every point for ``bs`` (default: monotone branches)."""
        bs = self.bs if bs is None else bs
        if bs.spec != self.spec:
            raise BasisMismatch("branch structure and basis come from different maps")
        cache = self.__dict__.setdefault("_tables", {})
        key = id(bs)
        if key not in cache:
            cache[key] = (bs, _branch_tables(self.points, self.index, bs))
        return cache[key][1]

    @property
    def branch_of(self) -> np.ndarray:
        """1-based half-open branch of every point."""
        return self.tables().branch_of

    @property
    def image_index(self) -> np.ndarray:
        return self.tables().image_index

    @property
    def preimage_index(self) -> np.ndarray:
        """Array of shape (n_branches, n_points)."""
        return self.tables().preimage_index

    @property
    def image_in_basis(self) -> np.ndarray:
        return self.image_index >= 0

    @property
    def all_preimages_in_basis(self) -> np.ndarray:
        return (self.preimage_index != TRUNCATED).all(axis=0)

    @property
    def core(self) -> np.ndarray:
        return self.image_in_basis & self.all_preimages_in_basis

    def to_json(self) -> dict:
        img, pre = self.image_in_basis, self.all_preimages_in_basis
        return {
            "map": self.spec.to_json(),
            "root": render(self.root),
            "params": {"forward": self.params[0], "depth": self.params[1], "max_points": self.params[2]},
            "truncated": self.truncated,
            "size": len(self.points),
            "points": [
                {
                    "index": i,
                    "point": render(p),
                    "approx": float(p),
                    "forward_steps": prov[0],
                    "preimage_depth": prov[1],
                    "image_in_basis": bool(img[i]),
                    "all_preimages_in_basis": bool(pre[i]),
                }
                for i, (p, prov) in enumerate(zip(self.points, self.provenance))
            ],
        }


@dataclass(frozen=True)
class BranchTables:
    branch_of: np.ndarray
    image_index: np.ndarray
    preimage_index: np.ndarray


def _branch_tables(points, index, bs: BranchStructure) -> BranchTables:
    n = len(points)
    branch_of = np.empty(n, dtype=np.int64)
    image = np.full(n, TRUNCATED, dtype=np.int64)
    pre = np.full((bs.n, n), NOT_IN_IMAGE, dtype=np.int64)
    for i, y in enumerate(points):
        k = bs.branch_index(y)
        branch_of[i] = k
        image[i] = index.get(bs.forward(k, y), TRUNCATED)
        for j in range(1, bs.n + 1):
            if bs.image_contains(j, y):
                pre[j - 1, i] = index.get(bs.inverse(j, y), TRUNCATED)
    return BranchTables(branch_of, image, pre)


def generalized_orbit(spec: MapSpec, x0: ScalarLike, forward: int, depth: int,
                      max_points: int = 5000) -> OrbitBasis:
    """Forward orbit ``x0 .. f^F(x0)`` plus breadth-first preimages to depth ``P``.

    Branches are explored in ascending order, so the basis order is
    reproducible.  Growth stops at ``max_points``; the basis then has
    ``truncated=True``.  ``x0 = 1`` is replaced by ``f(1)``, since 1 is never
    a basis point.
    """
    if not spec.exact:
        raise DomainError("orbit construction needs exact parameters (no epsilon merging)")
    if forward < 0 or depth < 0 or max_points < 1:
        raise DomainError("need forward >= 0, depth >= 0, max_points >= 1")
    root = as_scalar(x0)
    if not ZERO <= root <= ONE:
        raise DomainError(f"x0={root} outside [0, 1]")
    bs = branch_structure(spec)
    points: list[Scalar] = []
    prov: list[tuple[int, int]] = []
    seen: set[Scalar] = set()
    truncated = False

    def add(y: Scalar, p: tuple[int, int]) -> bool:
        nonlocal truncated
        if y in seen:
            return False
        if len(points) >= max_points:
            truncated = True
            return False
        seen.add(y)
        points.append(y)
        prov.append(p)
        return True

    y, start = root, 0
    if root == ONE:
        y, start = apply_map(spec, root), 1
    fwd = []
    last = max(forward, start)
    for j in range(start, last + 1):
        if add(y, (j, 0)):
            fwd.append((y, j))
        if j < last:
            y = apply_map(spec, y)

    frontier = deque((p, j) for p, j in fwd)
    for d in range(1, depth + 1):
        nxt = deque()
        for y, j in frontier:
            for k in range(1, bs.n + 1):
                if bs.image_contains(k, y):
                    z = bs.inverse(k, y)
                    if add(z, (j, d)):
                        nxt.append((z, j))
        frontier = nxt
        if truncated:
            break
    return OrbitBasis(spec, tuple(points), tuple(prov), root, (forward, depth, max_points), truncated, bs)


def basis_from_points(spec: MapSpec, points: Sequence[ScalarLike], root: ScalarLike | None = None) -> OrbitBasis:
    """A basis made of arbitrary distinct exact points (used for adversarial checks)."""
    pts = tuple(as_scalar(p) for p in points)
    if not pts:
        raise DomainError("empty basis")
    for p in pts:
        if not p.is_exact or not ZERO <= p < ONE:
            raise DomainError(f"basis point {p} must be exact and in [0, 1[")
    return OrbitBasis(spec, pts, tuple((0, 0) for _ in pts), pts[0] if root is None else as_scalar(root),
                      (0, 0, len(pts)), kind="points")


def merge_bases(a: OrbitBasis, b: OrbitBasis) -> OrbitBasis:
    if a.spec != b.spec:
        raise DomainError("bases belong to different maps")
    pts = list(a.points)
    prov = list(a.provenance)
    for p, pv in zip(b.points, b.provenance):
        if p not in a.index:
            pts.append(p)
            prov.append(pv)
    return OrbitBasis(a.spec, tuple(pts), tuple(prov), a.root,
                      (max(a.params[0], b.params[0]), max(a.params[1], b.params[1]), len(pts)),
                      a.truncated or b.truncated, a.bs, kind="merged")


# -- orbit equivalence -----------------------------------------------------------

class Verdict(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass
class Equivalence:
    verdict: Verdict
    n: int | None = None
    m: int | None = None
    certificate: dict | None = None

    def to_json(self) -> dict:
        out: dict = {"verdict": self.verdict.value}
        if self.verdict is Verdict.YES:
            out["witness"] = {"n": self.n, "m": self.m}
        if self.certificate is not None:
            out["certificate"] = self.certificate
        return out


def forward_orbit(spec: MapSpec, x: ScalarLike, steps: int) -> list[Scalar]:
    pts = [as_scalar(x)]
    for _ in range(steps):
        pts.append(apply_map(spec, pts[-1]))
    return pts


def orbits_equivalent(spec: MapSpec, x: ScalarLike, y: ScalarLike, budget: int) -> Equivalence:
    """Decide ``f^n(x) == f^m(y)`` for some ``n, m``.

    Yes comes with the least witness in ``(n+m, n)`` order.  No needs beta > 1
    and both forward orbits visibly eventually periodic within ``budget``: then
    the two cycles are disjoint and no later coincidence is possible.
    """
    if not spec.exact:
        raise DomainError("orbit equivalence needs exact parameters")
    xs = forward_orbit(spec, x, budget)
    ys = forward_orbit(spec, y, budget)
    first_m: dict[Scalar, int] = {}
    for m, p in enumerate(ys):
        first_m.setdefault(p, m)
    best = None
    for n, p in enumerate(xs):
        m = first_m.get(p)
        if m is not None and (best is None or (n + m, n) < (best[0] + best[1], best[0])):
            best = (n, m)
    if best is not None:
        return Equivalence(Verdict.YES, *best)
    if not spec.beta > 1:
        return Equivalence(Verdict.UNKNOWN)
    px, py = detect_period(xs), detect_period(ys)
    if px is None or py is None:
        return Equivalence(Verdict.UNKNOWN)
    cx = xs[px[0]:px[0] + px[1]]
    cy = ys[py[0]:py[0] + py[1]]
    return Equivalence(Verdict.NO, certificate={
        "x_cycle": [render(p) for p in sorted(cx)],
        "y_cycle": [render(p) for p in sorted(cy)],
        "x_periodicity": list(px),
        "y_periodicity": list(py),
    })


# -- graph export ------------------------------------------------------------------

@dataclass
class OrbitGraph:
    nodes: list[tuple[int, str, float]]
    edges: list[tuple[int, int]]

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(i for i, _, _ in self.nodes)
        g.add_edges_from(self.edges)
        return g

    def to_dict(self) -> dict:
        return {
            "nodes": [{"index": i, "label": lab, "approx": val} for i, lab, val in self.nodes],
            "edges": [list(e) for e in self.edges],
        }

    def to_dot(self, name: str = "orbit") -> str:
        lines = [f"digraph {name} {{"]
        for i, lab, val in self.nodes:
            lines.append(f'  n{i} [label="{lab}\\n{val:.6f}"];')
        for a, b in self.edges:
            lines.append(f"  n{a} -> n{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def export_orbit_graph(basis: OrbitBasis) -> OrbitGraph:
    """One node per point and an edge ``y -> f(y)`` whenever both are members."""
    nodes = [(i, render(p), float(p)) for i, p in enumerate(basis.points)]
    edges = [(i, int(j)) for i, j in enumerate(basis.image_index) if j >= 0]
    return OrbitGraph(nodes, edges)
