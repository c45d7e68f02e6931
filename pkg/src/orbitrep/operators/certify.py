"""Strong convergence of ``M_k`` to ``U``, commutant certificates and the spectral view of orbit equivalence."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import networkx as nx
import numpy as np

from orbitrep.dynamics import ONE, ZERO, BranchStructure, MapSpec, apply_map
from orbitrep.errors import DomainError
from orbitrep.numeric import MP, Scalar, ScalarLike, as_scalar, render
from orbitrep.operators.build import Chooser, _structure, build_Mk, smallest_index
from orbitrep.orbit import OrbitBasis, Verdict, forward_orbit, generalized_orbit, orbits_equivalent

#: relative slack allowed on the analytic bound (float evaluation only)
BOUND_SLACK = 1 + MP.mpf(10) ** -10

TestVector = Mapping[int, complex]


def default_test_vectors(basis: OrbitBasis, count: int = 10) -> list[int]:
    """Indices of the first ``count`` points whose image and preimages are all in the basis."""
    return [int(i) for i in np.nonzero(basis.core)[0][:count]]


def _as_vector(v) -> dict[int, object]:
    if isinstance(v, (int, np.integer)):
        return {int(v): 1}
    return {int(k): c for k, c in dict(v).items()}


@dataclass
class MkRow:
    k: int
    residuals: list
    bound: object
    unrepresented_words: int

    @property
    def max_residual(self):
        return max(self.residuals)

    @property
    def within_bound(self) -> bool:
        return all(r <= b * BOUND_SLACK for r, b in zip(self.residuals, self.bound))

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "max_residual": MP.nstr(self.max_residual, 20),
            "residuals": [MP.nstr(r, 20) for r in self.residuals],
            "bounds": [MP.nstr(b, 20) for b in self.bound],
            "within_bound": self.within_bound,
            "unrepresented_words": self.unrepresented_words,
        }


@dataclass
class MkReport:
    rows: list[MkRow]
    test_vectors: list[dict[int, object]]

    @property
    def within_bound(self) -> bool:
        return all(r.within_bound for r in self.rows)

    @property
    def max_nonincreasing(self) -> bool:
        m = [r.max_residual for r in self.rows]
        return all(b <= a for a, b in zip(m, m[1:]))

    def to_json(self) -> dict:
        return {
            "precision_bits": MP.prec,
            "test_vectors": [{str(k): str(c) for k, c in v.items()} for v in self.test_vectors],
            "within_bound": self.within_bound,
            "max_residual_nonincreasing": self.max_nonincreasing,
            "rows": [r.to_json() for r in self.rows],
        }


def mk_convergence(bs: BranchStructure | None, basis: OrbitBasis, k_max: int,
                   test_vectors: Sequence[int | TestVector] | None = None,
                   chooser: Chooser = smallest_index) -> MkReport:
    """``||(M_k - U) v||`` for ``k = 1..k_max`` next to the bound ``2 pi beta^-(k-1) ||v||``.

    Both operators are diagonal, so coordinate ``y`` contributes
    ``|v_y| * |exp(2 pi i m) - exp(2 pi i y)| = 2 |v_y| |sin(pi (m - y))|``.
    """
    bs = _structure(bs, basis)
    if k_max < 1:
        raise DomainError("k_max must be at least 1")
    vecs = [_as_vector(v) for v in (test_vectors if test_vectors is not None else default_test_vectors(basis))]
    if not vecs:
        raise DomainError("no test vectors")
    for v in vecs:
        for i in v:
            if not 0 <= i < len(basis):
                raise DomainError(f"test vector index {i} outside the basis")
    beta = bs.spec.beta.to_mpf()
    norms = [MP.sqrt(sum(abs(MP.mpc(c)) ** 2 for c in v.values())) for v in vecs]
    angle = [None] * len(basis)
    rows = []
    for k in range(1, k_max + 1):
        mk = build_Mk(bs, basis, k, chooser)
        chosen = mk.meta["chosen_index"]
        res = []
        for v in vecs:
            total = MP.mpf(0)
            for i, c in v.items():
                if angle[i] is None:
                    angle[i] = basis.points[i].to_mpf()
                d = basis.points[chosen[i]].to_mpf() - angle[i]
                total += abs(MP.mpc(c)) ** 2 * (2 * MP.sin(MP.pi * d)) ** 2
            res.append(MP.sqrt(total))
        bound = [2 * MP.pi * beta ** (-(k - 1)) * nv for nv in norms]
        rows.append(MkRow(k, res, bound, len(mk.meta["unrepresented_words"])))
    return MkReport(rows, vecs)


# -- commutant ----------------------------------------------------------------------

@dataclass
class CertificateReport:
    certified: bool
    distinct_angles: bool
    angles_in_unit_interval: bool
    connected: bool
    components: int
    size: int
    edges: int

    def to_json(self) -> dict:
        return {"status": "certified" if self.certified else "not_certified", **self.__dict__}


def commutant_certificate(basis: OrbitBasis) -> CertificateReport:
    """Finite certificate that only scalars commute with ``U`` and ``V`` on the basis.

    Distinct exact eigenvalue angles force a commuting operator to be
    diagonal; a connected graph of edges ``z -- f(z)`` forces its diagonal to
    be constant.
    """
    pts = basis.points
    in_unit = all(p.is_exact and ZERO <= p < ONE for p in pts)
    distinct = len(set(pts)) == len(pts)
    g = nx.Graph()
    g.add_nodes_from(range(len(pts)))
    img = basis.image_index
    g.add_edges_from((i, int(j)) for i, j in enumerate(img) if j >= 0 and j != i)
    comps = nx.number_connected_components(g) if len(pts) else 0
    connected = comps == 1
    return CertificateReport(bool(in_unit and distinct and connected), distinct, in_unit, connected,
                             comps, len(pts), g.number_of_edges())


# -- equivalence ----------------------------------------------------------------------

@dataclass
class EquivalenceReport:
    verdict: Verdict
    witness: tuple[int, int] | None
    witness_replayed: bool | None
    certificate: dict | None
    angles_x: int
    angles_y: int
    shared_angles: list[Scalar] = field(default_factory=list)
    cycles_disjoint: bool | None = None

    @property
    def representations_equivalent(self) -> str:
        return self.verdict.value

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "representations_equivalent": self.representations_equivalent,
            "witness": None if self.witness is None else {"n": self.witness[0], "m": self.witness[1]},
            "witness_replayed": self.witness_replayed,
            "certificate": self.certificate,
            "angle_set_sizes": {"x": self.angles_x, "y": self.angles_y},
            "shared_angle_count": len(self.shared_angles),
            "shared_angles": [render(a) for a in sorted(self.shared_angles)[:50]],
            "cycles_disjoint": self.cycles_disjoint,
        }


def _iterate(spec: MapSpec, x: Scalar, n: int) -> Scalar:
    for _ in range(n):
        x = apply_map(spec, x)
    return x


def equivalence_report(spec: MapSpec, x: ScalarLike, y: ScalarLike, budget: int,
                       truncation: tuple[int, int, int] = (4, 3, 2000)) -> EquivalenceReport:
    """Orbit equivalence of ``x`` and ``y`` next to the eigenvalue angles of ``U`` on both truncations.

    The representations attached to ``x`` and ``y`` are equivalent exactly
    when the orbits are, so the verdict is the orbit verdict; the angle sets
    are the finite evidence.
    """
    x, y = as_scalar(x), as_scalar(y)
    eq = orbits_equivalent(spec, x, y, budget)
    f, p, cap = truncation
    bx = generalized_orbit(spec, x, f, p, cap)
    by = generalized_orbit(spec, y, f, p, cap)
    shared = sorted(set(bx.points) & set(by.points))
    witness = replayed = disjoint = None
    if eq.verdict is Verdict.YES:
        witness = (eq.n, eq.m)
        replayed = _iterate(spec, x, eq.n) == _iterate(spec, y, eq.m)
    elif eq.verdict is Verdict.NO:
        xs, ys = forward_orbit(spec, x, budget), forward_orbit(spec, y, budget)
        disjoint = not (set(xs) & set(ys))
    return EquivalenceReport(eq.verdict, witness, replayed, eq.certificate, len(bx), len(by), shared, disjoint)
