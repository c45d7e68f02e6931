"""Column-wise verification of the operator relations on a truncated orbit.

A column is *checked* for a relation family when every operator involved is
exactly known on it (no entry could have been lost to truncation); all other
columns are *censored* and never count as passes.  Relations are equalities of
injective partial maps, so checking a column is an exact index comparison.

``halo > 0`` builds the operators on a larger truncation of the same orbit and
checks the columns of the requested basis there; columns near the edge of the
truncation then stop being censored.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from orbitrep import kernels
from orbitrep.dynamics import BranchStructure
from orbitrep.errors import BasisMismatch, DomainError, NoCoreColumns
from orbitrep.numeric import render, scalar_floor
from orbitrep.operators.build import WordCache, _structure
from orbitrep.operators.sparse import PartialMap
from orbitrep.orbit import OrbitBasis, generalized_orbit
from orbitrep.symbolic import MarkovVerdict, Word, admissible_words, markov_analysis

KINDS = ("partial_isometry", "sum_to_identity", "subshift", "cuntz_krieger", "all")
MAX_LISTED = 50
DEFAULT_HALO_CAP = 1_000_000


def _wname(w: Word) -> str:
    return "".join(map(str, w)) if max(w, default=0) < 10 else ".".join(map(str, w))


@dataclass
class RelationResult:
    name: str
    statement: str
    instances: int = 0
    columns_checked: int = 0
    columns_censored: int = 0
    evaluations: int = 0
    violations: list[dict] = field(default_factory=list)
    violation_count: int = 0

    @property
    def passed(self) -> bool:
        return self.violation_count == 0

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "statement": self.statement,
            "instances": self.instances,
            "columns_checked": self.columns_checked,
            "columns_censored": self.columns_censored,
            "evaluations": self.evaluations,
            "violation_count": self.violation_count,
            "violations": self.violations,
        }


@dataclass
class VerificationReport:
    kind: str
    word_depth: int
    halo: int
    basis_size: int
    work_size: int
    relations: list[RelationResult]
    words_checked: int = 0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.relations)

    @property
    def violation_count(self) -> int:
        return sum(r.violation_count for r in self.relations)

    def relation(self, name: str) -> RelationResult:
        for r in self.relations:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "word_depth": self.word_depth,
            "halo": self.halo,
            "basis_size": self.basis_size,
            "work_size": self.work_size,
            "words_checked": self.words_checked,
            "passed": self.passed,
            "violations": [v for r in self.relations for v in r.violations],
            "relations": [r.to_json() for r in self.relations],
        }


class _Family:
    """Accumulates checked/censored columns of one relation family over its instances."""

    def __init__(self, name: str, statement: str, cols: np.ndarray, basis: OrbitBasis):
        self.result = RelationResult(name, statement)
        self.cols = cols
        self.basis = basis
        self.all_core = np.ones(len(cols), dtype=bool)

    def record(self, label: str, checked: np.ndarray, bad: np.ndarray):
        checked = np.asarray(checked, bool)[self.cols]
        bad = np.asarray(bad, bool)[self.cols]
        r = self.result
        r.instances += 1
        r.evaluations += int(checked.sum())
        self.all_core &= checked
        hits = np.nonzero(bad & checked)[0]
        r.violation_count += len(hits)
        for j in hits[: max(0, MAX_LISTED - len(r.violations))]:
            r.violations.append({"relation": r.name, "instance": label, "column": int(j),
                                 "point": render(self.basis.points[j])})

    def finish(self) -> RelationResult:
        self.result.columns_checked = int(self.all_core.sum())
        self.result.columns_censored = int(len(self.cols) - self.all_core.sum())
        return self.result


def _diag_or_zero(pm: PartialMap) -> np.ndarray:
    return np.asarray(kernels.projection_defect(pm.tgt, pm.core), bool)


def _projection_sum_check(fam: _Family, label: str, lhs: PartialMap | None, terms: Sequence[PartialMap]):
    """Compare ``lhs`` (a projection, or the identity when None) with a sum of projections."""
    n = len(terms[0]) if terms else len(lhs)
    idx = np.arange(n)
    core = np.ones(n, bool)
    bad = np.zeros(n, bool)
    count = np.zeros(n, np.int64)
    for p in terms:
        core &= p.core.astype(bool)
        bad |= _diag_or_zero(p)
        count += p.tgt == idx
    if lhs is None:
        want = np.ones(n, np.int64)
    else:
        core &= lhs.core.astype(bool)
        bad |= _diag_or_zero(lhs)
        want = (lhs.tgt == idx).astype(np.int64)
    bad |= count != want
    fam.record(label, core, bad & core)


def extend_basis(basis: OrbitBasis, halo: int, max_points: int = DEFAULT_HALO_CAP) -> tuple[OrbitBasis, np.ndarray]:
    """A larger truncation of the same generalized orbit and the positions of ``basis`` in it."""
    if halo <= 0:
        return basis, np.arange(len(basis))
    if basis.kind != "orbit":
        raise DomainError("a halo needs a basis built by generalized_orbit")
    f, p, _ = basis.params
    big = generalized_orbit(basis.spec, basis.root, f + halo, p + halo, max(max_points, len(basis)))
    try:
        pos = np.array([big.index[y] for y in basis.points], dtype=np.int64)
    except KeyError as exc:
        raise BasisMismatch("halo truncation hit its point cap before covering the basis") from exc
    return big, pos


def _markov_inputs(bs: BranchStructure, matrix):
    if matrix is not None:
        a = np.asarray(matrix, dtype=np.int64)
        if a.shape != (bs.n, bs.n):
            raise DomainError(f"transition matrix must be {bs.n}x{bs.n}")
        return bs, a
    rep = markov_analysis(bs.spec, 64)
    if rep.verdict is not MarkovVerdict.YES:
        raise DomainError("no Markov partition found; pass a transition matrix explicitly")
    return rep.refined, np.asarray(rep.transition_matrix, dtype=np.int64)


def verify_relations(bs: BranchStructure | None, basis: OrbitBasis, kind: str = "all", word_depth: int = 2,
                     matrix=None, halo: int = 0, max_points: int = DEFAULT_HALO_CAP) -> VerificationReport:
    """Check the generator relations column by column on core columns.

    ``kind`` is one of ``partial_isometry``, ``sum_to_identity``, ``subshift``,
    ``cuntz_krieger`` or ``all`` (the first three).  For ``cuntz_krieger`` the
    generators follow the cells of ``bs`` and ``matrix`` is the 0-1 transition
    matrix; when ``matrix`` is omitted both come from :func:`markov_analysis`.
    """
    if kind not in KINDS:
        raise DomainError(f"unknown relation kind {kind!r}; expected one of {KINDS}")
    if word_depth < 1:
        raise DomainError("word_depth must be at least 1")
    bs = _structure(bs, basis)
    a = None
    if kind == "cuntz_krieger":
        bs, a = _markov_inputs(bs, matrix)
    work, cols = extend_basis(basis, halo, max_points)
    words = WordCache(bs, work)
    n = bs.n
    families: list[_Family] = []

    def family(name: str, statement: str) -> _Family:
        fam = _Family(name, statement, cols, basis)
        families.append(fam)
        return fam

    gens = [(i,) for i in range(1, n + 1)]
    if kind in ("partial_isometry", "all"):
        fam = family("partial_isometry", "T_i T_i* T_i = T_i")
        for g in gens:
            t = words[g]
            fam.record(f"i={g[0]}", *((words.final(g) @ t).compare(t)))
    if kind in ("sum_to_identity", "all", "cuntz_krieger"):
        fam = family("sum_to_identity", "sum_i T_i T_i* = 1")
        _projection_sum_check(fam, "sum", None, [words.final(g) for g in gens])
    n_words = 0
    if kind in ("subshift", "all"):
        pool: list[Word] = []
        for length in range(1, word_depth + 1):
            pool.extend(admissible_words(bs.spec, length, partition=bs))
        n_words = len(pool)
        prod_fam = family("subshift_product", "T_mu* T_mu T_nu = T_nu T_(mu nu)* T_(mu nu)")
        comm_fam = family("projection_commutation", "T_mu* T_mu T_nu* T_nu = T_nu* T_nu T_mu* T_mu")
        for mu, nu in product(pool, repeat=2):
            label = f"mu={_wname(mu)},nu={_wname(nu)}"
            t_nu = words[nu]
            lhs = words.initial(mu) @ t_nu
            rhs = t_nu @ words.initial(mu + nu)
            prod_fam.record(label, *lhs.compare(rhs))
            if mu < nu:
                pm, pn = words.initial(mu), words.initial(nu)
                comm_fam.record(label, *(pm @ pn).compare(pn @ pm))
    if kind == "cuntz_krieger":
        fam = family("cuntz_krieger", "s_i* s_i = sum_j a_ij s_j s_j*")
        for i in range(n):
            terms = [words.final((j + 1,)) for j in range(n) if a[i, j]]
            if not terms:
                zero = PartialMap.make(np.full(len(work), -1), np.ones(len(work)), np.ones(len(work)))
                terms = [zero]
            _projection_sum_check(fam, f"i={i + 1}", words.initial((i + 1,)), terms)

    results = [f.finish() for f in families]
    if all(r.evaluations == 0 for r in results):
        raise NoCoreColumns("truncation leaves no column where the relations are determined")
    return VerificationReport(kind, word_depth, halo, len(basis), len(work), results, n_words)


# -- remarks on the initial projections ----------------------------------------------

@dataclass
class BranchRemark:
    branch: int
    role: str
    image: str
    image_full: bool
    identity_on_core: bool
    columns_checked: int
    failing_columns: int
    witness: str | None

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass
class RemarkReport:
    branches: list[BranchRemark]
    classical: dict
    consistent: bool

    def to_json(self) -> dict:
        return {"branches": [b.to_json() for b in self.branches], "classical_conditions": self.classical,
                "consistent": self.consistent}


def remark_checks(bs: BranchStructure | None, basis: OrbitBasis, halo: int = 0,
                  max_points: int = DEFAULT_HALO_CAP) -> RemarkReport:
    """Decide for every branch whether ``T_i* T_i`` is the identity on core columns.

    ``T_i* T_i`` projects onto the basis points inside ``f(I_i)``, so it is the
    identity exactly when that image is all of ``[0, 1[`` and the basis meets
    the complement.  The report sets each verdict beside the image test and
    beside the classical conditions on ``alpha`` and ``beta``.
    """
    bs = _structure(bs, basis)
    work, cols = extend_basis(basis, halo, max_points)
    words = WordCache(bs, work)
    ident = PartialMap.identity(len(work))
    out = []
    consistent = True
    for i in range(1, bs.n + 1):
        checked, bad = words.initial((i,)).compare(ident)
        checked, bad = np.asarray(checked, bool)[cols], np.asarray(bad, bool)[cols]
        fails = np.nonzero(checked & bad)[0]
        img = bs.images[i - 1]
        full = img.left == 0 and img.right == 1
        role = "first" if i == 1 else "last" if i == bs.n else "interior"
        ok = len(fails) == 0 and checked.any()
        out.append(BranchRemark(i, role, str(img), bool(full), bool(ok), int(checked.sum()), len(fails),
                                render(basis.points[fails[0]]) if len(fails) else None))
        # a failing column is a point outside the image, so failure implies a non-full image;
        # identity with a non-full image only means the basis missed the gap
        if full and not ok:
            consistent = False
    spec = bs.spec
    alpha_zero = spec.alpha == 0
    beta_is_n = spec.beta == bs.n
    top = spec.beta + spec.alpha
    top_integer = bool(top == scalar_floor(top))
    classical = {
        "first_branch": {"condition": "alpha == 0", "holds": bool(alpha_zero),
                         "matches_image_test": bool(alpha_zero) == out[0].image_full},
        "last_branch": {"condition": "beta == n", "holds": bool(beta_is_n),
                        "geometric_condition": "beta + alpha is an integer",
                        "geometric_holds": top_integer,
                        "matches_image_test": bool(beta_is_n) == out[-1].image_full},
    }
    return RemarkReport(out, classical, consistent)
