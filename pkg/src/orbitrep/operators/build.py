"""Generators ``T_i``, their words, the isometry ``V``, the diagonal unitary ``U`` and ``M_k``."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from orbitrep.dynamics import BranchStructure
from orbitrep.errors import BasisMismatch, DomainError, EmptySelection
from orbitrep.numeric import render
from orbitrep.operators.sparse import PartialMap, SparseOperator, diagonal
from orbitrep.orbit import TRUNCATED, OrbitBasis
from orbitrep.symbolic import Word, admissible_words

Chooser = Callable[[Word, Sequence[int], OrbitBasis], int]


def _structure(bs: BranchStructure | None, basis: OrbitBasis) -> BranchStructure:
    bs = basis.bs if bs is None else bs
    if bs.spec != basis.spec:
        raise BasisMismatch("branch structure and basis come from different maps")
    return bs


def generator_map(bs: BranchStructure | None, basis: OrbitBasis, i: int) -> PartialMap:
    """``T_i`` as a partial map: column ``y`` goes to the ``i``-th preimage of ``y``."""
    bs = _structure(bs, basis)
    if not 1 <= i <= bs.n:
        raise DomainError(f"branch {i} outside 1..{bs.n}")
    t = basis.tables(bs)
    pre = t.preimage_index[i - 1]
    tgt = np.where(pre >= 0, pre, -1)
    core = pre != TRUNCATED
    # row x holds the single entry (x, f(x)) when x lies in cell i
    rowc = (t.branch_of != i) | (t.image_index >= 0)
    return PartialMap.make(tgt, core, rowc)


def build_T(bs: BranchStructure | None, basis: OrbitBasis, i: int) -> SparseOperator:
    return SparseOperator.from_partial(basis, generator_map(bs, basis, i), {"name": f"T_{i}"})


class WordCache:
    """Memoized partial maps ``T_w`` for words over one branch structure."""

    def __init__(self, bs: BranchStructure | None, basis: OrbitBasis):
        self.bs = _structure(bs, basis)
        self.basis = basis
        self._maps: dict[Word, PartialMap] = {}
        self._proj: dict[Word, PartialMap] = {}
        self._range: dict[Word, PartialMap] = {}

    def __getitem__(self, w: Word) -> PartialMap:
        w = tuple(w)
        pm = self._maps.get(w)
        if pm is None:
            if not w:
                pm = PartialMap.identity(len(self.basis))
            elif len(w) == 1:
                pm = generator_map(self.bs, self.basis, w[0])
            else:
                pm = self[w[:1]] @ self[w[1:]]
            self._maps[w] = pm
        return pm

    def initial(self, w: Word) -> PartialMap:
        """``T_w* T_w``."""
        w = tuple(w)
        if w not in self._proj:
            t = self[w]
            self._proj[w] = t.adjoint() @ t
        return self._proj[w]

    def final(self, w: Word) -> PartialMap:
        """``T_w T_w*``."""
        w = tuple(w)
        if w not in self._range:
            t = self[w]
            self._range[w] = t @ t.adjoint()
        return self._range[w]


def word_operator(bs: BranchStructure | None, basis: OrbitBasis, w: Sequence[int]) -> SparseOperator:
    """``T_{w_1} T_{w_2} ... T_{w_k}``."""
    w = tuple(int(s) for s in w)
    if not w:
        raise DomainError("words are nonempty")
    return SparseOperator.from_partial(basis, WordCache(bs, basis)[w],
                                       {"name": "T_" + "".join(map(str, w)) if max(w) < 10 else f"T_{w}"})


def build_V(bs: BranchStructure | None, basis: OrbitBasis) -> SparseOperator:
    """``V = T_1* + ... + T_n*``, which sends ``|y>`` to ``|f(y)>``."""
    bs = _structure(bs, basis)
    v = build_T(bs, basis, 1).adjoint()
    for i in range(2, bs.n + 1):
        v = v + build_T(bs, basis, i).adjoint()
    v.meta["name"] = "V"
    return v


def build_U(basis: OrbitBasis) -> SparseOperator:
    """Diagonal unitary with eigenvalue ``exp(2 pi i y)`` on ``|y>``."""
    u = diagonal(basis, basis.points)
    u.meta["name"] = "U"
    return u


def branch_words(bs: BranchStructure, basis: OrbitBasis, k: int) -> list[Word]:
    """Half-open branch word of length ``k`` of every basis point (computed exactly)."""
    out = []
    for y in basis.points:
        w = []
        for _ in range(k):
            b = bs.branch_index(y)
            w.append(b)
            y = bs.forward(b, y)
        out.append(tuple(w))
    return out


def smallest_index(word: Word, members: Sequence[int], basis: OrbitBasis) -> int:
    return min(members)


def build_Mk(bs: BranchStructure | None, basis: OrbitBasis, k: int,
             chooser: Chooser = smallest_index) -> SparseOperator:
    """``M_k = sum over |mu| = k of exp(2 pi i m(mu)) T_mu T_mu*``.

    ``T_mu T_mu*`` is the diagonal projection onto the basis points whose
    branch word of length ``k`` is ``mu``, so it is evaluated from exact
    branch words and never censored.  ``meta`` records the chosen points and
    the words of length ``k`` that no basis point represents.
    """
    bs = _structure(bs, basis)
    if k < 1:
        raise DomainError("k must be at least 1")
    words = branch_words(bs, basis, k)
    groups: dict[Word, list[int]] = {}
    for i, w in enumerate(words):
        groups.setdefault(w, []).append(i)
    if not groups:
        raise EmptySelection("no word of length k meets the basis")
    choice: dict[Word, int] = {}
    for w, members in groups.items():
        m = chooser(w, members, basis)
        if m not in members:
            raise DomainError(f"chooser picked index {m} outside the cylinder of {w}")
        choice[w] = m
    angles = [basis.points[choice[w]] for w in words]
    op = diagonal(basis, angles)
    admissible = admissible_words(bs.spec, k, partition=bs)
    op.meta.update({
        "name": f"M_{k}",
        "k": k,
        "choices": {"".join(map(str, w)) if bs.n < 10 else str(w): {"index": m, "point": render(basis.points[m])}
                    for w, m in sorted(choice.items())},
        "unrepresented_words": [list(w) for w in admissible if w not in groups],
        "word_of": words,
        "chosen_index": [choice[w] for w in words],
    })
    return op
