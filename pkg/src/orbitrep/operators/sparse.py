"""Unit-complex coefficients, partial maps and sparse operators on an orbit basis.

Every operator column carries a flag saying whether truncation of the basis
could hide entries of that column (``domain_mask``) and every row a flag saying
whether all its entries are visible (``row_mask``).  The adjoint swaps the two,
so checks on adjoints stay honest.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from orbitrep import kernels
from orbitrep.errors import BasisMismatch, DomainError
from orbitrep.numeric import MP, Rational, Scalar, ScalarLike, as_scalar, mod1, render

_ZERO_ANGLE = Rational(0)


@dataclass(frozen=True)
class UnitComplex:
    """``exp(2 pi i * angle)`` with an exact angle in ``[0, 1[``; ``angle=None`` is zero."""

    angle: Scalar | None

    @staticmethod
    def of(angle: ScalarLike) -> "UnitComplex":
        a = as_scalar(angle)
        if not a.is_exact:
            raise DomainError("phases need exact angles")
        return UnitComplex(mod1(a))

    @property
    def is_zero(self) -> bool:
        return self.angle is None

    def __mul__(self, other: "UnitComplex") -> "UnitComplex":
        if self.angle is None or other.angle is None:
            return ZERO_PHASE
        if self.angle == _ZERO_ANGLE:
            return other
        if other.angle == _ZERO_ANGLE:
            return self
        return UnitComplex(mod1(self.angle + other.angle))

    def conjugate(self) -> "UnitComplex":
        if self.angle is None or self.angle == _ZERO_ANGLE:
            return self
        return UnitComplex(mod1(-self.angle))

    def to_mpc(self):
        if self.angle is None:
            return MP.mpc(0)
        return MP.expjpi(2 * self.angle.to_mpf())

    def __str__(self) -> str:
        return "0" if self.angle is None else f"e(2pi i*{render(self.angle)})"


ONE_PHASE = UnitComplex(_ZERO_ANGLE)
ZERO_PHASE = UnitComplex(None)


@dataclass(frozen=True, eq=False)
class PartialMap:
    """Injective map of basis vectors with coefficient 1 (see ``orbitrep._pykernels``)."""

    tgt: np.ndarray
    core: np.ndarray
    rowc: np.ndarray

    @staticmethod
    def make(tgt, core, rowc) -> "PartialMap":
        tgt = np.ascontiguousarray(tgt, dtype=np.int64)
        core = np.ascontiguousarray(core, dtype=np.uint8)
        rowc = kernels.normalize(tgt, core, np.ascontiguousarray(rowc, dtype=np.uint8))
        return PartialMap(tgt, core, np.asarray(rowc, dtype=np.uint8))

    @staticmethod
    def identity(n: int) -> "PartialMap":
        ones = np.ones(n, dtype=np.uint8)
        return PartialMap(np.arange(n, dtype=np.int64), ones, ones.copy())

    def __len__(self) -> int:
        return self.tgt.shape[0]

    def __matmul__(self, other: "PartialMap") -> "PartialMap":
        return PartialMap(*kernels.compose(self.tgt, self.core, self.rowc, other.tgt, other.core, other.rowc))

    def adjoint(self) -> "PartialMap":
        return PartialMap(*kernels.adjoint(self.tgt, self.core, self.rowc))

    def compare(self, other: "PartialMap") -> tuple[np.ndarray, np.ndarray]:
        """(columns core on both sides, columns where they differ)."""
        return kernels.compare(self.tgt, self.core, other.tgt, other.core)


Entry = tuple[int, UnitComplex]


class SparseOperator:
    """Finite operator on an :class:`~orbitrep.orbit.OrbitBasis`.

    ``columns[c]`` lists ``(row, coefficient)`` pairs with nonzero coefficient.
    Operators built from partial maps keep the map and compose through the
    array kernels; everything else goes through the generic column code.
    """

    __slots__ = ("basis", "_columns", "domain_mask", "row_mask", "partial", "meta")

    def __init__(self, basis, columns: Sequence[Sequence[Entry]] | None, domain_mask, row_mask,
                 partial: PartialMap | None = None, meta: dict | None = None):
        self.basis = basis
        self.partial = partial
        self._columns = None if columns is None else [tuple(e for e in col if not e[1].is_zero) for col in columns]
        self.domain_mask = np.asarray(domain_mask, dtype=bool)
        self.row_mask = np.asarray(row_mask, dtype=bool)
        self.meta = meta or {}
        if self._columns is None and partial is None:
            raise ValueError("need columns or a partial map")

    @classmethod
    def from_partial(cls, basis, pm: PartialMap, meta: dict | None = None) -> "SparseOperator":
        return cls(basis, None, pm.core.astype(bool), pm.rowc.astype(bool), pm, meta)

    @classmethod
    def zero(cls, basis) -> "SparseOperator":
        n = len(basis)
        return cls(basis, [() for _ in range(n)], np.ones(n, bool), np.ones(n, bool))

    @classmethod
    def identity(cls, basis) -> "SparseOperator":
        return cls.from_partial(basis, PartialMap.identity(len(basis)))

    @property
    def size(self) -> int:
        return len(self.domain_mask)

    @property
    def columns(self) -> list[tuple[Entry, ...]]:
        if self._columns is None:
            tgt = self.partial.tgt
            self._columns = [((int(t), ONE_PHASE),) if t >= 0 else () for t in tgt]
        return self._columns

    def column(self, c: int) -> dict[int, UnitComplex]:
        return dict(self.columns[c])

    @property
    def nnz(self) -> int:
        if self.partial is not None and self._columns is None:
            return int((self.partial.tgt >= 0).sum())
        return sum(len(col) for col in self.columns)

    def _check(self, other: "SparseOperator"):
        if other.basis is not self.basis:
            raise BasisMismatch("operators live on different bases")

    def __matmul__(self, other: "SparseOperator") -> "SparseOperator":
        """``self @ other`` applies ``other`` first."""
        self._check(other)
        if self.partial is not None and other.partial is not None:
            return SparseOperator.from_partial(self.basis, self.partial @ other.partial)
        a_cols, b_cols = self.columns, other.columns
        a_dom = self.domain_mask
        cols, dom = [], np.zeros(self.size, bool)
        for c, col in enumerate(b_cols):
            acc: dict[int, UnitComplex] = {}
            ok = bool(other.domain_mask[c])
            for k, v in col:
                ok = ok and bool(a_dom[k])
                for r, w in a_cols[k]:
                    if r in acc:
                        raise ValueError(f"column {c}: coefficient at row {r} leaves the unit circle")
                    acc[r] = w * v
            cols.append(tuple(sorted(acc.items())))
            dom[c] = ok
        rows_of_a = self._rows()
        rowc = np.array([bool(self.row_mask[r]) and all(other.row_mask[k] for k in rows_of_a[r])
                         for r in range(self.size)], dtype=bool)
        return SparseOperator(self.basis, cols, dom, rowc)

    def _rows(self) -> list[list[int]]:
        rows: list[list[int]] = [[] for _ in range(self.size)]
        for c, col in enumerate(self.columns):
            for r, _ in col:
                rows[r].append(c)
        return rows

    def adjoint(self) -> "SparseOperator":
        if self.partial is not None:
            return SparseOperator.from_partial(self.basis, self.partial.adjoint(), dict(self.meta))
        cols: list[list[Entry]] = [[] for _ in range(self.size)]
        for c, col in enumerate(self.columns):
            for r, v in col:
                cols[r].append((c, v.conjugate()))
        return SparseOperator(self.basis, cols, self.row_mask.copy(), self.domain_mask.copy())

    @property
    def H(self) -> "SparseOperator":
        return self.adjoint()

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        """Sum of operators with disjoint entries (coefficients must stay unit complex)."""
        self._check(other)
        cols = []
        for c, (x, y) in enumerate(zip(self.columns, other.columns)):
            acc = dict(x)
            for r, v in y:
                if r in acc:
                    raise ValueError(f"column {c}: overlapping entries at row {r}")
                acc[r] = v
            cols.append(tuple(sorted(acc.items())))
        return SparseOperator(self.basis, cols, self.domain_mask & other.domain_mask,
                              self.row_mask & other.row_mask)

    def is_diagonal(self) -> bool:
        return all(r == c for c, col in enumerate(self.columns) for r, _ in col)

    def compare(self, other: "SparseOperator") -> tuple[np.ndarray, np.ndarray]:
        """(columns exact on both sides, columns where they differ)."""
        self._check(other)
        if self.partial is not None and other.partial is not None:
            both, bad = self.partial.compare(other.partial)
            return np.asarray(both, bool), np.asarray(bad, bool)
        both = self.domain_mask & other.domain_mask
        bad = np.zeros(self.size, bool)
        for c in np.nonzero(both)[0]:
            bad[c] = self.column(c) != other.column(c)
        return both, bad

    def to_json(self, limit: int | None = None) -> dict:
        cols = self.columns if limit is None else self.columns[:limit]
        return {
            "size": self.size,
            "nnz": self.nnz,
            "core_columns": int(self.domain_mask.sum()),
            "columns": [
                {"column": c, "core": bool(self.domain_mask[c]),
                 "entries": [{"row": r, "angle": None if v.angle is None else render(v.angle)} for r, v in col]}
                for c, col in enumerate(cols)
            ],
        }


def diagonal(basis, angles: Iterable[ScalarLike | None]) -> SparseOperator:
    cols = []
    for c, a in enumerate(angles):
        cols.append(() if a is None else ((c, UnitComplex.of(a)),))
    n = len(cols)
    return SparseOperator(basis, cols, np.ones(n, bool), np.ones(n, bool))


def op_adjoint(a: SparseOperator) -> SparseOperator:
    return a.adjoint()
