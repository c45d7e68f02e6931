"""Numpy implementation of the partial-map kernels (fallback for ``_kernels``).

A partial map on ``N`` basis vectors is three arrays:

``tgt``  int64, ``tgt[c]`` is the row hit by column ``c`` or -1 for the zero vector;
``core`` uint8, column ``c`` is exactly known (``tgt[c]`` is trustworthy);
``rowc`` uint8, row ``r`` is complete: every true entry in it sits in a core column.

All maps handled here are injective with coefficient 1, which is what the
generators of the orbit representation and all their words look like.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def normalize(tgt, core, rowc):
    """Mark rows hit by a core column as complete (valid because the map is injective)."""
    rowc = np.asarray(rowc, dtype=np.uint8).copy()
    hit = tgt[(core != 0) & (tgt >= 0)]
    rowc[hit] = 1
    return rowc


def inverse(tgt, core):
    n = tgt.shape[0]
    inv = np.full(n, -1, dtype=np.int64)
    sel = np.nonzero((core != 0) & (tgt >= 0))[0]
    inv[tgt[sel]] = sel
    return inv


def compose(a_tgt, a_core, a_rowc, b_tgt, b_core, b_rowc):
    """``A @ B``: apply ``B`` first."""
    n = b_tgt.shape[0]
    live = b_tgt >= 0
    safe = np.where(live, b_tgt, 0)
    tgt = np.where(live, a_tgt[safe], -1)
    core = (b_core != 0) & (~live | (a_core[safe] != 0))
    tgt = np.where(core, tgt, -1)
    inv_a = inverse(a_tgt, a_core)
    has = inv_a >= 0
    rowc = (a_rowc != 0) & (~has | (b_rowc[np.where(has, inv_a, 0)] != 0))
    core = core.astype(np.uint8)
    return tgt.astype(np.int64), core, normalize(tgt, core, rowc.astype(np.uint8))


def adjoint(tgt, core, rowc):
    rowc = normalize(tgt, core, rowc)
    inv = inverse(tgt, core)
    new_core = rowc.copy()
    inv = np.where(new_core != 0, inv, -1)
    return inv, new_core, np.asarray(core, dtype=np.uint8).copy()


def compare(a_tgt, a_core, b_tgt, b_core):
    """Return (checked mask, mismatch mask) over columns core on both sides."""
    both = (a_core != 0) & (b_core != 0)
    return both, both & (a_tgt != b_tgt)


def projection_defect(tgt, core):
    """Columns where a map expected to be a diagonal projection is not one."""
    idx = np.arange(tgt.shape[0], dtype=np.int64)
    return (core != 0) & (tgt >= 0) & (tgt != idx)
