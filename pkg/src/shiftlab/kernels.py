"""Hot search kernels: numba-compiled with a pure-Python fallback.

The two entry points are :func:`dfs_search` (depth-first enumeration of
admissible labelings with optional existence margins) and
:func:`check_clauses` (full admissibility scan of a fixed assignment).
Both dispatch to an ``@njit`` implementation unless the environment variable
``SHIFTLAB_NO_NUMBA`` is set (or numba is unavailable), in which case a
pure-Python twin with identical semantics runs instead.

Clause format (shared by both backends): a "clause" is one translate of one
forbidden pattern, i.e. a set of (cell index, symbol index) requirements
that must not all hold simultaneously.  Clauses are attached to their
largest cell index so they can be checked as soon as that cell is assigned.

    attach_ptr : int64[n_cells + 1]   clauses attached to each cell (CSR)
    clause_ids : int64[total]         clause id list per cell
    item_ptr   : int64[n_clauses+1]   item range per clause (CSR)
    item_pos   : int64[items]         cell index of each requirement
    item_lab   : int8[items]          required symbol index
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = bool(os.environ.get("SHIFTLAB_NO_NUMBA"))

if not _DISABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _DISABLED = True

CAPPED = -1


def backend() -> str:
    return "pure" if _DISABLED else "numba"


def _dfs_impl(
    n_cells,
    n_core,
    alph,
    attach_ptr,
    clause_ids,
    item_ptr,
    item_pos,
    item_lab,
    cap,
    want_rows,
    stop_after,
    out_rows,
):
    """Count/collect admissible assignments; see module docstring.

    Cells beyond ``n_core`` are existence margins: each admissible core
    prefix is counted once as soon as one full completion is found.
    Returns the count, or CAPPED if the cap was exceeded.
    """
    sym = np.full(n_cells, -1, dtype=np.int8)
    depth = 0
    count = 0
    while depth >= 0:
        sym[depth] += 1
        if sym[depth] >= alph:
            sym[depth] = -1
            depth -= 1
            continue
        # clauses whose last cell is `depth` are now fully assigned
        bad = False
        for ci in range(attach_ptr[depth], attach_ptr[depth + 1]):
            cid = clause_ids[ci]
            hit = True
            for ii in range(item_ptr[cid], item_ptr[cid + 1]):
                if sym[item_pos[ii]] != item_lab[ii]:
                    hit = False
                    break
            if hit:
                bad = True
                break
        if bad:
            continue
        if depth == n_cells - 1:
            if count >= cap:
                return CAPPED
            if want_rows:
                for j in range(n_core):
                    out_rows[count, j] = sym[j]
            count += 1
            if count >= stop_after:
                return count
            if n_core < n_cells:
                # a completion exists for this core prefix; advance the core
                for j in range(n_core, n_cells):
                    sym[j] = -1
                depth = n_core - 1
                if depth < 0:
                    return count
            continue
        depth += 1
    return count


def _check_impl(labels, item_ptr, item_pos, item_lab):
    """Return the id of the first violated clause, or -1 if none."""
    n_clauses = item_ptr.shape[0] - 1
    for cid in range(n_clauses):
        hit = True
        for ii in range(item_ptr[cid], item_ptr[cid + 1]):
            if labels[item_pos[ii]] != item_lab[ii]:
                hit = False
                break
        if hit:
            return cid
    return -1


if _DISABLED:
    _dfs_jit = _dfs_impl
    _check_jit = _check_impl
else:
    _dfs_jit = njit(cache=True)(_dfs_impl)
    _check_jit = njit(cache=True)(_check_impl)


def pack_clauses(n_cells: int, clauses: list) -> tuple:
    """Pack [(pos, lab), ...] clause lists into the CSR arrays."""
    per_cell = [[] for _ in range(n_cells)]
    item_ptr = [0]
    item_pos = []
    item_lab = []
    for cid, clause in enumerate(clauses):
        last = max(p for p, _ in clause)
        per_cell[last].append(cid)
        for p, l in sorted(clause):
            item_pos.append(p)
            item_lab.append(l)
        item_ptr.append(len(item_pos))
    attach_ptr = [0]
    clause_ids = []
    for cell in range(n_cells):
        clause_ids.extend(per_cell[cell])
        attach_ptr.append(len(clause_ids))
    return (
        np.asarray(attach_ptr, dtype=np.int64),
        np.asarray(clause_ids, dtype=np.int64),
        np.asarray(item_ptr, dtype=np.int64),
        np.asarray(item_pos, dtype=np.int64),
        np.asarray(item_lab, dtype=np.int8),
    )


_NO_STOP = np.iinfo(np.int64).max


def dfs_search(
    n_cells: int,
    n_core: int,
    alph: int,
    clauses: list,
    cap: int,
    want_rows: bool = False,
    stop_after: int | None = None,
):
    """Run the DFS backend.  Returns (count, rows or None); count == CAPPED
    signals cap overflow.

    Collection runs a counting pass first so the row array is allocated
    exactly, unless ``stop_after`` bounds it already.
    """
    if n_cells == 0:
        rows = np.zeros((1, 0), dtype=np.int8) if want_rows else None
        return 1, rows
    packed = pack_clauses(n_cells, clauses)
    dummy = np.zeros((1, 1), dtype=np.int8)
    if not want_rows:
        stop = stop_after if stop_after is not None else _NO_STOP
        count = _dfs_jit(n_cells, n_core, alph, *packed, cap, False, stop, dummy)
        return (CAPPED, None) if count == CAPPED else (count, None)
    if stop_after is not None and stop_after <= cap:
        rows = np.zeros((stop_after, max(n_core, 1)), dtype=np.int8)
        count = _dfs_jit(
            n_cells, n_core, alph, *packed, stop_after, True, stop_after, rows
        )
        if count == CAPPED:
            count = stop_after
        return count, rows[:count, :n_core]
    total = _dfs_jit(n_cells, n_core, alph, *packed, cap, False, _NO_STOP, dummy)
    if total == CAPPED:
        return CAPPED, None
    rows = np.zeros((max(total, 1), max(n_core, 1)), dtype=np.int8)
    _dfs_jit(n_cells, n_core, alph, *packed, total + 1, True, max(total, 1), rows)
    return total, rows[:total, :n_core]


def check_clauses(labels: np.ndarray, n_cells: int, clauses: list) -> int:
    """Return the index of the first violated clause, or -1."""
    if not clauses:
        return -1
    _, _, item_ptr, item_pos, item_lab = pack_clauses(n_cells, clauses)
    return int(_check_jit(np.asarray(labels, dtype=np.int8), item_ptr, item_pos, item_lab))
