"""Seeded random instance generator for the finite-geometry inequalities.

Every generated instance satisfies the preconditions of the checks it
feeds (identity membership, M inside L, L-separated centers with adequate
stored extent), so a reported violation can only mean an implementation
bug, never a malformed instance.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product as _iproduct

from .groups import (
    FiniteSubset,
    check_boundary_bound,
    check_density_bound,
    check_interior_containment,
    check_invariance_transfer,
    is_separated,
    subset,
    sumset,
    zero,
)


@dataclass
class GeometryInstance:
    dim: int
    F: FiniteSubset
    F0: FiniteSubset
    F1: FiniteSubset
    K: FiniteSubset
    M: FiniteSubset
    L: FiniteSubset
    C: FiniteSubset
    g: tuple


def _random_subset(rng, dim, span, max_size, ensure=()):
    cells = set(ensure)
    size = rng.randint(max(1, len(cells)), max_size)
    coords = list(_iproduct(*([range(-span, span + 1)] * dim)))
    while len(cells) < size:
        cells.add(rng.choice(coords))
    return subset(cells, dim=dim)


def random_instance(rng: random.Random, dim: int) -> GeometryInstance:
    e = zero(dim)
    K = _random_subset(rng, dim, 2, 4, ensure=(e,))
    F = _random_subset(rng, dim, 5 if dim == 1 else 3, 24 if dim == 1 else 12)
    F0 = _random_subset(rng, dim, 4, 12)
    F1 = _random_subset(rng, dim, 4, 12)
    M = _random_subset(rng, dim, 1, 3, ensure=(e,))
    L = subset(
        set(M.as_set())
        | set(_random_subset(rng, dim, 2, 5).as_set()),
        dim=dim,
    )
    # L-separated centers inside a box that safely covers M^-1 F
    need = sumset(M.inverse(), F)
    spans = need.hull()
    pad = 3
    ext = tuple((lo - pad, hi + pad) for lo, hi in spans)
    pool = list(_iproduct(*[range(lo, hi + 1) for lo, hi in ext]))
    rng.shuffle(pool)
    centers = []
    occupied = set()
    for cand in pool:
        cells = {tuple(l_ + c_ for l_, c_ in zip(l, cand)) for l in L}
        if cells & occupied:
            continue
        centers.append(cand)
        occupied |= cells
        if len(centers) >= rng.randint(1, 12):
            break
    C = subset(centers, extent=ext, dim=dim)
    g = rng.choice(pool)
    return GeometryInstance(dim, F, F0, F1, K, M, L, C, g)


def run_suite(n_instances: int, seed: int) -> dict:
    """Run the four inequality checks on seeded random instances.

    Returns per-check pass counts and any violations (expected none: the
    inequalities are theorems)."""
    rng = random.Random(seed)
    counts = {k: 0 for k in ("transfer", "boundary", "density", "containment")}
    violations = []
    for i in range(n_instances):
        inst = random_instance(rng, dim=1 if i % 2 == 0 else 2)
        assert is_separated(inst.C, inst.L)
        checks = (
            ("transfer", check_invariance_transfer(inst.K, inst.F0, inst.F1)),
            ("boundary", check_boundary_bound(inst.F, inst.K)),
            ("density", check_density_bound(inst.F, inst.M, inst.L, inst.C)),
            ("containment", check_interior_containment(inst.F, inst.K, inst.g)),
        )
        for name, rep in checks:
            if rep.holds:
                counts[name] += 1
            else:
                violations.append((name, i, rep))
    return {
        "instances": n_instances,
        "counts": counts,
        "violations": violations,
        "ok": not violations,
    }
