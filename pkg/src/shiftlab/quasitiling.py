"""Quasi-tilings on finite windows: greedy placement, retraction,
disjointness/covering checks, the starred retraction, and exactification.

Conventions:

* a tile is ``shape + center`` with the shape containing the identity;
* placement runs over shapes from largest to smallest; tiles of equal shape
  are kept pairwise disjoint, tiles of later (smaller) shapes may overlap
  earlier ones by strictly less than an ``eps`` fraction of themselves;
* the retraction subtracts all earlier-placed tiles, so retracted tiles are
  pairwise disjoint and preserve the union of the originals.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil

from .groups import (
    FiniteSubset,
    PreconditionError,
    add,
    as_element,
    boundary_interior,
    is_separated,
    neg,
    power,
    subset,
    sumset,
    zero,
)
from .subshift import Configuration


class DeficiencyError(RuntimeError):
    """Exactification is infeasible: uncovered cells exceed B-capacity."""

    def __init__(self, uncovered: int, capacity: int, sample):
        super().__init__(
            f"matching infeasible: {uncovered} uncovered cells vs capacity {capacity}"
        )
        self.uncovered = uncovered
        self.capacity = capacity
        self.sample = sample


@dataclass(frozen=True)
class ShapeSet:
    """Indexed shapes S^(1)..S^(r), each containing the identity and
    pairwise translate-inequivalent."""

    shapes: tuple

    def __post_init__(self):
        shapes = tuple(self.shapes)
        if not shapes:
            raise ValueError("shape set must be nonempty")
        dim = shapes[0].dim
        for s in shapes:
            if zero(dim) not in s:
                raise ValueError("every shape must contain the identity")
        for i, a in enumerate(shapes):
            for b in shapes[i + 1 :]:
                if _translate_equivalent(a, b):
                    raise ValueError("shape set is not shift-irreducible")
        object.__setattr__(self, "shapes", shapes)

    def __len__(self):
        return len(self.shapes)

    def __iter__(self):
        return iter(self.shapes)

    @property
    def dim(self):
        return self.shapes[0].dim

    def union_shape(self) -> FiniteSubset:
        cells = set()
        for s in self.shapes:
            cells |= s.as_set()
        return subset(cells, dim=self.dim)


def _translate_equivalent(a: FiniteSubset, b: FiniteSubset) -> bool:
    if len(a) != len(b):
        return False
    d = tuple(x - y for x, y in zip(b.elements[0], a.elements[0]))
    return {add(e, d) for e in a} == b.as_set()


@dataclass
class QuasiTiling:
    """Finite-window assignment of shape indices to centers."""

    shape_set: ShapeSet
    centers: dict  # center element -> shape index (0-based)
    window: FiniteSubset
    placement_order: tuple = ()
    warnings: tuple = ()

    def __post_init__(self):
        self.centers = {as_element(c): int(i) for c, i in self.centers.items()}
        fingerprints = {}
        for c, i in self.centers.items():
            cells = frozenset(add(s, c) for s in self.shape_set.shapes[i])
            if cells in fingerprints:
                raise ValueError("tile map (S, c) -> Sc is not injective")
            fingerprints[cells] = c
        if not self.placement_order:
            self.placement_order = canonical_order(self.shape_set, self.centers)

    def center_set(self) -> FiniteSubset:
        return subset(self.centers, dim=self.window.dim)

    def tile_items(self):
        """[(center, relative shape)] in canonical center order."""
        return [
            (c, self.shape_set.shapes[i]) for c, i in sorted(self.centers.items())
        ]

    def tile_cells(self, c) -> frozenset:
        c = as_element(c)
        return frozenset(add(s, c) for s in self.shape_set.shapes[self.centers[c]])

    def union_cells(self) -> frozenset:
        out = set()
        for c in self.centers:
            out |= self.tile_cells(c)
        return frozenset(out)


def canonical_order(shape_set: ShapeSet, centers: dict) -> tuple:
    """Largest shapes first, then shape index, then center; matches the
    placement pass structure so the retraction is recomputable from the
    center map alone."""
    return tuple(
        sorted(
            centers,
            key=lambda c: (
                -len(shape_set.shapes[centers[c]]),
                centers[c],
                c,
            ),
        )
    )


@dataclass
class TileFamily:
    """Centers with per-center shapes (retracted or exactified tilings)."""

    tiles: dict  # center -> relative FiniteSubset
    window: FiniteSubset
    warnings: tuple = ()

    def __post_init__(self):
        self.tiles = {as_element(c): s for c, s in self.tiles.items()}

    def tile_items(self):
        return sorted(self.tiles.items())

    def center_set(self) -> FiniteSubset:
        return subset(self.tiles, dim=self.window.dim)

    def tile_cells(self, c) -> frozenset:
        c = as_element(c)
        return frozenset(add(s, c) for s in self.tiles[c])

    def union_cells(self) -> frozenset:
        out = set()
        for c in self.tiles:
            out |= self.tile_cells(c)
        return frozenset(out)


@dataclass
class Retraction(TileFamily):
    """Disjoint retraction of a quasi-tiling, per the subtract-earlier rule."""

    base: QuasiTiling = None
    dropped: tuple = ()


# ---------------------------------------------------------------------------
# candidate orders


class LexOrder:
    label = "lex"

    def arrange(self, candidates, shape_index):
        return sorted(candidates)


class SeededOrder:
    """Deterministic pseudorandom candidate order per shape."""

    label = "seeded"

    def __init__(self, seed: int):
        self.seed = int(seed)

    def arrange(self, candidates, shape_index):
        rng = random.Random((self.seed, shape_index))
        out = sorted(candidates)
        rng.shuffle(out)
        return out


class ConfigHashOrder:
    """Order candidates by a stable hash of the configuration around them.

    Makes the tiling a deterministic function of the input configuration,
    read through bounded local windows, mirroring the factor-map character
    of the tiler.  With ``jitter = J > 0`` the hash only perturbs each
    candidate's position by up to J cells, so the greedy packs nearly
    left-to-right and leaves gaps on the order of J instead of the ~25%
    jamming deficit of a uniformly random insertion order.
    """

    label = "config-hash"

    def __init__(self, config: Configuration, radius: int = 2, jitter: int = 0):
        self.config = config
        self.radius = radius
        self.jitter = jitter

    def _digest(self, g, shape_index) -> bytes:
        h = hashlib.blake2b(digest_size=8)
        h.update(f"{shape_index}|".encode())
        for off in _ball_offsets(self.radius, len(g)):
            cell = add(g, off)
            sym = self.config.labels.get(cell, None)
            h.update(repr(sym).encode())
            h.update(b";")
        return h.digest()

    def arrange(self, candidates, shape_index):
        if self.jitter:
            def key(g):
                d = self._digest(g, shape_index)
                j = int.from_bytes(d[:4], "big") % (self.jitter + 1)
                return (g[0] + j,) + tuple(g[1:]) + (d, g)

        else:
            def key(g):
                return (self._digest(g, shape_index), g)

        return sorted(candidates, key=key)


def _ball_offsets(r: int, dim: int):
    if dim == 1:
        return [(i,) for i in range(-r, r + 1)]
    return [(i, j) for i in range(-r, r + 1) for j in range(-r, r + 1)]


# ---------------------------------------------------------------------------
# greedy tiler


def _insertable(
    shape: FiniteSubset,
    shape_index: int,
    g,
    covered: set,
    same_shape_cells: set,
    l_occupied: set,
    L: FiniteSubset,
    eps: Fraction,
):
    """Placement guard: L-separation, same-shape disjointness, eps-loss."""
    Lg = {add(l, g) for l in L}
    if Lg & l_occupied:
        return False
    cells = {add(s, g) for s in shape}
    if cells & same_shape_cells:
        return False
    loss = len(cells & covered)
    return Fraction(loss) < eps * len(shape)


def dh_tile(
    shapes: ShapeSet,
    L: FiniteSubset,
    window: FiniteSubset,
    eps,
    order=None,
    fit_extra: FiniteSubset | None = None,
) -> QuasiTiling:
    """Greedy maximal quasi-tiling of the window.

    Scans candidate centers (per the given order) shape by shape, largest
    first, placing a tile when the center keeps the center set L-separated,
    the tile avoids all same-shape tiles, and its overlap with previously
    placed tiles stays below an eps fraction.  ``fit_extra`` additionally
    requires ``fit_extra + g`` inside the window (room for marker balls).
    """
    eps = Fraction(eps)
    if order is None:
        order = LexOrder()
    wset = window.as_set()
    warnings = []
    by_size = sorted(
        range(len(shapes.shapes)), key=lambda i: (-len(shapes.shapes[i]), i)
    )
    centers: dict = {}
    placement = []
    covered: set = set()
    l_occupied: set = set()
    cells_by_shape = {i: set() for i in range(len(shapes.shapes))}
    for i in by_size:
        shape = shapes.shapes[i]
        cands = []
        for g in sorted(wset):
            if all(add(s, g) in wset for s in shape) and (
                fit_extra is None or all(add(s, g) in wset for s in fit_extra)
            ):
                cands.append(g)
        if not cands:
            warnings.append(f"window too small for shape index {i}")
            continue
        for g in order.arrange(cands, i):
            if g in centers:
                continue
            if _insertable(shape, i, g, covered, cells_by_shape[i], l_occupied, L, eps):
                centers[g] = i
                placement.append(g)
                tile = {add(s, g) for s in shape}
                covered |= tile
                cells_by_shape[i] |= tile
                l_occupied |= {add(l, g) for l in L}
    t = QuasiTiling(shapes, centers, window, tuple(placement), tuple(warnings))
    if not is_separated(t.center_set(), L):
        raise RuntimeError("tiler produced non-L-separated centers (bug)")
    return t


def retract(t: QuasiTiling) -> Retraction:
    """Subtract earlier tiles per the placement order.

    Retracted tiles are pairwise disjoint and preserve the union of the
    original tiles.  Tiles retracted to nothing are dropped (and logged);
    in-regime parameters make this impossible.
    """
    order = t.placement_order or canonical_order(t.shape_set, t.centers)
    covered: set = set()
    tiles = {}
    dropped = []
    warnings = list(t.warnings)
    for c in order:
        shape = t.shape_set.shapes[t.centers[c]]
        cells = {add(s, c) for s in shape}
        kept = cells - covered
        covered |= cells
        if not kept:
            dropped.append(c)
            warnings.append(f"tile at {c} retracted to nothing; dropped")
            continue
        tiles[c] = subset({tuple(x - y for x, y in zip(cell, c)) for cell in kept}, dim=t.window.dim)
    return Retraction(
        tiles=tiles,
        window=t.window,
        warnings=tuple(warnings),
        base=t,
        dropped=tuple(dropped),
    )


# ---------------------------------------------------------------------------
# checks


@dataclass
class EpsDisjointReport:
    ok: bool
    eps: Fraction
    losses: dict  # center -> Fraction loss
    violators: tuple


def check_eps_disjoint(t: QuasiTiling, eps) -> EpsDisjointReport:
    """Per-center retraction loss |t(c) \\ ret(t)(c)| < eps |t(c)|."""
    eps = Fraction(eps)
    r = retract(t)
    losses = {}
    violators = []
    for c, i in sorted(t.centers.items()):
        size = len(t.shape_set.shapes[i])
        kept = len(r.tiles[c]) if c in r.tiles else 0
        loss = Fraction(size - kept, size)
        losses[c] = loss
        if loss >= eps:
            violators.append(c)
    return EpsDisjointReport(not violators, eps, losses, tuple(violators))


@dataclass
class CoveringReport:
    ok: bool
    fraction: Fraction
    rho: Fraction
    slack: Fraction


def _covered_fraction(tiling, eval_window: FiniteSubset) -> Fraction:
    cells = tiling.union_cells()
    return Fraction(len(cells & eval_window.as_set()), len(eval_window))


def _boundary_slack(union_shape: FiniteSubset, eval_window: FiniteSubset) -> Fraction:
    bnd, _ = boundary_interior(eval_window, union_shape)
    return Fraction(len(bnd), len(eval_window))


def check_covering(t: QuasiTiling, rho, eval_window: FiniteSubset) -> CoveringReport:
    """Covered fraction of the window against rho, minus boundary slack."""
    rho = Fraction(rho)
    frac = _covered_fraction(t, eval_window)
    slack = _boundary_slack(t.shape_set.union_shape(), eval_window)
    return CoveringReport(frac >= rho - slack, frac, rho, slack)


def check_retract_covering(
    t0: QuasiTiling, t1: Retraction, rho0, rho1, eval_window: FiniteSubset
) -> CoveringReport:
    """If t0 is rho0-covering and each retained tile keeps a rho1 fraction,
    the retraction must be rho0*rho1-covering (window form with slack)."""
    rho0, rho1 = Fraction(rho0), Fraction(rho1)
    for c, i in sorted(t0.centers.items()):
        size = len(t0.shape_set.shapes[i])
        kept = len(t1.tiles[c]) if c in t1.tiles else 0
        if Fraction(kept) < rho1 * size:
            raise PreconditionError(
                f"tile at {c} keeps {kept}/{size} < rho1 of its cells"
            )
    frac = _covered_fraction(t1, eval_window)
    slack = _boundary_slack(t0.shape_set.union_shape(), eval_window)
    return CoveringReport(frac >= rho0 * rho1 - slack, frac, rho0 * rho1, slack)


@dataclass
class UnionPreservationReport:
    ok: bool
    base_cells: int
    retract_cells: int


def check_union_preservation(t: QuasiTiling, r: Retraction) -> UnionPreservationReport:
    a = t.union_cells()
    b = r.union_cells()
    return UnionPreservationReport(a == b, len(a), len(b))


@dataclass
class MaximalityReport:
    ok: bool
    insertable: tuple  # [(shape index, center), ...]
    candidates_tested: int


def check_maximality(
    t: QuasiTiling, L: FiniteSubset, eps, fit_extra: FiniteSubset | None = None
) -> MaximalityReport:
    """Exhaustive insertion check: no additional tile of any shape fits at
    any window-interior center without breaking the placement guard."""
    eps = Fraction(eps)
    wset = t.window.as_set()
    covered = set(t.union_cells())
    l_occupied = {add(l, c) for c in t.centers for l in L}
    cells_by_shape = {i: set() for i in range(len(t.shape_set.shapes))}
    for c, i in t.centers.items():
        cells_by_shape[i] |= t.tile_cells(c)
    bad = []
    tested = 0
    for i, shape in enumerate(t.shape_set.shapes):
        for g in sorted(wset):
            if g in t.centers:
                continue
            if not all(add(s, g) in wset for s in shape):
                continue
            if fit_extra is not None and not all(add(s, g) in wset for s in fit_extra):
                continue
            tested += 1
            if _insertable(shape, i, g, covered, cells_by_shape[i], l_occupied, L, eps):
                bad.append((i, g))
    return MaximalityReport(not bad, tuple(bad), tested)


# ---------------------------------------------------------------------------
# starred retraction


@dataclass
class StarRetraction(TileFamily):
    base: Retraction = None
    pairs: tuple = ()  # (center, S1 shape, S1* shape)
    empty_centers: tuple = ()


def star_retract(
    t1: Retraction, C: FiniteSubset, m_ball: FiniteSubset, K: FiniteSubset
) -> StarRetraction:
    """Remove marker neighborhoods around all centers, then take the
    K^3-interior of what is left of each tile.

    ``m_ball`` is the already-expanded marker neighborhood (the sixth power
    of the marker shape in the embedding pipeline); it must be symmetric.
    """
    if not m_ball.is_symmetric():
        raise PreconditionError("marker neighborhood must be symmetric")
    k3 = power(K, 3)
    ball_cells = {add(m, c) for m in m_ball for c in C}
    tiles = {}
    pairs = []
    empty = []
    warnings = list(t1.warnings)
    for c, shape in t1.tile_items():
        kept_abs = {add(s, c) for s in shape} - ball_cells
        kept_rel = subset(
            {tuple(x - y for x, y in zip(cell, c)) for cell in kept_abs},
            dim=t1.window.dim,
        )
        if kept_rel:
            _, inner = boundary_interior(kept_rel, k3)
        else:
            inner = kept_rel
        pairs.append((c, shape, inner))
        if not inner:
            empty.append(c)
            warnings.append(f"starred tile at {c} is empty")
        tiles[c] = inner
    return StarRetraction(
        tiles=tiles,
        window=t1.window,
        warnings=tuple(warnings),
        base=t1,
        pairs=tuple(pairs),
        empty_centers=tuple(empty),
    )


# ---------------------------------------------------------------------------
# exactification


def b_subset(shape: FiniteSubset, eps) -> FiniteSubset:
    """The reserved growth cells B(S): lexicographically last ceil(2 eps |S|)
    cells, so B stays away from the tile origin where markers live."""
    eps = Fraction(eps)
    size = ceil(2 * eps * len(shape))
    if not Fraction(size) < 3 * eps * len(shape):
        raise PreconditionError(
            f"shape of size {len(shape)} too small for eps={eps}: "
            f"B would hold {size} >= 3*eps*|S| cells"
        )
    if size < 2 * eps * len(shape):
        raise PreconditionError("B undersized (bug)")
    return subset(shape.elements[-size:], dim=shape.dim)


@dataclass
class ExactTiling(TileFamily):
    matching: dict = field(default_factory=dict)  # uncovered cell -> (b cell, center)
    max_displacement: int = 0
    region: FiniteSubset = None


def exactify(t1: Retraction, eps, region: FiniteSubset | None = None) -> ExactTiling:
    """Extend disjoint tiles to a partition of the region.

    Every cell of the region not covered by a tile is matched injectively to
    a reserved B-cell of some tile (nearest tile first, lexicographic
    tie-break) and adopted by that tile.  Infeasible capacity raises
    :class:`DeficiencyError` with a deficiency witness.
    """
    eps = Fraction(eps)
    if region is None:
        region = t1.window
    items = t1.tile_items()
    cells_union = t1.union_cells()
    if len(cells_union) != sum(len(s) for _, s in items):
        raise PreconditionError("exactify requires a disjoint tiling")
    b_cache = {}
    b_cells = []  # (absolute cell, center)
    for c, shape in items:
        key = shape.elements
        if key not in b_cache:
            b_cache[key] = b_subset(shape, eps)
        for b in b_cache[key]:
            b_cells.append((add(b, c), c))
    uncovered = sorted(set(region.elements) - cells_union)
    if len(uncovered) > len(b_cells):
        raise DeficiencyError(len(uncovered), len(b_cells), tuple(uncovered[:10]))
    available = {bc: ctr for bc, ctr in b_cells}
    matching = {}
    adopted = {c: set() for c, _ in items}
    max_disp = 0
    for a in uncovered:
        best = None
        for bc, ctr in available.items():
            d = sum((x - y) ** 2 for x, y in zip(a, bc))
            cand = (d, bc, ctr)
            if best is None or cand < best:
                best = cand
        d, bc, ctr = best
        del available[bc]
        matching[a] = (bc, ctr)
        adopted[ctr].add(a)
        max_disp = max(max_disp, int(d ** 0.5) + 1)
    tiles = {}
    for c, shape in items:
        cells = {add(s, c) for s in shape} | adopted[c]
        tiles[c] = subset(
            {tuple(x - y for x, y in zip(cell, c)) for cell in cells},
            dim=t1.window.dim,
        )
    out = ExactTiling(
        tiles=tiles,
        window=t1.window,
        warnings=t1.warnings,
        matching=matching,
        max_displacement=max_disp,
        region=region,
    )
    _assert_exact(out, t1, region, eps, b_cache)
    return out


def _assert_exact(t2: ExactTiling, t1: Retraction, region, eps, b_cache):
    seen = set()
    for c, shape in t2.tile_items():
        cells = t2.tile_cells(c)
        if cells & seen:
            raise RuntimeError("exactified tiles overlap (bug)")
        seen |= cells
        base = t1.tiles[c]
        if not base.as_set() <= shape.as_set():
            raise RuntimeError("exactified tile lost cells (bug)")
        growth = len(shape) - len(base)
        if growth > len(b_cache[base.elements]):
            raise RuntimeError("tile grew past its B capacity (bug)")
    if not set(region.elements) <= seen:
        raise RuntimeError("exactified tiles fail to cover the region (bug)")
    if t2.tiles.keys() != t1.tiles.keys():
        raise RuntimeError("exactification changed the center set (bug)")


@dataclass
class ExactnessReport:
    ok: bool
    disjoint: bool
    covers: bool
    uncovered: tuple


def check_exact(t: TileFamily, region: FiniteSubset) -> ExactnessReport:
    seen = set()
    disjoint = True
    for c, _ in t.tile_items():
        cells = t.tile_cells(c)
        if cells & seen:
            disjoint = False
        seen |= cells
    missing = tuple(sorted(set(region.elements) - seen))
    return ExactnessReport(disjoint and not missing, disjoint, not missing, missing)
