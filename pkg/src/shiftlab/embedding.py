"""Parameter budgets, block injections, and the encoder/decoder pair.

The encoder derives a quasi-tiling from the input, retracts and exactifies
it, passes each tile's source pattern through an injective block code into
the target subsystem, dresses boundaries with mixing patterns, and stamps a
marker over each tile center.  The decoder scans for markers, rebuilds the
tilings deterministically from the recovered centers, and inverts the block
code tile by tile.

Worst-case budgets from the entropy gap are astronomically small, so the
machine also runs in direct-verification mode: the user picks the budget
and every hypothesis (count inequalities, shape conditions, disjointness)
is checked directly on the concrete instance.  Reports always carry the
mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .counting import spectral_entropy
from .groups import (
    FiniteSubset,
    PreconditionError,
    add,
    as_element,
    boundary_interior,
    neg,
    power,
    subset,
    sumset,
    zero,
)
from .markers import MarkerKit, occurrences
from .quasitiling import (
    ConfigHashOrder,
    QuasiTiling,
    ShapeSet,
    canonical_order,
    exactify,
    dh_tile,
    retract,
    star_retract,
)
from .subshift import (
    LOCAL,
    Configuration,
    Mode,
    NoSolutionError,
    Pattern,
    Sft,
    check_admissible,
    complete_lex_least,
    count_patterns,
    enumerate_patterns,
    entropy_estimate,
    resolve_mode,
)


class BudgetError(RuntimeError):
    """A direct-verification hypothesis failed on the concrete instance."""


class InjectionCountError(ValueError):
    """The strict count inequality for the block injection failed."""

    def __init__(self, source_count: int, target_count: int):
        super().__init__(
            f"block injection needs |source| < |target|, got "
            f"{source_count} >= {target_count}"
        )
        self.source_count = source_count
        self.target_count = target_count


# ---------------------------------------------------------------------------
# budgets


@dataclass(frozen=True)
class ParameterBudget:
    eps: Fraction
    r: int
    eps_bound: float
    mode: str  # "worst-case" | "direct-verification"
    shrink_ok: bool  # (1 - eps/2)^r < eps
    notes: tuple = ()

    def check_marker_ball(self, m6_size: int, l_size: int) -> bool:
        return Fraction(m6_size, l_size) < self.eps


def compute_budget(
    h_x: float,
    h_y0: float,
    alph_x_size: int,
    alph_y_size: int,
    k_size: int,
    eps=None,
) -> ParameterBudget:
    """Worst-case budget from the entropy gap, or a user-chosen one.

    The bound is (h(Y0) - h(X)) / (2 + 5 ln|A_X| + (5 + 4|K|^6) ln|A_Y|);
    r = 1 + ceil((2/eps) ln(1/eps)), which forces (1 - eps/2)^r < eps.
    A user eps above the bound flips the budget to direct-verification mode.
    """
    if not h_x < h_y0:
        raise PreconditionError("budget requires h(X) < h(Y0)")
    denom = 2 + 5 * math.log(alph_x_size) + (5 + 4 * k_size**6) * math.log(alph_y_size)
    bound = (h_y0 - h_x) / denom
    notes = []
    if eps is None:
        eps = Fraction(bound).limit_denominator(10**12) / 2
        mode = "worst-case"
    else:
        eps = Fraction(eps)
        if float(eps) <= bound:
            mode = "worst-case"
        else:
            mode = "direct-verification"
            notes.append("user eps exceeds the worst-case bound; direct checks required")
    if not eps < Fraction(1, 3):
        raise PreconditionError("eps must be < 1/3")
    r = 1 + math.ceil((2 / float(eps)) * math.log(1 / float(eps)))
    shrink_ok = (1 - float(eps) / 2) ** r < float(eps)
    return ParameterBudget(eps, r, bound, mode, shrink_ok, tuple(notes))


@dataclass
class ShapeReport:
    ok: bool
    results: dict
    failures: tuple
    numbers: dict
    mode_tags: dict


def validate_shape_conditions(
    S0: FiniteSubset,
    budget: ParameterBudget,
    K: FiniteSubset,
    M: FiniteSubset,
    L: FiniteSubset,
    X: Sft,
    Y0: Sft,
    h_x: float | None = None,
    h_y0: float | None = None,
) -> ShapeReport:
    """Tile-shape conditions for the embedding, checked exactly.

    S1: 1/|S0| < eps (1 - eps).
    S2: (|K^3| |M^6| |L|) |L S0 \\ S0| < eps |S0|.
    S3: h(S0, X) < h(X) + eps and h(S0, Y0) > h(Y0) - eps.
    """
    eps = budget.eps
    res, nums, tags = {}, {}, {}
    res["S1"] = Fraction(1, len(S0)) < eps * (1 - eps)
    nums["S1"] = (Fraction(1, len(S0)), eps * (1 - eps))
    k3 = len(power(K, 3))
    m6 = len(power(M, 6))
    growth = len(sumset(L, S0).as_set() - S0.as_set())
    lhs = k3 * m6 * len(L) * growth
    res["S2"] = Fraction(lhs) < eps * len(S0)
    nums["S2"] = (lhs, eps * len(S0))
    est_x = entropy_estimate(X, S0)
    est_y = entropy_estimate(Y0, S0)
    tags["h(S0,X)"] = est_x.mode
    tags["h(S0,Y0)"] = est_y.mode
    if h_x is None:
        h_x = spectral_entropy(X)
        tags["h(X)"] = "transfer-spectral"
    if h_y0 is None:
        h_y0 = spectral_entropy(Y0)
        tags["h(Y0)"] = "transfer-spectral"
    res["S3"] = (est_x.h < h_x + float(eps)) and (est_y.h > h_y0 - float(eps))
    nums["S3"] = (est_x.h, h_x, est_y.h, h_y0)
    failures = tuple(k for k, v in res.items() if not v)
    return ShapeReport(not failures, res, failures, nums, tags)


# ---------------------------------------------------------------------------
# rank/unrank over finite 1-d shapes


class NotInEnumeration(ValueError):
    pass


class _ShapeRanker:
    """Lexicographic rank/unrank of locally admissible patterns on a finite
    1-d shape (cells need not be contiguous).

    Agrees cell-for-cell with the depth-first enumerator's order, so the
    i-th ranked pattern is the i-th enumerated one.
    """

    def __init__(self, sft: Sft, shape: FiniteSubset):
        if sft.dim != 1:
            raise ValueError("ranker requires a 1-d SFT")
        self.sft = sft
        self.shape = shape
        self.cells = [c[0] for c in shape.elements]
        self.alph = len(sft.alphabet)
        self.index_map = sft.alphabet.index_map
        self.symbols = sft.alphabet.symbols
        k = len(self.cells)
        width = 1
        rel = []
        sym = self.index_map
        for p in sft.forbidden:
            pc = sorted(c[0] for c in p.shape)
            width = max(width, pc[-1] - pc[0] + 1)
            rel.append((tuple(pc), tuple(sym[p.labels[(c,)]] for c in pc)))
        self.lookback = width - 1
        cellset = set(self.cells)
        cell_pos = {c: i for i, c in enumerate(self.cells)}
        # context cells per step: shape cells within the lookback window
        self.ctx = []
        for i, c in enumerate(self.cells):
            self.ctx.append(
                tuple(j for j in range(i) if c - self.cells[j] <= self.lookback)
            )
        # clauses ending at each step, expressed over (context slot | current)
        self.clauses = [[] for _ in range(k)]
        for pc, labs in rel:
            span = pc[-1] - pc[0]
            for i, c in enumerate(self.cells):
                offset = c - pc[-1]
                cells_here = [p + offset for p in pc]
                if any(cc not in cellset for cc in cells_here):
                    continue
                slots = []
                ok = True
                for cc, lab in zip(cells_here, labs):
                    j = cell_pos[cc]
                    if j == i:
                        slots.append(("cur", lab))
                    elif j in self.ctx[i]:
                        slots.append((self.ctx[i].index(j), lab))
                    else:  # pragma: no cover - lookback covers the span
                        ok = False
                        break
                if ok:
                    self.clauses[i].append(tuple(slots))
        # next-state projection: which of (ctx[i] + current) survive into ctx[i+1]
        self.carry = []
        for i in range(k):
            nxt = self.ctx[i + 1] if i + 1 < k else ()
            mapping = []
            for j in nxt:
                if j == i:
                    mapping.append(-1)  # the symbol just placed
                else:
                    mapping.append(self.ctx[i].index(j))
            self.carry.append(tuple(mapping))
        self._memo: dict = {}

    def _ok(self, i: int, state: tuple, a: int) -> bool:
        for clause in self.clauses[i]:
            hit = True
            for slot, lab in clause:
                cur = a if slot == "cur" else state[slot]
                if cur != lab:
                    hit = False
                    break
            if hit:
                return False
        return True

    def _next(self, i: int, state: tuple, a: int) -> tuple:
        return tuple(a if m == -1 else state[m] for m in self.carry[i])

    def completions(self, i: int, state: tuple) -> int:
        if i == len(self.cells):
            return 1
        key = (i, state)
        got = self._memo.get(key)
        if got is not None:
            return got
        total = 0
        for a in range(self.alph):
            if self._ok(i, state, a):
                total += self.completions(i + 1, self._next(i, state, a))
        self._memo[key] = total
        return total

    def count(self) -> int:
        return self.completions(0, ())

    def rank(self, pattern: Pattern) -> int:
        if pattern.shape.elements != self.shape.elements:
            raise NotInEnumeration("shape mismatch")
        labels = [self.index_map[pattern.labels[c]] for c in self.shape]
        state = ()
        r = 0
        for i, lab in enumerate(labels):
            for a in range(lab):
                if self._ok(i, state, a):
                    r += self.completions(i + 1, self._next(i, state, a))
            if not self._ok(i, state, lab):
                raise NotInEnumeration(f"pattern violates constraints at step {i}")
            state = self._next(i, state, lab)
        return r

    def unrank(self, r: int) -> Pattern:
        if r < 0 or r >= self.count():
            raise NotInEnumeration(f"rank {r} out of range")
        state = ()
        out = []
        for i in range(len(self.cells)):
            for a in range(self.alph):
                if not self._ok(i, state, a):
                    continue
                sub = self.completions(i + 1, self._next(i, state, a))
                if r < sub:
                    out.append(a)
                    state = self._next(i, state, a)
                    break
                r -= sub
            else:  # pragma: no cover - count() bounds r
                raise NotInEnumeration("unrank walked off the tree")
        labels = {c: self.symbols[a] for c, a in zip(self.shape, out)}
        return Pattern(self.shape, labels)


# ---------------------------------------------------------------------------
# block injections


@dataclass
class BlockInjection:
    """Injective lexicographic pairing of source patterns into target
    patterns: the i-th source pattern maps to the i-th target pattern."""

    source_sft: Sft
    target_sft: Sft
    source_shape: FiniteSubset
    target_shape: FiniteSubset
    source_count: int
    target_count: int
    mode: str

    def apply(self, p: Pattern) -> Pattern:
        raise NotImplementedError

    def invert(self, q: Pattern) -> Pattern | None:
        raise NotImplementedError


class TableBlockInjection(BlockInjection):
    def __init__(self, source_sft, target_sft, source_shape, target_shape, mode, cap):
        emode = resolve_mode(source_sft, mode)
        src = enumerate_patterns(source_sft, source_shape, emode, cap)
        tgt = enumerate_patterns(target_sft, target_shape, resolve_mode(target_sft, mode), cap)
        if not len(src) < len(tgt):
            raise InjectionCountError(len(src), len(tgt))
        super().__init__(
            source_sft,
            target_sft,
            source_shape,
            target_shape,
            len(src),
            len(tgt),
            f"table[{emode.tag}]",
        )
        self.rows = list(zip(src, tgt[: len(src)]))
        self._fwd = {p.key(): q for p, q in self.rows}
        self._bwd = {q.key(): p for p, q in self.rows}

    def apply(self, p: Pattern) -> Pattern:
        try:
            return self._fwd[p.key()]
        except KeyError:
            raise NotInEnumeration("source pattern not in table") from None

    def invert(self, q: Pattern) -> Pattern | None:
        return self._bwd.get(q.key())


class RankedBlockInjection(BlockInjection):
    """Same pairing computed lazily by rank/unrank; scales to shapes whose
    enumerations cannot be materialized."""

    def __init__(self, source_sft, target_sft, source_shape, target_shape):
        self._src = _ShapeRanker(source_sft, source_shape)
        self._tgt = _ShapeRanker(target_sft, target_shape)
        ns, nt = self._src.count(), self._tgt.count()
        if not ns < nt:
            raise InjectionCountError(ns, nt)
        super().__init__(
            source_sft,
            target_sft,
            source_shape,
            target_shape,
            ns,
            nt,
            "ranked[locally_admissible]",
        )

    def apply(self, p: Pattern) -> Pattern:
        return self._tgt.unrank(self._src.rank(p))

    def invert(self, q: Pattern) -> Pattern | None:
        try:
            r = self._tgt.rank(q)
        except NotInEnumeration:
            return None
        if r >= self.source_count:
            return None
        return self._src.unrank(r)


def build_block_injection(
    X: Sft,
    Y0: Sft,
    S2: FiniteSubset,
    S1_star: FiniteSubset,
    mode=None,
    cap: int = 2_000_000,
) -> TableBlockInjection:
    """Materialized injection table from P(S2, X) into P(S1*, Y0).

    Verifies the strict count inequality and pairs patterns
    lexicographically; an equality or reversal raises
    :class:`InjectionCountError` carrying both counts.
    """
    return TableBlockInjection(X, Y0, S2, S1_star, mode, cap)


# ---------------------------------------------------------------------------
# block maps (the assumed homomorphism)


@dataclass
class BlockMap:
    """Sliding block code given by a local rule on a finite window."""

    window: FiniteSubset
    rule: dict  # label tuple over the window order -> output symbol

    def apply(self, x: Configuration) -> Configuration:
        cells = []
        wset = x.window.as_set()
        for g in x.window:
            if all(add(c, g) in wset for c in self.window):
                cells.append(g)
        labels = {}
        for g in cells:
            key = tuple(x.labels[add(c, g)] for c in self.window)
            labels[g] = self.rule[key]
        return Configuration(subset(cells, dim=x.window.dim), labels)


def one_block_map(symbol_map: dict, dim: int = 1) -> BlockMap:
    window = subset([zero(dim)], dim=dim)
    return BlockMap(window, {(k,): v for k, v in symbol_map.items()})


# ---------------------------------------------------------------------------
# the machine


@dataclass
class EncodeResult:
    y: Configuration
    trace: dict


@dataclass
class DecodeResult:
    x: Configuration | None
    t0: QuasiTiling | None
    report: dict


class EmbeddingMachine:
    """Bundles the systems, marker kit, shapes, and caches of the encoder.

    Runs in direct-verification mode: all block-injection inequalities,
    tuple hypotheses, and disjointness requirements are checked on the
    concrete window, and failures raise :class:`BudgetError` diagnostics.
    """

    def __init__(
        self,
        X: Sft,
        Y: Sft,
        Y1: Sft,
        Y0: Sft,
        kit: MarkerKit,
        shapes: ShapeSet,
        K: FiniteSubset,
        L: FiniteSubset,
        eps,
        phi: BlockMap,
        order_radius: int = 2,
        order_jitter: int = 6,
        injection_mode: str = "auto",
        table_cap: int = 4096,
        check_level: str = "full",
    ):
        if not (Y.alphabet.symbols == Y1.alphabet.symbols == Y0.alphabet.symbols):
            raise PreconditionError("Y, Y1, Y0 must share an alphabet")
        self.X, self.Y, self.Y1, self.Y0 = X, Y, Y1, Y0
        self.kit = kit
        self.shapes = shapes
        self.K = K
        self.L = L
        self.eps = Fraction(eps)
        if not self.eps < Fraction(1, 3):
            raise PreconditionError("eps must be < 1/3")
        self.phi = phi
        self.order_radius = order_radius
        self.order_jitter = order_jitter
        self.injection_mode = injection_mode
        self.table_cap = table_cap
        self.check_level = check_level
        M = kit.shape
        if not M.is_symmetric():
            raise PreconditionError("marker shape must be symmetric")
        if not K.as_set() <= M.as_set():
            raise PreconditionError("K must lie inside the marker shape")
        if len(kit.markers) < len(shapes.shapes):
            raise PreconditionError("need one marker per tile shape")
        self.M = M
        self.m3 = power(M, 3)
        self.m6 = power(M, 6)
        k2 = power(K, 2)
        # the substrate patch written around each center, with its collar
        self.m6_collar, _ = boundary_interior(self.m6, k2)
        if self.m6_collar.as_set() & self.m3.as_set():
            raise PreconditionError("marker ball too small: collar meets M^3")
        for cfg in (kit.substrate, *kit.carriers):
            if not self.m3.as_set() <= cfg.window.as_set():
                raise PreconditionError("kit window must contain M^3")
        self._sub_m3 = kit.substrate.restrict(self.m3)
        self._mix_cache: dict = {}
        self._injections: dict = {}
        self._rankers: dict = {}

    # -- caches ------------------------------------------------------------

    def _mix(self, shape: FiniteSubset, interior: Pattern, collar: Pattern) -> Pattern:
        """The fixed mixing pattern u (cup) boundary-v on the given shape."""
        key = (shape.elements, interior.key(), collar.shape.elements, collar.key())
        got = self._mix_cache.get(key)
        if got is not None:
            return got
        pins = dict(interior.labels)
        for c, s in collar.labels.items():
            if c in pins and pins[c] != s:
                raise BudgetError("mixing interior and collar overlap inconsistently")
            pins[c] = s
        try:
            cfg = complete_lex_least(self.Y0, shape, pins)
        except NoSolutionError as exc:
            raise BudgetError(f"no mixing pattern on shape of size {len(shape)}: {exc}") from exc
        w = cfg.restrict(shape)
        self._mix_cache[key] = w
        return w

    def injection(self, S2: FiniteSubset, S1_star: FiniteSubset) -> BlockInjection:
        key = (S2.elements, S1_star.elements)
        got = self._injections.get(key)
        if got is not None:
            return got
        mode = self.injection_mode
        if mode == "auto":
            probe = RankedBlockInjection(self.X, self.Y0, S2, S1_star)
            inj = probe
            if probe.source_count <= self.table_cap and probe.target_count <= self.table_cap:
                inj = TableBlockInjection(self.X, self.Y0, S2, S1_star, LOCAL, self.table_cap + 1)
        elif mode == "ranked":
            inj = RankedBlockInjection(self.X, self.Y0, S2, S1_star)
        elif mode == "table":
            inj = TableBlockInjection(self.X, self.Y0, S2, S1_star, LOCAL, self.table_cap + 1)
        else:
            raise ValueError(f"unknown injection mode {mode!r}")
        self._injections[key] = inj
        return inj

    # -- pipeline stages ---------------------------------------------------

    def derive_tilings(self, t0: QuasiTiling):
        """t1, t2, t1*, and the evaluation region, all determined by t0."""
        t1 = retract(t0)
        if t1.dropped:
            raise BudgetError(f"retraction dropped tiles at {t1.dropped}")
        cells = t1.union_cells()
        region = _hull_box(cells, t0.window.dim)
        t2 = exactify(t1, self.eps, region)
        tstar = star_retract(t1, t1.center_set(), self.m6, self.K)
        if tstar.empty_centers:
            raise BudgetError(f"empty starred tiles at {tstar.empty_centers}")
        return t1, t2, tstar, region

    def _check_tuple(self, c, S0, S1, S2, S1s):
        eps = self.eps
        if not (S1s.as_set() <= S1.as_set() <= (S0.as_set() & S2.as_set())):
            raise BudgetError(f"tuple nesting violated at center {c}")
        if not Fraction(len(S0) - len(S1)) < eps * len(S0):
            raise BudgetError(f"|S0 \\ S1| >= eps|S0| at center {c}")
        if not Fraction(len(S2) - len(S1)) < 3 * eps * len(S1):
            raise BudgetError(f"|S2 \\ S1| >= 3 eps |S1| at center {c}")

    def encode(self, x: Configuration) -> EncodeResult:
        rep = check_admissible(self.X, x)
        if not rep.ok:
            raise PreconditionError(f"input not locally admissible at {rep.anchor}")
        y0 = self.phi.apply(x)
        rep = check_admissible(self.Y0, y0)
        if not rep.ok:
            raise BudgetError(f"block-map image leaves the target subsystem at {rep.anchor}")
        W = y0.window
        order = ConfigHashOrder(x, self.order_radius, self.order_jitter)
        fit = subset(self.m6.as_set() | {zero(W.dim)}, dim=W.dim)
        t0 = dh_tile(self.shapes, self.L, W, self.eps, order, fit_extra=fit)
        trace = {
            "order": order.label,
            "order_radius": self.order_radius,
            "order_jitter": self.order_jitter,
            "eps": str(self.eps),
            "window": _spans_of(W),
            "mode": "direct-verification",
            "centers": [],
            "injections": {},
        }
        if not t0.centers:
            trace["note"] = "no tiles placed; output is the block-map image"
            return EncodeResult(y0, trace)
        self._check_marker_balls(t0)
        t1, t2, tstar, region = self.derive_tilings(t0)
        trace["region"] = _spans_of(region)
        trace["collar_cells"] = len(W) - len(region)
        trace["max_displacement"] = t2.max_displacement

        labels = dict(y0.labels)
        writers: dict = {}
        ball_cells_all = {
            add(m, c) for m in self.m6 for c in t0.centers
        }
        for c in sorted(t0.centers):
            i = t0.centers[c]
            S0 = self.shapes.shapes[i]
            S1 = t1.tiles[c]
            S2 = t2.tiles[c]
            S1s = tstar.tiles[c]
            self._check_tuple(c, S0, S1, S2, S1s)
            inj = self.injection(S2, S1s)
            trace["injections"][str(c)] = {
                "source_count": str(inj.source_count),
                "target_count": str(inj.target_count),
                "mode": inj.mode,
            }
            # condition (C1): substrate patch plus boundary collar on M^6 c
            v1 = y0.pattern_at(self.m6_collar, c)
            w1 = self._mix(self.m6, self._sub_m3, v1)
            _write(labels, writers, w1, c, ("C1", c))
            # condition (C2): injected block plus collar on the tile minus
            # all marker balls
            r_rel_cells = {
                tuple(a - b for a, b in zip(cell, c))
                for cell in (t1.tile_cells(c) - ball_cells_all)
            }
            R = subset(r_rel_cells, dim=W.dim)
            collar2, _ = boundary_interior(R, power(self.K, 2))
            if collar2.as_set() & S1s.as_set():
                raise BudgetError(f"starred tile meets its collar at {c}")
            u2 = inj.apply(x.pattern_at(S2, c))
            v2 = y0.pattern_at(collar2, c)
            w2 = self._mix(R, u2, v2)
            _write(labels, writers, w2, c, ("C2", c))
            trace["centers"].append({"center": list(c), "shape_index": i})
        y1_cfg = Configuration(W, labels)
        if self.check_level == "full":
            rep = check_admissible(self.Y1, y1_cfg)
            if not rep.ok:
                raise RuntimeError(f"pre-marker output leaves Y1 at {rep.anchor} (bug)")
        # markers over every center
        for c in sorted(t0.centers):
            i = t0.centers[c]
            marker = self.kit.markers[i]
            for m, s in marker.labels.items():
                cell = add(m, c)
                if writers.get(cell, (None,))[0] != "C1":
                    raise RuntimeError("marker cell outside its substrate patch (bug)")
                labels[cell] = s
        y = Configuration(W, labels)
        if self.check_level == "full":
            rep = check_admissible(self.Y, y)
            if not rep.ok:
                raise RuntimeError(f"encoder output leaves Y at {rep.anchor} (bug)")
            self._check_y1_property(y, t0)
        return EncodeResult(y, trace)

    def _check_marker_balls(self, t0: QuasiTiling):
        seen: dict = {}
        for c in t0.centers:
            for m in self.m6:
                cell = add(m, c)
                if cell in seen:
                    raise BudgetError(
                        f"marker balls of centers {seen[cell]} and {c} overlap"
                    )
                seen[cell] = c

    def _check_y1_property(self, y: Configuration, t0: QuasiTiling):
        """Property: around every center the output shows the carrier's
        M^3 patch exactly."""
        for c, i in t0.centers.items():
            got = y.pattern_at(self.m3, c)
            want = self.kit.carriers[i].restrict(self.m3)
            if got.key() != want.key():
                raise RuntimeError(f"carrier patch mismatch at center {c} (bug)")

    def decode(self, y: Configuration) -> DecodeResult:
        hits = self.scan_markers(y)
        report = {"marker_hits": len(hits), "misses": [], "ambiguous": False}
        if not hits:
            report["note"] = "no marker occurrences; nothing to recover"
            return DecodeResult(None, None, report)
        seen: dict = {}
        for g, _ in hits.items():
            for m in self.m6:
                cell = add(m, g)
                if cell in seen:
                    report["ambiguous"] = True
                    report["conflict"] = [list(seen[cell]), list(g)]
                    return DecodeResult(None, None, report)
                seen[cell] = g
        t0 = QuasiTiling(self.shapes, hits, y.window)
        t1, t2, tstar, region = self.derive_tilings(t0)
        labels = {}
        for c in sorted(t0.centers):
            S2 = t2.tiles[c]
            S1s = tstar.tiles[c]
            inj = self.injection(S2, S1s)
            u = y.pattern_at(S1s, c)
            p = inj.invert(u)
            if p is None:
                report["misses"].append(list(c))
                continue
            for s in S2:
                labels[add(s, c)] = p.labels[s]
        x = Configuration(subset(labels.keys(), dim=y.window.dim), labels)
        return DecodeResult(x, t0, report)

    def scan_markers(self, y: Configuration) -> dict:
        """Marker occurrences with full translates inside the window:
        center -> shape index."""
        wset = y.window.as_set()
        scan_cells = [
            g for g in y.window if all(add(m, g) in wset for m in self.M)
        ]
        scan = subset(scan_cells, dim=y.window.dim)
        hits: dict = {}
        for i, marker in enumerate(self.kit.markers[: len(self.shapes.shapes)]):
            for g in occurrences(y, marker, scan):
                if g in hits:
                    raise RuntimeError("one cell matched two markers (bug)")
                hits[g] = i
        return hits

    def verify_injectivity(self, samples: list) -> dict:
        """Round-trip each sample and check pairwise that equal encodings
        force equal restrictions on the covered region."""
        encoded = []
        roundtrips = 0
        failures = []
        for idx, x in enumerate(samples):
            res = self.encode(x)
            dec = self.decode(res.y)
            ok = True
            if dec.x is not None:
                for cell in dec.x.window:
                    if dec.x.labels[cell] != x.labels[cell]:
                        ok = False
                        failures.append(("roundtrip-mismatch", idx, cell))
                        break
                if dec.report["misses"]:
                    ok = False
                    failures.append(("inversion-miss", idx, tuple(dec.report["misses"][0])))
            elif self._has_centers(x):
                ok = False
                failures.append(("no-recovery", idx, None))
            if ok:
                roundtrips += 1
            encoded.append((x, res.y, dec))
        pairwise_ok = True
        for i in range(len(encoded)):
            for j in range(i + 1, len(encoded)):
                xi, yi, di = encoded[i]
                xj, yj, dj = encoded[j]
                if yi == yj and di.x is not None:
                    for cell in di.x.window:
                        if xi.labels.get(cell) != xj.labels.get(cell):
                            pairwise_ok = False
                            failures.append(("collision", (i, j), cell))
        return {
            "samples": len(samples),
            "roundtrips_ok": roundtrips,
            "pairwise_ok": pairwise_ok,
            "failures": failures,
            "ok": roundtrips == len(samples) and pairwise_ok,
        }

    def _has_centers(self, x: Configuration) -> bool:
        y0 = self.phi.apply(x)
        order = ConfigHashOrder(x, self.order_radius, self.order_jitter)
        fit = subset(self.m6.as_set() | {zero(y0.window.dim)}, dim=y0.window.dim)
        t0 = dh_tile(self.shapes, self.L, y0.window, self.eps, order, fit_extra=fit)
        return bool(t0.centers)


def _write(labels: dict, writers: dict, pattern: Pattern, at, tag):
    at = as_element(at)
    for c, s in pattern.labels.items():
        cell = add(c, at)
        if cell in writers:
            raise RuntimeError(
                f"well-definedness violation: {cell} written by {writers[cell]} and {tag}"
            )
        writers[cell] = tag
        labels[cell] = s


def _hull_box(cells, dim: int) -> FiniteSubset:
    los = [min(c[i] for c in cells) for i in range(dim)]
    his = [max(c[i] for c in cells) for i in range(dim)]
    if dim == 1:
        return subset([(i,) for i in range(los[0], his[0] + 1)])
    from itertools import product as _iproduct

    return subset(
        _iproduct(*[range(lo, hi + 1) for lo, hi in zip(los, his)]), dim=dim
    )


def _spans_of(W: FiniteSubset):
    return [list(span) for span in W.hull()]
